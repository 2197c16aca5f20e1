"""
Section grids, synthetic data and training-set assembly.
"""
from inversion.geodata.dataset import (
    Norm,
    TrainingSample,
    WellDataset,
    build_dataset,
    extract_patch,
    hflip,
    normalize_apply,
    normalize_fit,
    patch_columns,
    sample_wells,
)
from inversion.geodata.grid import (
    GridKind,
    SectionGrid,
    decode_grid,
    encode_grid,
    read_grid,
    write_grid,
)
from inversion.geodata.synthetic import (
    forward_model,
    impedance_from_density_velocity,
    reflectivity,
    ricker,
    synth_earth,
    synthesize,
)
