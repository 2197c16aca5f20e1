"""
Inversion Service Unit Test Suite.

Test cases can be run with the following:
  pytest -v --cov=inversion --cov-report=term-missing --cov-branch
"""
import json

import numpy as np
import pytest

from inversion.common.emitters import read_csv
from inversion.configs import RunConfig
from inversion.errors import (
    ConfigError,
    DataError,
    GridFormatError,
    SegyError,
    WellIndexError,
)
from inversion.geodata.grid import GridKind, read_grid
from inversion.services import (
    InversionService,
    apply_cli_overrides,
    load_run_config,
)
from tests import TEST_SEED, make_segy


@pytest.fixture(name='service')
def service_fixture(run_config_dict):
    """A service over the small tcn1d run configuration."""
    return InversionService(RunConfig.model_validate(run_config_dict))


######################################################################
#  CONFIGURATION
######################################################################
class TestLoadRunConfig:
    """The load_run_config Function Tests."""

    def test_defaults(self):
        """It should return the defaults without a path."""
        assert load_run_config(None) == RunConfig()

    def test_file(self, config_file):
        """It should parse a JSON run configuration."""
        config = load_run_config(config_file)
        assert config.model.variant == 'tcn1d'
        assert config.synth.n == 24

    def test_missing(self, tmp_path):
        """It should raise ConfigError for a missing file."""
        with pytest.raises(ConfigError, match='not found'):
            load_run_config(tmp_path / 'absent.json')

    def test_not_json(self, tmp_path):
        """It should raise ConfigError for malformed JSON."""
        path = tmp_path / 'cfg.json'
        path.write_text('{"train": ')
        with pytest.raises(ConfigError, match='not valid JSON'):
            load_run_config(path)

    def test_not_object(self, tmp_path):
        """It should raise ConfigError for a JSON array."""
        path = tmp_path / 'cfg.json'
        path.write_text('[1, 2]')
        with pytest.raises(ConfigError, match='JSON object'):
            load_run_config(path)


class TestApplyCliOverrides:
    """The apply_cli_overrides Function Tests."""

    def test_no_overrides(self):
        """It should return the same configuration."""
        config = RunConfig()
        assert apply_cli_overrides(config) is config

    def test_seed(self):
        """It should set both the synthetic and the training seed."""
        config = apply_cli_overrides(RunConfig(), seed=5)
        assert config.synth.seed == 5
        assert config.train.seed == 5

    def test_variant(self):
        """It should switch variants and re-apply the baseline width rule."""
        config = apply_cli_overrides(RunConfig(), variant='lstm')
        assert config.model.variant == 'lstm'
        assert config.model.patch_width == 1

    def test_baseline_to_proposed(self):
        """It should restore the 2-D patch width and kernel when leaving a baseline."""
        baseline = RunConfig.model_validate({'model': {'variant': 'tcn1d'}})
        assert baseline.model.kernel == (5, 1)
        config = apply_cli_overrides(baseline, variant='proposed2d')
        assert config.model.variant == 'proposed2d'
        assert config.model.patch_width == 7
        assert config.model.kernel == (5, 3)

    def test_proposed_keeps_custom_width(self):
        """It should keep a proposed2d config's own patch width and kernel."""
        config = RunConfig.model_validate({
            'model': {'variant': 'proposed2d', 'patch_width': 5, 'kernel': [3, 3]}
        })
        assert apply_cli_overrides(config, variant='proposed2d').model.patch_width == 5
        assert apply_cli_overrides(config, variant='proposed2d').model.kernel == (3, 3)

    def test_baseline_to_proposed_invalid_channels(self):
        """It should raise ConfigError when the baseline blocks cannot feed the 2-D heads."""
        baseline = RunConfig.model_validate({
            'model': {'variant': 'tcn1d', 'block_channels': [4, 8], 'dilations': [1, 2]}
        })
        with pytest.raises(ConfigError, match='block_channels'):
            apply_cli_overrides(baseline, variant='proposed2d')


######################################################################
#  SERVICE
######################################################################
class TestInversionService:
    """The InversionService Class Tests."""

    def test_requires_config(self):
        """It should refuse to start without a configuration."""
        with pytest.raises(ConfigError):
            InversionService(None)

    def test_synthesize(self, service, tmp_path):
        """It should write grids, wells, images and the run configuration."""
        out = tmp_path / 'data'
        data = service.synthesize(out)
        for name in ('ai.sgrd', 'seismic.sgrd', 'wells.csv', 'ai.pgm',
                     'seismic.pgm', 'run_config.json'):
            assert (out / name).is_file(), name
        assert data.wells == list(range(0, 24, 4))
        rows = read_csv(out / 'wells.csv')
        assert [int(r['column']) for r in rows] == data.wells
        assert float(rows[1]['x_m']) == 500.0
        assert read_grid(out / 'ai.sgrd').kind is GridKind.IMPEDANCE
        echoed = json.loads((out / 'run_config.json').read_text())
        assert echoed['synth']['seed'] == TEST_SEED

    def test_synthesize_deterministic(self, service, tmp_path):
        """It should write identical grids for the same seed."""
        service.synthesize(tmp_path / 'a')
        service.synthesize(tmp_path / 'b')
        for name in ('ai.sgrd', 'seismic.sgrd'):
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()

    def test_load_data(self, service, data_dir):
        """It should read the grids and the listed wells."""
        data = service.load_data(data_dir)
        assert data.ai.shape == data.seismic.shape == (16, 24)
        assert data.wells == [0, 4, 8, 12, 16, 20]

    def test_load_data_samples_wells(self, service, data_dir):
        """It should sample wells from the spacing when wells.csv is absent."""
        (data_dir / 'wells.csv').unlink()
        assert service.load_data(data_dir).wells == [0, 4, 8, 12, 16, 20]

    def test_load_data_without_ai(self, service, data_dir):
        """It should allow a missing impedance grid for prediction."""
        (data_dir / 'ai.sgrd').unlink()
        assert service.load_data(data_dir, require_ai=False).ai is None
        with pytest.raises(GridFormatError):
            service.load_data(data_dir)

    def test_load_data_bad_wells(self, service, data_dir):
        """It should reject wells outside the section or malformed rows."""
        (data_dir / 'wells.csv').write_text('well,column,x_m\n0,30,3750.0\n')
        with pytest.raises(WellIndexError):
            service.load_data(data_dir)
        (data_dir / 'wells.csv').write_text('well,column,x_m\n0,abc,0.0\n')
        with pytest.raises(DataError):
            service.load_data(data_dir)

    def test_train_and_predict(self, service, data_dir, tmp_path):
        """It should checkpoint, then predict a positive section of the same size."""
        trained = service.train(data_dir, tmp_path / 'ckpt')
        assert len(trained.history) == 2
        assert (tmp_path / 'ckpt' / 'run_config.json').is_file()
        predicted = service.predict(tmp_path / 'ckpt', data_dir, tmp_path / 'pred', [3, 10])
        assert predicted.shape == (16, 24)
        assert np.all(predicted.values > 0)
        rows = read_csv(tmp_path / 'pred' / 'traces.csv')
        assert len(rows) == 2 * 16
        assert (tmp_path / 'pred' / 'predicted.pgm').is_file()

    def test_evaluate(self, service, data_dir, tmp_path):
        """It should write a report with held-out metrics and trace rows."""
        service.train(data_dir, tmp_path / 'ckpt')
        report_path = tmp_path / 'eval' / 'report.json'
        report = service.evaluate(tmp_path / 'ckpt', data_dir, report_path, [5])
        document = json.loads(report_path.read_text())
        assert document['variant'] == 'tcn1d'
        assert document['n_traces'] + document['excluded_traces'] == 24
        assert report.held_out.n_traces + report.held_out.excluded_traces == 18
        assert len(read_csv(tmp_path / 'eval' / 'report_traces.csv')) == 16


class TestConvertSegy:
    """The convert_segy Method Tests."""

    @pytest.mark.parametrize('arguments', [
        {},
        {'input_path': 'line.sgy', 'density_path': 'rho.sgy', 'velocity_path': 'vp.sgy'},
        {'density_path': 'rho.sgy'},
        {'input_path': 'line.sgy', 'velocity_path': 'vp.sgy'},
    ])
    def test_bad_combinations(self, tmp_path, arguments):
        """It should need exactly one of --input or the density/velocity pair."""
        with pytest.raises(ConfigError):
            InversionService.convert_segy(tmp_path / 'out.sgrd', 12.5, **arguments)

    def test_single_line(self, tmp_path):
        """It should store traces as columns with the requested depth step."""
        source = tmp_path / 'line.sgy'
        source.write_bytes(make_segy([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
        grid = InversionService.convert_segy(tmp_path / 'out.sgrd', 12.5,
                                             input_path=source, dz=4.0)
        assert grid.shape == (3, 2)
        assert read_grid(tmp_path / 'out.sgrd').dz == 4.0
        np.testing.assert_array_equal(grid.column(1), [4.0, 5.0, 6.0])

    def test_time_axis(self, tmp_path):
        """It should keep the sample interval and flag a time axis without dz."""
        source = tmp_path / 'line.sgy'
        source.write_bytes(make_segy([[1.0, 2.0]], sample_interval_us=2000))
        grid = InversionService.convert_segy(tmp_path / 'out.sgrd', 12.5, input_path=source)
        assert grid.time_axis
        assert grid.dz == 2000.0

    def test_density_velocity(self, tmp_path):
        """It should multiply density and velocity into impedance."""
        (tmp_path / 'rho.sgy').write_bytes(make_segy([[2.0, 2.5], [2.2, 2.4]], format_code=1))
        (tmp_path / 'vp.sgy').write_bytes(make_segy([[3000.0, 3500.0], [3100.0, 3400.0]]))
        grid = InversionService.convert_segy(
            tmp_path / 'ai.sgrd', 12.5, density_path=tmp_path / 'rho.sgy',
            velocity_path=tmp_path / 'vp.sgy', dz=4.0)
        assert grid.kind is GridKind.IMPEDANCE
        np.testing.assert_allclose(grid.column(0), [6000.0, 8750.0], rtol=1e-6)

    def test_missing_file(self, tmp_path):
        """It should raise SegyError for a missing input."""
        with pytest.raises(SegyError):
            InversionService.convert_segy(tmp_path / 'out.sgrd', 12.5,
                                          input_path=tmp_path / 'absent.sgy')
