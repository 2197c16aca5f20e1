"""
Custom Errors Unit Test Suite.

Test cases can be run with the following:
  pytest -v --cov=inversion --cov-report=term-missing --cov-branch
"""
import pytest

from inversion.errors import (
    ChecksumError,
    CheckpointError,
    ConfigError,
    DataError,
    DegenerateError,
    DivergenceError,
    GraphConsumedError,
    GridFormatError,
    InversionError,
    NonFiniteError,
    RuntimeFailure,
    SegyError,
    TensorFormatError,
    TruncatedFileError,
    UnsupportedFormatError,
    WellIndexError,
)


class TestInversionError:
    """The InversionError Class Tests."""

    def test_instantiation(self):
        """It should keep the message and no original exception."""
        message = 'An inversion error occurred.'
        error = InversionError(message)
        assert error.message == message
        assert error.original_exception is None
        assert str(error) == message

    def test_instantiation_with_original_exception(self):
        """It should keep the original exception for chaining."""
        original_exception = ValueError('Original error')
        error = InversionError('wrapped', original_exception)
        assert error.original_exception is original_exception
        assert str(error) == 'wrapped'


class TestHierarchy:
    """Error Family Tests."""

    @pytest.mark.parametrize('error_class', [
        ConfigError, DegenerateError, WellIndexError, GridFormatError,
        TensorFormatError, SegyError, TruncatedFileError,
        UnsupportedFormatError, CheckpointError, ChecksumError,
    ])
    def test_data_errors(self, error_class):
        """It should place input problems under DataError."""
        error = error_class('bad input')
        assert isinstance(error, DataError)
        assert isinstance(error, InversionError)
        assert not isinstance(error, RuntimeFailure)

    @pytest.mark.parametrize('error_class', [
        GraphConsumedError, NonFiniteError, DivergenceError,
    ])
    def test_runtime_failures(self, error_class):
        """It should place computation failures under RuntimeFailure."""
        error = error_class('failed')
        assert isinstance(error, RuntimeFailure)
        assert not isinstance(error, DataError)

    def test_well_index_error_is_index_error(self):
        """It should be catchable as a builtin IndexError."""
        with pytest.raises(IndexError):
            raise WellIndexError('well column 99 outside 0..23')

    def test_tensor_format_error_is_grid_format_error(self):
        """It should be catchable as a GridFormatError."""
        with pytest.raises(GridFormatError):
            raise TensorFormatError('bad magic')
