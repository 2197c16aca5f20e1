"""
Custom errors for the impedance inversion toolkit.

This module defines the exception hierarchy shared by every subpackage.
Errors fall into two families that the command-line entry point maps to
exit codes: data/config problems (exit 2) and runtime failures (exit 3).
"""
from __future__ import annotations

from typing import Optional


class InversionError(Exception):
    """Base exception class for inversion-related errors.

    Attributes:
        message: A human-readable error message (string).
        original_exception: The original exception that caused this error,
            if any (Optional[Exception]). This allows for exception
            chaining to preserve the full context of the error.
    """

    def __init__(
            self,
            message: str,
            original_exception: Optional[Exception] = None
    ):
        """Initializes an InversionError instance.

        Args:
            message: The error message.
            original_exception: The original exception.
        """
        self.message = message
        self.original_exception = original_exception
        super().__init__(message)


######################################################################
# DATA / CONFIGURATION ERRORS
######################################################################
class DataError(InversionError):
    """Raised when inputs, files or configuration are invalid."""


class ConfigError(DataError):
    """Raised when a configuration value is invalid.

    The message always names the offending field.
    """


class ShapeError(DataError):
    """Raised when tensor or grid shapes are incompatible."""


class ContractError(DataError):
    """Raised when an operation's precondition is violated."""


class EmptyInputError(DataError):
    """Raised when an operation receives an empty tensor or dataset."""


class DomainError(DataError):
    """Raised when values fall outside the physical domain
    (e.g. non-positive impedance)."""


class DegenerateError(DataError):
    """Raised when a statistic is undefined because of zero variance."""


class WellIndexError(DataError, IndexError):
    """Raised when a well column lies outside the section."""


class GridFormatError(DataError):
    """Raised when an SGRD file is malformed."""


class TensorFormatError(GridFormatError):
    """Raised when a TNSR tensor file is malformed."""


class SegyError(DataError):
    """Base class for SEG-Y ingestion errors."""


class TruncatedFileError(SegyError):
    """Raised when a SEG-Y file ends inside a header or trace."""


class UnsupportedFormatError(SegyError):
    """Raised when the SEG-Y sample format code is not 1 or 5."""


class ZeroSamplesError(SegyError):
    """Raised when the binary header declares zero samples per trace."""


class InconsistentTraceLengthError(SegyError):
    """Raised when traces of one line have different sample counts."""


class CheckpointError(DataError):
    """Base class for checkpoint loading errors."""


class VersionError(CheckpointError):
    """Raised when the checkpoint manifest version is unsupported."""


class MissingTensorError(CheckpointError):
    """Raised when a tensor named by the manifest is absent."""


class ChecksumError(CheckpointError):
    """Raised when a tensor file is truncated or fails its checksum."""


######################################################################
# RUNTIME ERRORS
######################################################################
class RuntimeFailure(InversionError):
    """Raised when a computation fails after its inputs were accepted."""


class GraphConsumedError(RuntimeFailure):
    """Raised on a second backward pass through a freed graph."""


class NonFiniteError(RuntimeFailure):
    """Raised in debug mode when a forward op produces NaN or Inf."""


class DivergenceError(RuntimeFailure):
    """Raised when the training loss becomes NaN or infinite."""
