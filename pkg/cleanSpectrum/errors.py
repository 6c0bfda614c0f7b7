#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Error definitions for the cleanSpectrum package.
Custom exception classes for numerical failures, invalid inputs and file handling.
Uses Python 3.10+ type annotations.
"""

from typing import Any, Optional


class CleanSpectrumError(Exception):
    """Base exception class for all cleanSpectrum errors."""

    def __init__(self, message: str, *args, **kwargs):
        self.message = message
        super().__init__(message, *args, **kwargs)

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing the error.

        Returns:
            List of suggestion strings
        """
        return ["Run with --log-level debug for more detailed information"]


class PreconditionError(CleanSpectrumError, ValueError):
    """Exception raised when an operation is called outside its domain."""

    def __init__(self, message: str, condition: Optional[str] = None, *args, **kwargs):
        self.condition = condition
        super().__init__(message, *args, **kwargs)

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing the violated precondition.

        Returns:
            List of suggestion strings
        """
        suggestions = []

        if "sum" in self.message and "spectrum" in self.message.lower():
            suggestions.append("Rescale the eigenvalues so that they sum to N (normalize_spectrum)")
        elif "epsilon" in self.message:
            suggestions.append("Constant blocks need 0 <= epsilon < 1 - rho_max")
            suggestions.append("Toeplitz blocks need 0 < epsilon < (1 - rho_max) / (1 + rho_max)")
        elif "q" in self.message and "noise" in self.message.lower():
            suggestions.append("The noise ratio q = N/T must satisfy 0 < q <= 1, i.e. T >= N")

        if self.condition:
            suggestions.append(f"Violated condition: {self.condition}")

        if not suggestions:
            suggestions.append("Check the input dimensions and value ranges")

        return suggestions


class DimensionMismatchError(CleanSpectrumError, ValueError):
    """Exception for vectors or matrices with incompatible shapes."""

    def __init__(self, message: str, expected: Any = None, actual: Any = None, *args, **kwargs):
        self.expected = expected
        self.actual = actual
        super().__init__(message, *args, **kwargs)

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing the dimension mismatch.

        Returns:
            List of suggestion strings
        """
        suggestions = []
        if self.expected is not None and self.actual is not None:
            suggestions.append(f"Expected dimension {self.expected}, got {self.actual}")
        suggestions.append("The adjusted model takes N+1 inputs (spectrum followed by q)")
        suggestions.append("Make sure the model was trained for the same N as the data")
        return suggestions


class ConvergenceError(CleanSpectrumError):
    """Exception for iterative procedures that exhaust their iteration budget."""

    def __init__(self, message: str, residual: float = float("nan"), *args, **kwargs):
        self.residual = residual
        super().__init__(message, *args, **kwargs)


class SingularMatrixError(CleanSpectrumError):
    """Exception for matrices that are not positive definite where required."""
    pass


class DomainError(CleanSpectrumError, ValueError):
    """Exception for arguments outside the domain of a density or transform."""
    pass


class PoleError(CleanSpectrumError, ZeroDivisionError):
    """Exception for a resolvent evaluated exactly on an eigenvalue."""

    def __init__(self, message: str, pole: float = float("nan"), *args, **kwargs):
        self.pole = pole
        super().__init__(message, *args, **kwargs)


class DivergenceError(CleanSpectrumError):
    """Exception for training runs whose loss becomes NaN or infinite."""

    def __init__(self, message: str, epoch: Optional[int] = None,
                 batch: Optional[int] = None, *args, **kwargs):
        self.epoch = epoch
        self.batch = batch
        super().__init__(message, *args, **kwargs)

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing a diverging training run.

        Returns:
            List of suggestion strings
        """
        return [
            "Lower the learning rate (--lr)",
            "Switch to the adaptive optimizer (--optimizer adam)",
            "Check the dataset for corrupted spectra",
        ]


class SerializationError(CleanSpectrumError):
    """Exception for unreadable or corrupted model files."""

    def __init__(self, message: str, file_path: Optional[str] = None, *args, **kwargs):
        self.file_path = file_path
        super().__init__(message, *args, **kwargs)

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing model file errors.

        Returns:
            List of suggestion strings
        """
        suggestions = []

        if "checksum" in self.message.lower():
            suggestions.append("The model file was modified or truncated; retrain or restore it")
        elif "header" in self.message.lower() or "version" in self.message.lower():
            suggestions.append("The file is not a cleanspectrum-mlp model or has an unknown version")

        if not suggestions:
            suggestions.append("Check that the file was written by 'cleanspectrum train'")

        return suggestions


class DatasetError(CleanSpectrumError):
    """Exception for dataset generation and dataset file errors."""

    def __init__(self, message: str, file_path: Optional[str] = None,
                 record_index: Optional[int] = None, *args, **kwargs):
        self.file_path = file_path
        self.record_index = record_index
        super().__init__(message, *args, **kwargs)

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing dataset errors.

        Returns:
            List of suggestion strings
        """
        suggestions = []

        if "retry" in self.message.lower() or "redraw" in self.message.lower():
            suggestions.append("Raise the retry budget (CLEANSPEC_RETRY_BUDGET) or change the method mix")
        elif "invalid" in self.message.lower():
            suggestions.append("The dataset file may be truncated or edited; regenerate it with 'cleanspectrum gen'")

        if self.record_index is not None:
            suggestions.append(f"Error occurs at record {self.record_index}")

        if not suggestions:
            suggestions.append("Check the dataset path and manifest parameters")

        return suggestions


class ConfigurationError(CleanSpectrumError):
    """Exception for configuration-related errors."""

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing configuration errors.

        Returns:
            List of suggestion strings
        """
        suggestions = []

        if "config file" in self.message.lower():
            suggestions.append("Check that the config file exists and has correct permissions")
            suggestions.append("Use --config option to specify an alternate config file")
        elif "setting" in self.message.lower():
            suggestions.append("Check CLEANSPEC_* environment variables for invalid values")

        if not suggestions:
            suggestions.append("Check your configuration settings and environment variables")
            suggestions.append("Run with --log-level debug for more detailed information")

        return suggestions


class FileOperationError(CleanSpectrumError):
    """Exception for file operation errors."""

    def __init__(self, message: str, file_path: Optional[str] = None, *args, **kwargs):
        self.file_path = file_path
        super().__init__(message, *args, **kwargs)

    def get_suggestions(self) -> list[str]:
        """
        Get suggestions for fixing file operation errors.

        Returns:
            List of suggestion strings
        """
        suggestions = []

        if "permission denied" in self.message.lower():
            suggestions.append("Check file permissions")
            suggestions.append("Ensure you have read/write access to the file")
        elif "no such file" in self.message.lower() or "not found" in self.message.lower():
            suggestions.append("Verify the file path is correct")
            suggestions.append("Check that the file exists")
        elif "is a directory" in self.message.lower():
            suggestions.append("Expected a file but found a directory")

        if not suggestions:
            suggestions.append("Check the file path and permissions")

        return suggestions
