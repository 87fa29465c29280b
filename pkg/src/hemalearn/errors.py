"""Exception and warning types shared across the package."""


class HemalearnError(Exception):
    """Base class for all package errors."""


class SchemaError(HemalearnError):
    """CSV header or schema definition is invalid."""


class RowError(HemalearnError):
    """A data row failed to parse; carries the offending row index."""

    def __init__(self, row_index: int, message: str):
        super().__init__(f"row {row_index}: {message}")
        self.row_index = row_index


class LabelError(HemalearnError):
    """Unknown or malformed label value."""


class SplitError(HemalearnError):
    """Requested train/test or k-fold split is impossible."""


class ParameterError(HemalearnError):
    """Invalid hyperparameter or algorithm argument."""


class MetricError(HemalearnError):
    """Metric computation is undefined for the given inputs."""


class ComputationError(HemalearnError):
    """Numerical routine cannot proceed (degenerate input, non-PD matrix, ...)."""


class ReductionError(HemalearnError):
    """Feature reduction would leave no usable features."""


class FeatureMismatchError(HemalearnError):
    """Model and dataset disagree on feature names."""


class ComparisonError(HemalearnError):
    """Report comparison failed due to schema mismatch."""


class ConvergenceWarning(UserWarning):
    """Iterative solver stopped before reaching its tolerance."""


class DataWarning(UserWarning):
    """Degenerate data condition handled by a documented convention."""
