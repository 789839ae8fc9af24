"""Exception taxonomy shared across the pipeline.

The CLI maps these onto process exit codes; library callers can catch the
base class or the specific subtype.
"""


class LesionTLError(Exception):
    """Base class for all pipeline errors."""


class DatasetLayoutError(LesionTLError):
    """Dataset root does not follow the documented directory layout."""


class EmptyClassError(LesionTLError):
    """One of the two classes contains no usable images."""


class DecodeError(LesionTLError):
    """A file could not be decoded as an image."""


class StratificationError(LesionTLError):
    """A stratified split cannot be satisfied by the available samples."""


class InsufficientDataError(LesionTLError):
    """Fewer samples than folds (or similar size constraint violations)."""


class SpecError(LesionTLError):
    """A model specification is structurally invalid."""


class WeightLoadError(LesionTLError):
    """Pretrained weights are missing or incompatible with the backbone."""


class FreezePolicyError(LesionTLError):
    """A freeze policy does not fit the backbone it is applied to."""


class ConfigError(LesionTLError):
    """Experiment configuration is invalid.

    Carries the full list of violations so users can fix everything in one
    pass instead of replaying validation errors one at a time.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations))


class DataError(LesionTLError):
    """Training was asked to run on empty or inconsistent data."""


class DivergenceError(LesionTLError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, message="non-finite loss"):
        self.epoch = epoch
        super().__init__(f"{message} at epoch {epoch}")


class UndefinedMetricError(LesionTLError):
    """A confusion-matrix metric has a zero denominator."""

    def __init__(self, metric, message=None):
        self.metric = metric
        super().__init__(message or f"metric '{metric}' is undefined: no samples in its reference class")


class SchemaError(LesionTLError):
    """Report files with inconsistent or unknown schemas cannot be aggregated."""


class PlotError(LesionTLError):
    """Plotting was asked to render empty or malformed histories."""


class AblationError(LesionTLError):
    """The model head has no removable layers to ablate."""


class PartialSuiteError(LesionTLError):
    """Some suite members failed; partial results were written."""

    def __init__(self, failed, total, message=None):
        self.failed = failed
        self.total = total
        super().__init__(message or f"{failed} of {total} suite runs failed")
