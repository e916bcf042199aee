"""Exception types shared across the pipeline."""


class CrisisBriefError(Exception):
    """Base class for all package errors."""


class SchemaError(CrisisBriefError):
    """Input record or field mapping violates the expected schema."""


class ValidationError(CrisisBriefError):
    """Operation argument outside its valid domain."""


class ConfigurationError(CrisisBriefError):
    """Missing or inconsistent pipeline configuration."""


class ProtocolError(CrisisBriefError):
    """Remote endpoint answered with a malformed or inconsistent payload."""


class GatewayError(CrisisBriefError):
    """Remote endpoint unreachable or failing after retries."""


class ClassificationError(CrisisBriefError):
    """A backend failed to classify a post after retries."""

    def __init__(self, message, post_id=None, dimension=None):
        super().__init__(message)
        self.post_id = post_id
        self.dimension = dimension


class EmptyStratumError(CrisisBriefError):
    """No post falls in any selected class of a sampling dimension."""


class EmptySampleError(CrisisBriefError):
    """Every stratum of a sampling spec is empty."""


class BudgetError(CrisisBriefError):
    """Prompt alone exceeds the context budget."""


class GenerationError(CrisisBriefError):
    """Report generation failed at the generative gateway."""


class MetricError(CrisisBriefError):
    """A metric could not be computed (gateway failure, no valid judge runs)."""


class ComparisonError(CrisisBriefError):
    """Reports under comparison do not share a source corpus."""
