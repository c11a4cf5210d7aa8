"""Exception hierarchy shared across the package."""


class HomeseqError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(HomeseqError, ValueError):
    """Invalid parameters or malformed input data."""


class FormatError(HomeseqError, ValueError):
    """Input file does not look like the declared format."""


class OrderingError(HomeseqError, ValueError):
    """Stream event arrived with a timestamp older than the last accepted one."""


class InsufficientDataError(HomeseqError, ValueError):
    """Not enough data points for the requested estimation."""


class RuleExtractionError(HomeseqError, ValueError):
    """Pattern cannot be split into an antecedent/consequent rule."""


class UnknownRuleError(HomeseqError, KeyError):
    """Rule id not present in the store."""


class UnknownRecommendationError(HomeseqError, KeyError):
    """Recommendation id not present in the store."""


class DuplicateVoteError(HomeseqError):
    """A recommendation can receive at most one feedback vote."""


class InfeasibleSpecError(ValidationError):
    """Synthetic data spec asks for more planted occurrences than fit."""
