"""Exception types shared across the toolkit."""


class GwosaeError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(GwosaeError):
    """Matrix or vector dimensions do not conform."""


class ConfigError(GwosaeError):
    """Invalid configuration or argument value."""


class ParseError(GwosaeError):
    """Malformed dataset file."""


class TrainingError(GwosaeError):
    """Training cannot proceed (degenerate labels, bad stage input, ...)."""


class StratificationError(GwosaeError):
    """A class cannot be represented in the training split."""
