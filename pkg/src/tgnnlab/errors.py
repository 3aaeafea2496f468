"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Model, parameter, or rule combination is invalid."""


class InvalidSizeError(ValueError):
    """A size or shape argument is outside the supported range."""


class InvalidMaskError(ValueError):
    """An edge mask references edges not present in the base graph."""


class UnsupportedVariantError(ConfigurationError):
    """Requested model variant does not exist."""


class IncomparableError(ValueError):
    """Objects of mismatched shape or class cannot be compared."""


class InvalidSetError(ValueError):
    """A perturbation set violates its class constraints."""


class EmptyEvidenceError(ValueError):
    """An explainer was handed no perturbation evidence."""
