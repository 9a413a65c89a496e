"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes of matrices/vectors do not agree with the system dimension."""


class ModeIndexError(IndexError):
    """A mode index lies outside 1..M."""


class SizeLimitError(ValueError):
    """An enumeration would exceed its configured size cap."""


class DomainError(ValueError):
    """An argument lies outside the domain of a mathematical function."""


class InfeasibleError(ValueError):
    """The sampled constraints admit no P at the requested level."""
