"""Exception types raised across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain of the requested operation."""


class ModelError(ValueError):
    """A probability model returned values that are not a distribution."""


class SingularSupportError(ArithmeticError):
    """An outcome has vanishing probability but a nonvanishing derivative.

    The Fisher information sum diverges at such a point.
    """


class FisherDivergenceError(ArithmeticError):
    """A closed-form Fisher matrix is evaluated where it diverges."""


class NormalizationError(RuntimeError):
    """Outcome probabilities do not sum to one (a broken POVM or grid)."""
