"""Exception types shared across the package."""


class DppError(Exception):
    """Base class for package-specific failures."""


class ExistenceError(DppError, ValueError):
    """Requested kernel parameters do not define a DPP."""


class InvalidSpectrumError(DppError, ValueError):
    """Spectrum with rates outside [0, 1] or otherwise malformed."""


class InfeasibleSpectrumError(DppError):
    """Conditioned Bernoulli selection cannot produce enough active indices."""


class UndefinedPcfError(DppError, ValueError):
    """Pair correlation requested where the intensity vanishes."""


class ConditioningError(DppError):
    """Numerically singular or ill-conditioned conditioning matrix."""

    def __init__(self, msg, cond=None):
        super().__init__(msg)
        self.cond = cond


class InvalidConditioningError(DppError, ValueError):
    """Conditioning data with zero density (duplicates, points in the target region)."""


class DegeneratePointError(DppError):
    """Accepted point whose residual feature vector vanishes."""


class NumericalIntegrityError(DppError):
    """Conditional density more negative than roundoff can explain."""


class StallError(DppError):
    """Rejection loop exceeded its proposal cap."""

    def __init__(self, msg, step=None, counters=None):
        super().__init__(msg)
        self.step = step
        self.counters = dict(counters or {})


class TruncationError(DppError):
    """Series truncation cannot reach the requested accuracy."""


class InsufficientDataError(DppError, ValueError):
    """Too few patterns or points for a statistical estimate."""
