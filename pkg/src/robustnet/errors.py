"""Exception hierarchy shared by all robustnet modules."""

from __future__ import annotations


class RobustnetError(Exception):
    """Base class for all library-specific failures."""


class InvalidNetworkError(RobustnetError):
    """A network violates the model invariants.

    Carries the list of :class:`robustnet.model.Violation` records so callers
    can report every problem at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid network: {lines}")


class UnstableNetworkError(RobustnetError):
    """The network is not asymptotically stable, so no finite gain exists."""

    def __init__(self, spectral_radius: float, boundary: bool = False):
        self.spectral_radius = spectral_radius
        self.boundary = boundary
        msg = f"network is not stable (spectral radius {spectral_radius!r})"
        if boundary:
            msg += "; estimate lies within the stability decision margin"
        super().__init__(msg)


class PreconditionViolatedError(RobustnetError):
    """A structural change's precondition does not hold for this network."""


class CycleBudgetExceededError(RobustnetError):
    """More simple cycles exist than the configured enumeration cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(
            f"simple-cycle enumeration exceeded the cap of {cap} cycles; "
            "raise the cap to obtain a complete (sound) report"
        )


class InvalidCertificateError(RobustnetError):
    """The supplied vector/level pair is not a valid robustness certificate."""


class NotDiagonallyDominantError(RobustnetError):
    """The system matrix is not strictly diagonally dominant as required."""


class NonFiniteStateError(RobustnetError):
    """State integration overflowed to a non-finite value."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"state became non-finite near t = {time:g}")


class CertifiedBoundError(RobustnetError):
    """An empirical trajectory exceeded a certified amplification bound.

    This falsifies either the analysis or the integrator and is always a
    hard failure, never a warning.
    """

    def __init__(self, trial: int, ratio: float, limit: float):
        self.trial = trial
        self.ratio = ratio
        self.limit = limit
        super().__init__(
            f"trial {trial}: observed amplification {ratio!r} exceeds "
            f"certified limit {limit!r}"
        )


class IncrementalMismatchError(RobustnetError):
    """Rank-one incremental update disagrees with the from-scratch solve."""


class SequenceStepError(RobustnetError):
    """A change in a sequence failed; carries the 1-based step index."""

    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"step {step}: {cause}")
