"""Exception hierarchy shared across the package."""


class ScarBasisError(Exception):
    """Base class for all errors raised by this package."""


class IntegrationError(ScarBasisError):
    """Trajectory integration failed or violated the energy-drift budget."""


class RefinementError(ScarBasisError):
    """Periodic-orbit Newton refinement did not converge."""


class DegenerateGuessError(RefinementError):
    """Refinement Jacobian is singular at the supplied guess."""


class MarginalOrbitError(RefinementError):
    """Orbit is (nearly) stable; only unstable orbits are supported."""


class WindingResolutionError(ScarBasisError):
    """Angle tracking mesh too coarse for a reliable half-turn count."""


class EnumerationError(ScarBasisError):
    """Requested (orbit, irrep) combination is not quantizable."""


class CoverageError(ScarBasisError):
    """Grid does not cover the classically relevant region."""


class GridMismatchError(ScarBasisError):
    """Operation mixes wavefunctions living on different grids."""


class NullProjectionError(ScarBasisError):
    """Symmetry projection annihilated the state."""


class LeakageError(ScarBasisError):
    """Propagated probability reached the grid boundary."""


class InsufficientCandidatesError(ScarBasisError):
    """Candidate pool smaller than the required basis size."""


class RankDeficiencyError(ScarBasisError):
    """Remaining candidates are numerically dependent on the selected set."""


class SingularityError(ScarBasisError):
    """Semiclassical intensity average evaluated in its singular regime."""


class FitError(ScarBasisError):
    """Distribution fit failed (degenerate samples)."""


class SizeError(ScarBasisError):
    """Requested dense problem exceeds the configured size bound."""
