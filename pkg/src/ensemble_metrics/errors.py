"""Exception types shared across the package."""


class EnsembleMetricsError(Exception):
    """Base class for every error raised by this package."""


class DimMismatch(EnsembleMetricsError):
    """Operands live on Hilbert spaces of different dimension."""


class NotHermitian(EnsembleMetricsError):
    """Matrix fails the Hermiticity tolerance."""


class NotPSD(EnsembleMetricsError):
    """Matrix has an eigenvalue below the PSD tolerance."""


class NoConvergence(EnsembleMetricsError):
    """An iterative routine exhausted its iteration budget."""


class OutOfRange(EnsembleMetricsError):
    """Scalar argument outside its documented domain."""


class InvalidState(EnsembleMetricsError):
    """Matrix is not a valid density matrix."""


class EmptyEnsemble(EnsembleMetricsError):
    """Ensemble construction left no states with positive probability."""


class PointerReuse(EnsembleMetricsError):
    """A pointer index was assigned to two distinct states."""


class WeightMismatch(EnsembleMetricsError):
    """Pointer weights of a state do not sum to its probability."""


class LengthMismatch(EnsembleMetricsError):
    """Paired lists differ in length."""


class NotPure(EnsembleMetricsError):
    """State expected to be pure has purity below tolerance."""


class InvalidMeasurement(EnsembleMetricsError):
    """Generalized measurement violates normalization or completeness."""


class InvalidPovm(EnsembleMetricsError):
    """POVM elements are not PSD or do not sum to the identity."""


class InfeasibleCoupling(EnsembleMetricsError):
    """Coupling table marginals do not match the ensemble distributions."""


class InfeasibleJointPair(EnsembleMetricsError):
    """Joint-table pair violates its marginal constraints."""


class TooLarge(EnsembleMetricsError):
    """Problem size exceeds a brute-force enumeration limit."""


class InvalidParams(EnsembleMetricsError):
    """Generator called with inconsistent parameters."""
