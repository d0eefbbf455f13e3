"""Exception hierarchy shared by every module of the package."""


class MPSError(Exception):
    """Base class for all errors raised by :mod:`mpsrg`."""


class DimensionMismatch(MPSError, ValueError):
    """Site matrices are ragged or not square."""


class NullState(MPSError, ValueError):
    """Every site matrix is zero, so the state vanishes identically."""


class LabelOutOfRange(MPSError, ValueError):
    """A spin configuration contains a label outside ``[0, d)``."""


class BudgetExceeded(MPSError, MemoryError):
    """A dense object would exceed the configured size budget."""


class DegenerateDominantEigenvalue(MPSError):
    """The dominant transfer eigenvalue is degenerate in magnitude.

    Raised for non-generic states such as GHZ, where fixed-point quantities are
    not defined and finite-block quantities must be used instead.
    """


class NonDiagonalizableFixedPoint(MPSError):
    """The gauged left fixed point is not Hermitian positive semidefinite."""


class RankDeficientFixedPoint(NonDiagonalizableFixedPoint):
    """The right fixed point does not have full Schmidt rank."""


class NoConvergence(MPSError, RuntimeError):
    """An iterative optimizer hit its iteration cap before meeting tolerance."""


class BlockMismatch(MPSError, ValueError):
    """The block size does not divide the chain length."""


class UnsupportedParameter(MPSError, ValueError):
    """A model point carries a coupling that the model does not accept."""


class UnsupportedModel(MPSError, ValueError):
    """The requested operation is not available for this model."""


class NotQubits(MPSError, ValueError):
    """Concurrence was requested for a state that is not two qubits."""


class EvaluationFailed(MPSError, ArithmeticError):
    """A curve could not be evaluated at a stencil point."""


class DivergedSide(MPSError, ArithmeticError):
    """A one-sided derivative diverges, so a jump is undefined."""


class DegenerateFit(MPSError, ValueError):
    """A least-squares fit has zero variance in its abscissae."""


class InternalConsistencyError(MPSError, ArithmeticError):
    """A computed quantity violates a bound it must satisfy."""
