"""Exception hierarchy shared by all fracwave modules."""


class FracwaveError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameter(FracwaveError, ValueError):
    """A numeric argument is non-finite or otherwise malformed."""


class ParameterOutOfRange(FracwaveError, ValueError):
    """A parameter lies outside the range where the operation is defined."""


class ModulusTooCloseToOne(ParameterOutOfRange):
    """Elliptic modulus too close to 1 for the complete integrals to be resolved."""


class DegenerateInput(FracwaveError, ValueError):
    """The input is degenerate for the requested operation (e.g. a constant field)."""


class DegenerateExpansion(FracwaveError, ValueError):
    """A perturbation expansion is singular at the requested parameter."""


class Infeasible(FracwaveError, ValueError):
    """A constraint set is empty."""


class NoConvergence(FracwaveError, RuntimeError):
    """An iterative method did not reach its tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    last_residual : float, optional
        Residual norm of the last iterate.
    """

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class SingularJacobian(NoConvergence):
    """The Newton Jacobian is numerically singular (close to a bifurcation)."""


class AtBifurcation(FracwaveError, RuntimeError):
    """A local solve needed for a derivative failed, usually near a bifurcation."""


class DiagnosticsFailure(FracwaveError, RuntimeError):
    """An internal consistency check of the spectral analysis failed."""


class HypothesisViolated(FracwaveError, ValueError):
    """A theorem hypothesis does not hold, so no verdict can be issued."""


class StepUnderflow(FracwaveError, RuntimeError):
    """Continuation step size fell below its floor without a fold signature."""


class BelowThreshold(FracwaveError, RuntimeError):
    """Branch switching fell back onto the symmetric b = 0 family."""
