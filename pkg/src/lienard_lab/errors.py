"""Exception types shared across the package."""


class LienardLabError(Exception):
    """Base class for all package errors."""


class DegenerateInput(LienardLabError):
    """Input violates a precondition (zero polynomial, bad degree, ...)."""


class SingularPoint(LienardLabError):
    """Both formulations of the amplitude ODE degenerate at the same point."""


class NoReturn(LienardLabError):
    """An orbit never came back to the Poincare section within budget."""


class StepUnderflow(LienardLabError):
    """Adaptive integration drove the step size below the useful minimum."""


class MaxSteps(LienardLabError):
    """Integration exhausted its step budget."""


class DegenerateOrbit(LienardLabError):
    """A closed orbit whose x-extrema cannot be resolved."""
