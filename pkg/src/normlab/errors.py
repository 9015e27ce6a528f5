"""Exception hierarchy shared by all normlab modules."""


class NormlabError(Exception):
    """Base class for domain failures (the CLI maps these to exit code 2)."""


class ParseError(NormlabError, ValueError):
    pass


class NonPositiveGauge(NormlabError, ValueError):
    pass


class KinkPoint(NormlabError, ArithmeticError):
    """Derivative requested where the polar profile is not differentiable."""


class ZeroVector(NormlabError, ValueError):
    pass


class NotANorm(NormlabError):
    """The gauge's unit ball fails the curvature test."""


class FitResidualTooLarge(NormlabError):
    pass


class NewtonDiverged(NormlabError):
    pass


class SingularHessian(NormlabError):
    pass


class SolverStalled(NormlabError):
    pass


class NotInscribed(NormlabError):
    pass


class NoInnerEllipsoid(NormlabError):
    pass


class NoOuterEllipsoid(NormlabError):
    pass


class CertificateFailed(NormlabError):
    """Internal consistency failure of a contraction certificate."""


class NotOnSphere(NormlabError, ValueError):
    pass


class DiagonalPoint(NormlabError, ValueError):
    pass


class DimensionTooLarge(NormlabError, ValueError):
    pass


class IllConditioned(NormlabError):
    pass
