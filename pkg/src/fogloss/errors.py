"""Exception hierarchy for fogloss.

Every error raised by the library derives from FoglossError so callers (and the
CLI) can distinguish engine failures from programming errors.
"""


class FoglossError(Exception):
    pass


# --- kernel ---

class ComplexBranchPoints(FoglossError):
    """A factored discriminant quadratic has no real roots."""


class OrderingViolation(FoglossError):
    """Branch points do not satisfy 0 < x1 < x2 < 1 < x3 < x4."""


class BranchCut(FoglossError):
    """Evaluation requested on a branch cut without a one-sided limit."""


# --- analytic ---

class DomainError(FoglossError):
    """Argument outside the operation's real domain."""


class QuadratureFailure(FoglossError):
    """Certified quadrature error estimate exceeds the tolerance."""


class SingularIntegrand(FoglossError):
    """The kernel factor of the integrand (nearly) vanishes in the interval."""


class PoleEncountered(FoglossError):
    """Denominator of a meromorphic expression (nearly) vanishes."""


class WrongRegime(FoglossError):
    """Operation requires a different stability regime."""


class DegenerateP1(FoglossError):
    """p1 = 0 together with lambda2 < mu2*c2 (impossible under ergodicity)."""


class OutOfRange(FoglossError):
    """A probability left [0,1] by more than tolerance."""


class CriticalRegime(WrongRegime):
    """Parameters sit on a regime boundary; refusing to extrapolate."""


# --- rwsolver ---

class TruncationNotConverged(FoglossError):
    """Doubling the truncation still moves pi00 by more than tol_trunc."""


class SingularSystem(FoglossError):
    """The truncated balance system could not be solved to a distribution."""


# --- simulator ---

class InvalidHorizon(FoglossError):
    pass


class StateSpaceTooLarge(FoglossError):
    pass


# --- ring ---

class UnsupportedTopology(FoglossError):
    """Ring congestion pattern not covered (e.g. three adjacent congested nodes)."""


# --- cli ---

class ParseError(FoglossError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(FoglossError):
    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid or missing field: {field}")


class InvalidRerouteProbability(ValidationError):
    """A ring reroute probability leaves [0, 1/2] (total 2p must be <= 1)."""
