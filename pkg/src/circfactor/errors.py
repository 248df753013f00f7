"""Exception types shared across the package.

Every failure mode that callers are expected to catch gets its own class so
that the CLI can map them onto exit codes without string matching.
"""


class CircFactorError(Exception):
    """Base class for all errors raised by this package."""


class ZeroInverse(CircFactorError):
    """Inversion of zero (in Q or in a number field)."""


class DegenerateInput(CircFactorError):
    """An input violates a structural precondition (zero modulus, reducible
    modulus where irreducibility is required, empty matrix, ...)."""


class NotMonic(CircFactorError):
    """A polynomial required to be monic in some variable is not."""


class DegreeOrder(CircFactorError):
    """A divisor has larger degree than the dividend."""


class CircuitSyntaxError(CircFactorError):
    """Malformed circuit text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CycleError(CircFactorError):
    """A circuit references a node that is not yet defined (would form a cycle)."""


class UnknownIdentifier(CircFactorError):
    """A gate reference names neither a prior node nor an input."""


class MissingAssignment(CircFactorError):
    """Evaluation point does not cover every input variable."""


class DimensionMismatch(CircFactorError):
    """Matrix/vector dimensions are inconsistent or empty."""


class ArityMismatch(CircFactorError):
    """A substitution or composition got a wrong number of images."""


class ZeroDivisorAtPoint(CircFactorError):
    """Division elimination was given a point where the divisor vanishes."""


class InexactDivision(CircFactorError):
    """A quotient believed exact failed its post-hoc check."""


class CapExceeded(CircFactorError):
    """A configured resource cap (grid points, monomials, subsets) was hit."""


class InfeasibleParameters(CircFactorError):
    """No design/generator parameters satisfy the requested constraints."""


class FallbackExhausted(CircFactorError):
    """Every escalation step of a deterministic search failed."""


class DegenerateRoot(CircFactorError):
    """Newton iteration started from a root where d/dz vanishes."""


class NotARoot(CircFactorError):
    """Newton iteration started from a value that is not a root at T=0."""


class HypothesisViolated(CircFactorError):
    """An algorithm's mathematical hypothesis fails on the actual input."""


class SingularSystem(CircFactorError):
    """The minimal-polynomial linear system is singular or inconsistent
    (wrong z-degree guess or a failed hardness assumption)."""


class ZeroDeterminantOnGrid(CircFactorError):
    """The composed determinant vanished on the whole search grid."""


class VerificationFailed(CircFactorError):
    """A computed factorization failed its independent re-verification."""
