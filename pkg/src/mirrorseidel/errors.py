"""Exception hierarchy for the mirrorseidel engine.

Every failure mode that a caller can provoke through data (as opposed to
programming errors, which raise the usual builtins) derives from
:class:`MirrorSeidelError`, so the command line driver can map them to a
single exit status.
"""

from fractions import Fraction


class MirrorSeidelError(Exception):
    """Base class for all engine errors."""


# ---------------------------------------------------------------------------
# fan validation and lattice enumeration


class NonSmooth(MirrorSeidelError):
    """A maximal cone is not generated by a lattice basis."""


class Incomplete(MirrorSeidelError):
    """The fan does not cover the ambient vector space."""


class NotNef(MirrorSeidelError):
    """A nef-basis element or the anticanonical class pairs negatively
    with an effective curve class."""


class NotAmple(MirrorSeidelError):
    """The supplied polarisation is not positive on every wall class."""


class BadCurveBasis(MirrorSeidelError):
    """Supplied curve basis rows are not relations among the rays, or do
    not have full rank."""


class UnboundedRegion(MirrorSeidelError):
    """A degree bound fails to cut the enumeration region down to a
    bounded polytope."""


# ---------------------------------------------------------------------------
# truncated series arithmetic


class ContextMismatch(MirrorSeidelError):
    """Two series built over different gradings or truncation orders were
    combined."""


class NonUnit(MirrorSeidelError):
    """Inversion or logarithm of a series whose constant term is not a
    unit (or not 1, for the logarithm)."""


class NonzeroConstantTerm(MirrorSeidelError):
    """An operation required a series vanishing at the origin."""


class SingularConstantPart(MirrorSeidelError):
    """The constant coefficient matrix of a series-linear system does not
    have full column rank."""


class InconsistentAtOrder(MirrorSeidelError):
    """A series-linear system admits no solution at some degree.

    The offending degree (a rational, since gradings by a rational ample
    class need not be integral) is stored on :attr:`order`.
    """

    def __init__(self, order: Fraction, message: str = ""):
        self.order = Fraction(order)
        text = f"no solution at degree {self.order}"
        if message:
            text += f": {message}"
        super().__init__(text)


# ---------------------------------------------------------------------------
# mirror engine


class UnexpectedScalarTerm(MirrorSeidelError):
    """The degree-zero part of the first-order expansion coefficient is
    nonzero; the nef hypotheses are violated or there is a bug."""


class BundleMirrorMismatch(MirrorSeidelError):
    """The coordinate change computed through an associated bundle
    disagrees with the base computation."""


class RouteMismatch(MirrorSeidelError):
    """Two independent derivations of the same element disagree."""


# ---------------------------------------------------------------------------
# reconstruction


class NotClosed(MirrorSeidelError):
    """The logarithmic 1-form produced during coordinate recovery is not
    closed (or not homogeneous); the input was not a genuine family."""


class DegreeZeroAmbiguity(MirrorSeidelError):
    """A nonzero monomial pairs to zero with the whole nef basis, which is
    impossible for well-formed input."""


# ---------------------------------------------------------------------------
# file formats


class ParseError(MirrorSeidelError):
    """Input document is not syntactically valid."""


class SchemaError(MirrorSeidelError):
    """Input document is valid JSON but violates the schema; the message
    names the offending key."""
