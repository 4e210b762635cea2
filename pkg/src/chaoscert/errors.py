"""Exception hierarchy for the certifier.

Errors are split into three families: hard usage errors (bad parameters,
malformed configs), numerical-rigor failures that a caller should treat as
an *inconclusive* signal (budgets, Picard failures), and provable
refutations surfaced by the certification routines.
"""


class ChaosCertError(Exception):
    """Base class for all package errors."""


class InvalidParameter(ChaosCertError):
    """A constructor argument violates its precondition."""


class IntervalOverflow(ChaosCertError):
    """An interval endpoint left the finite binary64 range."""


class DivisionByZeroInterval(ChaosCertError):
    """Interval division by an interval containing zero."""


class EmptySplit(ChaosCertError):
    """Attempted to split a box along an axis of zero width."""


class TooWide(ChaosCertError):
    """A box is too wide in x to admit a canonical reduced representative."""


# --- inconclusive-signal errors ------------------------------------------

class InconclusiveError(ChaosCertError):
    """Base class for failures that mean 'not proven', never 'false'."""


class PicardFailure(InconclusiveError):
    """No a-priori enclosure verified within the retry budget."""


class IntegrationFailure(InconclusiveError):
    """Validated integration failed (step size underflow, etc.)."""


class BoundsExceeded(InconclusiveError):
    """A rough enclosure escaped the configured phase-space bounds."""


class BudgetExhausted(InconclusiveError):
    """The sub-box budget was hit before enclosures reached target width."""


class NoWitness(InconclusiveError):
    """No interior witness box found at the configured search depth."""


class NoVisitFound(InconclusiveError):
    """No rigorously confirmed visiting orbit within the iterate bound."""


# --- provable refutations --------------------------------------------------

class RefutationError(ChaosCertError):
    """Base class for provable violations of a certificate's premises."""


class RefutedIntersection(RefutationError):
    """The image enclosure is disjoint from every translate of the box."""


class AmbiguousShift(RefutationError):
    """Two distinct translates admit interior witnesses; the disjoint-pair
    premise is provably violated."""


class SelfIntersectionNotRefuted(InconclusiveError):
    """A chain disk's image enclosure overlaps the disk itself."""


class NotCrossing(InconclusiveError):
    """The sufficient crossing condition failed for a requested shift."""


class InvalidChain(ChaosCertError):
    """Malformed periodic-chain input (length/shape mismatch)."""


# --- reporting / persistence ------------------------------------------------

class SchemaMismatch(ChaosCertError):
    """Config or certificate document violates the expected schema."""


class ReplayMismatch(ChaosCertError):
    """Stored evidence fails re-verification."""
