"""Exception types shared across the package."""


class PAChoiceError(Exception):
    """Base class for all package-specific errors."""


# ---- parameter validation -------------------------------------------------

class BetaOutOfRange(PAChoiceError, ValueError):
    """Weight offset outside the admissible range (must exceed -1, and be
    positive when the seed vertex starts with no self-loops)."""


class BadSampleSize(PAChoiceError, ValueError):
    """Choice sample size below 2."""


class BadProbs(PAChoiceError, ValueError):
    """Type probability vector has wrong length, entries out of range, or
    does not sum to one."""


class BadCounts(PAChoiceError, ValueError):
    """Non-positive edge counts / type count, or negative seed self-loops."""


# ---- weight index ----------------------------------------------------------

class DuplicateVertex(PAChoiceError, ValueError):
    """Vertex id already present in the index."""


class NonpositiveWeight(PAChoiceError, ValueError):
    """Stored weights must stay strictly positive."""


class UnknownVertex(PAChoiceError, ValueError):
    """Vertex id not present in the index."""


class EmptyIndex(PAChoiceError, ValueError):
    """Sampling from an index with no vertices (or zero total weight)."""


class NoCandidate(PAChoiceError, ValueError):
    """Type pool empty after excluding the source vertex."""


# ---- theory ----------------------------------------------------------------

class DomainError(PAChoiceError, ValueError):
    """Function argument outside its admissible interval."""


class NotSupercritical(PAChoiceError, ValueError):
    """Operation defined only in the supercritical regime."""


class NotCritical(PAChoiceError, ValueError):
    """Operation defined only in the critical regime."""


# ---- oracle / estimators ---------------------------------------------------

class TooLargeForOracle(PAChoiceError, ValueError):
    """State too large for exact one-step enumeration."""


class InsufficientData(PAChoiceError, ValueError):
    """Not enough checkpoints or seeds for the requested estimate."""
