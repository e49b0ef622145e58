"""Exception hierarchy shared by every qforge module."""


class QForgeError(Exception):
    """Base class for all errors raised by qforge."""


class InvalidProfile(QForgeError, ValueError):
    """A PMF or counts vector violates its invariants."""


class CategoryMismatch(QForgeError, ValueError):
    """Two profiles were combined over different category lists."""


class UnsupportedCategory(QForgeError):
    """The user has positive mass on a category the population never queries.

    The divergence from the population is then infinite for every forged
    profile, so there is nothing to optimize.
    """


class EmptyLog(QForgeError, ValueError):
    """No queries were observed."""


class ZeroProbability(QForgeError, ValueError):
    """A type has zero probability under the reference distribution."""


class RegimeExceeded(QForgeError, ValueError):
    """An exhaustive enumeration was requested outside its supported bounds."""


class InvalidGrid(QForgeError, ValueError):
    """A redundancy grid is malformed."""
