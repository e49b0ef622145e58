"""Exact method-of-types computations on small alphabets.

A type is the empirical distribution t = (k_1/k, ..., k_n/k) of k i.i.d.
draws.  Its class (the sequences sharing it) has multinomial size close to
2^(k H(t)), and its probability under a source tbar is close to
2^(-k D(t || tbar)).  The functions here compute both sides exactly so the
standard polynomial sandwich bounds can be checked without tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import InvalidProfile, RegimeExceeded, ZeroProbability
from .profile import Profile, _kl_bits

EXACT_FACTORIAL_MAX_K = 20
MAX_N = 6
MAX_K = 30
MAX_TYPES = 10**6


@dataclass(frozen=True)
class TypeVector:
    counts: tuple[int, ...]

    def __init__(self, counts: Sequence[int]):
        vals = tuple(int(c) for c in counts)
        if not vals:
            raise InvalidProfile("a type vector needs at least one symbol")
        if any(c < 0 for c in vals) or any(int(c) != c for c in counts):
            raise InvalidProfile(f"counts must be nonnegative integers, got {list(counts)}")
        if sum(vals) < 1:
            raise InvalidProfile("a type vector needs k >= 1")
        object.__setattr__(self, "counts", vals)

    @property
    def k(self) -> int:
        return sum(self.counts)

    @property
    def n(self) -> int:
        return len(self.counts)

    def scaled(self, m: int) -> TypeVector:
        return TypeVector([m * c for c in self.counts])

    def type_profile(self, categories: Sequence[str] | None = None) -> Profile:
        cats = categories if categories is not None else [f"c{i}" for i in range(self.n)]
        k = self.k
        return Profile(cats, [c / k for c in self.counts], normalize=False)


@dataclass(frozen=True)
class ClassSizeCheck:
    log2_class_size: float
    entropy_approx: float
    lower_bound: float
    upper_holds: bool
    lower_holds: bool

    @property
    def holds(self) -> bool:
        return self.upper_holds and self.lower_holds


@dataclass(frozen=True)
class TypeReport:
    counts: tuple[int, ...]
    t: Profile
    exact_log2_class_size: float
    entropy_approx: float
    probability: float
    exact_log2_prob: float
    divergence_exponent: float
    gap_per_symbol: float


def multinomial(tv: TypeVector) -> int:
    """Exact size of the type class, k! / (k_1! ... k_n!)."""
    out = 1
    remaining = tv.k
    for c in tv.counts:
        out *= math.comb(remaining, c)
        remaining -= c
    return out


def log2_multinomial(tv: TypeVector) -> float:
    """log2 of the type class size.

    Exact integer factorials up to k = 20, log-gamma sums beyond.
    """
    k = tv.k
    if k <= EXACT_FACTORIAL_MAX_K:
        num = math.factorial(k)
        den = 1
        for c in tv.counts:
            den *= math.factorial(c)
        return math.log2(num // den)
    ln = math.lgamma(k + 1) - sum(math.lgamma(c + 1) for c in tv.counts)
    return max(ln / math.log(2), 0.0)


def _entropy_bits_from_counts(counts: Sequence[int], k: int) -> float:
    # k H(t) = k log2 k - sum k_i log2 k_i
    return k * math.log2(k) - sum(c * math.log2(c) for c in counts if c > 0)


def class_size_check(tv: TypeVector) -> ClassSizeCheck:
    """Check (k+1)^-n 2^(k H(t)) <= |class| <= 2^(k H(t)) in integer arithmetic.

    With t_i = k_i / k, 2^(k H(t)) = k^k / prod k_i^k_i, so both inequalities
    reduce to comparisons between integers.
    """
    k, n = tv.k, tv.n
    size = multinomial(tv)
    powers = 1
    for c in tv.counts:
        powers *= c**c
    k_k = k**k
    upper = size * powers <= k_k
    lower = k_k <= size * (k + 1) ** n * powers
    khe = _entropy_bits_from_counts(tv.counts, k)
    return ClassSizeCheck(
        log2_class_size=log2_multinomial(tv),
        entropy_approx=khe,
        lower_bound=khe - n * math.log2(k + 1),
        upper_holds=upper,
        lower_holds=lower,
    )


def _check_tbar(tv: TypeVector, tbar: Profile) -> None:
    if tbar.n != tv.n:
        raise InvalidProfile(f"reference distribution has {tbar.n} symbols, type has {tv.n}")


def log2_type_probability(tv: TypeVector, tbar: Profile) -> float:
    """log2 P{T = t}; ``-inf`` for impossible types."""
    _check_tbar(tv, tbar)
    total = log2_multinomial(tv)
    for c, w in zip(tv.counts, tbar.pmf):
        if c == 0:
            continue
        if w == 0:
            return -math.inf
        total += c * math.log2(w)
    return total


def type_probability(tv: TypeVector, tbar: Profile) -> float:
    """Probability that k i.i.d. draws from ``tbar`` have exactly these counts."""
    lp = log2_type_probability(tv, tbar)
    return 0.0 if lp == -math.inf else 2.0**lp


def divergence_exponent_gap(tv: TypeVector, tbar: Profile) -> float:
    """|-(1/k) log2 P{T = t} - D(t || tbar)|, at most n log2(k+1) / k."""
    lp = log2_type_probability(tv, tbar)
    if lp == -math.inf:
        raise ZeroProbability(f"type {list(tv.counts)} is impossible under the reference distribution")
    t = tv.type_profile(tbar.categories)
    return abs(-lp / tv.k - _kl_bits(t.array, tbar.array))


def type_report(tv: TypeVector, tbar: Profile) -> TypeReport:
    _check_tbar(tv, tbar)
    t = tv.type_profile(tbar.categories)
    lp = log2_type_probability(tv, tbar)
    d = _kl_bits(t.array, tbar.array)
    gap = math.nan if lp == -math.inf else abs(-lp / tv.k - d)
    return TypeReport(
        counts=tv.counts,
        t=t,
        exact_log2_class_size=log2_multinomial(tv),
        entropy_approx=_entropy_bits_from_counts(tv.counts, tv.k),
        probability=0.0 if lp == -math.inf else 2.0**lp,
        exact_log2_prob=lp,
        divergence_exponent=tv.k * d,
        gap_per_symbol=gap,
    )


def count_types(n: int, k: int) -> int:
    return math.comb(k + n - 1, n - 1)


def _check_regime(n: int, k: int) -> None:
    if not (1 <= n <= MAX_N and 1 <= k <= MAX_K):
        raise RegimeExceeded(f"exhaustive enumeration needs 1 <= n <= {MAX_N}, 1 <= k <= {MAX_K}; got n={n}, k={k}")
    if count_types(n, k) > MAX_TYPES:
        raise RegimeExceeded(f"{count_types(n, k)} types exceeds the cap of {MAX_TYPES}")


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(n - 1, k - first):
            yield (first, *rest)


def enumerate_types(n: int, k: int) -> list[TypeVector]:
    """All count vectors of k draws over n symbols, in ascending lexicographic order."""
    _check_regime(n, k)
    return [TypeVector(c) for c in _compositions(n, k)]


def mean_type(tbar: Profile, k: int) -> Profile:
    """Expected type E[T] under ``tbar``, by exhaustive summation over all types."""
    types = enumerate_types(tbar.n, k)
    acc = [0.0] * tbar.n
    for tv in types:
        w = type_probability(tv, tbar)
        if w == 0.0:
            continue
        for i, c in enumerate(tv.counts):
            acc[i] += w * c / k
    return Profile(tbar.categories, acc, normalize=False)
