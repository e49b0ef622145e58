"""Query profiles as PMFs over named categories, plus entropy and divergence.

All information quantities are reported in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import CategoryMismatch, EmptyLog, InvalidProfile

SUM_TOL = 1e-9


def _check_categories(categories: Sequence[str]) -> tuple[str, ...]:
    cats = tuple(categories)
    if not cats:
        raise InvalidProfile("a profile needs at least one category")
    for c in cats:
        if not isinstance(c, str) or not c:
            raise InvalidProfile(f"category labels must be nonempty strings, got {c!r}")
    if len(set(cats)) != len(cats):
        raise InvalidProfile("category labels must be unique")
    return cats


@dataclass(frozen=True)
class Profile:
    """A probability mass function over an ordered list of category labels.

    Inputs whose sum is off by less than ``SUM_TOL`` are renormalized;
    anything further off is rejected.
    """

    categories: tuple[str, ...]
    pmf: tuple[float, ...]

    def __init__(self, categories: Sequence[str], pmf: Sequence[float], *, normalize: bool = True):
        cats = _check_categories(categories)
        values = np.asarray(pmf, dtype=float)
        if values.ndim != 1 or values.size != len(cats):
            raise InvalidProfile(
                f"pmf has {values.size} entries for {len(cats)} categories"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidProfile("pmf entries must be finite")
        if np.any(values < 0):
            raise InvalidProfile("pmf entries must be nonnegative")
        total = float(values.sum())
        if abs(total - 1.0) >= SUM_TOL:
            raise InvalidProfile(f"pmf sums to {total!r}, not 1")
        if normalize and total != 1.0:
            values = values / total
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "pmf", tuple(float(v) for v in values))

    @classmethod
    def uniform(cls, categories: Sequence[str]) -> Profile:
        cats = _check_categories(categories)
        return cls(cats, [1.0 / len(cats)] * len(cats))

    @classmethod
    def from_values(cls, pmf: Sequence[float], prefix: str = "c") -> Profile:
        """Build a profile with generated labels ``c0, c1, ...``."""
        return cls([f"{prefix}{i}" for i in range(len(pmf))], pmf)

    @property
    def n(self) -> int:
        return len(self.categories)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.pmf, dtype=float)
        arr.setflags(write=False)
        return arr

    def support(self) -> np.ndarray:
        return self.array > 0

    def aligned_to(self, categories: Sequence[str]) -> Profile:
        """Re-express over ``categories``, zero-filling labels this profile lacks.

        Every category with positive mass here must appear in ``categories``.
        """
        cats = _check_categories(categories)
        mass = dict(zip(self.categories, self.pmf))
        dropped = [c for c, v in mass.items() if v > 0 and c not in cats]
        if dropped:
            raise CategoryMismatch(f"categories {dropped} carry mass but are not in the target list")
        return Profile(cats, [mass.get(c, 0.0) for c in cats])

    def canonical(self) -> Profile:
        """Same profile with categories sorted lexicographically."""
        return self.aligned_to(sorted(self.categories))


@dataclass(frozen=True)
class CategoryCounts:
    """Occurrence counts per category, e.g. an attacker's tally of observed queries."""

    categories: tuple[str, ...]
    counts: tuple[int, ...]

    def __init__(self, categories: Sequence[str], counts: Sequence[int]):
        cats = _check_categories(categories)
        if len(counts) != len(cats):
            raise InvalidProfile(f"{len(counts)} counts for {len(cats)} categories")
        vals = []
        for c in counts:
            if isinstance(c, bool) or int(c) != c or c < 0:
                raise InvalidProfile(f"counts must be nonnegative integers, got {c!r}")
            vals.append(int(c))
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "counts", tuple(vals))

    @property
    def total(self) -> int:
        return sum(self.counts)


def check_rho(rho: float) -> float:
    """Validate a redundancy (forged fraction of all queries), which must lie in [0, 1)."""
    rho = float(rho)
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"redundancy must lie in [0, 1), got {rho!r}")
    return rho


def _same_categories(*profiles: Profile) -> None:
    first = profiles[0].categories
    for other in profiles[1:]:
        if other.categories != first:
            raise CategoryMismatch(
                f"category lists differ: {list(first)} vs {list(other.categories)}"
            )


def _entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _kl_bits(p: np.ndarray, ref: np.ndarray) -> float:
    mask = p > 0
    if np.any(ref[mask] == 0):
        return math.inf
    pm = p[mask]
    d = float(np.sum(pm * np.log2(pm / ref[mask])))
    # rounding can leave a tiny negative value when p ~ ref
    return max(d, 0.0)


def entropy(p: Profile) -> float:
    """Shannon entropy in bits, using 0 log 0 = 0."""
    h = _entropy_bits(p.array)
    return min(max(h, 0.0), math.log2(p.n))


def kl_divergence(p: Profile, ref: Profile) -> float:
    """D(p || ref) in bits; ``math.inf`` when p puts mass where ref has none."""
    _same_categories(p, ref)
    return _kl_bits(p.array, ref.array)


def divergence_from_uniform(p: Profile) -> float:
    """D(p || u) = log2 n - H(p) for the uniform profile u."""
    return math.log2(p.n) - _entropy_bits(p.array)


def mix(q: Profile, r: Profile, rho: float) -> Profile:
    """The apparent profile (1 - rho) q + rho r seen when a fraction rho of queries is forged from r."""
    _same_categories(q, r)
    rho = check_rho(rho)
    s = (1.0 - rho) * q.array + rho * r.array
    return Profile(q.categories, s, normalize=False)


def privacy_risk(q: Profile, r: Profile, rho: float, p: Profile) -> float:
    """Divergence of the apparent profile from the population profile p."""
    _same_categories(q, r, p)
    return kl_divergence(mix(q, r, rho), p)


def estimate_profile(counts: CategoryCounts) -> Profile:
    """Relative-frequency estimate of a profile from category counts."""
    k = counts.total
    if k == 0:
        raise EmptyLog("cannot estimate a profile from zero observations")
    return Profile(counts.categories, [c / k for c in counts.counts], normalize=False)
