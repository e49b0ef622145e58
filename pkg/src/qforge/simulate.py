"""Simulated query streams mixing genuine and forged queries.

Random draws come from the PCG64 bit generator (PCG XSL-RR 128/64) seeded
through ``numpy.random.PCG64(seed)``.  Only its raw 64-bit outputs are used,
and each is mapped to a double in [0, 1) as ``(x >> 11) * 2**-53``, so a
stream depends on nothing but the seed and the draw order.  Each event
consumes exactly two outputs: first the forged-flag uniform, then the
category uniform.  The category is found by inverse-CDF lookup in the
profile the event is drawn from.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterator, Sequence, overload

import numpy as np

from .errors import EmptyLog
from .profile import (
    CategoryCounts,
    Profile,
    _same_categories,
    check_rho,
    estimate_profile,
    kl_divergence,
    mix,
)

_DOUBLE_SCALE = 2.0**-53


@dataclass(frozen=True)
class QueryEvent:
    seq: int
    category_index: int
    forged: bool


@dataclass(frozen=True)
class SimulationConfig:
    q: Profile
    r: Profile
    rho: float
    total_queries: int
    seed: int
    exact_forgery: bool = False

    def __post_init__(self):
        _same_categories(self.q, self.r)
        check_rho(self.rho)
        if self.total_queries < 1:
            raise ValueError("total_queries must be >= 1")


@dataclass(frozen=True)
class ConvergenceReport:
    n_observed: int
    empirical: Profile
    div_to_apparent: float
    measured_risk: float


class QueryStream(Sequence[QueryEvent]):
    """An immutable, column-stored sequence of query events.

    Events are materialized as QueryEvent objects only on access.
    """

    def __init__(self, categories: Sequence[str], category_index, forged):
        self.categories = tuple(categories)
        self.category_index = np.asarray(category_index, dtype=np.int64)
        self.forged = np.asarray(forged, dtype=bool)
        if self.category_index.shape != self.forged.shape or self.category_index.ndim != 1:
            raise ValueError("category and forged columns must be 1-d and equally long")
        self.category_index.setflags(write=False)
        self.forged.setflags(write=False)

    def __len__(self) -> int:
        return int(self.category_index.size)

    @overload
    def __getitem__(self, i: int) -> QueryEvent: ...
    @overload
    def __getitem__(self, i: slice) -> list[QueryEvent]: ...

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return QueryEvent(i, int(self.category_index[i]), bool(self.forged[i]))

    def __iter__(self) -> Iterator[QueryEvent]:
        for i, (c, f) in enumerate(zip(self.category_index.tolist(), self.forged.tolist())):
            yield QueryEvent(i, c, f)

    @classmethod
    def from_events(cls, categories: Sequence[str], events: Sequence[QueryEvent]) -> QueryStream:
        seqs = [e.seq for e in events]
        if any(b <= a for a, b in zip(seqs, seqs[1:])):
            raise ValueError("event sequence numbers must be strictly increasing")
        return cls(categories, [e.category_index for e in events], [e.forged for e in events])

    def write_jsonl(self, fh: IO[str]) -> None:
        """One ``{"seq", "category", "forged"}`` object per line."""
        for ev in self:
            fh.write(json.dumps({"seq": ev.seq, "category": self.categories[ev.category_index], "forged": ev.forged}))
            fh.write("\n")


def uniform_doubles(seed: int, count: int) -> np.ndarray:
    raw = np.random.PCG64(seed).random_raw(count)
    return (raw >> np.uint64(11)).astype(np.float64) * _DOUBLE_SCALE


def _inverse_cdf(pmf: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(pmf)
    last = int(np.flatnonzero(pmf > 0)[-1])
    cdf[last:] = 1.0
    return np.searchsorted(cdf, u, side="right")


def generate_stream(cfg: SimulationConfig) -> QueryStream:
    """Draw ``cfg.total_queries`` events, each forged independently with probability rho.

    With ``cfg.exact_forgery`` the forged events are instead interleaved
    deterministically so that exactly floor(rho N) of them are forged; the
    flag uniform is still consumed to keep category draws aligned.
    """
    n_events = cfg.total_queries
    u = uniform_doubles(cfg.seed, 2 * n_events).reshape(n_events, 2)
    if cfg.exact_forgery:
        idx = np.arange(n_events + 1, dtype=np.float64)
        marks = np.floor(idx * cfg.rho)
        forged = marks[1:] > marks[:-1]
    else:
        forged = u[:, 0] < cfg.rho
    from_q = _inverse_cdf(cfg.q.array, u[:, 1])
    from_r = _inverse_cdf(cfg.r.array, u[:, 1])
    cats = np.where(forged, from_r, from_q)
    return QueryStream(cfg.q.categories, cats, forged)


def attacker_view(stream: QueryStream) -> CategoryCounts:
    """Per-category counts, blind to which queries were forged."""
    if len(stream) == 0:
        raise EmptyLog("the stream contains no queries")
    counts = np.bincount(stream.category_index, minlength=len(stream.categories))
    return CategoryCounts(stream.categories, counts.tolist())


def convergence_report(stream: QueryStream, q: Profile, r: Profile, rho: float, p: Profile) -> ConvergenceReport:
    empirical = estimate_profile(attacker_view(stream))
    return ConvergenceReport(
        n_observed=len(stream),
        empirical=empirical,
        div_to_apparent=kl_divergence(empirical, mix(q, r, rho)),
        measured_risk=kl_divergence(empirical, p),
    )
