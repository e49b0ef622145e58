"""Optimal forged-query profiles and the privacy-redundancy tradeoff.

For a user profile q, population profile p and redundancy rho, the forged
profile r is chosen to minimize D((1 - rho) q + rho r || p).  Writing the
apparent profile as s = (1 - rho) q + rho r turns this into minimizing
D(s || p) subject to sum(s) = 1 and s >= (1 - rho) q.  The KKT conditions give

    s_i = max((1 - rho) q_i, lam * p_i)

for a water level lam in [0, 1] fixed by sum(s) = 1, which is found here by
bisection.  ``oracle_solve`` reaches the same optimum by exponentiated
gradient descent over r and exists only as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidGrid, UnsupportedCategory
from .profile import Profile, _kl_bits, _same_categories, check_rho, kl_divergence, mix

BISECTION_TOL = 1e-12
BISECTION_MAX_ITERS = 200
KKT_TOL = 1e-6
ACTIVE_MARGIN = 1e-9
RHO_CAP = 1.0 - 1e-9


@dataclass(frozen=True)
class TradeoffPoint:
    rho: float
    risk: float
    r_opt: Profile
    s_opt: Profile
    lam: float
    solver_iters: int


@dataclass(frozen=True)
class SolveReport:
    """Residuals certifying that a TradeoffPoint satisfies the KKT conditions."""

    kkt_stationarity_residual: float
    primal_feasibility_residual: float
    complementary_slackness_residual: float
    oracle_gap_bits: float | None = None

    @property
    def certified(self) -> bool:
        return (
            self.kkt_stationarity_residual < KKT_TOL
            and self.primal_feasibility_residual < KKT_TOL
            and self.complementary_slackness_residual < KKT_TOL
        )


def _check_support(q: Profile, p: Profile) -> None:
    bad = [c for c, qi, pi in zip(q.categories, q.pmf, p.pmf) if qi > 0 and pi == 0]
    if bad:
        raise UnsupportedCategory(
            f"population profile has zero mass on user categories {bad}; risk is infinite for every r"
        )


def critical_redundancy(q: Profile, p: Profile) -> float:
    """Smallest redundancy at which the apparent profile can equal p exactly.

    Returns 1.0 when q has mass outside the support of p, since no rho < 1
    reaches zero risk then.
    """
    _same_categories(q, p)
    qa, pa = q.array, p.array
    pos = qa > 0
    if np.any(pa[pos] == 0):
        return 1.0
    return max(0.0, 1.0 - float(np.min(pa[pos] / qa[pos])))


def _point(q: Profile, p: Profile, rho: float, r: np.ndarray, lam: float, iters: int) -> TradeoffPoint:
    r_opt = Profile(q.categories, r / r.sum())
    s_opt = mix(q, r_opt, rho)
    return TradeoffPoint(rho, kl_divergence(s_opt, p), r_opt, s_opt, lam, iters)


def solve(q: Profile, p: Profile, rho: float) -> TradeoffPoint:
    """Minimum privacy risk at redundancy ``rho`` and the forged profile achieving it.

    At rho = 0 every r is optimal; p is returned as the forged profile by
    convention, with the water level at its rho -> 0+ limit.
    """
    _same_categories(q, p)
    rho = check_rho(rho)
    _check_support(q, p)
    qa, pa = q.array, p.array

    if rho == 0.0:
        pos = pa > 0
        lam = min(1.0, float(np.min(qa[pos] / pa[pos])))
        return TradeoffPoint(0.0, kl_divergence(q, p), p, q, lam, 0)

    floor = (1.0 - rho) * qa
    if rho >= critical_redundancy(q, p):
        # (1 - rho) q <= p componentwise, so the apparent profile can be p itself
        r = np.maximum(pa - floor, 0.0)
        return TradeoffPoint(rho, 0.0, Profile(q.categories, r / r.sum()), p, 1.0, 0)

    lo, hi = 0.0, 1.0
    lam = 0.5
    iters = 0
    for iters in range(1, BISECTION_MAX_ITERS + 1):
        lam = 0.5 * (lo + hi)
        total = float(np.maximum(floor, lam * pa).sum())
        if abs(total - 1.0) < BISECTION_TOL:
            break
        if total < 1.0:
            lo = lam
        else:
            hi = lam
    lam = _polish_level(floor, pa, lam)
    return _point(q, p, rho, np.maximum(lam * pa - floor, 0.0), lam, iters)


def _polish_level(floor: np.ndarray, pa: np.ndarray, lam: float) -> float:
    # Once bisection has fixed which components sit above their floor, the
    # level solves a linear equation on that set.
    active = lam * pa > floor
    if not active.any():
        return lam
    exact = (1.0 - float(floor[~active].sum())) / float(pa[active].sum())
    if 0.0 < exact <= 1.0 and abs(float(np.maximum(floor, exact * pa).sum()) - 1.0) < BISECTION_TOL:
        return exact
    return lam


def check_grid(grid: Sequence[float]) -> list[float]:
    values = [float(g) for g in grid]
    if not values:
        raise InvalidGrid("grid is empty")
    for g in values:
        if not 0.0 <= g < 1.0:
            raise InvalidGrid(f"grid value {g!r} outside [0, 1)")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidGrid("grid values must be strictly increasing")
    return values


def linear_grid(start: float, stop: float, steps: int) -> list[float]:
    """``steps`` evenly spaced redundancies from start to stop inclusive, capped below 1."""
    if steps < 1:
        raise InvalidGrid("a grid needs at least one step")
    if not 0.0 <= start < stop < 1.0:
        raise InvalidGrid(f"need 0 <= start < stop < 1, got start={start!r}, stop={stop!r}")
    if steps == 1:
        return [float(start)]
    return [min(float(x), RHO_CAP) for x in np.linspace(start, stop, steps)]


def tradeoff_curve(q: Profile, p: Profile, grid: Sequence[float]) -> list[TradeoffPoint]:
    """Solve at every grid redundancy, in grid order."""
    return [solve(q, p, rho) for rho in check_grid(grid)]


def verify_kkt(
    q: Profile,
    p: Profile,
    rho: float,
    point: TradeoffPoint,
    oracle_iterations: int | None = None,
    seed: int = 0,
) -> SolveReport:
    """Measure how far ``point`` is from satisfying the optimality conditions.

    The apparent profile is rebuilt from ``point.r_opt`` so that the forged
    profile itself is what gets certified.  Never raises on a bad point; the
    residuals simply come out large (possibly infinite).
    """
    rho = float(rho)
    qa, pa = q.array, p.array
    r = np.asarray(point.r_opt.pmf, dtype=float)
    floor = (1.0 - rho) * qa
    s = floor + rho * r
    lam = point.lam

    with np.errstate(divide="ignore", invalid="ignore"):
        log_lam = math.log2(lam) if lam > 0 else -math.inf
        log_ratio = np.where(pa > 0, np.log2(s / np.where(pa > 0, pa, 1.0)), np.inf)
        log_ratio = np.where((pa == 0) & (s == 0), -np.inf, log_ratio)

        active = s > floor + ACTIVE_MARGIN
        stationarity = 0.0
        if np.any(active):
            stationarity = float(np.max(np.abs(log_ratio[active] - log_lam)))

        feasibility = max(abs(float(s.sum()) - 1.0), float(np.max(np.maximum(floor - s, 0.0))))

        gap = s - floor
        slack = 0.0
        pos = gap > 0
        if np.any(pos):
            violation = np.maximum(log_lam - log_ratio[pos], 0.0)
            slack = float(np.max(np.minimum(gap[pos], violation)))

    oracle_gap = None
    if oracle_iterations is not None:
        ref = oracle_solve(q, p, rho, oracle_iterations, seed)
        oracle_gap = abs(ref.risk - point.risk)
    return SolveReport(stationarity, feasibility, max(slack, 0.0), oracle_gap)


def oracle_solve(
    q: Profile,
    p: Profile,
    rho: float,
    iterations: int = 100_000,
    seed: int = 0,
    tol: float = 1e-15,
) -> TradeoffPoint:
    """Minimize the risk over r by exponentiated gradient descent.

    Slow, generic, and deliberately unaware of the water-filling structure.
    The step size 1/rho comes from the risk being rho-smooth relative to the
    entropy of r.  Starts from a seeded random point on the support of p and
    stops after ``iterations`` steps or once no coordinate moves by more than
    ``tol``.  ``lam`` is reported as NaN since no multiplier is tracked.
    """
    _same_categories(q, p)
    rho = check_rho(rho)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    _check_support(q, p)
    qa, pa = q.array, p.array
    if rho == 0.0:
        return TradeoffPoint(0.0, kl_divergence(q, p), p, q, math.nan, 0)

    rng = np.random.default_rng(seed)
    support = pa > 0
    r = np.zeros_like(pa)
    r[support] = rng.dirichlet(np.ones(int(support.sum())))
    floor = (1.0 - rho) * qa
    step = 1.0 / rho

    it = 0
    with np.errstate(divide="ignore"):
        for it in range(1, iterations + 1):
            s = floor + rho * r
            grad = rho * (np.log(s[support] / pa[support]) + 1.0)
            logits = np.log(r[support]) - step * grad
            r_new = np.zeros_like(r)
            r_new[support] = np.exp(logits - logits.max())
            r_new /= r_new.sum()
            moved = float(np.max(np.abs(r_new - r)))
            r = r_new
            if moved < tol:
                break

    r_opt = Profile(q.categories, r / r.sum())
    s_opt = mix(q, r_opt, rho)
    return TradeoffPoint(rho, _kl_bits(s_opt.array, pa), r_opt, s_opt, math.nan, it)
