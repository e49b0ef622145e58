import dataclasses
import math

import numpy as np
import pytest

from conftest import random_instance, random_profile
from qforge import (
    CategoryMismatch,
    InvalidGrid,
    Profile,
    UnsupportedCategory,
    critical_redundancy,
    kl_divergence,
    linear_grid,
    mix,
    oracle_solve,
    solve,
    tradeoff_curve,
    verify_kkt,
)


def grid_search_n2(q, p, rho, step=1e-6):
    """Minimize the risk over r = (x, 1 - x) on a dense grid."""
    x = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    s1 = (1 - rho) * q[0] + rho * x
    s2 = 1.0 - s1
    with np.errstate(divide="ignore", invalid="ignore"):
        risk = np.where(s1 > 0, s1 * np.log2(s1 / p[0]), 0.0) + np.where(s2 > 0, s2 * np.log2(s2 / p[1]), 0.0)
    i = int(np.argmin(risk))
    return float(risk[i]), float(x[i])


def grid_search_n3(q, p, rho, step=2e-3, refine=3):
    """Coarse grid over the 2-simplex, then repeated local refinement."""
    q, p = np.asarray(q), np.asarray(p)

    def risk(r):
        s = (1 - rho) * q + rho * r
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(s > 0, s * np.log2(s / p), 0.0)
        return terms.sum(axis=-1)

    centre, width = np.array([1 / 3, 1 / 3]), 1.0
    for _ in range(refine + 1):
        a = np.arange(centre[0] - width, centre[0] + width + step * width, step * width)
        b = np.arange(centre[1] - width, centre[1] + width + step * width, step * width)
        A, B = np.meshgrid(np.clip(a, 0, 1), np.clip(b, 0, 1))
        ok = A + B <= 1.0
        r = np.stack([A[ok], B[ok], 1.0 - A[ok] - B[ok]], axis=-1)
        vals = risk(r)
        i = int(np.argmin(vals))
        centre, width = r[i, :2], width * step * 4
    return float(vals[i]), r[i]


def feasible_forgery(q, p, rho):
    """(p - (1 - rho) q) / rho when it is a valid PMF, else None."""
    r = (np.asarray(p) - (1 - rho) * np.asarray(q)) / rho
    return r if np.all(r >= -1e-15) else None


def crit_by_bisection(q, p, iters=200):
    lo, hi = 0.0, 1.0
    if feasible_forgery(q, p, 1 - 1e-15) is None:
        return 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid > 0 and feasible_forgery(q, p, mid) is not None:
            hi = mid
        else:
            lo = mid
    return hi


class TestSolveExamples:
    def test_already_at_population(self, rng):
        p = random_profile(rng, 6)
        for rho in (0.0, 0.2, 0.7):
            pt = solve(p, p, rho)
            assert pt.risk == pytest.approx(0.0, abs=1e-15)
            assert np.allclose(pt.r_opt.array, p.array, atol=1e-12)

    def test_rho_zero_convention(self, two_cat):
        q, p = two_cat
        pt = solve(q, p, 0.0)
        assert pt.risk == kl_divergence(q, p)
        assert pt.r_opt == p
        assert pt.s_opt == q

    def test_exact_mixing_at_half(self, two_cat):
        q, p = two_cat
        oracle = feasible_forgery(q.pmf, p.pmf, 0.5)
        assert oracle is not None and np.allclose(oracle, [0.1, 0.9], atol=1e-15)
        pt = solve(q, p, 0.5)
        assert pt.risk == pytest.approx(0.0, abs=1e-15)
        assert pt.r_opt.pmf == pytest.approx(tuple(oracle), abs=1e-9)

    def test_rho_point_two_against_grid_and_descent(self, two_cat):
        q, p = two_cat
        grid_risk, grid_x = grid_search_n2(q.pmf, p.pmf, 0.2)
        eg = oracle_solve(q, p, 0.2, iterations=10**6, seed=3)
        # frozen from both oracles: r* = (0, 1), s* = (0.72, 0.28)
        assert grid_x == 0.0
        assert grid_risk == pytest.approx(0.144549189439869, abs=1e-12)
        assert eg.risk == pytest.approx(0.144549189439869, abs=1e-12)
        pt = solve(q, p, 0.2)
        assert pt.risk == pytest.approx(0.144549189439869, abs=1e-12)
        assert pt.r_opt.pmf == pytest.approx((0.0, 1.0), abs=1e-12)
        assert pt.lam == pytest.approx(0.56, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_n3_against_grid(self, seed):
        rng = np.random.default_rng(100 + seed)
        q, p = random_profile(rng, 3), random_profile(rng, 3)
        rho = float(rng.uniform(0.05, 0.9))
        grid_risk, _ = grid_search_n3(q.pmf, p.pmf, rho)
        pt = solve(q, p, rho)
        assert pt.risk <= grid_risk + 1e-12
        assert pt.risk == pytest.approx(grid_risk, abs=1e-6)

    def test_unsupported_category(self):
        q, p = Profile.from_values([0.5, 0.5]), Profile.from_values([1.0, 0.0])
        with pytest.raises(UnsupportedCategory):
            solve(q, p, 0.5)
        with pytest.raises(UnsupportedCategory):
            oracle_solve(q, p, 0.5, 10)

    def test_population_zero_where_user_zero_is_fine(self):
        q, p = Profile.from_values([0.7, 0.3, 0.0]), Profile.from_values([0.4, 0.6, 0.0])
        pt = solve(q, p, 0.3)
        assert pt.r_opt.pmf[2] == 0.0
        assert math.isfinite(pt.risk)

    def test_category_mismatch(self):
        with pytest.raises(CategoryMismatch):
            solve(Profile(["a", "b"], [0.5, 0.5]), Profile(["a", "c"], [0.5, 0.5]), 0.1)


class TestCriticalRedundancy:
    def test_equal_profiles(self, rng):
        p = random_profile(rng, 5)
        assert critical_redundancy(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_two_category(self, two_cat):
        q, p = two_cat
        assert crit_by_bisection(q.pmf, p.pmf) == pytest.approx(4 / 9, abs=1e-12)
        assert critical_redundancy(q, p) == pytest.approx(4 / 9, abs=1e-12)

    def test_support_violation(self):
        assert critical_redundancy(Profile.from_values([0.5, 0.5]), Profile.from_values([1, 0])) == 1.0

    def test_matches_bisection_oracle(self, rng):
        for _ in range(50):
            q, p = random_instance(rng, 10)
            assert critical_redundancy(q, p) == pytest.approx(crit_by_bisection(q.pmf, p.pmf), abs=1e-12)


class TestTradeoffCurve:
    def test_identical_profiles(self, rng):
        p = random_profile(rng, 4)
        assert all(pt.risk < 1e-15 for pt in tradeoff_curve(p, p, [0.0, 0.3, 0.6]))

    def test_single_zero(self, two_cat):
        q, p = two_cat
        (pt,) = tradeoff_curve(q, p, [0.0])
        assert pt.risk == kl_divergence(q, p)

    def test_hand_instance(self, two_cat):
        q, p = two_cat
        d = 0.9 * math.log2(1.8) + 0.1 * math.log2(0.2)
        assert d == pytest.approx(0.531, abs=5e-4)
        risks = [pt.risk for pt in tradeoff_curve(q, p, [0.0, 4 / 9, 0.9])]
        assert risks[0] == pytest.approx(d, abs=1e-12)
        assert risks[1] < 1e-9 and risks[2] < 1e-9

    @pytest.mark.parametrize("grid", [[], [0.2, 0.1], [0.1, 0.1], [0.5, 1.0], [-0.1, 0.2]])
    def test_bad_grids(self, two_cat, grid):
        with pytest.raises(InvalidGrid):
            tradeoff_curve(*two_cat, grid)

    def test_linear_grid(self):
        assert linear_grid(0.0, 0.8, 9) == pytest.approx([0.1 * i for i in range(9)])
        with pytest.raises(InvalidGrid):
            linear_grid(0.5, 0.2, 3)

    def test_monotone_and_convex(self, rng):
        grid = list(np.linspace(0, 0.98, 50))
        for _ in range(20):
            q, p = random_instance(rng)
            risks = [pt.risk for pt in tradeoff_curve(q, p, grid)]
            for a, b in zip(risks, risks[1:]):
                assert b <= a + 1e-9
            for a, b, c in zip(risks, risks[1:], risks[2:]):
                assert b <= (a + c) / 2 + 1e-9


class TestPointInvariants:
    def test_invariants_random(self, rng):
        for _ in range(100):
            q, p = random_instance(rng)
            rho = float(rng.uniform(0, 0.999))
            pt = solve(q, p, rho)
            assert np.max(np.abs(pt.s_opt.array - mix(q, pt.r_opt, rho).array)) < 1e-9
            assert abs(pt.risk - kl_divergence(pt.s_opt, p)) < 1e-9
            assert pt.risk >= 0.0
            assert 0.0 <= pt.lam <= 1.0
            crit = critical_redundancy(q, p)
            assert (pt.lam == 1.0) == (rho >= crit)


class TestVerifyKKT:
    def test_certified(self, rng):
        for _ in range(100):
            q, p = random_instance(rng)
            rho = float(rng.uniform(0, 0.999))
            rep = verify_kkt(q, p, rho, solve(q, p, rho))
            assert rep.certified
            assert min(rep.kkt_stationarity_residual, rep.primal_feasibility_residual,
                       rep.complementary_slackness_residual) >= 0.0

    def test_perturbed_point_fails(self):
        # frozen from the perturbation experiment: r*(0.3) = (0, 0.1125, 0.8875), lam = 0.8125
        q, p, rho = Profile.from_values([0.5, 0.3, 0.2]), Profile.from_values([0.2, 0.3, 0.5]), 0.3
        pt = solve(q, p, rho)
        assert pt.r_opt.pmf == pytest.approx((0.0, 0.1125, 0.8875), abs=1e-12)
        assert pt.lam == pytest.approx(0.8125, abs=1e-12)
        for j, delta in [(1, 0.01), (1, -0.01), (2, 0.01), (2, -0.01), (0, 0.01)]:
            r = np.array(pt.r_opt.pmf)
            r[j] += delta
            r /= r.sum()
            bad_r = Profile(q.categories, r)
            bad = dataclasses.replace(pt, r_opt=bad_r, s_opt=mix(q, bad_r, rho))
            rep = verify_kkt(q, p, rho, bad)
            worst = max(rep.kkt_stationarity_residual, rep.primal_feasibility_residual,
                        rep.complementary_slackness_residual)
            assert worst > 1e-3
            assert not rep.certified

    def test_past_critical(self, two_cat):
        q, p = two_cat
        for rho in (4 / 9 + 1e-6, 0.5, 0.9):
            pt = solve(q, p, rho)
            rep = verify_kkt(q, p, rho, pt)
            assert pt.lam == 1.0
            assert np.allclose(pt.s_opt.array, p.array, atol=1e-12)
            assert max(rep.kkt_stationarity_residual, rep.primal_feasibility_residual,
                       rep.complementary_slackness_residual) < 1e-9

    def test_oracle_gap_reported(self, two_cat):
        q, p = two_cat
        rep = verify_kkt(q, p, 0.2, solve(q, p, 0.2), oracle_iterations=10_000)
        assert rep.oracle_gap_bits is not None and rep.oracle_gap_bits < 1e-6

    def test_infinite_risk_point_reports(self):
        q, p = Profile.from_values([0.5, 0.5, 0.0]), Profile.from_values([0.5, 0.5, 0.0])
        pt = solve(q, p, 0.5)
        bad_r = Profile.from_values([0.0, 0.0, 1.0])
        bad = dataclasses.replace(pt, r_opt=bad_r, s_opt=mix(q, bad_r, 0.5))
        rep = verify_kkt(q, p, 0.5, bad)
        assert rep.kkt_stationarity_residual == math.inf


class TestOracle:
    def test_identical(self, rng):
        p = random_profile(rng, 5)
        assert oracle_solve(p, p, 0.4, 5000).risk < 1e-12

    def test_agrees_with_solve(self, rng):
        for _ in range(50):
            q, p = random_instance(rng)
            rho = float(rng.uniform(0, 0.999))
            a, b = solve(q, p, rho), oracle_solve(q, p, rho, 200_000, seed=1)
            assert abs(a.risk - b.risk) < 1e-6
            assert np.abs(a.s_opt.array - b.s_opt.array).sum() < 1e-4

    def test_regression_fixture_seed_42(self):
        # recorded at the first certified run; agrees with solve to 1e-15
        rng = np.random.default_rng(42)
        q = Profile.from_values(rng.dirichlet(np.ones(10)))
        p = Profile.from_values(rng.dirichlet(np.ones(10)))
        pt = oracle_solve(q, p, 0.25, 200_000, seed=42)
        assert pt.risk == pytest.approx(0.621156728786796, abs=1e-12)
        assert pt.s_opt.pmf[0] == pytest.approx(0.12346865981205876, abs=1e-10)
        assert pt.s_opt.pmf[7] == pytest.approx(0.160448903633013, abs=1e-10)
        assert critical_redundancy(q, p) == pytest.approx(0.9329792251067452, abs=1e-12)
        assert solve(q, p, 0.25).risk == pytest.approx(pt.risk, abs=1e-12)

    def test_rejects_zero_iterations(self, two_cat):
        with pytest.raises(ValueError):
            oracle_solve(*two_cat, 0.2, iterations=0)
