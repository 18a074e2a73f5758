import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from oracles import trilinear_loop
from eddymean.dynamics import SolverParams
from eddymean.estimates import (
    F_PIECES,
    LatticeTruncation,
    case1_majorant_check,
    drift_norm,
    duhamel_difference,
    growth_study,
    kernel_max,
    kernel_max_grid,
    lipschitz_ratio,
    piece_value,
    run_estimates,
    trilinear_F_ratio,
    trilinear_G_ratio,
)
from eddymean.initdata import init_data
from eddymean.spectral import GridSpec


def br(x, s):
    return (1 + x * x) ** (s / 2)


def norm2(n):
    return math.hypot(*n)


class TestKernelMax:
    def test_alpha_one(self):
        assert kernel_max(1.0) == pytest.approx(1 / math.e, rel=1e-15)

    def test_small_alpha_limit(self):
        assert kernel_max(1e-9) == pytest.approx(1.0, abs=1e-7)

    @pytest.mark.parametrize("alpha", [0.5, 0.76, 0.8, 0.99])
    def test_grid_search(self, alpha):
        assert abs(kernel_max_grid(alpha) - kernel_max(alpha)) < 1e-10

    @pytest.mark.parametrize("alpha", [0.3, 0.8])
    def test_bounded_optimiser(self, alpha):
        res = minimize_scalar(lambda x: -(x**alpha) * math.exp(-x), bounds=(0, 10), method="bounded", options={"xatol": 1e-12})
        assert res.x == pytest.approx(alpha, abs=1e-5)
        assert -res.fun == pytest.approx(kernel_max(alpha), rel=1e-10)

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
    def test_out_of_range(self, alpha):
        with pytest.raises(ValueError):
            kernel_max(alpha)


def _dict2(f, M):
    return {(a - M, b - M): f[a, b] for a in range(2 * M + 1) for b in range(2 * M + 1) if (a, b) != (M, M)}


def _dict1(f, M):
    return {m - M: f[m] for m in range(2 * M + 1) if m != M}


class TestTrilinearPieces:
    @pytest.mark.parametrize("s", [0.0, 1.0])
    @pytest.mark.parametrize("piece", ["G", "advection", "zonal", "mean-coupling", "mean-coupling-k1"])
    def test_against_brute_force(self, piece, s):
        M, alpha = 4, 0.8
        tr = LatticeTruncation(M=M, s=s, alpha=alpha)
        rng = np.random.default_rng(4)
        f1 = np.abs(rng.standard_normal((2 * M + 1, 2 * M + 1)))
        f1[M, M] = 0
        one_d = piece.startswith("mean")
        f2 = np.abs(rng.standard_normal(2 * M + 1 if one_d else (2 * M + 1, 2 * M + 1)))
        if one_d:
            f2[M] = 0
        else:
            f2[M, M] = 0
        d1 = _dict2(f1, M)
        d2 = _dict1(f2, M) if one_d else _dict2(f2, M)
        if piece == "G":
            def weight(k, h, m):
                return br(k, s) / (abs(k) ** (2 * alpha - 1) * norm2(h) * norm2(m) * br(norm2(h), s) * br(norm2(m), s))
            constraint = lambda h, m: h[1] + m[1] if h[0] + m[0] == 0 else None
        elif piece == "advection":
            def weight(k, h, m):
                return norm2(m) / norm2(h) * br(norm2(k), s) / (br(norm2(h), s) * br(norm2(m), s) * norm2(k) ** (2 * alpha))
            constraint = lambda h, m: (h[0] + m[0], h[1] + m[1])
        elif piece == "zonal":
            def weight(k, h, m):
                return abs(k) * br(k, s) / (norm2(h) * br(norm2(h), s) * br(norm2(m), s) * abs(k) ** (2 * alpha))
            constraint = lambda h, m: h[1] + m[1] if h[0] + m[0] == 0 else None
        else:
            top = (lambda h: norm2(h)) if piece == "mean-coupling" else (lambda h: abs(h[0]))
            def weight(k, h, m):
                return top(h) / (br(norm2(h), s) * br(m, s)) * br(norm2(k), s) / norm2(k) ** (2 * alpha)
            constraint = lambda h, m: (h[0], h[1] + m)
        n1 = math.sqrt(sum(v * v for v in d1.values()))
        n2 = math.sqrt(sum(v * v for v in d2.values()))
        ref = trilinear_loop(d1, d2, weight, constraint, M) / (n1 * n2)
        assert piece_value(tr, piece, f1, f2) == pytest.approx(ref, rel=1e-12)

    def test_zero_inputs(self):
        tr = LatticeTruncation(M=4)
        z = np.zeros((9, 9))
        one = np.ones((9, 9))
        assert piece_value(tr, "G", z, one) == 0.0
        assert piece_value(tr, "advection", one, z) == 0.0
        assert piece_value(tr, "mean-coupling", one, np.zeros(9)) == 0.0

    @pytest.mark.parametrize("s, expected", [(0.0, 1 / (2**0.6 * 2)), (1.0, math.sqrt(5) / (2**0.6 * 2 * 3))])
    def test_G_single_modes(self, s, expected):
        # h = (1, 1), m = (-1, 1): k2 = 2, |h| = |m| = sqrt 2
        M = 4
        f1 = np.zeros((9, 9))
        f2 = np.zeros((9, 9))
        f1[M + 1, M + 1] = 1
        f2[M - 1, M + 1] = 1
        assert piece_value(LatticeTruncation(M=M, s=s), "G", f1, f2) == pytest.approx(expected, rel=1e-14)

    def test_advection_single_modes(self):
        # h = (1, 0), m = (0, 1): weight (|m|/|h|) / |k|^1.6 with |k| = sqrt 2
        M = 4
        f1 = np.zeros((9, 9))
        f2 = np.zeros((9, 9))
        f1[M + 1, M] = 1
        f2[M, M + 1] = 1
        assert piece_value(LatticeTruncation(M=M), "advection", f1, f2) == pytest.approx(2**-0.8, rel=1e-14)

    @pytest.mark.parametrize("M", [8, 16, 32])
    def test_mean_coupling_majorant_is_unbounded(self, M):
        # h = (1, -M), m2 = M lands on k = (1, 0): weight |h| / |k|^(2 alpha) = sqrt(1 + M^2)
        f1 = np.zeros((2 * M + 1, 2 * M + 1))
        f2 = np.zeros(2 * M + 1)
        f1[M + 1, 0] = 1
        f2[2 * M] = 1
        assert piece_value(LatticeTruncation(M=M), "mean-coupling", f1, f2) == pytest.approx(math.sqrt(1 + M * M))
        assert piece_value(LatticeTruncation(M=M), "mean-coupling-k1", f1, f2) == pytest.approx(1.0)


class TestDrift:
    @pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0])
    def test_norm_is_c0(self, alpha):
        assert drift_norm(LatticeTruncation(M=8, alpha=alpha, c0=0.7)) == pytest.approx(0.7)

    def test_small_alpha_grows(self):
        assert drift_norm(LatticeTruncation(M=8, alpha=0.3, c0=1.0)) == pytest.approx((8 * math.sqrt(2)) ** 0.4)

    def test_sampled_ratio_below_norm(self):
        stats = trilinear_F_ratio(LatticeTruncation(M=8, c0=0.7), "drift")
        assert stats.random_max <= 0.7 and stats.extremal_max == pytest.approx(0.7)


class TestSampling:
    def test_deterministic_and_sane(self):
        tr = LatticeTruncation(M=6, trials=12, seed=3)
        a, b = trilinear_G_ratio(tr), trilinear_G_ratio(tr)
        assert a == b
        assert 0 <= a.random_mean <= a.random_p95 <= a.random_max <= a.max
        assert all(math.isfinite(v) for v in (a.random_max, a.extremal_max))

    @pytest.mark.parametrize("piece", F_PIECES)
    def test_statistics_finite(self, piece):
        st_ = trilinear_F_ratio(LatticeTruncation(M=6, trials=10), piece)
        assert math.isfinite(st_.max) and st_.max >= 0

    def test_unknown_piece(self):
        with pytest.raises(ValueError):
            trilinear_F_ratio(LatticeTruncation(M=4), "pressure")

    @pytest.mark.parametrize("kwargs", [{"M": 1}, {"trials": 5}, {"s": -1.0}, {"alpha": 0.0}])
    def test_truncation_validation(self, kwargs):
        with pytest.raises(ValueError):
            LatticeTruncation(**kwargs)

    def test_growth_report(self):
        rep = growth_study(LatticeTruncation(trials=10), "advection", Ms=(4, 8))
        assert rep["growth"] == pytest.approx(rep["max"][1] / rep["max"][0] - 1)


class TestCaseOneMajorant:
    @pytest.mark.parametrize("piece", ["G", "advection"])
    @pytest.mark.parametrize("s", [0.0, 0.5])
    def test_terms_below_majorant(self, piece, s):
        rep = case1_majorant_check(LatticeTruncation(M=16, s=s), piece)
        assert rep["pairs"] > 0
        assert rep["max_quotient"] <= 1.0


class TestLipschitz:
    def _pair(self, seed=0):
        g = GridSpec(16)
        a = init_data(g, seed=seed, amplitude=0.3)
        b = init_data(g, seed=seed + 1, amplitude=0.3)
        return g, (a[0].coeffs, a[1].coeffs), (b[0].coeffs, b[1].coeffs)

    def test_identical_states(self):
        g, a, _ = self._pair()
        d = duhamel_difference(g, a, a, 0.01, SolverParams())
        assert d["mu"] == 0 and d["gamma"] == 0 and d["ratio"] == 0

    def test_equal_eddies_leave_mean_map_unchanged(self):
        g, a, b = self._pair()
        d = duhamel_difference(g, a, (b[0], a[1]), 0.01, SolverParams())
        assert d["mu"] == 0.0 and d["gamma"] > 0

    def test_linear_in_radius(self):
        tr = LatticeTruncation(M=4, trials=10)
        Rs = np.array([0.25, 0.5, 1.0])
        means = np.array([lipschitz_ratio(tr, R)["raw_mean"] for R in Rs])
        slope = np.polyfit(np.log(Rs), np.log(means), 1)[0]
        assert abs(slope - 1) < 0.15

    def test_shared_eddy_option(self):
        rep = lipschitz_ratio(LatticeTruncation(M=4, trials=10), 0.5, same_gamma=True)
        assert rep["raw_max"] > 0 and math.isfinite(rep["scaled_max"])

    @settings(max_examples=10, deadline=None)
    @given(st.floats(0.01, 2.0))
    def test_scaled_ratio_nonnegative(self, R):
        rep = lipschitz_ratio(LatticeTruncation(M=3, trials=10), R)
        assert rep["scaled_max"] >= rep["scaled_mean"] >= 0


def test_report_is_json():
    rep = run_estimates(LatticeTruncation(M=4, trials=10), Ms=(4, 6), lipschitz_trials=10)
    text = json.dumps(rep)
    assert "growth" in json.loads(text)
