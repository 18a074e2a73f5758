"""Numerical probes of the multiplier bounds behind the contraction argument.

Every trilinear form here has the shape

    T(f1, f2, g) = sum_{k = h + m} W(k, h, m) f1(h) f2(m) g(k)

on the integer lattice ``{-M..M}^2 minus 0``, with a weight that factors as
``W = A(h) B(m) C(k)``.  For fixed ``f1, f2`` the supremum over unit ``g`` is
the l2 norm of ``w(k) = C(k) sum_{h+m=k} A(h) f1(h) B(m) f2(m)``, a plain
convolution.  The supremum over ``f1, f2`` is sampled.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import fftconvolve

from .dynamics import SolverParams, _model_kernel, eddy_symbol, heat_symbol
from .initdata import init_data
from .integrator import phi_functions
from .spectral import GridSpec, _sobolev_norm_arrays

__all__ = [
    "LatticeTruncation",
    "RatioStats",
    "F_PIECES",
    "SUPPLEMENTARY_PIECES",
    "kernel_max",
    "kernel_max_grid",
    "trilinear_G_ratio",
    "trilinear_F_ratio",
    "piece_value",
    "drift_norm",
    "growth_study",
    "case1_majorant_check",
    "duhamel_difference",
    "lipschitz_ratio",
    "run_estimates",
]

F_PIECES = ("advection", "zonal", "drift", "mean-coupling")
# the mean-coupling term itself carries |h1| = |k1|; the bound above majorises it by |h|
SUPPLEMENTARY_PIECES = ("mean-coupling-k1",)


@dataclass(frozen=True)
class LatticeTruncation:
    M: int = 16
    s: float = 0.0
    alpha: float = 0.8
    trials: int = 100
    seed: int = 0
    c0: float = 1.0

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be at least 2")
        if self.trials < 10:
            raise ValueError("trials must be at least 10")
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    def with_M(self, M: int) -> "LatticeTruncation":
        return LatticeTruncation(M, self.s, self.alpha, self.trials, self.seed, self.c0)


@dataclass(frozen=True)
class RatioStats:
    """Ratios over random trials plus the best structured candidate."""

    M: int
    trials: int
    random_max: float
    random_mean: float
    random_p95: float
    extremal_max: float

    @property
    def max(self) -> float:
        return max(self.random_max, self.extremal_max)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max"] = self.max
        return d


# ---------------------------------------------------------------------------
# elementary kernel
# ---------------------------------------------------------------------------

def kernel_max(alpha: float) -> float:
    """``sup_{x >= 0} x**alpha * exp(-x) = (alpha/e)**alpha``, attained at ``x = alpha``."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    return (alpha / math.e) ** alpha


def kernel_max_grid(alpha: float, x_max: float = 50.0, n_coarse: int = 200_001) -> float:
    """Grid-search value of the same supremum: coarse scan then a fine grid around the argmax."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    f = lambda x: np.exp(alpha * np.log(np.maximum(x, 1e-300)) - x)
    x = np.linspace(0.0, x_max, n_coarse)
    j = int(np.argmax(f(x)))
    h = x[1] - x[0]
    xf = np.linspace(max(x[j] - h, 0.0), x[j] + h, 200_001)
    return float(np.max(f(xf)))


# ---------------------------------------------------------------------------
# lattice helpers
# ---------------------------------------------------------------------------

class _Lattice:
    def __init__(self, M: int, s: float):
        self.M = M
        n = np.arange(-M, M + 1)
        self.n = n
        self.n1 = n[:, None].astype(float)
        self.n2 = n[None, :].astype(float)
        self.absn = np.hypot(self.n1, self.n2)
        self.nonzero = self.absn > 0
        self.safe = np.where(self.nonzero, self.absn, 1.0)
        self.bracket_s = (1.0 + self.absn**2) ** (s / 2)
        self.bracket1_s = (1.0 + n.astype(float) ** 2) ** (s / 2)
        self.zero_row = M  # index of n1 = 0 (or of n = 0 in 1D)


def _conv(a: np.ndarray, b: np.ndarray, M: int) -> np.ndarray:
    """Full linear convolution restricted back to ``{-M..M}^2``."""
    c = fftconvolve(a, b, mode="full")
    return c[M : 3 * M + 1, M : 3 * M + 1]


def _weights(lat: _Lattice, piece: str, alpha: float, s: float, c0: float):
    """Return (A, B, C, kind) with kind in {'full', 'row0', 'ycoupled', 'diag'}."""
    inv_h = np.where(lat.nonzero, 1.0 / (lat.safe * lat.bracket_s), 0.0)
    kpow = np.where(lat.nonzero, lat.bracket_s / lat.safe ** (2 * alpha), 0.0)
    if piece == "G":
        C_row = np.where(lat.n != 0, lat.bracket1_s / np.abs(np.where(lat.n != 0, lat.n, 1)) ** (2 * alpha - 1), 0.0)
        return inv_h, inv_h, C_row, "row0"
    if piece == "advection":
        B = np.where(lat.nonzero, lat.absn / lat.bracket_s, 0.0)
        return inv_h, B, kpow, "full"
    if piece == "zonal":
        B = np.where(lat.nonzero, 1.0 / lat.bracket_s, 0.0)
        k2 = np.abs(lat.n).astype(float)
        C_row = np.where(lat.n != 0, lat.bracket1_s * k2 / np.where(lat.n != 0, k2, 1.0) ** (2 * alpha), 0.0)
        return inv_h, B, C_row, "row0"
    if piece == "mean-coupling":
        A = np.where(lat.nonzero, lat.absn / lat.bracket_s, 0.0)
        B1 = np.where(lat.n != 0, 1.0 / lat.bracket1_s, 0.0)
        return A, B1, kpow, "ycoupled"
    if piece == "mean-coupling-k1":
        A = np.abs(lat.n1) / lat.bracket_s * lat.nonzero
        B1 = np.where(lat.n != 0, 1.0 / lat.bracket1_s, 0.0)
        return A, B1, kpow, "ycoupled"
    if piece == "drift":
        D = np.where(lat.nonzero, c0 * lat.safe ** (1 - 2 * alpha), 0.0)
        return None, None, D, "diag"
    raise ValueError(f"unknown piece {piece!r}")


def _w_vector(lat: _Lattice, weights, f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    A, B, C, kind = weights
    M = lat.M
    if kind == "diag":
        return C * f1
    if kind == "ycoupled":
        # k = (h1, h2 + m2): convolve along the second index only
        a = A * f1
        b = B * f2
        full = fftconvolve(a, b[None, :], mode="full", axes=1)
        return C * full[:, M : 3 * M + 1]
    conv = _conv(A * f1, B * f2, M)
    if kind == "row0":
        return C * conv[lat.zero_row]
    return C * conv


def piece_value(tr: LatticeTruncation, piece: str, f1: np.ndarray, f2: np.ndarray | None = None) -> float:
    """``sup_{|g|=1} T(f1, f2, g) / (|f1| |f2|)`` for one pair of inputs.

    ``piece`` is ``"G"`` or one of :data:`F_PIECES`.  For ``mean-coupling``
    ``f2`` is indexed by ``m2`` alone; ``drift`` ignores ``f2``.
    """
    lat = _Lattice(tr.M, tr.s)
    return _ratio(lat, _weights(lat, piece, tr.alpha, tr.s, tr.c0), f1, f2)


def _ratio(lat: _Lattice, weights, f1, f2) -> float:
    kind = weights[3]
    f1 = np.where(lat.nonzero, f1, 0.0)
    n1 = float(np.linalg.norm(f1))
    if kind == "diag":
        return float(np.linalg.norm(_w_vector(lat, weights, f1, None)) / n1) if n1 > 0 else 0.0
    if kind == "ycoupled":
        f2 = np.where(lat.n != 0, f2, 0.0)
    else:
        f2 = np.where(lat.nonzero, f2, 0.0)
    n2 = float(np.linalg.norm(f2))
    if n1 == 0 or n2 == 0:
        return 0.0
    return float(np.linalg.norm(_w_vector(lat, weights, f1, f2)) / (n1 * n2))


def _power_law(lat: _Lattice, p: float, one_d: bool = False) -> np.ndarray:
    if one_d:
        n = np.abs(lat.n).astype(float)
        return np.where(n > 0, (1 + n**2) ** (-p / 2), 0.0)
    return np.where(lat.nonzero, (1 + lat.absn**2) ** (-p / 2), 0.0)


_POWERS = (0.5, 1.0, 1.5, 2.0, 3.0, 5.0)
_LOW = 2  # single-mode candidates use |n_i| <= _LOW


def _single_modes(lat: _Lattice, one_d: bool = False):
    M = lat.M
    out = []
    if one_d:
        for m in range(-_LOW, _LOW + 1):
            if m != 0:
                v = np.zeros(2 * M + 1)
                v[m + M] = 1.0
                out.append(v)
        return out
    for a in range(-_LOW, _LOW + 1):
        for b in range(-_LOW, _LOW + 1):
            if (a, b) != (0, 0):
                v = np.zeros((2 * M + 1, 2 * M + 1))
                v[a + M, b + M] = 1.0
                out.append(v)
    return out


def _sample(tr: LatticeTruncation, piece: str) -> RatioStats:
    lat = _Lattice(tr.M, tr.s)
    w = _weights(lat, piece, tr.alpha, tr.s, tr.c0)
    one_d = piece.startswith("mean-coupling")
    shape1 = (2 * tr.M + 1, 2 * tr.M + 1)
    shape2 = (2 * tr.M + 1,) if one_d else shape1
    rng = np.random.default_rng(tr.seed)
    vals = np.empty(tr.trials)
    for i in range(tr.trials):
        f1 = np.abs(rng.standard_normal(shape1))
        f2 = np.abs(rng.standard_normal(shape2))
        vals[i] = _ratio(lat, w, f1, f2)

    ext = 0.0
    if piece == "drift":
        ext = drift_norm(tr)
    else:
        pl1 = [_power_law(lat, p) for p in _POWERS]
        pl2 = [_power_law(lat, p, one_d) for p in _POWERS]
        sm1 = _single_modes(lat)
        sm2 = _single_modes(lat, one_d)
        for f1 in pl1 + sm1:
            for f2 in pl2 + sm2:
                ext = max(ext, _ratio(lat, w, f1, f2))
    return RatioStats(
        M=tr.M,
        trials=tr.trials,
        random_max=float(vals.max()),
        random_mean=float(vals.mean()),
        random_p95=float(np.percentile(vals, 95)),
        extremal_max=float(ext),
    )


def trilinear_G_ratio(tr: LatticeTruncation) -> RatioStats:
    """Sampled norm of the mean-forcing form ``<k2>^s / (|k2|^(2a-1) |h| |m|)`` on ``k1 = 0``."""
    return _sample(tr, "G")


def trilinear_F_ratio(tr: LatticeTruncation, piece: str) -> RatioStats:
    """Sampled norm of one of the four eddy-tendency forms.

    * ``advection``: ``(|m|/|h|) <k>^s / (<h>^s <m>^s |k|^(2a))`` over ``k = h + m``.
    * ``zonal``: ``|k| <k>^s / (|h| <h>^s <m>^s |k|^(2a))`` restricted to ``k1 = 0``.
    * ``drift``: diagonal ``c0 |k|^(1-2a)``.
    * ``mean-coupling``: ``|h| <k>^s / (<h>^s <m2>^s |k|^(2a))`` over ``k = (h1, h2 + m2)``.
      Not uniformly bounded: ``h = (1, -m2)`` puts ``|k| = 1`` against ``|h| ~ m2``.
    * ``mean-coupling-k1``: the same with ``|h1|`` in place of ``|h|``, which is
      the factor the tendency actually carries; bounded by ``|k|^(1-2a)``.
    """
    if piece not in F_PIECES + SUPPLEMENTARY_PIECES:
        raise ValueError(f"piece must be one of {F_PIECES + SUPPLEMENTARY_PIECES}")
    return _sample(tr, piece)


def drift_norm(tr: LatticeTruncation) -> float:
    """Exact operator norm of the diagonal drift piece: ``max_k c0 |k|^(1-2 alpha)``."""
    lat = _Lattice(tr.M, tr.s)
    D = _weights(lat, "drift", tr.alpha, tr.s, tr.c0)[2]
    return float(np.max(np.abs(D)))


def growth_study(tr: LatticeTruncation, piece: str, Ms: tuple[int, int] = (16, 32)) -> dict:
    """Maxima at two truncations and the relative growth between them."""
    fn = trilinear_G_ratio if piece == "G" else (lambda t: trilinear_F_ratio(t, piece))
    lo, hi = (fn(tr.with_M(M)) for M in Ms)
    return {"piece": piece, "M": list(Ms), "max": [lo.max, hi.max], "growth": hi.max / lo.max - 1.0}


def case1_majorant_check(tr: LatticeTruncation, piece: str = "G", ratio: float = 8.0) -> dict:
    """Compare each term weight with ``1/|m|^(2 alpha + s)`` on pairs with ``|h| >= ratio |m|``.

    Returns the largest weight/majorant quotient and the number of pairs examined.
    """
    if piece not in ("G", "advection"):
        raise ValueError("case-1 check is defined for 'G' and 'advection'")
    lat = _Lattice(tr.M, tr.s)
    pts = np.argwhere(lat.nonzero) - tr.M
    h = pts[:, None, :].astype(float)
    m = pts[None, :, :].astype(float)
    k = h + m
    ah = np.hypot(h[..., 0], h[..., 1])
    am = np.hypot(m[..., 0], m[..., 1])
    ak = np.hypot(k[..., 0], k[..., 1])
    br = lambda x: (1 + x**2) ** (tr.s / 2)
    sel = ah >= ratio * am
    if piece == "G":
        sel &= (k[..., 0] == 0) & (k[..., 1] != 0)
        k2 = np.abs(k[..., 1])
        k2s = np.where(sel, k2, 1.0)
        term = br(k2s) / (k2s ** (2 * tr.alpha - 1) * ah * am * br(ah) * br(am))
    else:
        sel &= ak > 0
        aks = np.where(sel, ak, 1.0)
        term = (am / ah) * br(aks) / (br(ah) * br(am) * aks ** (2 * tr.alpha))
    major = 1.0 / am ** (2 * tr.alpha + tr.s)
    q = np.where(sel, term / major, 0.0)
    return {"piece": piece, "pairs": int(sel.sum()), "max_quotient": float(q.max()) if sel.any() else 0.0}


# ---------------------------------------------------------------------------
# Lipschitz probe on the actual tendencies
# ---------------------------------------------------------------------------

def _unit_state(grid: GridSpec, rng: np.random.Generator, band: int, s: float):
    mu, ga = init_data(grid, "band-limited-random", seed=int(rng.integers(2**31)), amplitude=1.0, band=(1, band))
    norm = _x_norm(grid, mu.coeffs, ga.coeffs, s)
    return mu.coeffs / norm, ga.coeffs / norm


def _x_norm(grid, mu, ga, s):
    return float(_sobolev_norm_arrays(grid, mu, s, True) + _sobolev_norm_arrays(grid, ga, s, False))


def duhamel_difference(
    grid: GridSpec,
    a: tuple[np.ndarray, np.ndarray],
    b: tuple[np.ndarray, np.ndarray],
    delta: float,
    p: SolverParams,
    s: float = 0.0,
) -> dict:
    """Norms of ``delta phi1(delta L) (N(a) - N(b))`` per component, and of ``a - b``."""
    ph_mu = delta * phi_functions(delta * heat_symbol(grid, p.nu))[0]
    ph_ga = delta * phi_functions(delta * eddy_symbol(grid, p.nu, p.C1))[0]
    Ga, Fa = _model_kernel(grid, a[0], a[1], p)
    Gb, Fb = _model_kernel(grid, b[0], b[1], p)
    d_mu = float(_sobolev_norm_arrays(grid, ph_mu * (Ga - Gb), s, True))
    d_ga = float(_sobolev_norm_arrays(grid, ph_ga * (Fa - Fb), s, False))
    den = _x_norm(grid, a[0] - b[0], a[1] - b[1], s)
    return {"mu": d_mu, "gamma": d_ga, "input": den, "ratio": (d_mu + d_ga) / den if den > 0 else 0.0}


def lipschitz_ratio(
    tr: LatticeTruncation,
    R: float = 1.0,
    delta: float = 1e-2,
    p: SolverParams | None = None,
    same_gamma: bool = False,
) -> dict:
    """``|Phi(a) - Phi(b)| / |a - b|`` over one Duhamel node of length ``delta``.

    ``a`` and ``b`` are random states of norm ``R`` on a grid resolving the
    truncation.  With ``same_gamma`` the two states share their eddy part.
    Reports raw ratios and ratios divided by ``(1 + 3R) delta^(1 - alpha)``.
    """
    if not R > 0 or not delta > 0:
        raise ValueError("R and delta must be positive")
    p = SolverParams(c0=0.0, s=tr.s) if p is None else p
    grid = GridSpec(4 * tr.M, p.l)
    band = min(tr.M, grid.kmax_retained)
    rng = np.random.default_rng(tr.seed)
    raw = np.empty(tr.trials)
    for i in range(tr.trials):
        ma, ga = _unit_state(grid, rng, band, tr.s)
        mb, gb = _unit_state(grid, rng, band, tr.s)
        if same_gamma:
            # equal eddy parts, mean parts of equal norm
            gb = ga
            mb = mb * (np.linalg.norm(ma) / np.linalg.norm(mb))
        raw[i] = duhamel_difference(grid, (R * ma, R * ga), (R * mb, R * gb), delta, p, tr.s)["ratio"]
    scale = (1 + 3 * R) * delta ** (1 - tr.alpha)
    return {
        "R": R,
        "delta": delta,
        "trials": tr.trials,
        "raw_max": float(raw.max()),
        "raw_mean": float(raw.mean()),
        "scaled_max": float(raw.max() / scale),
        "scaled_mean": float(raw.mean() / scale),
        "scaled_p95": float(np.percentile(raw, 95) / scale),
    }


def run_estimates(
    tr: LatticeTruncation,
    Ms: tuple[int, int] = (16, 32),
    alphas: tuple[float, ...] = (0.5, 0.76, 0.8, 0.99),
    lipschitz_R: tuple[float, ...] = (0.25, 0.5, 1.0),
    lipschitz_trials: int = 10,
) -> dict:
    """The full probe suite as a JSON-ready dictionary."""
    report: dict = {"truncation": asdict(tr), "kernel_max": [], "growth": [], "case1": [], "lipschitz": []}
    for a in alphas:
        report["kernel_max"].append({"alpha": a, "closed_form": kernel_max(a), "grid": kernel_max_grid(a)})
    for piece in ("G",) + F_PIECES + SUPPLEMENTARY_PIECES:
        report["growth"].append(growth_study(tr, piece, Ms))
    report["drift_norm"] = drift_norm(tr)
    for piece in ("G", "advection"):
        report["case1"].append(case1_majorant_check(tr.with_M(Ms[0]), piece))
    small = LatticeTruncation(8, tr.s, tr.alpha, lipschitz_trials, tr.seed, tr.c0)
    for R in lipschitz_R:
        report["lipschitz"].append(lipschitz_ratio(small, R))
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
