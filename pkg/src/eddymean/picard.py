"""Fixed-point construction of the mild solution on short intervals.

The map ``Phi`` sends a candidate path ``(mu, gamma)`` on ``[t0, t0 + delta]``
to the Duhamel expression

    Phi1 = S_heat(t) mu0  + int_0^t S_heat(t - s) G(gamma(s)) ds
    Phi2 = S_eddy(t) gamma0 + int_0^t S_eddy(t - s) F(mu(s), gamma(s)) ds

discretised on ``M + 1`` uniform nodes.  Between nodes the integrand's
nonlinear factor is interpolated linearly and the semigroup is integrated
exactly (exponential trapezoid), which gives the node-to-node recursion

    U[j+1] = E U[j] + h (phi1 - phi2) N[j] + h phi2 N[j+1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SolverParams, State, _model_kernel, eddy_symbol, heat_symbol
from .integrator import Trajectory, phi_functions
from .spectral import GridMismatchError, GridSpec, SpectralField2D, ZonalSpectral1D, _require_zero_mean
from .spectral import _sobolev_norm_arrays, sobolev_norm

__all__ = [
    "PicardConfig",
    "NodePath",
    "PicardReport",
    "ContinuationResult",
    "estimate_delta",
    "ball_radius",
    "linear_flow",
    "apply_Phi",
    "x_norm",
    "x_distance",
    "picard_iterate",
    "continuation_run",
]


@dataclass(frozen=True)
class PicardConfig:
    """Settings for the fixed-point iteration.

    ``delta = delta_calibration * (||gamma0|| + ||mu0||)**(-1/(1-alpha))``
    with L2 norms (``delta_norm="l2"``) or H^s norms (``"hs"``), then capped
    at ``delta_max``.  ``ball_c1``/``ball_c2`` are the constants in the ball
    radius ``R = 2 (c1 ||mu0||_Hs + c2 ||gamma0||_Hs)``.
    """

    alpha: float = 0.8
    s: float = 0.0
    M: int = 64
    tol: float = 1e-10
    max_iter: int = 50
    delta_calibration: float = 0.1
    delta_halving_max: int = 4
    delta_max: float = 1.0
    norm_floor: float = 1e-12
    delta_norm: str = "l2"
    ratio_limit: float = 0.9
    ball_c1: float = 1.0
    ball_c2: float = 1.0

    def __post_init__(self):
        if not 0.75 < self.alpha < 1:
            raise ValueError("alpha must lie in (3/4, 1)")
        if self.M < 8:
            raise ValueError("M must be at least 8")
        if not self.tol > 0 or not self.delta_calibration > 0 or not self.delta_max > 0:
            raise ValueError("tol, delta_calibration and delta_max must be positive")
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        if self.delta_norm not in ("l2", "hs"):
            raise ValueError("delta_norm must be 'l2' or 'hs'")
        if self.max_iter < 1 or self.delta_halving_max < 0:
            raise ValueError("max_iter must be >= 1 and delta_halving_max >= 0")


@dataclass(frozen=True, eq=False)
class NodePath:
    """Candidate or iterate on uniform nodes: ``mu[j]``, ``gamma[j]`` at ``times[j]``."""

    grid: GridSpec
    times: np.ndarray
    mu: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        N = self.grid.N
        if self.mu.shape != (n, N) or self.gamma.shape != (n, N, N):
            raise GridMismatchError("node arrays do not match the time grid and spatial grid")

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0])

    def state(self, j: int) -> State:
        return State.from_arrays(self.grid, self.times[j], self.mu[j], self.gamma[j])

    def to_trajectory(self) -> Trajectory:
        traj = Trajectory()
        for j in range(len(self.times)):
            traj.append(self.state(j))
        return traj


@dataclass
class PicardReport:
    delta_used: float
    delta_initial: float
    iterations: int
    distances: list[float]
    ratios: list[float]
    R: float
    converged: bool
    in_ball: bool
    halvings: int
    residual: float
    fixed_point: Trajectory | None
    message: str = ""

    def summary(self) -> dict:
        return {
            "delta_used": self.delta_used,
            "delta_initial": self.delta_initial,
            "iterations": self.iterations,
            "distances": list(self.distances),
            "ratios": list(self.ratios),
            "R": self.R,
            "converged": self.converged,
            "in_ball": self.in_ball,
            "halvings": self.halvings,
            "residual": self.residual,
            "message": self.message,
        }


@dataclass
class ContinuationResult:
    trajectory: Trajectory
    reports: list[PicardReport] = field(default_factory=list)
    delta_estimates: list[float] = field(default_factory=list)
    failure: str | None = None

    @property
    def delta_used(self) -> list[float]:
        return [r.delta_used for r in self.reports]


# ---------------------------------------------------------------------------

def _data_norm(mu0: ZonalSpectral1D, gamma0: SpectralField2D, s: float) -> float:
    return sobolev_norm(gamma0, s) + sobolev_norm(mu0, s)


def estimate_delta(
    mu0: ZonalSpectral1D,
    gamma0: SpectralField2D,
    cfg: PicardConfig,
    T: float | None = None,
) -> float:
    """Local existence time ``c * (||gamma0|| + ||mu0||)**(-1/(1-alpha))``, capped."""
    s = 0.0 if cfg.delta_norm == "l2" else cfg.s
    norm = max(_data_norm(mu0, gamma0, s), cfg.norm_floor)
    # log form avoids overflow for tiny norms
    log_delta = math.log(cfg.delta_calibration) - math.log(norm) / (1.0 - cfg.alpha)
    cap = cfg.delta_max if T is None else min(cfg.delta_max, T)
    return cap if log_delta > math.log(cap) else math.exp(log_delta)


def ball_radius(mu0: ZonalSpectral1D, gamma0: SpectralField2D, cfg: PicardConfig) -> float:
    return 2.0 * (cfg.ball_c1 * sobolev_norm(mu0, cfg.s) + cfg.ball_c2 * sobolev_norm(gamma0, cfg.s))


def x_norm(path: NodePath, s: float) -> float:
    """Discrete sup-in-time norm: ``max_j ||mu_j||_Hs + max_j ||gamma_j||_Hs``."""
    g = path.grid
    return float(
        np.max(_sobolev_norm_arrays(g, path.mu, s, True)) + np.max(_sobolev_norm_arrays(g, path.gamma, s, False))
    )


def x_distance(a: NodePath, b: NodePath, s: float) -> float:
    return x_norm(NodePath(a.grid, a.times, a.mu - b.mu, a.gamma - b.gamma), s)


def _node_times(t0: float, delta: float, M: int) -> np.ndarray:
    times = t0 + delta * np.linspace(0.0, 1.0, M + 1)
    times[-1] = t0 + delta
    return times


def linear_flow(mu0: ZonalSpectral1D, gamma0: SpectralField2D, times: np.ndarray, p: SolverParams) -> NodePath:
    """The zeroth Duhamel iterate: free heat flow and free eddy flow of the data."""
    g = gamma0.grid
    tau = (np.asarray(times) - times[0])
    mu = np.exp(tau[:, None] * heat_symbol(g, p.nu)[None, :]) * mu0.coeffs[None, :]
    gamma = np.exp(tau[:, None, None] * eddy_symbol(g, p.nu, p.C1)[None]) * gamma0.coeffs[None]
    return NodePath(g, np.asarray(times, float), mu, gamma)


class _Weights:
    def __init__(self, grid: GridSpec, p: SolverParams, h: float):
        self.h = h
        Lh = heat_symbol(grid, p.nu)
        Le = eddy_symbol(grid, p.nu, p.C1)
        self.E = (np.exp(h * Lh), np.exp(h * Le))
        a1, a2 = phi_functions(h * Lh)
        b1, b2 = phi_functions(h * Le)
        self.w_left = (h * (a1 - a2), h * (b1 - b2))
        self.w_right = (h * a2, h * b2)


def _check_uniform(times: np.ndarray) -> float:
    d = np.diff(times)
    if len(times) < 2 or not np.allclose(d, d[0], rtol=1e-9, atol=0.0) or d[0] <= 0:
        raise ValueError("node grid must be uniform and increasing")
    return float(d[0])


def apply_Phi(
    candidate: NodePath,
    mu0: ZonalSpectral1D,
    gamma0: SpectralField2D,
    p: SolverParams,
    _weights: _Weights | None = None,
) -> NodePath:
    """One application of the discretised Duhamel map to ``candidate``."""
    g = candidate.grid
    if mu0.grid != g or gamma0.grid != g:
        raise GridMismatchError("data and candidate live on different grids")
    _require_zero_mean(mu0, "mu0")
    _require_zero_mean(gamma0, "gamma0")
    h = _check_uniform(candidate.times)
    w = _weights if _weights is not None and abs(_weights.h - h) <= 1e-12 * h else _Weights(g, p, h)

    Gn, Fn = _model_kernel(g, candidate.mu, candidate.gamma, p)
    M1 = len(candidate.times)
    mu = np.empty_like(candidate.mu)
    gamma = np.empty_like(candidate.gamma)
    mu[0] = mu0.coeffs
    gamma[0] = gamma0.coeffs
    for j in range(M1 - 1):
        mu[j + 1] = w.E[0] * mu[j] + w.w_left[0] * Gn[j] + w.w_right[0] * Gn[j + 1]
        gamma[j + 1] = w.E[1] * gamma[j] + w.w_left[1] * Fn[j] + w.w_right[1] * Fn[j + 1]
    mu[:, 0] = 0.0
    gamma[:, 0, 0] = 0.0
    return NodePath(g, candidate.times, mu, gamma)


def picard_iterate(
    mu0: ZonalSpectral1D,
    gamma0: SpectralField2D,
    p: SolverParams,
    cfg: PicardConfig,
    delta: float | None = None,
    t0: float = 0.0,
) -> PicardReport:
    """Iterate ``Phi`` from the linear flow until successive iterates are within ``cfg.tol``.

    If a measured contraction ratio exceeds ``cfg.ratio_limit`` (or the
    iteration blows up) the interval is halved and the iteration restarted,
    at most ``cfg.delta_halving_max`` times.  Ratios are only formed while the
    previous distance is above the roundoff floor of the iterates.
    """
    g = gamma0.grid
    mask_mu = mu0.coeffs * g.mask1d
    mask_ga = gamma0.coeffs * g.mask2d
    mu0 = ZonalSpectral1D(g, mask_mu)
    gamma0 = SpectralField2D(g, mask_ga)
    delta0 = estimate_delta(mu0, gamma0, cfg) if delta is None else float(delta)
    R = ball_radius(mu0, gamma0, cfg)
    s = cfg.s
    d = delta0
    last = None
    for halving in range(cfg.delta_halving_max + 1):
        times = _node_times(t0, d, cfg.M)
        weights = _Weights(g, p, float(times[1] - times[0]))
        x = linear_flow(mu0, gamma0, times, p)
        in_ball = x_norm(x, s) <= R * (1 + 1e-9) + 1e-300
        distances: list[float] = []
        ratios: list[float] = []
        reason = ""
        for it in range(1, cfg.max_iter + 1):
            x_new = apply_Phi(x, mu0, gamma0, p, weights)
            dist = x_distance(x_new, x, s)
            distances.append(dist)
            if not math.isfinite(dist):
                reason = "iterates diverged"
                break
            floor = 1e3 * np.finfo(float).eps * max(x_norm(x_new, s), 1e-300)
            if len(distances) >= 2 and distances[-2] > floor:
                r = dist / distances[-2]
                ratios.append(r)
                if r > cfg.ratio_limit:
                    reason = f"contraction ratio {r:.3f} exceeds {cfg.ratio_limit}"
                    break
            x = x_new
            in_ball = in_ball and x_norm(x, s) <= R * (1 + 1e-9) + 1e-300
            if dist <= cfg.tol:
                residual = x_distance(apply_Phi(x, mu0, gamma0, p, weights), x, s)
                return PicardReport(
                    delta_used=d,
                    delta_initial=delta0,
                    iterations=it,
                    distances=distances,
                    ratios=ratios,
                    R=R,
                    converged=True,
                    in_ball=bool(in_ball),
                    halvings=halving,
                    residual=residual,
                    fixed_point=x.to_trajectory(),
                )
        else:
            reason = f"no convergence within {cfg.max_iter} iterations"
        last = PicardReport(
            delta_used=d,
            delta_initial=delta0,
            iterations=len(distances),
            distances=distances,
            ratios=ratios,
            R=R,
            converged=False,
            in_ball=bool(in_ball),
            halvings=halving,
            residual=float("nan"),
            fixed_point=None,
            message=reason,
        )
        d = d / 2
    return last


def continuation_run(
    mu0: ZonalSpectral1D,
    gamma0: SpectralField2D,
    p: SolverParams,
    cfg: PicardConfig,
    T: float,
) -> ContinuationResult:
    """Glue fixed points over consecutive intervals until ``T``.

    Each interval starts from the previous interval's terminal coefficients
    and re-estimates its length from the current L2 norms.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    g = gamma0.grid
    mu = ZonalSpectral1D(g, mu0.coeffs * g.mask1d)
    gamma = SpectralField2D(g, gamma0.coeffs * g.mask2d)
    traj = Trajectory()
    traj.append(State(0.0, mu, gamma))
    result = ContinuationResult(traj)
    t = 0.0
    while T - t > 1e-12 * T:
        est = estimate_delta(mu, gamma, cfg)
        result.delta_estimates.append(est)
        rep = picard_iterate(mu, gamma, p, cfg, delta=min(est, T - t), t0=t)
        result.reports.append(rep)
        if not rep.converged:
            result.failure = f"interval starting at t={t:.6g} failed: {rep.message}"
            break
        states = rep.fixed_point.states
        for st in states[1:]:
            traj.append(st)
        t = states[-1].t
        mu, gamma = states[-1].mu, states[-1].gamma
    return result
