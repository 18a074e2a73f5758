"""Exact linear semigroups and exponential time stepping.

The stiff linear parts (diffusion, Rossby dispersion, uniform drift) are
diagonal in Fourier space and are applied exactly; only the nonlinear terms
are approximated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import Formulation, SolverParams, State, eddy_symbol, heat_symbol, make_formulation
from .spectral import SpectralField2D, ZeroModeError, ZonalSpectral1D, _require_zero_mean

__all__ = [
    "IntegratorConfig",
    "StepFailure",
    "Trajectory",
    "heat_semigroup",
    "eddy_semigroup",
    "phi_functions",
    "ExponentialStepper",
    "step",
    "simulate",
]

log = logging.getLogger(__name__)

SCHEMES = ("etdrk2", "exp-euler")
_SERIES_RADIUS = 0.1
_SERIES_TERMS = 10


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    scheme: str = "etdrk2"
    model: str = "model"
    T: float = 1.0
    save_stride: int = 1
    diag_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.T > 0 and self.dt > self.T * (1 + 1e-12):
            raise ValueError("dt must not exceed T")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.save_stride < 1 or self.diag_stride < 1:
            raise ValueError("strides must be positive")

    @property
    def n_steps(self) -> int:
        n = round(self.T / self.dt)
        if abs(n * self.dt - self.T) > 1e-9 * max(self.T, self.dt):
            raise ValueError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        return n


class StepFailure(RuntimeError):
    """A step produced non-finite values."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass
class Trajectory:
    """Append-only record of saved states."""

    states: list[State] = field(default_factory=list)
    failure: str | None = None
    # largest zero-mode magnitude produced by any step before it was projected out
    zero_mode_drift: float = 0.0

    def append(self, state: State) -> None:
        if self.states and state.t < self.states[-1].t:
            raise ValueError("trajectory times must be nondecreasing")
        self.states.append(state)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def final(self) -> State:
        return self.states[-1]

    def mu_array(self) -> np.ndarray:
        return np.stack([s.mu.coeffs for s in self.states])

    def gamma_array(self) -> np.ndarray:
        return np.stack([s.gamma.coeffs for s in self.states])

    def __len__(self) -> int:
        return len(self.states)


# ---------------------------------------------------------------------------
# semigroups
# ---------------------------------------------------------------------------

def heat_semigroup(mu: ZonalSpectral1D, t: float, nu: float) -> ZonalSpectral1D:
    """``exp(t nu d_yy) mu``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return ZonalSpectral1D(mu.grid, np.exp(t * heat_symbol(mu.grid, nu)) * mu.coeffs)


def eddy_semigroup(gamma: SpectralField2D, t: float, nu: float, C1: float) -> SpectralField2D:
    """``exp(t (nu lap - C1 d_x lap^-1)) gamma``; the dispersive factor is unimodular."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    _require_zero_mean(gamma, "gamma")
    return SpectralField2D(gamma.grid, np.exp(t * eddy_symbol(gamma.grid, nu, C1)) * gamma.coeffs)


def phi_functions(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``phi1 = (e^z - 1)/z`` and ``phi2 = (e^z - 1 - z)/z^2``.

    Inside ``|z| < 0.1`` a 10-term Taylor series is used; outside, ``expm1``
    keeps the cancellation error of ``phi2`` near ``eps/|z|``.
    """
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SERIES_RADIUS
    zs = np.where(small, 1.0, z)
    em1 = np.expm1(zs)
    p1s = np.zeros_like(z)
    p2s = np.zeros_like(z)
    for n in range(_SERIES_TERMS - 1, -1, -1):
        p1s = p1s * z + 1.0 / math.factorial(n + 1)
        p2s = p2s * z + 1.0 / math.factorial(n + 2)
    phi1 = np.where(small, p1s, em1 / zs)
    phi2 = np.where(small, p2s, (em1 - zs) / zs**2)
    return phi1, phi2


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

class ExponentialStepper:
    """Exponential Euler / ETDRK2 for ``u' = L u + N(u)`` with diagonal ``L``.

    ``linear`` is a tuple of symbol arrays (one per component), ``nonlinear``
    maps a tuple of component arrays to a tuple of the same shapes.
    """

    def __init__(self, linear: Sequence[np.ndarray], nonlinear: Callable, dt: float, scheme: str = "etdrk2"):
        if scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        self.dt = dt
        self.scheme = scheme
        self.nonlinear = nonlinear
        self.E = tuple(np.exp(dt * L) for L in linear)
        phis = [phi_functions(dt * L) for L in linear]
        self.w1 = tuple(dt * p1 for p1, _ in phis)
        self.w2 = tuple(dt * p2 for _, p2 in phis)

    def __call__(self, u: tuple[np.ndarray, ...]) -> tuple[np.ndarray, ...]:
        n0 = self.nonlinear(u)
        a = tuple(E * x + w * n for E, x, w, n in zip(self.E, u, self.w1, n0))
        if self.scheme == "exp-euler":
            return a
        na = self.nonlinear(a)
        return tuple(x + w * (nb - n) for x, w, nb, n in zip(a, self.w2, na, n0))


def _finite(u: tuple[np.ndarray, ...]) -> bool:
    return all(np.isfinite(x).all() for x in u)


def _cfl_advisory(state: State, dt: float) -> None:
    g = state.grid
    psi = -state.gamma.coeffs * g.inv_ksq
    umax = float(np.sum(np.abs(g.ksq) ** 0.5 * np.abs(psi))) + float(np.sum(np.abs(state.mu.coeffs)))
    kmax = 2 * np.pi / g.l * g.kmax_retained
    if umax > 0 and dt > 0.5 / (kmax * umax):
        log.warning("dt=%.3g exceeds advisory CFL limit %.3g", dt, 0.5 / (kmax * umax))


class _FormulationStepper:
    def __init__(self, form: Formulation, dt: float, scheme: str):
        self.form = form
        self.stepper = ExponentialStepper(form.linear, form.nonlinear, dt, scheme)
        self.dt = dt
        self.zero_mode_drift = 0.0

    def advance(self, state: State) -> State:
        grid = self.form.grid
        u = self.form.pack(state.mu.coeffs, state.gamma.coeffs)
        try:
            u1 = self.stepper(u)
        except (FloatingPointError, ZeroModeError) as exc:
            raise StepFailure(f"tendency evaluation failed at t={state.t}: {exc}", state.t) from exc
        if not _finite(u1):
            raise StepFailure(f"non-finite values after step from t={state.t}", state.t)
        mu, gamma = self.form.unpack(u1)
        mu = np.array(mu, copy=True)
        gamma = np.array(gamma, copy=True)
        self.zero_mode_drift = max(self.zero_mode_drift, abs(mu[0]), abs(gamma[0, 0]))
        mu[0] = 0.0
        gamma[0, 0] = 0.0
        return State.from_arrays(grid, state.t + self.dt, mu, gamma)


def step(state: State, cfg: IntegratorConfig, p: SolverParams) -> State:
    """One step of ``cfg.scheme`` for formulation ``cfg.model``."""
    form = make_formulation(cfg.model, state.grid, p)
    return _FormulationStepper(form, cfg.dt, cfg.scheme).advance(state)


def simulate(
    state0: State,
    cfg: IntegratorConfig,
    p: SolverParams,
    sink: Callable[[State], None] | None = None,
) -> Trajectory:
    """Integrate to ``cfg.T``; saves every ``save_stride`` steps, calls ``sink`` every ``diag_stride``.

    The initial state is filtered to the dealiased modes.  A failed step ends
    the run; the partial trajectory carries the failure message.
    """
    g = state0.grid
    state = State.from_arrays(g, state0.t, state0.mu.coeffs * g.mask1d, state0.gamma.coeffs * g.mask2d)
    n = cfg.n_steps
    _cfl_advisory(state, cfg.dt)
    stepper = _FormulationStepper(make_formulation(cfg.model, g, p), cfg.dt, cfg.scheme)
    traj = Trajectory()
    traj.append(state)
    if sink is not None:
        sink(state)
    t0 = state.t
    for i in range(1, n + 1):
        try:
            state = stepper.advance(state)
        except StepFailure as exc:
            traj.failure = str(exc)
            traj.zero_mode_drift = stepper.zero_mode_drift
            log.error("%s", exc)
            return traj
        # keep the clock on the dt lattice instead of accumulating sums
        state = State(t0 + i * cfg.dt, state.mu, state.gamma)
        if i % cfg.save_stride == 0 or i == n:
            traj.append(state)
        if sink is not None and (i % cfg.diag_stride == 0 or i == n):
            sink(state)
    traj.zero_mode_drift = stepper.zero_mode_drift
    return traj
