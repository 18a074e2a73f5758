"""Right-hand sides of the eddy-mean vorticity system.

Three formulations share the same kernels:

* ``model``: the constant-coefficient system for ``(mu, gamma)``, with
  ``mu = ubar - c0`` and ``gamma`` the eddy vorticity::

      d_t mu    - nu mu_yy                         = G(gamma)
      d_t gamma + C1 d_x lap^-1 gamma - nu lap gamma = F(mu, gamma)

* ``split``: the exact zonal-mean / eddy equations, variable ``ubar_yy`` kept.
* ``full``: the barotropic beta-plane vorticity equation for ``zeta``.

Every quadratic term is a dealiased product; direct convolution sums exist only
in the tests.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .spectral import (
    GridMismatchError,
    GridSpec,
    SpectralField2D,
    ZeroModeError,
    ZonalSpectral1D,
    _fwd1,
    _fwd2,
    _inv1,
    _inv2,
    _require_zero_mean,
)

__all__ = [
    "SolverParams",
    "State",
    "Formulation",
    "eddy_velocity",
    "compute_G",
    "compute_F",
    "model_tendency",
    "split_tendency",
    "full_tendency",
    "reynolds_stress",
    "vorticity_from_state",
    "state_from_vorticity",
    "make_formulation",
    "FORMULATIONS",
]

FORMULATIONS = ("model", "split", "full")
C0_SIGNS = ("derivation", "plus")


@dataclass(frozen=True)
class SolverParams:
    """Physical and model constants.

    ``C1`` stands in for ``beta - ubar_yy`` in the model system; ``c0`` is the
    (conserved) mean of ``ubar``.  ``f_c0_sign`` picks the sign of the uniform
    drift term in ``F``: ``"derivation"`` gives ``-c0 gamma_x`` (what the
    eddy-mean split produces), ``"plus"`` gives ``+c0 gamma_x``.
    """

    nu: float = 0.05
    beta: float = 1.0
    C1: float = 1.0
    c0: float = 0.0
    l: float = 2 * np.pi
    s: float = 0.0
    alpha: float = 0.8
    f_c0_sign: str = "derivation"

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if not 0.75 < self.alpha < 1:
            raise ValueError("alpha must lie in (3/4, 1)")
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        if not self.l > 0:
            raise ValueError("l must be positive")
        if self.f_c0_sign not in C0_SIGNS:
            raise ValueError(f"f_c0_sign must be one of {C0_SIGNS}")

    @property
    def c0_sign(self) -> float:
        return -1.0 if self.f_c0_sign == "derivation" else 1.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class State:
    """Model state at time ``t``: zero-mean jet anomaly and eddy vorticity."""

    t: float
    mu: ZonalSpectral1D
    gamma: SpectralField2D

    def __post_init__(self):
        if self.mu.grid != self.gamma.grid:
            raise GridMismatchError("mu and gamma live on different grids")
        _require_zero_mean(self.mu, "mu")
        _require_zero_mean(self.gamma, "gamma")

    @property
    def grid(self) -> GridSpec:
        return self.gamma.grid

    @classmethod
    def from_arrays(cls, grid: GridSpec, t: float, mu: np.ndarray, gamma: np.ndarray) -> "State":
        return cls(float(t), ZonalSpectral1D(grid, mu), SpectralField2D(grid, gamma))


# ---------------------------------------------------------------------------
# array kernels (batched over leading axes)
# ---------------------------------------------------------------------------

def _streamfunction(grid: GridSpec, z: np.ndarray) -> np.ndarray:
    return -z * grid.inv_ksq


def _velocity_phys(grid: GridSpec, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Physical (u, v) = (-psi_y, psi_x)."""
    return _inv2(-1j * grid.ky * psi), _inv2(1j * grid.kx * psi)


def _zonal_flux(grid: GridSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Masked coefficients of the x-average of ``a*b`` (physical inputs)."""
    return _fwd1(np.mean(a * b, axis=-2)) * grid.mask1d


def _clear_mean(c: np.ndarray, zonal: bool, what: str) -> np.ndarray:
    """Check that the mean mode is at roundoff level, then set it to exactly 0."""
    m = c[..., 0] if zonal else c[..., 0, 0]
    scale = max(1.0, float(np.max(np.abs(c))))
    if np.any(np.abs(m) > 1e-10 * scale):
        raise ZeroModeError(f"{what}: mean mode {np.max(np.abs(m)):.3e} is not at roundoff level")
    if zonal:
        c[..., 0] = 0.0
    else:
        c[..., 0, 0] = 0.0
    return c


def _G_kernel(grid: GridSpec, gamma: np.ndarray) -> np.ndarray:
    g = gamma * grid.mask2d
    psi = _streamfunction(grid, g)
    u, v = _velocity_phys(grid, psi)
    # d_x lap^-1 g = v ; d_y lap^-1 g = -u
    G = 1j * grid.k * _zonal_flux(grid, v, -u)
    return _clear_mean(G, True, "G")


def _model_kernel(grid: GridSpec, mu: np.ndarray, gamma: np.ndarray, p: SolverParams):
    g = gamma * grid.mask2d
    m = mu * grid.mask1d
    psi = _streamfunction(grid, g)
    u, v = _velocity_phys(grid, psi)
    gx_c = 1j * grid.kx * g
    gx = _inv2(gx_c)
    gy = _inv2(1j * grid.ky * g)
    gam = _inv2(g)
    mu_phys = _inv1(m)[..., None, :]

    G = 1j * grid.k * _zonal_flux(grid, v, -u)
    F = -_fwd2(u * gx + v * gy + mu_phys * gx) * grid.mask2d
    F[..., 0, :] += 1j * grid.k * _zonal_flux(grid, v, gam)
    if p.c0:
        F = F + p.c0_sign * p.c0 * gx_c
    return _clear_mean(G, True, "G"), _clear_mean(F, False, "F")


def _split_kernel(grid: GridSpec, ubar: np.ndarray, ze: np.ndarray, coefficient=None):
    """Nonlinear part of the split system.

    ``ubar`` includes its mean; the uniform drift ``-c0 ze_x``, ``-beta v'``
    and the diffusion belong to the linear operator.  With ``coefficient``
    given, ``beta - ubar_yy`` is replaced by that constant and the whole
    ``-coefficient * v'`` term is returned here instead.
    """
    z = ze * grid.mask2d
    ub = ubar * grid.mask1d
    mu = ub.copy()
    mu[..., 0] = 0.0
    psi = _streamfunction(grid, z)
    u, v = _velocity_phys(grid, psi)
    zx = _inv2(1j * grid.kx * z)
    zy = _inv2(1j * grid.ky * z)
    zp = _inv2(z)
    mu_phys = _inv1(mu)[..., None, :]
    if coefficient is None:
        uyy_phys = _inv1(-(grid.k**2) * mu)[..., None, :]
        advect = u * zx + v * zy + mu_phys * zx - uyy_phys * v
        dz = -_fwd2(advect) * grid.mask2d
    else:
        advect = u * zx + v * zy + mu_phys * zx
        dz = -_fwd2(advect) * grid.mask2d - coefficient * (1j * grid.kx * psi)
    dz[..., 0, :] += 1j * grid.k * _zonal_flux(grid, v, zp)
    du = -1j * grid.k * _zonal_flux(grid, u, v)
    return _clear_mean(du, True, "d ubar/dt"), _clear_mean(dz, False, "d zeta'/dt")


def _full_kernel(grid: GridSpec, zeta: np.ndarray) -> np.ndarray:
    z = zeta * grid.mask2d
    psi = _streamfunction(grid, z)
    u, v = _velocity_phys(grid, psi)
    zx = _inv2(1j * grid.kx * z)
    zy = _inv2(1j * grid.ky * z)
    out = -_fwd2(u * zx + v * zy) * grid.mask2d
    return _clear_mean(out, False, "d zeta/dt")


def _rossby_symbol(grid: GridSpec, coefficient: float) -> np.ndarray:
    """Symbol of ``-coefficient * d_x lap^-1``: ``i coefficient k1/|k|^2``."""
    return 1j * coefficient * grid.kx * grid.inv_ksq


# ---------------------------------------------------------------------------
# field-level operations
# ---------------------------------------------------------------------------

def eddy_velocity(gamma: SpectralField2D) -> tuple[SpectralField2D, SpectralField2D]:
    """``u' = -d_y lap^-1 gamma``, ``v' = d_x lap^-1 gamma``."""
    _require_zero_mean(gamma, "gamma")
    g = gamma.grid
    psi = _streamfunction(g, gamma.coeffs)
    return SpectralField2D(g, -1j * g.ky * psi), SpectralField2D(g, 1j * g.kx * psi)


def compute_G(gamma: SpectralField2D) -> ZonalSpectral1D:
    """Mean-flow forcing ``d_y avg_x[(d_x lap^-1 gamma)(d_y lap^-1 gamma)]``."""
    _require_zero_mean(gamma, "gamma")
    return ZonalSpectral1D(gamma.grid, _G_kernel(gamma.grid, gamma.coeffs))


def compute_F(mu: ZonalSpectral1D, gamma: SpectralField2D, p: SolverParams) -> SpectralField2D:
    """Eddy forcing: advection, mean-flow advection, uniform drift and the zonal flux correction."""
    _require_zero_mean(mu, "mu")
    _require_zero_mean(gamma, "gamma")
    if mu.grid != gamma.grid:
        raise GridMismatchError("mu and gamma live on different grids")
    _, F = _model_kernel(gamma.grid, mu.coeffs, gamma.coeffs, p)
    return SpectralField2D(gamma.grid, F)


def model_tendency(state: State, p: SolverParams) -> tuple[ZonalSpectral1D, SpectralField2D]:
    """Nonstiff part ``(G(gamma), F(mu, gamma))``; diffusion and dispersion are left to the semigroup."""
    g = state.grid
    G, F = _model_kernel(g, state.mu.coeffs, state.gamma.coeffs, p)
    return ZonalSpectral1D(g, G), SpectralField2D(g, F)


def split_tendency(
    ubar: ZonalSpectral1D,
    zeta_e: SpectralField2D,
    p: SolverParams,
    constant_coefficient: float | None = None,
) -> tuple[ZonalSpectral1D, SpectralField2D]:
    """Full right-hand sides of the zonal-mean momentum and eddy vorticity equations.

    ``ubar`` may carry a nonzero mean (it is ``c0``).  Passing
    ``constant_coefficient`` replaces ``beta - ubar_yy`` by that constant.
    """
    _require_zero_mean(zeta_e, "zeta_e")
    g = zeta_e.grid
    du, dz = _split_kernel(g, ubar.coeffs, zeta_e.coeffs, constant_coefficient)
    c0 = ubar.coeffs[0].real
    lin_z = -p.nu * g.ksq - 1j * c0 * g.kx
    if constant_coefficient is None:
        lin_z = lin_z + _rossby_symbol(g, p.beta)
    dz = dz + lin_z * zeta_e.coeffs
    du = du - p.nu * g.k**2 * ubar.coeffs
    return ZonalSpectral1D(g, du), SpectralField2D(g, dz)


def full_tendency(zeta: SpectralField2D, p: SolverParams) -> SpectralField2D:
    """``-u zeta_x - v zeta_y - beta v + nu lap zeta`` with ``(u, v)`` from ``lap^-1 zeta``.

    A nonzero ``p.c0`` adds the advection by that uniform zonal flow.
    """
    _require_zero_mean(zeta, "zeta")
    g = zeta.grid
    out = _full_kernel(g, zeta.coeffs)
    lin = -p.nu * g.ksq + _rossby_symbol(g, p.beta) - 1j * p.c0 * g.kx
    return SpectralField2D(g, out + lin * zeta.coeffs)


def reynolds_stress(gamma: SpectralField2D) -> ZonalSpectral1D:
    """Zonal profile ``avg_x(u' v')``."""
    _require_zero_mean(gamma, "gamma")
    g = gamma.grid
    u, v = _velocity_phys(g, _streamfunction(g, gamma.coeffs * g.mask2d))
    return ZonalSpectral1D(g, _zonal_flux(g, u, v))


def vorticity_from_state(mu: np.ndarray, gamma: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Total vorticity coefficients ``gamma - d_y mu`` (mean flow vorticity is ``-ubar_y``)."""
    z = np.array(gamma, dtype=complex, copy=True)
    z[..., 0, :] += -1j * grid.k * mu
    return z


def state_from_vorticity(zeta: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`vorticity_from_state` for zero-mean ``mu``."""
    zbar = zeta[..., 0, :]
    k = grid.k
    inv = np.zeros_like(k)
    nz = k != 0
    inv[nz] = 1.0 / k[nz]
    mu = 1j * zbar * inv
    gamma = np.array(zeta, dtype=complex, copy=True)
    gamma[..., 0, :] = 0.0
    return mu, gamma


# ---------------------------------------------------------------------------
# formulation bundles used by the time steppers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Formulation:
    """Diagonal linear symbols plus the nonlinear map for one formulation.

    ``pack`` turns ``(mu, gamma)`` arrays into the formulation's component
    tuple and ``unpack`` reverses it.
    """

    name: str
    grid: GridSpec
    linear: tuple[np.ndarray, ...]
    nonlinear: Callable[[tuple[np.ndarray, ...]], tuple[np.ndarray, ...]]
    pack: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, ...]]
    unpack: Callable[[tuple[np.ndarray, ...]], tuple[np.ndarray, np.ndarray]]


def heat_symbol(grid: GridSpec, nu: float) -> np.ndarray:
    return -nu * grid.k**2 + 0j


def eddy_symbol(grid: GridSpec, nu: float, C1: float) -> np.ndarray:
    return _rossby_symbol(grid, C1) - nu * grid.ksq


def _unpack_vorticity(grid: GridSpec):
    def unpack(u):
        mu, gamma = state_from_vorticity(u[0], grid)
        # the total-vorticity mean rides along in the eddy slot
        gamma[..., 0, 0] = u[0][..., 0, 0]
        return mu, gamma

    return unpack


def make_formulation(name: str, grid: GridSpec, p: SolverParams) -> Formulation:
    if name == "model":
        return Formulation(
            name,
            grid,
            (heat_symbol(grid, p.nu), eddy_symbol(grid, p.nu, p.C1)),
            lambda u: _model_kernel(grid, u[0], u[1], p),
            lambda mu, gamma: (mu, gamma),
            lambda u: (u[0], u[1]),
        )
    lin_eddy = eddy_symbol(grid, p.nu, p.beta) - 1j * p.c0 * grid.kx
    if name == "split":
        def pack(mu, gamma):
            ub = np.array(mu, dtype=complex, copy=True)
            ub[..., 0] = p.c0
            return ub, gamma

        def unpack(u):
            mu = np.array(u[0], copy=True)
            mu[..., 0] -= p.c0
            return mu, u[1]

        return Formulation(
            name,
            grid,
            (heat_symbol(grid, p.nu), lin_eddy),
            lambda u: _split_kernel(grid, u[0], u[1]),
            pack,
            unpack,
        )
    if name == "full":
        return Formulation(
            name,
            grid,
            (lin_eddy,),
            lambda u: (_full_kernel(grid, u[0]),),
            lambda mu, gamma: (vorticity_from_state(mu, gamma, grid),),
            _unpack_vorticity(grid),
        )
    raise ValueError(f"unknown formulation {name!r}; expected one of {FORMULATIONS}")
