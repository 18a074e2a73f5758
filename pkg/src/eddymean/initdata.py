"""Initial data generators.  All outputs are zero-mean, Hermitian and deterministic per seed.

Eddy fields never populate the ``k1 = 0`` column: an eddy vorticity has zero
zonal average by construction.
"""

from __future__ import annotations

import numpy as np

from .spectral import GridSpec, SpectralField2D, ZonalSpectral1D, _reflect1, _reflect2

__all__ = ["INIT_KINDS", "init_data"]

INIT_KINDS = ("single-mode", "band-limited-random", "jet-plus-noise")


def _hermitian2(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(_reflect2(c)))


def _hermitian1(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(_reflect1(c)))


def _band_random_eddy(grid: GridSpec, rng: np.random.Generator, band: tuple[int, int]) -> np.ndarray:
    lo, hi = band
    n = np.abs(grid.index)
    cheb = np.maximum(n[:, None], n[None, :])
    sel = (cheb >= lo) & (cheb <= hi) & (n[:, None] > 0)
    c = rng.standard_normal((grid.N, grid.N)) + 1j * rng.standard_normal((grid.N, grid.N))
    c = _hermitian2(np.where(sel, c, 0.0))
    c[0, :] = 0.0
    return c


def _band_random_zonal(grid: GridSpec, rng: np.random.Generator, band: tuple[int, int]) -> np.ndarray:
    lo, hi = band
    n = np.abs(grid.index)
    sel = (n >= max(lo, 1)) & (n <= hi)
    c = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
    c = _hermitian1(np.where(sel, c, 0.0))
    c[0] = 0.0
    return c


def _normalise(c: np.ndarray, target: float) -> np.ndarray:
    norm = np.sqrt(np.sum(np.abs(c) ** 2))
    return c * (target / norm) if norm > 0 else c


def init_data(
    grid: GridSpec,
    kind: str = "band-limited-random",
    seed: int = 0,
    amplitude: float = 0.1,
    band: tuple[int, int] = (1, 4),
    mu_amplitude: float | None = None,
    mode: tuple[int, int] = (1, 1),
    noise_amplitude: float | None = None,
) -> tuple[ZonalSpectral1D, SpectralField2D]:
    """Return ``(mu0, gamma0)``.

    * ``single-mode``: ``gamma0 = amplitude * cos(k.x)`` for wavevector index
      ``mode`` (coefficients ``amplitude/2`` at ``+-mode``); ``mu0`` is
      ``mu_amplitude * cos(2 pi y/l)`` (zero by default).
    * ``band-limited-random``: independent complex Gaussians on
      ``band[0] <= max|n_i| <= band[1]``, symmetrised and scaled so that
      ``||gamma0||_L2 = amplitude`` and ``||mu0||_L2 = mu_amplitude``
      (defaults to ``amplitude``).
    * ``jet-plus-noise``: ``mu0 = amplitude * cos(2 pi y/l)`` plus a random
      eddy field on ``band`` with L2 norm ``noise_amplitude``
      (default ``amplitude/10``).
    """
    if kind not in INIT_KINDS:
        raise ValueError(f"kind must be one of {INIT_KINDS}")
    lo, hi = int(band[0]), int(band[1])
    if lo < 0 or hi < lo or hi < 1 or hi > grid.kmax_retained:
        raise ValueError(f"band {band} outside the retained modes 1..{grid.kmax_retained}")
    rng = np.random.default_rng(seed)
    N = grid.N
    mu = np.zeros(N, complex)
    gamma = np.zeros((N, N), complex)

    if kind == "single-mode":
        n1, n2 = mode
        if n1 == 0 or max(abs(n1), abs(n2)) > grid.kmax_retained:
            raise ValueError(f"mode {mode} must have n1 != 0 and lie within the retained modes")
        gamma[n1 % N, n2 % N] += amplitude / 2
        gamma[-n1 % N, -n2 % N] += amplitude / 2
        if mu_amplitude:
            mu[1] = mu[-1] = mu_amplitude / 2
    elif kind == "band-limited-random":
        gamma = _normalise(_band_random_eddy(grid, rng, (lo, hi)), amplitude)
        mu_amp = amplitude if mu_amplitude is None else mu_amplitude
        mu = _normalise(_band_random_zonal(grid, rng, (lo, hi)), mu_amp)
    else:
        mu[1] = mu[-1] = amplitude / 2
        noise = amplitude / 10 if noise_amplitude is None else noise_amplitude
        gamma = _normalise(_band_random_eddy(grid, rng, (lo, hi)), noise)
    return ZonalSpectral1D(grid, mu), SpectralField2D(grid, gamma)
