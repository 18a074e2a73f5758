"""Fourier-lattice bookkeeping on the periodic box [0, l)^2.

Coefficients are stored in full FFT layout, ``coeffs[i1, i2]`` with ``i1`` the
x index and ``i2`` the y index, and are normalised as Fourier-series
coefficients::

    c(n) = (1/l^2) * sum_{x in grid} f(x) exp(-i k.x) * (l/N)^2,   k = 2*pi*n/l

so that sums over the lattice are literal sums over ``coeffs``.  The integer
index of array position ``j`` is ``j`` for ``j <= N/2`` and ``j - N`` above; the
Nyquist index is labelled ``+N/2``.

Two layers live here: array kernels (leading underscore, broadcast over any
batch dimensions) used by the solvers, and the field-level functions that
validate their inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

__all__ = [
    "SpectralError",
    "GridMismatchError",
    "HermitianSymmetryError",
    "ZeroModeError",
    "GridSpec",
    "SpectralField2D",
    "ZonalSpectral1D",
    "forward_transform",
    "inverse_transform",
    "derivative",
    "laplacian",
    "inverse_laplacian",
    "zonal_average",
    "project_zero_mean",
    "dealias_product",
    "sobolev_norm",
    "embed_zonal",
]

ZERO_MEAN_RTOL = 1e-14
HERMITIAN_TOL = 1e-10


class SpectralError(ValueError):
    """Base class for invalid spectral operations."""


class GridMismatchError(SpectralError):
    pass


class HermitianSymmetryError(SpectralError):
    pass


class ZeroModeError(SpectralError):
    """Raised when an operation needs a zero-mean input and did not get one."""


def fft_workers() -> int | None:
    """Thread cap for FFTs, from ``EDDYMEAN_THREADS`` (unset means 1)."""
    raw = os.environ.get("EDDYMEAN_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    """Square periodic grid with ``N`` points per side on a box of side ``l``."""

    N: int
    l: float = 2 * np.pi
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 4, got {self.N}")
        if not self.l > 0:
            raise ValueError(f"l must be positive, got {self.l}")
        if not 0 < self.dealias_fraction <= 1:
            raise ValueError("dealias_fraction must lie in (0, 1]")

    # -- lattice ---------------------------------------------------------
    @cached_property
    def index(self) -> np.ndarray:
        """Integer wavenumber index per array position (Nyquist as +N/2)."""
        n = np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)
        n[self.N // 2] = self.N // 2
        return n

    @cached_property
    def k(self) -> np.ndarray:
        return (2 * np.pi / self.l) * self.index.astype(float)

    @cached_property
    def kx(self) -> np.ndarray:
        return self.k[:, None]

    @cached_property
    def ky(self) -> np.ndarray:
        return self.k[None, :]

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        """1/|k|^2 with the (0, 0) entry set to 0."""
        out = np.zeros_like(self.ksq)
        nz = self.ksq > 0
        out[nz] = 1.0 / self.ksq[nz]
        return out

    @cached_property
    def kmax_retained(self) -> int:
        """Largest |n_i| kept by the dealiasing filter.

        Modes with ``|n_i| >= dealias_fraction * N/2`` are removed, which keeps
        ``3 * kmax < N`` so quadratic products never alias onto kept modes.
        """
        cut = self.dealias_fraction * self.N / 2
        return int(np.ceil(cut - 1e-12)) - 1

    @cached_property
    def mask1d(self) -> np.ndarray:
        return np.abs(self.index) <= self.kmax_retained

    @cached_property
    def mask2d(self) -> np.ndarray:
        return self.mask1d[:, None] & self.mask1d[None, :]

    @cached_property
    def nyquist1d(self) -> np.ndarray:
        m = np.ones(self.N)
        m[self.N // 2] = 0.0
        return m

    @cached_property
    def coords(self) -> np.ndarray:
        return np.arange(self.N) * (self.l / self.N)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical sample coordinates ``(X, Y)`` indexed ``[ix, iy]``."""
        return np.meshgrid(self.coords, self.coords, indexing="ij")

    def to_dict(self) -> dict:
        return {"N": int(self.N), "l": float(self.l), "dealias_fraction": float(self.dealias_fraction)}


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------

def _fwd2(samples: np.ndarray) -> np.ndarray:
    N = samples.shape[-1]
    return scipy.fft.fft2(samples, axes=(-2, -1), workers=fft_workers()) / (N * N)


def _inv2(coeffs: np.ndarray) -> np.ndarray:
    N = coeffs.shape[-1]
    return scipy.fft.ifft2(coeffs, axes=(-2, -1), workers=fft_workers()).real * (N * N)


def _fwd1(samples: np.ndarray) -> np.ndarray:
    N = samples.shape[-1]
    return scipy.fft.fft(samples, axis=-1, workers=fft_workers()) / N


def _inv1(coeffs: np.ndarray) -> np.ndarray:
    N = coeffs.shape[-1]
    return scipy.fft.ifft(coeffs, axis=-1, workers=fft_workers()).real * N


def _reflect2(c: np.ndarray) -> np.ndarray:
    """c(-n) in array layout."""
    return np.roll(c[..., ::-1, ::-1], 1, axis=(-2, -1))


def _reflect1(c: np.ndarray) -> np.ndarray:
    return np.roll(c[..., ::-1], 1, axis=-1)


def _hermitian_defect(c: np.ndarray, reflect) -> float:
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(c - np.conj(reflect(c))))) / scale


def _product2(grid: GridSpec, *factors: np.ndarray) -> np.ndarray:
    """Galerkin-truncated product of 2D coefficient arrays."""
    phys = None
    for f in factors:
        p = _inv2(f * grid.mask2d)
        phys = p if phys is None else phys * p
    return _fwd2(phys) * grid.mask2d


def _zonal_mean_of_product(grid: GridSpec, a_phys: np.ndarray, b_phys: np.ndarray) -> np.ndarray:
    """1D coefficients of the x-average of a product of physical fields (masked)."""
    return _fwd1(np.mean(a_phys * b_phys, axis=-2)) * grid.mask1d


# ---------------------------------------------------------------------------
# field types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralField2D:
    """Fourier coefficients of a real field on the 2-torus."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.N, self.grid.N):
            raise GridMismatchError(f"expected shape {(self.grid.N,) * 2}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField2D":
        return cls(grid, np.zeros((grid.N, grid.N), complex))

    def coeff(self, n1: int, n2: int) -> complex:
        N = self.grid.N
        return complex(self.coeffs[n1 % N, n2 % N])

    @property
    def is_zero_mean(self) -> bool:
        scale = float(np.max(np.abs(self.coeffs)))
        return abs(self.coeffs[0, 0]) <= ZERO_MEAN_RTOL * scale

    @property
    def hermitian_defect(self) -> float:
        return _hermitian_defect(self.coeffs, _reflect2)

    def _check(self, other) -> np.ndarray:
        if isinstance(other, SpectralField2D):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.coeffs
        return other

    def __add__(self, other):
        return SpectralField2D(self.grid, self.coeffs + self._check(other))

    def __sub__(self, other):
        return SpectralField2D(self.grid, self.coeffs - self._check(other))

    def __mul__(self, scalar):
        return SpectralField2D(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField2D(self.grid, -self.coeffs)

    def physical(self) -> np.ndarray:
        return inverse_transform(self)


@dataclass(frozen=True, eq=False)
class ZonalSpectral1D:
    """Fourier coefficients of a real zonal profile f(y)."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.N,):
            raise GridMismatchError(f"expected shape ({self.grid.N},), got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ZonalSpectral1D":
        return cls(grid, np.zeros(grid.N, complex))

    def coeff(self, n2: int) -> complex:
        return complex(self.coeffs[n2 % self.grid.N])

    @property
    def is_zero_mean(self) -> bool:
        scale = float(np.max(np.abs(self.coeffs)))
        return abs(self.coeffs[0]) <= ZERO_MEAN_RTOL * scale

    @property
    def hermitian_defect(self) -> float:
        return _hermitian_defect(self.coeffs, _reflect1)

    def _check(self, other) -> np.ndarray:
        if isinstance(other, ZonalSpectral1D):
            if other.grid != self.grid:
                raise GridMismatchError("profiles live on different grids")
            return other.coeffs
        return other

    def __add__(self, other):
        return ZonalSpectral1D(self.grid, self.coeffs + self._check(other))

    def __sub__(self, other):
        return ZonalSpectral1D(self.grid, self.coeffs - self._check(other))

    def __mul__(self, scalar):
        return ZonalSpectral1D(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return ZonalSpectral1D(self.grid, -self.coeffs)

    def physical(self) -> np.ndarray:
        """Samples of the profile at ``grid.coords``."""
        _require_hermitian(self)
        return _inv1(self.coeffs)


def _require_hermitian(f):
    if f.hermitian_defect > HERMITIAN_TOL:
        raise HermitianSymmetryError(
            f"coefficients are not Hermitian (defect {f.hermitian_defect:.3e}); field is not real"
        )


def _require_zero_mean(f, what="input"):
    if not f.is_zero_mean:
        raise ZeroModeError(f"{what} must have vanishing mean coefficient")


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError("operands live on different grids")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def forward_transform(samples: np.ndarray, grid: GridSpec) -> SpectralField2D:
    """Fourier-series coefficients of real samples ``samples[ix, iy]``."""
    samples = np.asarray(samples)
    if samples.shape != (grid.N, grid.N):
        raise GridMismatchError(f"samples have shape {samples.shape}, grid expects {(grid.N, grid.N)}")
    if np.iscomplexobj(samples):
        raise ValueError("samples must be real")
    return SpectralField2D(grid, _fwd2(samples.astype(float)))


def inverse_transform(field: SpectralField2D) -> np.ndarray:
    _require_hermitian(field)
    return _inv2(field.coeffs)


def derivative(field, axis: str, order: int = 1):
    """Spectral derivative; multiplies by ``(i k_axis)**order``.

    Works on 2D fields (``axis`` in ``{"x", "y"}``) and on zonal profiles
    (``axis="y"`` only).  Odd orders drop the Nyquist mode, whose derivative
    has no real representation on the grid.
    """
    if int(order) != order or order < 1:
        raise ValueError("order must be a positive integer")
    g = field.grid
    if isinstance(field, ZonalSpectral1D):
        if axis != "y":
            raise ValueError("a zonal profile only has a y derivative")
        mult = (1j * g.k) ** order
        if order % 2:
            mult = mult * g.nyquist1d
        return ZonalSpectral1D(g, field.coeffs * mult)
    if axis == "x":
        mult = (1j * g.kx) ** order
        if order % 2:
            mult = mult * g.nyquist1d[:, None]
    elif axis == "y":
        mult = (1j * g.ky) ** order
        if order % 2:
            mult = mult * g.nyquist1d[None, :]
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return SpectralField2D(g, field.coeffs * mult)


def laplacian(field: SpectralField2D) -> SpectralField2D:
    return SpectralField2D(field.grid, -field.grid.ksq * field.coeffs)


def inverse_laplacian(field: SpectralField2D) -> SpectralField2D:
    """Solve ``lap(u) = field`` for zero-mean ``u``; the mean mode is not invertible."""
    _require_zero_mean(field)
    out = -field.grid.inv_ksq * field.coeffs
    out[0, 0] = 0.0
    return SpectralField2D(field.grid, out)


def zonal_average(field: SpectralField2D) -> ZonalSpectral1D:
    return ZonalSpectral1D(field.grid, field.coeffs[0, :].copy())


def embed_zonal(profile: ZonalSpectral1D) -> SpectralField2D:
    """The x-independent 2D field whose zonal average is ``profile``."""
    c = np.zeros((profile.grid.N, profile.grid.N), complex)
    c[0, :] = profile.coeffs
    return SpectralField2D(profile.grid, c)


def project_zero_mean(field):
    c = field.coeffs.copy()
    c.flat[0] = 0.0
    return type(field)(field.grid, c)


def dealias_product(a, b):
    """Galerkin-truncated product of two fields (2D, or 2D with a zonal profile).

    Inputs are filtered to the retained modes, multiplied on the grid and the
    product filtered again; the result equals the direct convolution of the
    filtered inputs restricted to retained modes.
    """
    _same_grid(a, b)
    g = a.grid
    if isinstance(a, ZonalSpectral1D) and isinstance(b, ZonalSpectral1D):
        out = _fwd1(_inv1(a.coeffs * g.mask1d) * _inv1(b.coeffs * g.mask1d)) * g.mask1d
        return ZonalSpectral1D(g, out)
    a2 = embed_zonal(a) if isinstance(a, ZonalSpectral1D) else a
    b2 = embed_zonal(b) if isinstance(b, ZonalSpectral1D) else b
    return SpectralField2D(g, _product2(g, a2.coeffs, b2.coeffs))


def _bracket_weight(grid: GridSpec, s: float, zonal: bool) -> np.ndarray:
    ksq = grid.k**2 if zonal else grid.ksq
    return (1.0 + ksq) ** s


def sobolev_norm(field, s: float) -> float:
    """``(sum <k>^{2s} |c_k|^2)^{1/2}`` with ``<k> = (1+|k|^2)^{1/2}``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    w = _bracket_weight(field.grid, s, isinstance(field, ZonalSpectral1D))
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2)))


def _sobolev_norm_arrays(grid: GridSpec, c: np.ndarray, s: float, zonal: bool) -> np.ndarray:
    """Batched H^s norms over the trailing (1 or 2) axes."""
    w = _bracket_weight(grid, s, zonal)
    axes = (-1,) if zonal else (-2, -1)
    return np.sqrt(np.sum(w * np.abs(c) ** 2, axis=axes))
