import numpy as np
import pytest

from eddymean.spectral import GridSpec, SpectralField2D, ZonalSpectral1D, _reflect1, _reflect2


def random_field(grid: GridSpec, rng: np.random.Generator, eddy_only: bool = False, scale: float = 1.0):
    """Hermitian, zero-mean coefficients on the retained modes."""
    c = rng.standard_normal((grid.N, grid.N)) + 1j * rng.standard_normal((grid.N, grid.N))
    c = 0.5 * (c + np.conj(_reflect2(c))) * grid.mask2d * scale
    c[0, 0] = 0.0
    if eddy_only:
        c[0, :] = 0.0
    return SpectralField2D(grid, c)


def random_profile(grid: GridSpec, rng: np.random.Generator, scale: float = 1.0):
    c = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
    c = 0.5 * (c + np.conj(_reflect1(c))) * grid.mask1d * scale
    c[0] = 0.0
    return ZonalSpectral1D(grid, c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[8, 16, 32], ids=lambda n: f"N{n}")
def grid(request):
    return GridSpec(request.param)


@pytest.fixture
def grid8():
    return GridSpec(8)


@pytest.fixture
def grid32():
    return GridSpec(32)


# criterion id -> list of (part, passed, detail); filled by the acceptance suite
_ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def acceptance():
    """``acceptance(criterion, part, passed, detail)`` logs one check and prints it."""

    def record(criterion: str, part: str, passed: bool, detail: str) -> bool:
        _ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
        print(f"{criterion} {part}: {'PASS' if passed else 'FAIL'} ({detail})")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: int(c[1:])):
        parts = _ACCEPTANCE[crit]
        ok = all(p for _, p, _d in parts)
        failed = "; ".join(f"{name}: {d}" for name, p, d in parts if not p)
        summary = failed if failed else "; ".join(f"{name}: {d}" for name, _p, d in parts)
        terminalreporter.write_line(f"{crit} {'PASS' if ok else 'FAIL'}  {summary}")
