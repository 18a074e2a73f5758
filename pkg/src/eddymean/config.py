"""JSON run configuration.

Top-level sections are ``grid``, ``params``, ``integrator``, ``picard``,
``init`` and ``estimates``; each maps keys onto the fields of the matching
dataclass.  Unknown sections or keys are rejected.  ``grid.l`` may be
omitted and then follows ``params.l``.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .dynamics import SolverParams
from .estimates import LatticeTruncation
from .initdata import INIT_KINDS
from .integrator import IntegratorConfig
from .picard import PicardConfig
from .spectral import GridSpec

__all__ = ["ConfigError", "InitSpec", "RunConfig", "load_config", "config_from_dict"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class InitSpec:
    kind: str = "band-limited-random"
    seed: int = 0
    amplitude: float = 0.1
    band: tuple[int, int] = (1, 4)
    mu_amplitude: float | None = None
    mode: tuple[int, int] = (1, 1)
    noise_amplitude: float | None = None
    snapshot: str | None = None

    def __post_init__(self):
        if self.kind not in INIT_KINDS:
            raise ValueError(f"init.kind must be one of {INIT_KINDS}")
        object.__setattr__(self, "band", tuple(int(b) for b in self.band))
        object.__setattr__(self, "mode", tuple(int(m) for m in self.mode))


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(32))
    params: SolverParams = field(default_factory=SolverParams)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    picard: PicardConfig = field(default_factory=PicardConfig)
    init: InitSpec = field(default_factory=InitSpec)
    estimates: LatticeTruncation = field(default_factory=LatticeTruncation)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "params": asdict(self.params),
            "integrator": asdict(self.integrator),
            "picard": asdict(self.picard),
            "init": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.init).items()},
            "estimates": asdict(self.estimates),
        }

    def override(self, section: str, **values) -> "RunConfig":
        """Replace fields of one section, ignoring ``None`` values (unset CLI flags)."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        current = getattr(self, section)
        try:
            if section == "grid":
                return _checked(self, grid=GridSpec(**{**current.to_dict(), **values}))
            return _checked(self, **{section: replace(current, **values)})
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {exc}") from exc


def _checked(cfg: RunConfig, **changes) -> RunConfig:
    new = replace(cfg, **changes)
    if abs(new.grid.l - new.params.l) > 1e-12 * new.params.l:
        if "params" in changes and "grid" not in changes:
            new = replace(new, grid=GridSpec(new.grid.N, new.params.l, new.grid.dealias_fraction))
        else:
            raise ConfigError(f"grid.l={new.grid.l} disagrees with params.l={new.params.l}")
    return new


_SECTIONS = {
    "grid": GridSpec,
    "params": SolverParams,
    "integrator": IntegratorConfig,
    "picard": PicardConfig,
    "init": InitSpec,
    "estimates": LatticeTruncation,
}


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown configuration sections: {sorted(unknown)}")
    built = {}
    for name, cls in _SECTIONS.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"section {name!r} must be an object")
        allowed = {f.name for f in fields(cls)}
        bad = set(section) - allowed
        if bad:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
        if name == "grid":
            section = {"N": 32, "l": data.get("params", {}).get("l", SolverParams.l), **section}
        try:
            built[name] = cls(**section)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{name}] {exc}") from exc
    cfg = RunConfig(**built)
    if abs(cfg.grid.l - cfg.params.l) > 1e-12 * cfg.params.l:
        raise ConfigError(f"grid.l={cfg.grid.l} disagrees with params.l={cfg.params.l}")
    return cfg


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a JSON config file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
