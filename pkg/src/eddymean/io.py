"""Snapshots, diagnostics files and run manifests.

Snapshot layout: one UTF-8 JSON header line, a newline, then the raw payload
of little-endian complex128 values (float64 real/imaginary pairs): the eddy
coefficients in row-major ``(n1, n2)`` FFT order followed by the zonal
coefficients in ``n2`` FFT order.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRecord
from .dynamics import State
from .spectral import GridSpec

__all__ = [
    "SNAPSHOT_FORMAT",
    "SNAPSHOT_VERSION",
    "SnapshotError",
    "SnapshotFormatError",
    "SnapshotPayloadError",
    "SnapshotVersionError",
    "atomic_write",
    "write_snapshot",
    "read_snapshot",
    "read_snapshot_header",
    "write_diagnostics",
    "read_diagnostics",
    "RunManifest",
    "sha256_file",
]

SNAPSHOT_FORMAT = "eddymean-snapshot"
SNAPSHOT_VERSION = 1
_DTYPE = np.dtype("<c16")
_MAX_HEADER = 1 << 20


class SnapshotError(ValueError):
    pass


class SnapshotFormatError(SnapshotError):
    """Header missing or not a snapshot header."""


class SnapshotPayloadError(SnapshotError):
    """Payload length disagrees with the header."""


class SnapshotVersionError(SnapshotError):
    """Header written by an unsupported format version."""


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def write_snapshot(state: State, path: str | os.PathLike, params: dict | None = None) -> None:
    g = state.grid
    gamma = np.ascontiguousarray(state.gamma.coeffs, dtype=_DTYPE)
    mu = np.ascontiguousarray(state.mu.coeffs, dtype=_DTYPE)
    header = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "endianness": "little",
        "dtype": "complex128",
        "grid": g.to_dict(),
        "params": params or {},
        "t": float(state.t),
        "shapes": {"gamma": list(gamma.shape), "mu": list(mu.shape)},
        "payload_bytes": int(gamma.nbytes + mu.nbytes),
    }
    line = json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    atomic_write(path, line + gamma.tobytes() + mu.tobytes())


def _read_header_line(fh) -> dict:
    line = fh.readline(_MAX_HEADER)
    if not line.endswith(b"\n"):
        raise SnapshotFormatError("snapshot header line missing or too long")
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotFormatError(f"malformed snapshot header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotFormatError("not an eddymean snapshot")
    if header.get("version") != SNAPSHOT_VERSION:
        raise SnapshotVersionError(f"unsupported snapshot version {header.get('version')!r}")
    for key in ("grid", "t", "shapes", "endianness"):
        if key not in header:
            raise SnapshotFormatError(f"snapshot header lacks {key!r}")
    if header["endianness"] != "little":
        raise SnapshotFormatError("only little-endian payloads are supported")
    return header


def read_snapshot_header(path: str | os.PathLike) -> dict:
    """Metadata only; the payload is not read."""
    with open(path, "rb") as fh:
        return _read_header_line(fh)


def read_snapshot(path: str | os.PathLike) -> State:
    with open(path, "rb") as fh:
        header = _read_header_line(fh)
        payload = fh.read()
    try:
        grid = GridSpec(**header["grid"])
        sg = tuple(header["shapes"]["gamma"])
        sm = tuple(header["shapes"]["mu"])
    except (TypeError, KeyError, ValueError) as exc:
        raise SnapshotFormatError(f"invalid grid or shapes in header: {exc}") from exc
    if sg != (grid.N, grid.N) or sm != (grid.N,):
        raise SnapshotFormatError("field shapes do not match the grid")
    ng = sg[0] * sg[1]
    expected = (ng + sm[0]) * _DTYPE.itemsize
    if len(payload) != expected:
        raise SnapshotPayloadError(f"payload has {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype=_DTYPE).astype(complex)
    return State.from_arrays(grid, header["t"], data[ng:].copy(), data[:ng].reshape(sg).copy())


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _check_monotone(records: Sequence[DiagnosticsRecord]) -> None:
    for a, b in zip(records, records[1:]):
        if not b.t > a.t:
            raise ValueError(f"diagnostics times must increase strictly ({a.t} then {b.t})")


def write_diagnostics(records: Sequence[DiagnosticsRecord], path: str | os.PathLike, format: str = "csv") -> None:
    """CSV with :data:`CSV_COLUMNS`, or JSON-lines with every record field."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    _check_monotone(records)
    lines: list[str] = []
    if format == "csv":
        lines.append(",".join(CSV_COLUMNS))
        for r in records:
            lines.append(",".join(_fmt(v) for v in r.csv_row()))
    elif format == "json-lines":
        names = DiagnosticsRecord.field_names()
        for r in records:
            body = ", ".join(f'"{n}": {_fmt(getattr(r, n))}' for n in names)
            lines.append("{" + body + "}")
    else:
        raise ValueError("format must be 'csv' or 'json-lines'")
    atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_diagnostics(path: str | os.PathLike, format: str = "csv") -> list:
    """CSV gives a list of column dicts; JSON-lines gives :class:`DiagnosticsRecord` objects."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if format == "csv":
        cols = text[0].split(",")
        if tuple(cols) != CSV_COLUMNS:
            raise ValueError("unexpected CSV header")
        return [dict(zip(cols, map(float, row.split(",")))) for row in text[1:] if row]
    if format == "json-lines":
        return [DiagnosticsRecord(**json.loads(row)) for row in text if row]
    raise ValueError("format must be 'csv' or 'json-lines'")


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Configuration echo plus checksums of every output of a run."""

    command: str
    config: dict
    code_version: str
    seed: int | None
    grid: dict
    params: dict
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: dict[str, str] = field(default_factory=dict)

    def record_outputs(self, names: Iterable[str], root: str | os.PathLike) -> None:
        """Checksum files given relative to ``root``."""
        root = Path(root)
        for name in names:
            self.outputs[str(name)] = sha256_file(root / name)
        self.finished = _now()

    def write(self, path: str | os.PathLike) -> None:
        atomic_write(path, (json.dumps(asdict(self), indent=2, sort_keys=True) + "\n").encode("utf-8"))

    @classmethod
    def read(cls, path: str | os.PathLike) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    def verify(self, root: str | os.PathLike) -> dict[str, bool]:
        root = Path(root)
        return {name: (root / name).exists() and sha256_file(root / name) == digest for name, digest in self.outputs.items()}
