import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eddymean.diagnostics import CSV_COLUMNS, DiagnosticsRecord, DiagnosticsSink, energy_budget
from eddymean.dynamics import SolverParams, State
from eddymean.initdata import init_data
from eddymean.integrator import IntegratorConfig, simulate
from eddymean.io import (
    RunManifest,
    SnapshotFormatError,
    SnapshotPayloadError,
    SnapshotVersionError,
    read_diagnostics,
    read_snapshot,
    read_snapshot_header,
    write_diagnostics,
    write_snapshot,
)
from eddymean.spectral import GridSpec, SpectralField2D, inverse_transform


class TestEnergyBudget:
    def test_single_mode_hand_values(self):
        g = GridSpec(16)
        zeta = np.zeros((16, 16), complex)
        # psi has +-1/2 at +-(1, 1); zeta = -|k|^2 psi
        zeta[1, 1] = zeta[-1, -1] = -1.0
        rec = energy_budget(SpectralField2D(g, zeta), SolverParams())
        assert rec.energy == pytest.approx(1.0)
        assert rec.enstrophy == pytest.approx(2.0)
        assert rec.eddy_energy == pytest.approx(1.0) and rec.mean_energy == 0.0

    def test_zero_field(self):
        g = GridSpec(8)
        rec = energy_budget(SpectralField2D.zeros(g), SolverParams())
        assert all(v == 0 for v in rec.csv_row())

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-1, 1))
    def test_partitions(self, seed, c0):
        g = GridSpec(16)
        mu, gamma = init_data(g, seed=seed, amplitude=0.4, mu_amplitude=0.7)
        rec = energy_budget(State(0.0, mu, gamma), SolverParams(c0=c0))
        assert rec.energy == pytest.approx(rec.mean_energy + rec.eddy_energy, rel=1e-12)
        assert rec.enstrophy == pytest.approx(rec.mean_enstrophy + rec.eddy_enstrophy, rel=1e-12)

    def test_against_physical_quadrature(self):
        g = GridSpec(32)
        mu, gamma = init_data(g, seed=3, amplitude=0.5)
        rec = energy_budget(State(0.0, mu, gamma), SolverParams(c0=0.2))
        ubar = mu.physical() + 0.2
        zeta_e = inverse_transform(gamma)
        assert rec.mean_energy == pytest.approx(np.mean(ubar**2), rel=1e-12)
        assert rec.eddy_enstrophy == pytest.approx(np.mean(zeta_e**2), rel=1e-12)
        assert rec.l2_gamma == pytest.approx(math.sqrt(np.mean(zeta_e**2)), rel=1e-12)

    def test_sink_collects(self):
        g = GridSpec(16)
        mu, gamma = init_data(g)
        sink = DiagnosticsSink(SolverParams())
        simulate(State(0.0, mu, gamma), IntegratorConfig(dt=0.01, T=0.05), SolverParams(), sink)
        assert len(sink.records) == 6
        assert np.all(np.diff(sink.column("t")) > 0)


class TestInitData:
    def test_deterministic(self):
        g = GridSpec(16)
        a = init_data(g, seed=9)
        b = init_data(g, seed=9)
        assert np.array_equal(a[1].coeffs, b[1].coeffs) and np.array_equal(a[0].coeffs, b[0].coeffs)

    @pytest.mark.parametrize("kind", ["single-mode", "band-limited-random", "jet-plus-noise"])
    def test_zero_mean_hermitian(self, kind):
        g = GridSpec(16)
        mu, gamma = init_data(g, kind, seed=1, mu_amplitude=0.3)
        assert mu.is_zero_mean and gamma.is_zero_mean
        assert gamma.hermitian_defect == 0 and mu.hermitian_defect == 0
        assert np.abs(gamma.coeffs[0, :]).max() == 0

    def test_single_mode_field(self):
        g = GridSpec(16)
        X, Y = g.mesh()
        _, gamma = init_data(g, "single-mode", amplitude=0.2, mode=(2, -1))
        np.testing.assert_allclose(inverse_transform(gamma), 0.2 * np.cos(2 * X - Y), atol=1e-15)

    def test_jet_profile(self):
        g = GridSpec(16)
        mu, gamma = init_data(g, "jet-plus-noise", amplitude=0.5)
        np.testing.assert_allclose(mu.physical(), 0.5 * np.cos(g.coords), atol=1e-15)
        assert np.linalg.norm(gamma.coeffs) == pytest.approx(0.05)

    def test_amplitude_scaling(self):
        g = GridSpec(32)
        amps = np.array([0.1, 0.3, 1.0, 2.5])
        norms = np.array([np.linalg.norm(init_data(g, seed=2, amplitude=a)[1].coeffs) for a in amps])
        slope, intercept = np.polyfit(amps, norms, 1)
        assert slope == pytest.approx(1.0, abs=1e-12) and abs(intercept) < 1e-12

    @pytest.mark.parametrize("band", [(1, 11), (3, 2), (-1, 2)])
    def test_band_outside_grid(self, band):
        with pytest.raises(ValueError):
            init_data(GridSpec(32), band=band)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            init_data(GridSpec(8), "vortex")


def _state(N=16, t=0.25):
    g = GridSpec(N)
    mu, gamma = init_data(g, seed=4, band=(1, g.kmax_retained))
    return State(t, mu, gamma)


class TestSnapshot:
    def test_round_trip_bit_exact(self, tmp_path):
        s = _state()
        path = tmp_path / "a.snap"
        write_snapshot(s, path, {"nu": 0.05})
        back = read_snapshot(path)
        assert back.t == s.t and back.grid == s.grid
        assert back.gamma.coeffs.tobytes() == s.gamma.coeffs.tobytes()
        assert back.mu.coeffs.tobytes() == s.mu.coeffs.tobytes()

    def test_layout(self, tmp_path):
        s = _state(N=8)
        path = tmp_path / "a.snap"
        write_snapshot(s, path)
        raw = path.read_bytes()
        header, payload = raw.split(b"\n", 1)
        meta = json.loads(header.decode("utf-8"))
        assert meta["endianness"] == "little" and meta["version"] == 1
        assert len(payload) == (64 + 8) * 16
        first = np.frombuffer(payload[:16], dtype="<f8")
        assert first[0] == s.gamma.coeffs[0, 0].real and first[1] == s.gamma.coeffs[0, 0].imag
        tail = np.frombuffer(payload[-16:], dtype="<f8")
        assert tail[0] == s.mu.coeffs[-1].real

    def test_header_only(self, tmp_path):
        path = tmp_path / "a.snap"
        write_snapshot(_state(), path)
        with open(path, "r+b") as fh:  # corrupt the payload; the header must still read
            fh.seek(-4, 2)
            fh.truncate()
        assert read_snapshot_header(path)["grid"]["N"] == 16

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "a.snap"
        write_snapshot(_state(), path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SnapshotPayloadError):
            read_snapshot(path)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.snap"
        path.write_bytes(b"not json\n" + b"\0" * 32)
        with pytest.raises(SnapshotFormatError):
            read_snapshot(path)
        path.write_bytes(b"\0" * 32)
        with pytest.raises(SnapshotFormatError):
            read_snapshot(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "a.snap"
        write_snapshot(_state(), path)
        header, payload = path.read_bytes().split(b"\n", 1)
        meta = json.loads(header)
        meta["version"] = 99
        path.write_bytes(json.dumps(meta).encode() + b"\n" + payload)
        with pytest.raises(SnapshotVersionError):
            read_snapshot(path)

    def test_errors_are_distinct(self):
        assert len({SnapshotFormatError, SnapshotPayloadError, SnapshotVersionError}) == 3
        assert not issubclass(SnapshotPayloadError, SnapshotFormatError)


def _records(n=3):
    g = GridSpec(16)
    mu, gamma = init_data(g, seed=5)
    sink = DiagnosticsSink(SolverParams(s=1.0))
    simulate(State(0.0, mu, gamma), IntegratorConfig(dt=0.01, T=0.01 * (n - 1)), SolverParams(s=1.0), sink)
    return sink.records


class TestDiagnosticsFiles:
    def test_one_csv_row(self, tmp_path):
        path = tmp_path / "d.csv"
        write_diagnostics(_records(1), path)
        lines = path.read_text().splitlines()
        assert lines[0].split(",") == list(CSV_COLUMNS)
        assert len(lines) == 2 and len(lines[1].split(",")) == 12

    def test_csv_round_trip(self, tmp_path):
        recs = _records()
        path = tmp_path / "d.csv"
        write_diagnostics(recs, path)
        rows = read_diagnostics(path)
        for r, row in zip(recs, rows):
            assert [row[c] for c in CSV_COLUMNS] == r.csv_row()

    def test_json_lines_round_trip(self, tmp_path):
        recs = _records()
        path = tmp_path / "d.jsonl"
        write_diagnostics(recs, path, "json-lines")
        assert read_diagnostics(path, "json-lines") == recs

    def test_seventeen_digits(self, tmp_path):
        rec = DiagnosticsRecord(*([0.1] + [1 / 3] * 15))
        path = tmp_path / "d.csv"
        write_diagnostics([rec], path)
        assert "0.33333333333333331" in path.read_text()

    def test_monotone_time_enforced(self, tmp_path):
        recs = _records()
        with pytest.raises(ValueError):
            write_diagnostics([recs[1], recs[0]], tmp_path / "d.csv")

    def test_empty_and_bad_format(self, tmp_path):
        with pytest.raises(ValueError):
            write_diagnostics([], tmp_path / "d.csv")
        with pytest.raises(ValueError):
            write_diagnostics(_records(1), tmp_path / "d.x", "xml")

    def test_io_errors_surface(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError):
            write_diagnostics(_records(1), blocker / "d.csv")


class TestManifest:
    def test_checksums_and_verify(self, tmp_path):
        (tmp_path / "out.txt").write_text("hello")
        m = RunManifest("simulate", {"a": 1}, "0.1.0", 7, {"N": 8}, {"nu": 0.1})
        m.record_outputs(["out.txt"], tmp_path)
        assert m.outputs["out.txt"] == "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        m.write(tmp_path / "manifest.json")
        again = RunManifest.read(tmp_path / "manifest.json")
        assert again == m and again.verify(tmp_path) == {"out.txt": True}
        (tmp_path / "out.txt").write_text("changed")
        assert again.verify(tmp_path) == {"out.txt": False}
