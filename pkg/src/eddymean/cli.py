"""Command-line entry point: ``eddymean {init,simulate,picard,compare,estimates}``.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .diagnostics import DiagnosticsSink
from .dynamics import State, vorticity_from_state
from .estimates import run_estimates
from .initdata import INIT_KINDS, init_data
from .integrator import simulate
from .io import RunManifest, atomic_write, read_snapshot, write_diagnostics, write_snapshot
from .picard import continuation_run, picard_iterate

__all__ = ["main", "build_parser", "initial_state"]

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


def _init_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--N", type=int, help="grid size")
    p.add_argument("--init", dest="snapshot", help="start from this snapshot instead of generated data")
    p.add_argument("--kind", choices=INIT_KINDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--mu-amplitude", type=float)
    p.add_argument("--band", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--mode", type=int, nargs=2, metavar=("N1", "N2"))
    p.add_argument("--nu", type=float)
    p.add_argument("--c0", type=float)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eddymean", description="Eddy-mean beta-plane solver toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _init_options()

    p = sub.add_parser("init", parents=[common], help="write an initial-data snapshot")
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", parents=[common], help="time-step one formulation")
    p.add_argument("--model", choices=("model", "split", "full"))
    p.add_argument("--scheme", choices=("etdrk2", "exp-euler"))
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--diag-stride", type=int)
    p.add_argument("--save-stride", type=int)
    p.add_argument("--format", choices=("csv", "json-lines"), default="csv")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("picard", parents=[common], help="fixed-point solve (continuation with --T)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--delta-c", type=float)
    p.add_argument("--T", type=float, help="continue up to this time")
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("compare", parents=[common], help="full vs split formulation from the same vorticity")
    p.add_argument("--scheme", choices=("etdrk2", "exp-euler"))
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("estimates", help="run the multiplier-bound probes")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--M", type=int, nargs=2, metavar=("M_LO", "M_HI"))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--out", help="write the JSON report here")
    return parser


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.command == "estimates":
        return cfg.override("estimates", trials=args.trials, seed=args.seed, alpha=args.alpha, s=args.s)
    cfg = cfg.override("grid", N=args.N)
    cfg = cfg.override("params", nu=args.nu, c0=args.c0)
    cfg = cfg.override(
        "init",
        snapshot=args.snapshot,
        kind=args.kind,
        seed=args.seed,
        amplitude=args.amplitude,
        mu_amplitude=args.mu_amplitude,
        band=tuple(args.band) if args.band else None,
        mode=tuple(args.mode) if args.mode else None,
    )
    if args.command in ("simulate", "compare"):
        cfg = cfg.override("integrator", T=args.T, dt=args.dt, scheme=args.scheme)
    if args.command == "simulate":
        cfg = cfg.override("integrator", model=args.model, diag_stride=args.diag_stride, save_stride=args.save_stride)
    if args.command == "picard":
        cfg = cfg.override("picard", alpha=args.alpha, s=args.s, M=args.M, tol=args.tol, delta_calibration=args.delta_c)
    return cfg


def initial_state(cfg: RunConfig) -> State:
    spec = cfg.init
    if spec.snapshot:
        state = read_snapshot(spec.snapshot)
        if state.grid != cfg.grid:
            raise ConfigError(f"snapshot grid {state.grid.to_dict()} differs from configured {cfg.grid.to_dict()}")
        return state
    try:
        mu, gamma = init_data(
            cfg.grid,
            spec.kind,
            seed=spec.seed,
            amplitude=spec.amplitude,
            band=spec.band,
            mu_amplitude=spec.mu_amplitude,
            mode=spec.mode,
            noise_amplitude=spec.noise_amplitude,
        )
    except ValueError as exc:
        raise ConfigError(f"[init] {exc}") from exc
    return State(0.0, mu, gamma)


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=float)
    if out:
        atomic_write(out, (text + "\n").encode("utf-8"))
    print(text)


def _cmd_init(args, cfg: RunConfig) -> int:
    state = initial_state(cfg)
    write_snapshot(state, args.out, cfg.params.to_dict())
    print(json.dumps({"snapshot": args.out, "grid": cfg.grid.to_dict(), "seed": cfg.init.seed}))
    return EXIT_OK


def _cmd_simulate(args, cfg: RunConfig) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("simulate", cfg.to_dict(), __version__, cfg.init.seed, cfg.grid.to_dict(), cfg.params.to_dict())
    state0 = initial_state(cfg)
    sink = DiagnosticsSink(cfg.params)
    traj = simulate(state0, cfg.integrator, cfg.params, sink=sink)
    diag_name = "diagnostics.csv" if args.format == "csv" else "diagnostics.jsonl"
    write_diagnostics(sink.records, out / diag_name, args.format)
    write_snapshot(traj.final, out / "final.snap", cfg.params.to_dict())
    atomic_write(out / "config.json", (json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n").encode())
    manifest.record_outputs([diag_name, "final.snap", "config.json"], out)
    manifest.write(out / "manifest.json")
    summary = {"t_final": traj.final.t, "records": len(sink.records), "failure": traj.failure, "out": str(out)}
    print(json.dumps(summary))
    return EXIT_NUMERICAL if traj.failure else EXIT_OK


def _cmd_picard(args, cfg: RunConfig) -> int:
    state = initial_state(cfg)
    if args.T is not None:
        res = continuation_run(state.mu, state.gamma, cfg.params, cfg.picard, args.T)
        report = {
            "mode": "continuation",
            "T": args.T,
            "intervals": len(res.reports),
            "delta_estimates": res.delta_estimates,
            "delta_used": res.delta_used,
            "reached": res.trajectory.final.t,
            "failure": res.failure,
            "reports": [r.summary() for r in res.reports],
        }
        _emit(report, args.out)
        return EXIT_NUMERICAL if res.failure else EXIT_OK
    rep = picard_iterate(state.mu, state.gamma, cfg.params, cfg.picard)
    _emit({"mode": "single", **rep.summary()}, args.out)
    return EXIT_OK if rep.converged else EXIT_NUMERICAL


def _cmd_compare(args, cfg: RunConfig) -> int:
    state0 = initial_state(cfg)
    g = state0.grid
    runs = {}
    for model in ("full", "split"):
        icfg = cfg.override("integrator", model=model).integrator
        runs[model] = simulate(state0, icfg, cfg.params)
        if runs[model].failure:
            _emit({"failure": runs[model].failure, "model": model}, args.out)
            return EXIT_NUMERICAL
    rel = []
    for a, b in zip(runs["full"].states, runs["split"].states):
        za = vorticity_from_state(a.mu.coeffs, a.gamma.coeffs, g)
        zb = vorticity_from_state(b.mu.coeffs, b.gamma.coeffs, g)
        scale = np.linalg.norm(za)
        rel.append(float(np.linalg.norm(za - zb) / scale) if scale > 0 else float(np.linalg.norm(za - zb)))
    report = {
        "times": len(rel),
        "T": cfg.integrator.T,
        "dt": cfg.integrator.dt,
        "scheme": cfg.integrator.scheme,
        "sup_relative_l2_difference": max(rel),
    }
    _emit(report, args.out)
    return EXIT_OK


def _cmd_estimates(args, cfg: RunConfig) -> int:
    Ms = tuple(args.M) if args.M else (16, 32)
    _emit(run_estimates(cfg.estimates.with_M(Ms[0]), Ms=Ms), args.out)
    return EXIT_OK


_COMMANDS = {
    "init": _cmd_init,
    "simulate": _cmd_simulate,
    "picard": _cmd_picard,
    "compare": _cmd_compare,
    "estimates": _cmd_estimates,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"eddymean: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        print(f"eddymean: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"eddymean: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
