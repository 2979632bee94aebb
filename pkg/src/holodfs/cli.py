"""Command-line front end.

Exit codes: 0 success, 1 physics-check failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import oracles
from .analysis import (
    convergence_check,
    logical_basis_state,
    simulate_gate,
    theta_scan,
)
from .config import ConfigError, RunConfig, parse_config
from .holonomy import GateSpec, ParameterError, u1_matrix, u2_matrix

EXIT_OK, EXIT_PHYSICS, EXIT_USAGE = 0, 1, 2

DT_HALVING_TOL = 1e-6
N_MAX_TOL = 1e-4


def _load(path: str | None) -> RunConfig:
    return parse_config(path) if path else RunConfig()


def matrix_csv(mat: np.ndarray) -> str:
    """Complex matrix as CSV with interleaved ``re,im`` columns per entry."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = mat.shape[1]
    w.writerow([f"c{j}_{part}" for j in range(n) for part in ("re", "im")])
    for row in mat:
        w.writerow([f"{v:.9g}" for z in row for v in (z.real + 0.0, z.imag + 0.0)])
    return buf.getvalue()


def cmd_gate_matrix(args) -> int:
    fn = u1_matrix if args.kind == "u1" else u2_matrix
    text = matrix_csv(fn(args.theta, args.phi))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _initial_amplitudes(args, kind: str) -> np.ndarray:
    if args.Theta is not None:
        if kind != "u1":
            raise ParameterError("--Theta superpositions are defined for u1 only")
        return np.array([np.cos(args.Theta), np.sin(args.Theta)], dtype=complex)
    label = args.initial or ("0" if kind == "u1" else "00")
    return logical_basis_state(label, kind)


def cmd_simulate(args) -> int:
    cfg = _load(args.config)
    kind = args.gate or cfg.gate_kind
    angle = cfg.angle if args.theta is None else args.theta
    if args.gate and args.gate != cfg.gate_kind and args.theta is None:
        angle = np.pi / 2 if kind == "u1" else np.pi / 4
    phase = cfg.phase if args.phi is None else args.phi
    mode = args.mode or cfg.mode
    init = _initial_amplitudes(args, kind)
    gate = GateSpec(kind, angle, phase)
    series = simulate_gate(gate, init, cfg.params, mode, cfg.options)[0]
    out = Path(args.output) if args.output else cfg.output_dir / f"timeseries_{kind}_{args.initial or 'init'}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    series.to_csv(out)
    print(f"gate {kind}(angle={angle:.9g}, phase={phase:.9g}) mode={mode} tau={series.meta['tau']:.9g} ns")
    print(f"final fidelity {series.final_fidelity:.9g}")
    print(f"max fidelity   {series.max_fidelity():.9g}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_scan_theta(args) -> int:
    cfg = _load(args.config)
    if cfg.gate_kind != "u1":
        raise ParameterError("scan-theta needs [drives] kind = u1")
    angle = cfg.angle if args.theta is None else args.theta
    phase = cfg.phase if args.phi is None else args.phi
    options = replace(cfg.options, duration_factor=args.window)
    result = theta_scan(GateSpec("u1", angle, phase), args.points, cfg.params, options, workers=args.workers)
    out = Path(args.output) if args.output else cfg.output_dir / "theta_scan.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    result.to_csv(out)
    diff = np.abs(result.max_fidelity_identical - result.max_fidelity_individual).max()
    print(f"min maxF identical  {result.max_fidelity_identical.min():.9g}")
    print(f"min maxF individual {result.max_fidelity_individual.min():.9g}")
    print(f"max |difference|    {diff:.9g}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = oracles.run_all(flip_minus=args.flip_minus_sign)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_PHYSICS


def cmd_convergence(args) -> int:
    cfg = _load(args.config)
    kind = args.gate or cfg.gate_kind
    angle = cfg.angle if kind == cfg.gate_kind else (np.pi / 2 if kind == "u1" else np.pi / 4)
    init = logical_basis_state(args.initial or ("0" if kind == "u1" else "00"), kind)
    res = convergence_check(GateSpec(kind, angle, cfg.phase), init, cfg.params, cfg.mode, cfg.options)
    ok_dt = res["dt_halving_delta"] < DT_HALVING_TOL
    ok_n = res["n_max_delta"] < N_MAX_TOL
    print(f"final fidelity        {res['fidelity']:.9g}  (dt = {res['dt']:.6g} ns)")
    print(f"{'PASS' if ok_dt else 'FAIL'}  dt halving delta   {res['dt_halving_delta']:.3e} < {DT_HALVING_TOL:.0e}")
    print(f"{'PASS' if ok_n else 'FAIL'}  n_max + 1 delta    {res['n_max_delta']:.3e} < {N_MAX_TOL:.0e}")
    return EXIT_OK if ok_dt and ok_n else EXIT_PHYSICS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holodfs",
        description="Holonomic gates in decoherence-free subspaces: cavity-QED simulation",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gate-matrix", help="print an analytic gate matrix as CSV")
    p.add_argument("--kind", choices=["u1", "u2"], required=True)
    p.add_argument("--theta", type=float, required=True, help="mixing angle (rad)")
    p.add_argument("--phi", type=float, default=0.0, help="phase (rad)")
    p.add_argument("--output", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_gate_matrix)

    p = sub.add_parser("simulate", help="full-model Lindblad run of one gate")
    p.add_argument("--config", help="run configuration file")
    p.add_argument("--gate", choices=["u1", "u2"])
    p.add_argument("--initial", help="logical basis label, e.g. 0, 1, 00, 01")
    p.add_argument("--Theta", type=float, help="start in cos(T)|0>_L + sin(T)|1>_L (u1 only)")
    p.add_argument("--theta", type=float, help="override gate angle (rad)")
    p.add_argument("--phi", type=float, help="override gate phase (rad)")
    p.add_argument("--mode", choices=["collective", "individual"])
    p.add_argument("--output", help="CSV path (default: <output dir>/timeseries_<gate>_<initial>.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan-theta", help="max fidelity versus initial-state angle")
    p.add_argument("--config", help="run configuration file")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--theta", type=float, help="override gate angle (rad)")
    p.add_argument("--phi", type=float, help="override gate phase (rad)")
    p.add_argument("--window", type=float, default=1.2, help="max-fidelity window in units of tau")
    p.add_argument("--workers", type=int, help="worker processes (default: $HOLODFS_WORKERS or 1)")
    p.add_argument("--output", help="CSV path (default: <output dir>/theta_scan.csv)")
    p.set_defaults(func=cmd_scan_theta)

    p = sub.add_parser("verify", help="run the oracle suite")
    p.add_argument("--flip-minus-sign", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convergence", help="dt-halving and photon-cutoff checks")
    p.add_argument("--config", help="run configuration file")
    p.add_argument("--gate", choices=["u1", "u2"])
    p.add_argument("--initial", help="logical basis label")
    p.set_defaults(func=cmd_convergence)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ParameterError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
