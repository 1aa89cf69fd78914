"""Command-line entry points.

Subcommands: run, verify, stability, convergence, transform.  Each exits
0 on success and nonzero with a single `error: ...` line on stderr
otherwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, parse_config
from .errors import Mhd1dError
from .experiments import (MollifierConfig, convergence_study, perturb_initial,
                          stability_experiment)
from .fileio import (emit_outputs, load_initial_csv, load_snapshot_csv,
                     load_tolerances, verify_outputs, _atomic_write, _csv_text,
                     EULERIAN_HEADER)
from .model import MassGrid, validate_initial
from .oracles import NormSpec, diagnose_trajectory
from .presets import load_preset
from .solver import run as run_solver
from .transform import to_eulerian

# mollifier config is parsed but only used via the library API for now
_ = MollifierConfig


def _load_config(path: str) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise Mhd1dError(f"config file not found: {path}")
    return parse_config(p.read_text())


def _initial_and_grid(cfg: RunConfig):
    if cfg.init_file is not None:
        grid, data = load_initial_csv(cfg.init_file)
        return grid, validate_initial(data, grid)
    grid = MassGrid.uniform(cfg.grid_n)
    return grid, load_preset(cfg.init_preset, grid)


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    outdir = args.out or cfg.output_dir
    grid, data = _initial_and_grid(cfg)
    traj = run_solver(data, grid, cfg.fluid_parameters(), cfg.scheme_config())
    records = diagnose_trajectory(traj)
    manifest = emit_outputs(traj, records, None, outdir)
    print(f"run: {len(traj)} snapshots, {len(manifest['files'])} files -> {outdir}")
    return 0


def _cmd_verify(args) -> int:
    tol = load_tolerances(args.tolerances)
    ok, lines = verify_outputs(args.out, tol)
    for line in lines:
        print(line)
    if not ok:
        print("error: verification failed", file=sys.stderr)
        return 1
    return 0


def _cmd_stability(args) -> int:
    cfg = _load_config(args.config)
    outdir = args.out or cfg.output_dir
    grid, base = _initial_and_grid(cfg)
    perturbed = perturb_initial(base, grid, cfg.stability_field, cfg.stability_shape,
                                cfg.stability_delta)
    report = stability_experiment(
        base, perturbed, grid, cfg.fluid_parameters(), cfg.scheme_config(),
        NormSpec(cfg.stability_q, cfg.stability_r), cfg.stability_eps,
        delta=cfg.stability_delta)
    payload = report.as_dict()
    payload["field"] = cfg.stability_field
    payload["shape"] = cfg.stability_shape
    emit_outputs(None, None, {"stability_report": payload}, outdir)
    ratio = "undefined" if report.ratio is None else f"{report.ratio:.6g}"
    print(f"stability: ratio {ratio} -> {outdir}/stability_report.json")
    return 0


def _cmd_convergence(args) -> int:
    cfg = _load_config(args.config)
    if cfg.init_preset is None:
        raise Mhd1dError("convergence requires init.preset (grids are resampled per level)")
    outdir = args.out or cfg.output_dir
    grids = [MassGrid.uniform(cfg.grid_n * (2 ** k)) for k in range(cfg.convergence_levels)]
    result = convergence_study(
        lambda g: load_preset(cfg.init_preset, g), grids,
        cfg.fluid_parameters(), cfg.scheme_config())
    rows = []
    for name, fc in sorted(result.fields.items()):
        for k, (pair, err) in enumerate(zip(fc.h_pairs, fc.errors)):
            if k == 0:
                order = ""
            else:
                prev = fc.errors[k - 1]
                order = "exact" if err == 0.0 and prev == 0.0 else f"{fc.orders[k - 1]:.6g}"
            rows.append((name, f"{pair[0]:.17g}", f"{pair[1]:.17g}", f"{err:.17g}", order))
    emit_outputs(None, None, {"convergence": rows}, outdir)
    summary = ", ".join(
        f"{name}={'exact' if fc.observed_order == float('inf') else f'{fc.observed_order:.2f}'}"
        for name, fc in sorted(result.fields.items()))
    print(f"convergence: observed orders {summary} -> {outdir}/convergence.csv")
    return 0


def _cmd_transform(args) -> int:
    _, state = load_snapshot_csv(args.snapshot)
    profile = to_eulerian(state)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(out, _csv_text(
        EULERIAN_HEADER,
        [profile.x_phys, profile.rho, profile.u, profile.theta, profile.b]))
    print(f"transform: {args.snapshot} -> {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhd1d",
        description="1-D Lagrangian MHD simulator and verification suite")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a configuration and emit outputs")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify", help="re-read emitted files and check invariants")
    p.add_argument("--out", required=True)
    p.add_argument("--tolerances", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("stability", help="perturbation experiment on one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("convergence", help="grid-refinement self-convergence study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_convergence)

    p = sub.add_parser("transform", help="map one snapshot to physical space")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_transform)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Mhd1dError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
