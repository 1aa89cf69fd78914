"""All filesystem emission and ingestion.

Floats are serialized with 17 significant digits so every value
round-trips bit-faithfully; writes go through a .partial temporary and
an atomic rename, so a crash never leaves a truncated final name.
manifest.json lists every emitted file with its content digest.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataValidationError
from .model import InitialData, MassGrid, State
from .oracles import DiagnosticRecord
from .solver import Trajectory
from .transform import to_eulerian

INITIAL_HEADER = "x,tau0,u0,b0,theta0"
SNAPSHOT_HEADER = "x,tau,u,theta,b"
NODES_HEADER = "y,u"
EULERIAN_HEADER = "x,rho,u,theta,b"
DIAGNOSTICS_HEADER = ",".join(DiagnosticRecord.FIELDS)
CONVERGENCE_HEADER = "field,h_coarse,h_fine,error,order"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".partial")
    tmp.write_text(text)
    os.replace(tmp, path)


def _csv_text(header: str, columns: Sequence[np.ndarray]) -> str:
    rows = [header]
    for values in zip(*columns):
        rows.append(",".join(fmt(v) for v in values))
    return "\n".join(rows) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(outdir: Path, filenames: Iterable[str]) -> dict:
    manifest = {"files": {}}
    for name in sorted(filenames):
        p = outdir / name
        manifest["files"][name] = {"sha256": _sha256(p), "bytes": p.stat().st_size}
    _atomic_write(outdir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def emit_outputs(trajectory: Trajectory | None, diagnostics: Sequence[DiagnosticRecord] | None,
                 reports: dict | None, outdir: str | Path) -> dict:
    """Write a run's files plus manifest.json; returns the manifest.

    Emits diagnostics.csv, per-snapshot cell/node/physical-space CSVs and
    any experiment reports ("weak_residuals" and "stability_report" as
    JSON, "convergence" as CSV rows).  Re-running with identical inputs
    reproduces identical digests.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    if diagnostics:
        cols = [np.array([getattr(rec, f) for rec in diagnostics])
                for f in DiagnosticRecord.FIELDS]
        _atomic_write(outdir / "diagnostics.csv", _csv_text(DIAGNOSTICS_HEADER, cols))
        written.append("diagnostics.csv")

    if trajectory is not None:
        xc = trajectory.grid.cell_centers
        y = trajectory.grid.node_positions
        for k, state in enumerate(trajectory.states):
            _atomic_write(outdir / f"snap_{k}.csv", _csv_text(
                SNAPSHOT_HEADER, [xc, state.tau, state.u_cell(), state.theta, state.b]))
            _atomic_write(outdir / f"snap_{k}_nodes.csv", _csv_text(NODES_HEADER, [y, state.u]))
            profile = to_eulerian(state)
            _atomic_write(outdir / f"eulerian_{k}.csv", _csv_text(
                EULERIAN_HEADER,
                [profile.x_phys, profile.rho, profile.u, profile.theta, profile.b]))
            written += [f"snap_{k}.csv", f"snap_{k}_nodes.csv", f"eulerian_{k}.csv"]

    for name, payload in (reports or {}).items():
        if name == "convergence":
            lines = [CONVERGENCE_HEADER]
            for row in payload:
                lines.append(",".join(str(v) for v in row))
            _atomic_write(outdir / "convergence.csv", "\n".join(lines) + "\n")
            written.append("convergence.csv")
        else:
            _atomic_write(outdir / f"{name}.json",
                          json.dumps(payload, indent=2, sort_keys=True) + "\n")
            written.append(f"{name}.json")

    return write_manifest(outdir, written)


# ---------------------------------------------------------------------------
# Readers
# ---------------------------------------------------------------------------

def _read_csv(path: Path, header: str) -> np.ndarray:
    lines = path.read_text().strip().splitlines()
    if not lines or lines[0] != header:
        raise DataValidationError(f"{path}: expected header {header!r}")
    try:
        return np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    except ValueError as exc:
        raise DataValidationError(f"{path}: malformed numeric row") from exc


def grid_from_centers(x: np.ndarray) -> MassGrid:
    """Rebuild a mass grid whose cell centers are the given coordinates."""
    n = x.shape[0]
    edges = np.empty(n + 1)
    edges[0] = 0.0
    edges[-1] = 1.0
    edges[1:-1] = 0.5 * (x[:-1] + x[1:])
    return MassGrid(n, np.diff(edges), edges)


def _centers_to_nodes(x: np.ndarray, values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    u = np.interp(nodes, x, values)
    u[0] = 0.0
    u[-1] = 0.0
    return u


def load_initial_csv(path: str | Path) -> tuple[MassGrid, InitialData]:
    """Load initial data from CSV; cell-centered velocity moves to nodes."""
    data = _read_csv(Path(path), INITIAL_HEADER)
    if data.ndim != 2 or data.shape[1] != 5 or data.shape[0] < 1:
        raise DataValidationError(f"{path}: expected rows of 5 columns")
    x, tau0, u0c, b0, theta0 = data.T
    grid = grid_from_centers(x)
    u0 = _centers_to_nodes(x, u0c, grid.node_positions)
    return grid, InitialData(tau0, u0, b0, theta0)


def load_snapshot_csv(path: str | Path, nodes_path: str | Path | None = None
                      ) -> tuple[MassGrid, State]:
    """Load one emitted snapshot; prefers the staggered node velocities.

    If nodes_path is omitted, a sibling snap_<k>_nodes.csv is used when
    present, otherwise the cell velocities are interpolated back to nodes.
    The snapshot time is not stored in the file and is set to zero.
    """
    path = Path(path)
    data = _read_csv(path, SNAPSHOT_HEADER)
    x, tau, u_c, theta, b = data.T
    grid = grid_from_centers(x)
    if nodes_path is None and path.name.endswith(".csv"):
        candidate = path.with_name(path.name[:-4] + "_nodes.csv")
        if candidate.exists():
            nodes_path = candidate
    if nodes_path is not None:
        nd = _read_csv(Path(nodes_path), NODES_HEADER)
        u = nd[:, 1].copy()
        if u.shape != (grid.n_cells + 1,):
            raise DataValidationError(f"{nodes_path}: node count does not match {path}")
    else:
        u = _centers_to_nodes(x, u_c, grid.node_positions)
    u[0] = 0.0
    u[-1] = 0.0
    return grid, State(0.0, tau, u, theta, b * tau, grid)


def read_manifest(outdir: str | Path) -> dict:
    p = Path(outdir) / "manifest.json"
    if not p.exists():
        raise DataValidationError(f"{p} not found")
    return json.loads(p.read_text())


# ---------------------------------------------------------------------------
# File-based verification
# ---------------------------------------------------------------------------

DEFAULT_TOLERANCES = {
    "volume": 1e-12,
    "invariant": 1e-10,
    "energy": 1e-2,
}


def load_tolerances(path: str | Path | None) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    if path is None:
        return tol
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise DataValidationError(f"tolerances line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in tol:
            raise DataValidationError(f"unknown tolerance key '{key}'")
        tol[key] = float(raw)
    return tol


def verify_outputs(outdir: str | Path, tolerances: dict | None = None
                   ) -> tuple[bool, list[str]]:
    """Re-read emitted files and check digests and conservation claims.

    Works purely from the files (no in-memory shortcut), so it doubles as
    a self-sufficiency check of the formats.  Returns (ok, report lines).
    """
    outdir = Path(outdir)
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    lines: list[str] = []
    ok = True

    def check(name: str, passed: bool, detail: str) -> None:
        nonlocal ok
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    manifest = read_manifest(outdir)
    bad = []
    for name, meta in manifest["files"].items():
        p = outdir / name
        if not p.exists() or _sha256(p) != meta["sha256"]:
            bad.append(name)
    check("digests", not bad, f"{len(manifest['files'])} files" +
          (f", mismatched: {', '.join(bad)}" if bad else " all match"))

    snap_names = sorted((n for n in manifest["files"] if n.startswith("snap_")
                         and not n.endswith("_nodes.csv")),
                        key=lambda n: int(n.split("_")[1].split(".")[0]))
    if snap_names:
        states = [load_snapshot_csv(outdir / n)[1] for n in snap_names]
        grid = states[0].grid
        h = grid.cell_widths
        vol0 = float(np.dot(h, states[0].tau))
        vol_dev = max(abs(float(np.dot(h, s.tau)) - vol0) for s in states)
        check("volume", vol_dev <= tol["volume"],
              f"max drift {vol_dev:.3e} (tol {tol['volume']:.1e})")
        a0 = states[0].a
        inv_dev = max(float(np.max(np.abs(s.a - a0))) for s in states)
        check("magnetic_invariant", inv_dev <= tol["invariant"],
              f"max drift {inv_dev:.3e} (tol {tol['invariant']:.1e})")
        pos = all(s.tau.min() > 0.0 and s.theta.min() > 0.0 for s in states)
        check("positivity", pos, "tau and theta strictly positive in every snapshot")
        bc = all(s.u[0] == 0.0 and s.u[-1] == 0.0 for s in states)
        check("boundary_velocity", bc, "wall velocities exactly zero")

    diag_path = outdir / "diagnostics.csv"
    if diag_path.exists():
        table = _read_csv(diag_path, DIAGNOSTICS_HEADER)
        cols = {name: table[:, i] for i, name in enumerate(DiagnosticRecord.FIELDS)}
        e0 = cols["energy"][0]
        drift = float(np.max(np.abs(cols["energy"] - e0))) / abs(e0)
        check("energy_drift", drift <= tol["energy"],
              f"relative drift {drift:.3e} (tol {tol['energy']:.1e})")
        mono = bool(np.all(np.diff(cols["dissipation_cum"]) >= 0.0))
        check("dissipation_monotone", mono, "cumulative dissipation nondecreasing")
    return ok, lines
