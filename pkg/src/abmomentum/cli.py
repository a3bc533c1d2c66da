"""Command-line front end: ``abm <subcommand> --config scene.json``.

Each subcommand writes its data files into ``--out`` (default ``.``) along
with ``manifest.json``. Data files embed a manifest block (command, config
hash, tool version, output names) and no timestamp, so repeated runs are
byte-identical; only ``manifest.json`` records when the run happened.

Exit codes: 0 ok, 2 configuration error, 3 evaluation-domain error,
4 physics-consistency failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import __version__
from .ab_phase import (
    DEFAULT_FRINGES,
    closed_loop,
    enclosed_flux_analytic,
    fringe_pattern,
    phase_difference,
)
from .config import Scene, SceneConfig, build_scene, load_config
from .core_math import Polyline, fitted_order, norm, relative_difference
from .dynamics import (
    TRAJECTORY_COLUMNS,
    conservation_violation,
    ramp_simulation,
    rk4_order_study,
    trajectory_rows,
)
from .errors import DomainError, SceneError
from .fields import (
    B_numeric,
    coulomb_E,
    dipole_A,
    solenoid_A_analytic,
    solenoid_B_analytic,
    vector_potential_numeric,
    wire_A_analytic,
    wire_B_analytic,
)
from .momentum import (
    FORMULATIONS,
    MomentumReport,
    momentum_dipole,
    momentum_field_integral,
    momentum_report,
    momentum_two_arm_rect,
)
from .sources import (
    CircularLoop,
    RectangularLoop,
    Solenoid,
    StraightWire,
    dipole_moment,
    discretize,
    discretize_solenoid,
)

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_PHYSICS = 0, 2, 3, 4
FMT = "{:.17g}"
SWEEP_PARAMETERS = ("elements", "dt", "L_over_R", "r_over_R")
DEFAULT_TOL = {"momentum": 1e-2, "phase": 1e-6, "ramp": 1e-6}


class PhysicsFailure(Exception):
    """A consistency check exceeded ``--tol``; the outputs are still written."""


# ------------------------------------------------------------- output


class Output:
    """Collects the files of one run and writes them with a shared manifest."""

    def __init__(self, args, config: SceneConfig):
        self._pending: list[tuple[str, callable]] = []
        self.to_stdout = args.stdout
        self.out_dir = Path(args.out)
        self.manifest = {
            "command": args.command,
            "arguments": _recorded_arguments(args),
            "config_sha256": config.sha256(),
            "tool_version": __version__,
        }

    def csv(self, name: str, header: list[str], rows, trailer: list[str] = ()):
        rows = [[FMT.format(float(v)) for v in row] for row in rows]

        def render(manifest):
            buf = io.StringIO()
            buf.write("# manifest " + json.dumps(manifest, sort_keys=True) + "\n")
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
            for line in trailer:
                buf.write(f"# {line}\n")
            return buf.getvalue()

        self._pending.append((name, render))

    def json(self, name: str, payload: dict):
        self._pending.append((name, lambda manifest: json.dumps({"manifest": manifest, **payload}, indent=2) + "\n"))

    def render(self) -> dict[str, str]:
        manifest = dict(self.manifest, outputs=[name for name, _ in self._pending])
        return {name: render(manifest) for name, render in self._pending}

    def flush(self):
        files = self.render()
        if self.to_stdout:
            for text in files.values():
                sys.stdout.write(text)
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (self.out_dir / name).write_text(text)
        run = dict(self.manifest, outputs=list(files),
                   timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"))
        (self.out_dir / "manifest.json").write_text(json.dumps(run, indent=2) + "\n")


def _recorded_arguments(args) -> dict:
    skip = {"command", "config", "out", "stdout", "handler"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _parse_point(text: str) -> np.ndarray:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected x,y,z, got {text!r}")
    return np.array(parts)


def _parse_path(text: str) -> Polyline:
    return Polyline([_parse_point(p) for p in text.split(";")])


def _parse_line(text: str) -> np.ndarray:
    """``x0,y0,z0:x1,y1,z1:N`` into ``N`` evenly spaced points."""
    try:
        a, b, n = text.split(":")
    except ValueError:
        raise ValueError(f"--line expects START:END:N, got {text!r}") from None
    n = int(n)
    if n < 1:
        raise ValueError("--line needs at least one point")
    t = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    return _parse_point(a) + t[:, None] * (_parse_point(b) - _parse_point(a))


def _require(items, what: str):
    if not items:
        raise ValueError(f"scene needs at least one {what}")
    return items[0]


def _first(scene: Scene, kind, what: str):
    return _require([s for s in scene.sources if isinstance(s, kind)], what)


# ------------------------------------------------------------- fields


def _scene_A(scene: Scene, pts: np.ndarray, method: str) -> np.ndarray:
    A = np.zeros_like(pts)
    for src, n in zip(scene.sources, scene.element_counts):
        if isinstance(src, StraightWire):
            A += wire_A_analytic(src, pts, scene.const)
        elif isinstance(src, Solenoid) and method == "analytic":
            A += solenoid_A_analytic(src, pts, scene.const)
            if src.include_axial_wire:
                A += wire_A_analytic(src.axial_wire(), pts, scene.const)
        else:
            A += vector_potential_numeric(_elements(src, n), pts, scene.const)
            if isinstance(src, Solenoid) and src.include_axial_wire:
                A += wire_A_analytic(src.axial_wire(), pts, scene.const)
    return A


def _scene_B(scene: Scene, pts: np.ndarray, method: str) -> np.ndarray:
    B = np.zeros_like(pts)
    for src, n in zip(scene.sources, scene.element_counts):
        if isinstance(src, StraightWire):
            B += wire_B_analytic(src, pts, scene.const)
            continue
        if isinstance(src, Solenoid) and method == "analytic":
            B += solenoid_B_analytic(src, pts, scene.const)
        else:
            elements = _elements(src, n)
            B += np.array([B_numeric(elements, p, scene.const) for p in pts])
        if isinstance(src, Solenoid) and src.include_axial_wire:
            B += wire_B_analytic(src.axial_wire(), pts, scene.const)
    return B


_last_discretization: list = []


def _elements(src, n):
    # phase quadrature calls this once per refinement level; keep the last one
    if _last_discretization and _last_discretization[0] is src and _last_discretization[1] == n:
        return _last_discretization[2]
    elements = discretize_solenoid(src, n) if isinstance(src, Solenoid) else discretize(src, n)
    _last_discretization[:] = [src, n, elements]
    return elements


def cmd_fields(args, scene: Scene, out: Output):
    pts = [_parse_point(p) for p in args.point or []]
    if args.line:
        pts.extend(_parse_line(args.line))
    if not pts:
        raise ValueError("fields needs --point or --line")
    pts = np.array(pts)
    E = np.zeros_like(pts)
    for q in scene.charges:
        E += coulomb_E(q, pts)
    B = _scene_B(scene, pts, args.method)
    A = _scene_A(scene, pts, args.method)
    header = ["x", "y", "z", "Ex", "Ey", "Ez", "Bx", "By", "Bz", "Ax", "Ay", "Az"]
    out.csv("fields.csv", header, np.hstack([pts, E, B, A]))


# ----------------------------------------------------------- momentum


def _sum_reports(reports: list[MomentumReport]) -> MomentumReport:
    def total(name):
        values = [getattr(r, name) for r in reports]
        return None if any(v is None for v in values) else np.sum(values, axis=0)

    kwargs = {name: total(name) for name in FORMULATIONS + ("p_qa_analytic",)}
    return MomentumReport(**kwargs, element_count=sum(r.element_count for r in reports))


def cmd_momentum(args, scene: Scene, out: Output):
    sources = scene.current_sources
    _require(sources, "current source")
    _require(scene.charges, "charge")
    tol = args.tol if args.tol is not None else DEFAULT_TOL["momentum"]
    results, rows = [], []
    for i, charge in enumerate(scene.charges):
        report = _sum_reports([momentum_report(s, charge, n, scene.const) for s, n in sources])
        results.append({"charge_index": i, **report.to_dict()})
        for name, p in report.populated().items():
            rows.append([i, FORMULATIONS.index(name), *p])
    out.json("momentum.json", {"tolerance": tol, "formulations": list(FORMULATIONS), "reports": results})
    out.csv("momentum.csv", ["charge_index", "formulation_index", "px", "py", "pz"], rows)
    worst = max(r["diagnostics"]["max_pairwise_rel_diff"] for r in results)
    if worst > tol:
        raise PhysicsFailure(f"formulations disagree by {worst:.3g} (tolerance {tol:.3g})")


# -------------------------------------------------------------- phase


def _phase_inputs(args, scene: Scene):
    if args.path1 or args.path2:
        if not (args.path1 and args.path2):
            raise ValueError("--path1 and --path2 must be given together")
        p1, p2 = _parse_path(args.path1), _parse_path(args.path2)
    else:
        p1, p2 = scene.paths()
    if args.q is not None:
        q = args.q
    else:
        q = _require(scene.charges, "charge (or pass --q)").q
    return q, p1, p2


def _phase(args, scene: Scene):
    q, p1, p2 = _phase_inputs(args, scene)
    A_field = lambda pts: _scene_A(scene, np.asarray(pts, dtype=float), args.method)  # noqa: E731
    result = phase_difference(q, p1, p2, A_field, scene.quad, scene.const)
    expected = None
    if all(isinstance(s, Solenoid) for s in scene.sources):
        loop = closed_loop(p1, p2)
        flux = sum(enclosed_flux_analytic(s, loop, scene.const) for s in scene.sources)
        expected = q * flux / (scene.const.c * scene.const.hbar)
    return result, expected


def cmd_phase(args, scene: Scene, out: Output):
    result, expected = _phase(args, scene)
    tol = args.tol if args.tol is not None else DEFAULT_TOL["phase"]
    payload = result.to_dict()
    payload["delta_phi_expected"] = expected
    payload["tolerance"] = tol
    out.json("phase.json", payload)
    if expected is not None:
        if relative_difference(result.delta_phi, expected) > tol:
            raise PhysicsFailure(f"phase {result.delta_phi!r} differs from q Phi/(c hbar) = {expected!r}")


def cmd_fringes(args, scene: Scene, out: Output):
    spec = scene.config.fringes.build() if scene.config.fringes else DEFAULT_FRINGES
    if args.delta_phi is not None:
        delta_phi = args.delta_phi
    else:
        delta_phi = _phase(args, scene)[0].delta_phi
    pattern = fringe_pattern(spec, delta_phi)
    out.csv("fringes.csv", ["y", "intensity"], np.column_stack([pattern.y, pattern.intensity]),
            trailer=[f"delta_phi,{FMT.format(delta_phi)}", f"displacement,{FMT.format(pattern.displacement)}"])


# --------------------------------------------------------------- ramp


def cmd_ramp(args, scene: Scene, out: Output):
    solenoid = _first(scene, Solenoid, "solenoid")
    charge = _require(scene.charges, "charge")
    ramp_cfg = scene.config.ramp
    if ramp_cfg is None:
        raise ValueError("ramp: scene has no ramp settings")
    dt = args.dt if args.dt is not None else ramp_cfg.dt_s
    mode = args.mode or ramp_cfg.mode
    t_end = args.t_end if args.t_end is not None else ramp_cfg.t_end_s
    records = ramp_simulation(charge, solenoid, scene.ramp(solenoid.current), dt, scene.const, mode, t_end)
    violation = conservation_violation(records)
    tol = args.tol if args.tol is not None else DEFAULT_TOL["ramp"]
    rows = [row + list(r.position) for row, r in zip(trajectory_rows(records), records)]
    out.csv("trajectory.csv", TRAJECTORY_COLUMNS + ["x", "y", "z"], rows,
            trailer=[f"conservation_violation,{FMT.format(violation)}"])
    if violation > tol:
        raise PhysicsFailure(f"generalized momentum drifts by {violation:.3g} of |p_e(0)| (tolerance {tol:.3g})")


# -------------------------------------------------------------- sweep


def _axial_distance(solenoid: Solenoid, x) -> float:
    rel = x - solenoid.axis_point
    return float(norm(rel - (rel @ solenoid.axis_dir) * solenoid.axis_dir))


def _sweep_elements(scene: Scene, values):
    loop = _require([s for s in scene.sources if isinstance(s, (CircularLoop, RectangularLoop))], "loop")
    charge = _require(scene.charges, "charge")
    m = dipole_moment(loop, scene.const)
    oracle = dipole_A(m, charge.position - loop.center)
    rows = []
    for n in values:
        A = vector_potential_numeric(discretize(loop, int(n)), charge.position, scene.const)
        rows.append([n, float(norm(A)), relative_difference(A, oracle)])
    rows = np.array(rows)
    # the discretization error falls as a power of the element length 1/n
    return rows, fitted_order(1.0 / rows[:, 0], rows[:, 2]), ["elements", "A_magnitude", "rel_error"]


def _sweep_dt(scene: Scene, values):
    solenoid = _first(scene, Solenoid, "solenoid")
    charge = _require(scene.charges, "charge")
    if charge.mass is None:
        raise ValueError("dt sweep needs a charge mass (mass_g)")
    dts, errors, order = rk4_order_study(charge, solenoid, scene.ramp(solenoid.current), values, scene.const, "free")
    return np.column_stack([dts, errors]), order, ["dt", "step_difference"]


def _sweep_L_over_R(scene: Scene, values):
    solenoid = _first(scene, Solenoid, "solenoid")
    charge = _require(scene.charges, "charge")
    R1 = _axial_distance(solenoid, charge.position)
    rows = []
    for v in values:
        s = replace(solenoid, length=v * R1)
        p_field = momentum_field_integral(s, charge, scene.const)
        p_qa = charge.q * solenoid_A_analytic(s, charge.position, scene.const) / scene.const.c
        rows.append([v, float(norm(p_field)), relative_difference(p_field, p_qa)])
    rows = np.array(rows)
    return rows, fitted_order(rows[:, 0], rows[:, 2]), ["L_over_R", "p_field_magnitude", "rel_error"]


def _sweep_r_over_R(scene: Scene, values):
    loop = _first(scene, RectangularLoop, "rect_loop")
    charge = _require(scene.charges, "charge")
    R1 = float(norm(charge.position - loop.center))
    aspect = loop.arm_length / loop.half_width
    rows = []
    for v in values:
        r = v * R1
        scaled = replace(loop, half_width=r, arm_length=aspect * r, drift=None)
        p_two = momentum_two_arm_rect(scaled, charge, scene.const)
        p_dip = momentum_dipole(coulomb_E(charge, scaled.center), scaled, scene.const)
        rows.append([v, float(norm(p_two)), float(norm(p_two - p_dip) / norm(p_dip))])
    rows = np.array(rows)
    return rows, fitted_order(rows[:, 0], rows[:, 2]), ["r_over_R", "p_two_arm_magnitude", "rel_gap"]


_SWEEPS = {"elements": _sweep_elements, "dt": _sweep_dt, "L_over_R": _sweep_L_over_R, "r_over_R": _sweep_r_over_R}


def cmd_sweep(args, scene: Scene, out: Output):
    values = [float(v) for v in args.values.split(",")]
    if len(values) < 3 and args.parameter == "dt" or len(values) < 2:
        raise ValueError("sweep needs at least two values (three for dt)")
    rows, order, header = _SWEEPS[args.parameter](scene, values)
    out.csv(f"sweep_{args.parameter}.csv", header, rows, trailer=[f"fitted_order,{FMT.format(order)}"])
    print(f"fitted order: {order:.4f}", file=sys.stderr)


# ---------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scene JSON file")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--tol", type=float, default=None, help="consistency tolerance for exit code 4")
    common.add_argument("--seed", type=int, default=None, help="reserved; all computations are deterministic")
    common.add_argument("--stdout", action="store_true", help="write data to stdout instead of files")

    parser = argparse.ArgumentParser(prog="abm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fields", parents=[common], help="tabulate E, B and A at sample points")
    p.add_argument("--point", action="append", help="x,y,z (repeatable)")
    p.add_argument("--line", help="x0,y0,z0:x1,y1,z1:N")
    p.add_argument("--method", choices=("analytic", "numeric"), default="analytic")
    p.set_defaults(handler=cmd_fields)

    p = sub.add_parser("momentum", parents=[common], help="hidden momentum by every applicable formulation")
    p.set_defaults(handler=cmd_momentum)

    for name, handler, desc in (("phase", cmd_phase, "phase difference between two beam paths"),
                                ("fringes", cmd_fringes, "two-slit intensity on the screen")):
        p = sub.add_parser(name, parents=[common], help=desc)
        p.add_argument("--path1", help="vertices 'x,y,z;x,y,z;...'")
        p.add_argument("--path2", help="vertices 'x,y,z;x,y,z;...'")
        p.add_argument("--q", type=float, help="beam particle charge (default: first scene charge)")
        p.add_argument("--method", choices=("analytic", "numeric"), default="analytic")
        if name == "fringes":
            p.add_argument("--delta-phi", type=float, help="use this phase instead of computing it")
        p.set_defaults(handler=handler)

    p = sub.add_parser("ramp", parents=[common], help="charge momentum during a current ramp")
    p.add_argument("--dt", type=float)
    p.add_argument("--mode", choices=("frozen", "free"))
    p.add_argument("--t-end", type=float)
    p.set_defaults(handler=cmd_ramp)

    p = sub.add_parser("sweep", parents=[common], help="convergence study with fitted order")
    p.add_argument("--parameter", choices=SWEEP_PARAMETERS, required=True)
    p.add_argument("--values", required=True, help="comma-separated parameter values")
    p.set_defaults(handler=cmd_sweep)
    return parser


def _check_threads():
    raw = os.environ.get("ABM_NUM_THREADS")
    if raw is None:
        return
    if not raw.isdigit() or int(raw) < 1:
        raise ValueError(f"ABM_NUM_THREADS must be a positive integer, got {raw!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _check_threads()
        config = load_config(args.config)
        scene = build_scene(config)
    except (ValidationError, SceneError, ValueError, OSError) as exc:
        print(f"abm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Output(args, config)
    status = EXIT_OK
    try:
        args.handler(args, scene, out)
    except PhysicsFailure as exc:
        print(f"abm: consistency failure: {exc}", file=sys.stderr)
        status = EXIT_PHYSICS
    except DomainError as exc:
        print(f"abm: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (SceneError, ValueError) as exc:
        print(f"abm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
