"""Command-line front end: single cycles, sweeps, comparison table, optimizer runs.

Every report starts with '#'-prefixed metadata (units banner, tool
version, parameters, seed where relevant, and a timestamp unless
--deterministic is given), followed by a documented header row and data
rows with '.'-decimal numbers at 12 significant digits.  Exit codes:
0 success, 2 bad flags, 3 optimizer non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__, analytic, engine, optimize
from .engine import LN2, DriveSpec, EngineParams, MeasurementBasis, PovmSpec

UNITS_BANNER = "energies in hbar*Omega_0; temperatures in hbar*Omega_0/k_B"

SWEEP_VARIABLES = ("p", "t_c", "beta_c", "theta_x")
SWEEP_ENGINES = ("conventional", "pvm", "pvm-optimal", "povm-optimal", "povm-net")


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable on a uniform grid, evaluated for a set of engines."""

    variable: str
    start: float
    stop: float
    points: int
    engines: tuple[str, ...] = ()

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if not self.start < self.stop:
            raise ValueError(f"start must be below stop, got [{self.start}, {self.stop}]")
        if self.points < 2:
            raise ValueError(f"points must be at least 2, got {self.points}")
        unknown = set(self.engines) - set(SWEEP_ENGINES)
        if unknown:
            raise ValueError(f"unknown engines {sorted(unknown)}")
        lo, hi = {
            "p": (0.5, 1.0),
            "t_c": (0.0, math.inf),
            "beta_c": (0.0, math.inf),
            "theta_x": (0.0, math.pi),
        }[self.variable]
        if self.start < lo or self.stop > hi or (lo > 0.0 and self.start <= 0.0):
            raise ValueError(f"{self.variable} range [{self.start}, {self.stop}] outside [{lo}, {hi}]")
        if self.variable in ("t_c", "beta_c") and self.start <= 0.0:
            raise ValueError(f"{self.variable} must be positive")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunReport:
    """Header metadata plus tabular rows, renderable as text, CSV or JSON."""

    meta: dict
    columns: tuple[str, ...]
    rows: list


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _json_value(value):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(f"{float(value):.12g}")


def render_report(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        payload = {
            "meta": report.meta,
            "columns": list(report.columns),
            "rows": [[_json_value(v) for v in row] for row in report.rows],
        }
        return json.dumps(payload, indent=2) + "\n"
    lines = [f"# {key}: {value}" for key, value in report.meta.items()]
    if fmt == "csv":
        lines.append(",".join(report.columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in report.rows)
    else:  # key/value text
        for row in report.rows:
            lines.extend(f"{col} = {_fmt(v)}" for col, v in zip(report.columns, row))
            lines.append("")
        while lines and lines[-1] == "":
            lines.pop()
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _base_meta(args, **extra) -> dict:
    meta = {"tool": f"qotto {__version__}", "units": UNITS_BANNER}
    if not args.deterministic:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    meta.update(extra)
    return meta


def _record_row(record: engine.CycleRecord) -> tuple:
    return (
        record.e0, record.e1, record.e2, record.e3,
        record.w1, record.w2, record.w_total, record.q_c, record.q_h,
        record.eta, record.aux_entropy, record.aux_reset_cost,
        record.net_work, record.first_law_residual,
    )


RECORD_COLUMNS = (
    "e0", "e1", "e2", "e3", "w1", "w2", "w_total", "q_c", "q_h",
    "eta", "aux_entropy", "aux_reset_cost", "net_work", "first_law_residual",
)


def _load_su4_file(path: str) -> optimize.Su4Point:
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            body = line.split("#", 1)[0]
            values.extend(float(tok) for tok in body.split())
    if len(values) != 15:
        raise ValueError(f"{path}: expected 15 coefficients, found {len(values)}")
    return optimize.Su4Point(np.array(values))


def cmd_cycle(args) -> int:
    params = EngineParams(
        omega_z=args.omega_z, omega_x=args.omega_x, beta_c=args.beta_c, beta_h=args.beta_h
    )
    drive = DriveSpec(p=args.p, alpha=args.alpha)
    meta = _base_meta(
        args, engine=args.engine, omega_z=args.omega_z, omega_x=args.omega_x,
        beta_c=args.beta_c, p=args.p, alpha=args.alpha,
    )
    if args.engine == "conventional":
        if args.beta_h is None:
            raise ValueError("--engine conventional requires --beta-h")
        if args.theta is not None or args.v0 or args.su4_file or args.t_c is not None:
            raise ValueError("--theta/--phi/--v0/--su4-file/--t-c do not apply to the conventional engine")
        meta["beta_h"] = args.beta_h
        record = engine.run_conventional_cycle(params, drive)
    elif args.engine == "pvm":
        if args.beta_h is not None:
            raise ValueError("--beta-h does not apply to --engine pvm")
        if args.v0 or args.su4_file or args.t_c is not None:
            raise ValueError("--v0/--su4-file/--t-c do not apply to --engine pvm")
        if args.theta is None:
            raise ValueError("--engine pvm requires --theta")
        basis = MeasurementBasis(theta_x=args.theta, phi_x=args.phi)
        meta["theta_x"], meta["phi_x"] = args.theta, args.phi
        record = engine.run_pvm_cycle(params, drive, basis)
    else:  # povm
        if args.beta_h is not None:
            raise ValueError("--beta-h does not apply to --engine povm")
        if bool(args.v0) == bool(args.su4_file):
            raise ValueError("--engine povm requires exactly one of --v0 or --su4-file")
        if args.v0:
            joint = analytic.optimal_dilation_unitary()
            meta["dilation"] = "v0"
        else:
            joint = optimize.su4_from_point(_load_su4_file(args.su4_file))
            meta["dilation"] = args.su4_file
        aux_basis = MeasurementBasis(theta_x=args.theta or 0.0, phi_x=args.phi)
        povm = PovmSpec(joint_unitary=joint, aux_basis=aux_basis)
        meta["aux_theta_x"], meta["aux_phi_x"] = aux_basis.theta_x, aux_basis.phi_x
        record = engine.run_povm_cycle(params, drive, povm, reset_temperature=args.t_c)
        if args.t_c is not None:
            meta["t_c"] = args.t_c
    report = RunReport(meta=meta, columns=RECORD_COLUMNS, rows=[_record_row(record)])
    _emit(render_report(report, args.format), args.out)
    return 0


_PANELS = {"a": (3.0, 2.0), "b": (5.0, 2.0)}


def cmd_fig2(args) -> int:
    omega_x, omega_z = _PANELS[args.panel]
    spec = SweepSpec("p", 0.5, 1.0, args.grid_points, engines=("conventional", "pvm-optimal"))
    params = EngineParams(omega_z=omega_z, omega_x=omega_x, beta_c=args.beta_c)
    params_h02 = EngineParams(omega_z=omega_z, omega_x=omega_x, beta_c=args.beta_c, beta_h=0.2)
    params_h0 = EngineParams(omega_z=omega_z, omega_x=omega_x, beta_c=args.beta_c, beta_h=0.0)
    rows = []
    for p in spec.values():
        drive = DriveSpec(p=float(p))
        rec02 = engine.run_conventional_cycle(params_h02, drive)
        rec0 = engine.run_conventional_cycle(params_h0, drive)
        basis = analytic.pvm_optimal(params, float(p)).basis
        rec_pvm = engine.run_pvm_cycle(params, drive, basis)
        residual = max(r.first_law_residual for r in (rec02, rec0, rec_pvm))
        rows.append((float(p), rec02.w_total, rec0.w_total, rec_pvm.w_total, residual))
    meta = _base_meta(
        args, panel=args.panel, omega_x=omega_x, omega_z=omega_z, beta_c=args.beta_c
    )
    report = RunReport(
        meta=meta,
        columns=("p", "w_conv_bh02", "w_conv_bh0", "w_pvm_max", "first_law_residual"),
        rows=rows,
    )
    _emit(render_report(report, args.format), args.out)
    return 0


def _optimizer_config(args) -> optimize.OptimizerConfig:
    if args.budget is None:
        return optimize.OptimizerConfig(seed=args.seed)
    return optimize.OptimizerConfig(
        seed=args.seed, global_iterations=args.budget, local_max_evals=2 * args.budget
    )


def cmd_fig3(args) -> int:
    omega_x, omega_z = _PANELS[args.panel]
    spec = SweepSpec(
        "p", 0.5, 1.0, args.grid_points,
        engines=("povm-optimal", "povm-net", "pvm-optimal"),
    )
    params = EngineParams(omega_z=omega_z, omega_x=omega_x, beta_c=args.beta_c)
    t_c = args.t_c if args.t_c is not None else 1.0 / args.beta_c
    cfg = _optimizer_config(args)
    rows = []
    all_converged = True
    for p in spec.values():
        drive = DriveSpec(p=float(p))
        gross = optimize.optimize_povm_work(params, drive, cfg)
        net = optimize.optimize_povm_net_work(params, drive, t_c=t_c, cfg=cfg)
        w_pvm = analytic.pvm_optimal(params, float(p)).work
        povm = PovmSpec(joint_unitary=optimize.su4_from_point(gross.best_point))
        residual = engine.run_povm_cycle(params, drive, povm, reset_temperature=t_c).first_law_residual
        converged = gross.converged and net.converged
        all_converged = all_converged and converged
        rows.append(
            (
                float(p), gross.best_value, gross.best_value - t_c * LN2,
                net.best_value, w_pvm, residual, int(converged),
            )
        )
    meta = _base_meta(
        args, panel=args.panel, omega_x=omega_x, omega_z=omega_z,
        beta_c=args.beta_c, t_c=t_c, seed=args.seed,
    )
    report = RunReport(
        meta=meta,
        columns=(
            "p", "w_povm_max", "w_povm_lower_bound", "w_net_max", "w_pvm_max",
            "first_law_residual", "converged",
        ),
        rows=rows,
    )
    _emit(render_report(report, args.format), args.out)
    if args.strict and not all_converged:
        return 3
    return 0


def cmd_fig4(args) -> int:
    params = EngineParams(omega_z=args.omega_z, omega_x=args.omega_x, beta_c=1.0)
    spec = SweepSpec("t_c", args.t_c_start, args.t_c_stop, args.grid_points, engines=("povm-optimal",))
    crossing = analytic.reset_crossing_temperature(params)
    v0 = analytic.optimal_dilation_unitary()
    rows = []
    for t_c in spec.values():
        rec = analytic.aux_cost_record(params, float(t_c))
        cold = EngineParams(omega_z=args.omega_z, omega_x=args.omega_x, beta_c=1.0 / float(t_c))
        cycle = engine.run_povm_cycle(cold, DriveSpec(p=1.0), PovmSpec(joint_unitary=v0))
        rows.append((float(t_c), rec.delta_w, rec.min_cost, cycle.first_law_residual))
    meta = _base_meta(
        args, omega_x=args.omega_x, omega_z=args.omega_z,
        crossing_temperature=f"{crossing:.12g}",
    )
    report = RunReport(
        meta=meta,
        columns=("t_c", "delta_w", "w_a_min", "first_law_residual"),
        rows=rows,
    )
    _emit(render_report(report, args.format), args.out)
    return 0


def cmd_table1(args) -> int:
    params = EngineParams(
        omega_z=args.omega_z, omega_x=args.omega_x, beta_c=args.beta_c, beta_h=args.beta_h
    )
    eta0 = 1.0 - args.omega_z / args.omega_x
    w_conv = analytic.conventional_record(params, 1.0).w_total
    w_pvm = analytic.pvm_adiabatic_record(params, math.pi / 2.0).w_total
    w_povm = analytic.povm_adiabatic_optimal(params).work
    best = analytic.pvm_best_p(params)
    conv_na = analytic.conventional_record(params, 1.0).w_total  # two-bath work peaks at p = 1
    povm_na = max(
        analytic.povm_work_ceiling(params, DriveSpec(p=float(p)))
        for p in np.linspace(0.5, 1.0, 1001)
    )
    rows = [
        ("efficiency_adiabatic", eta0, eta0, eta0),
        ("optimal_work_adiabatic", w_conv, w_pvm, w_povm),
        ("optimal_work_nonadiabatic", conv_na, best.work, povm_na),
        ("efficiency_at_optimal_work", eta0, best.eta, eta0 if params.gamma >= 2.0 else None),
    ]
    hierarchy_ok = w_conv <= w_pvm < w_povm
    meta = _base_meta(
        args, omega_x=args.omega_x, omega_z=args.omega_z, beta_c=args.beta_c,
        beta_h=args.beta_h, hierarchy_conv_le_pvm_lt_povm=str(bool(hierarchy_ok)),
    )
    report = RunReport(
        meta=meta, columns=("quantity", "conventional", "pvm", "povm"), rows=rows
    )
    _emit(render_report(report, args.format), args.out)
    return 0


def cmd_optimize_povm(args) -> int:
    params = EngineParams(omega_z=args.omega_z, omega_x=args.omega_x, beta_c=args.beta_c)
    drive = DriveSpec(p=args.p, alpha=0.0)
    cfg = _optimizer_config(args)
    if args.net:
        t_c = args.t_c if args.t_c is not None else 1.0 / args.beta_c
        result = optimize.optimize_povm_net_work(params, drive, t_c=t_c, cfg=cfg)
    else:
        result = optimize.optimize_povm_work(params, drive, cfg)
    meta = _base_meta(
        args, omega_x=args.omega_x, omega_z=args.omega_z, beta_c=args.beta_c,
        p=args.p, objective="net" if args.net else "gross", seed=args.seed,
    )
    columns = ("best_value", "evaluations", "converged") + tuple(
        f"k_{label}" for label in optimize.SU4_GENERATOR_LABELS
    )
    row = (result.best_value, result.evaluations, int(result.converged)) + tuple(
        result.best_point.k
    )
    report = RunReport(meta=meta, columns=columns, rows=[row])
    _emit(render_report(report, args.format), args.out)
    if args.su4_out:
        with open(args.su4_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# generator coefficients, order: " + " ".join(optimize.SU4_GENERATOR_LABELS) + "\n")
            fh.write(" ".join(f"{v:.17g}" for v in result.best_point.k) + "\n")
    if args.strict and not result.converged:
        return 3
    return 0


def _add_output_flags(sub, default_format: str) -> None:
    sub.add_argument("--out", help="write the report to this file instead of stdout")
    sub.add_argument(
        "--format", choices=("text", "csv", "json"), default=default_format,
        help=f"output format (default {default_format})",
    )
    sub.add_argument(
        "--deterministic", action="store_true",
        help="suppress the timestamp so identical flags give identical bytes",
    )


def _add_param_flags(sub, omega_x=3.0, omega_z=2.0) -> None:
    sub.add_argument("--omega-x", type=float, default=omega_x, help="drive-stroke gap")
    sub.add_argument("--omega-z", type=float, default=omega_z, help="cold-stroke gap")
    sub.add_argument("--beta-c", type=float, default=1.0, help="cold inverse temperature")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qotto",
        description="Measurement-fueled qubit Otto engines: cycles, sweeps, optimization.",
    )
    parser.add_argument("--version", action="version", version=f"qotto {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    cycle = subs.add_parser("cycle", help="evaluate a single cycle and print its ledger")
    cycle.add_argument("--engine", choices=("conventional", "pvm", "povm"), required=True)
    _add_param_flags(cycle)
    cycle.add_argument("--beta-h", type=float, default=None, help="hot inverse temperature (conventional only)")
    cycle.add_argument("--p", type=float, default=1.0, help="drive transition probability")
    cycle.add_argument("--alpha", type=float, default=0.0, help="drive phase")
    cycle.add_argument("--theta", type=float, default=None, help="measurement polar angle")
    cycle.add_argument("--phi", type=float, default=0.0, help="measurement azimuthal angle")
    cycle.add_argument("--v0", action="store_true", help="use the optimal adiabatic dilation unitary")
    cycle.add_argument("--su4-file", help="file with 15 generator coefficients for the dilation unitary")
    cycle.add_argument("--t-c", type=float, default=None, help="auxiliary reset temperature")
    _add_output_flags(cycle, "text")
    cycle.set_defaults(func=cmd_cycle)

    fig2 = subs.add_parser("fig2", help="two-bath vs projective work against the drive probability")
    fig2.add_argument("--panel", choices=("a", "b"), default="a")
    fig2.add_argument("--beta-c", type=float, default=1.0)
    fig2.add_argument("--grid-points", type=int, default=101)
    _add_output_flags(fig2, "csv")
    fig2.set_defaults(func=cmd_fig2)

    fig3 = subs.add_parser("fig3", help="optimized dilation work (gross and net) vs projective work")
    fig3.add_argument("--panel", choices=("a", "b"), default="a")
    fig3.add_argument("--beta-c", type=float, default=1.0)
    fig3.add_argument("--t-c", type=float, default=None, help="reset temperature (default 1/beta_c)")
    fig3.add_argument("--grid-points", type=int, default=11)
    fig3.add_argument("--seed", type=int, default=42)
    fig3.add_argument("--budget", type=int, default=None, help="annealing iterations per restart")
    fig3.add_argument("--strict", action="store_true", help="exit 3 if any optimization fails to converge")
    _add_output_flags(fig3, "csv")
    fig3.set_defaults(func=cmd_fig3)

    fig4 = subs.add_parser("fig4", help="reset cost vs work advantage against the cold temperature")
    _add_param_flags(fig4, omega_x=5.0, omega_z=2.0)
    fig4.add_argument("--t-c-start", type=float, default=0.05)
    fig4.add_argument("--t-c-stop", type=float, default=4.0)
    fig4.add_argument("--grid-points", type=int, default=80)
    _add_output_flags(fig4, "csv")
    fig4.set_defaults(func=cmd_fig4)

    table1 = subs.add_parser("table1", help="three-engine comparison table")
    _add_param_flags(table1)
    table1.add_argument("--beta-h", type=float, default=0.2)
    _add_output_flags(table1, "text")
    table1.set_defaults(func=cmd_table1)

    opt = subs.add_parser("optimize-povm", help="maximize dilation-cycle work over the joint unitary")
    _add_param_flags(opt)
    opt.add_argument("--p", type=float, default=1.0)
    opt.add_argument("--net", action="store_true", help="maximize work net of the reset cost")
    opt.add_argument("--t-c", type=float, default=None, help="reset temperature (default 1/beta_c)")
    opt.add_argument("--seed", type=int, default=42)
    opt.add_argument("--budget", type=int, default=None, help="annealing iterations per restart")
    opt.add_argument("--su4-out", help="write the optimal coefficients to this file")
    opt.add_argument("--strict", action="store_true", help="exit 3 on non-convergence")
    _add_output_flags(opt, "text")
    opt.set_defaults(func=cmd_optimize_povm)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
