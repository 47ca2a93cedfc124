"""Command-line front end: solve, sweep and verify.

Exit codes: 0 success, 2 parse/validation error, 3 no convergence,
4 contact rolled off a surface domain, 5 verification failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import (
    ContactRolloffError,
    NoConvergenceError,
    RolljointError,
    SolveError,
)
from .fileio import ParseError, Scenario, load_design, load_scenario, scenario_from_dict, set_by_path
from .mechanism import Configuration, MechanismDesign, tendon_lengths, validate
from .render import render_svg
from .solver_displacement import solve_displacement
from .solver_tension import initial_forces, solve_tension
from .verification import run_verification

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_ROLLOFF = 4
EXIT_VERIFY_FAILED = 5

log = logging.getLogger("rolljoint")


def _fmt(value: float) -> str:
    return f"{float(value):.12g}"


def _fmt_value(value) -> str:
    """Sweep values may be vectors; keep the CSV cell comma-free."""
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return _fmt(value)


def _setup_logging() -> None:
    level = os.environ.get("ROLLJOINT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _solution_rows(design: MechanismDesign, config: Configuration):
    lengths = tendon_lengths(design, config)
    rows = []
    for k, pose in enumerate(config.poses):
        row = {
            "link_index": str(k + 1),
            "x_mm": _fmt(pose.translation[0]),
            "y_mm": _fmt(pose.translation[1]),
            "theta_rad": _fmt(pose.angle),
            "s_mm": _fmt(config.s[k - 1]) if k >= 1 else "",
            "f_x_N": _fmt(config.f[k - 1][0]) if k >= 1 else "",
            "f_y_N": _fmt(config.f[k - 1][1]) if k >= 1 else "",
            "l_left_mm": "",
            "l_right_mm": "",
        }
        rows.append(row)
    rows.append({
        "link_index": "summary",
        "x_mm": "", "y_mm": "", "theta_rad": "", "s_mm": "",
        "f_x_N": "", "f_y_N": "",
        "l_left_mm": _fmt(lengths[0]),
        "l_right_mm": _fmt(lengths[1]),
    })
    return rows


CSV_COLUMNS = ("link_index", "x_mm", "y_mm", "theta_rad", "s_mm",
               "f_x_N", "f_y_N", "l_left_mm", "l_right_mm")


def write_solution_csv(path: Path, design: MechanismDesign, config: Configuration) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for row in _solution_rows(design, config):
        lines.append(",".join(row[c] for c in CSV_COLUMNS))
    path.write_text("\n".join(lines) + "\n")


def read_solution_csv(path: Path):
    """(poses as (n,3) x/y/theta array, s array) back from a solution file."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    poses = []
    svals = []
    for line in lines[1:]:
        cells = dict(zip(header, line.split(",")))
        if cells["link_index"] == "summary":
            continue
        poses.append([float(cells["x_mm"]), float(cells["y_mm"]), float(cells["theta_rad"])])
        if cells["s_mm"]:
            svals.append(float(cells["s_mm"]))
    return np.array(poses), np.array(svals)


def _report_dict(scenario: Scenario, tau, lengths, extra: dict) -> dict:
    data = {
        "mode": scenario.mode,
        "tau_N": [float(t) for t in tau],
        "lengths_mm": [float(v) for v in lengths],
    }
    data.update(extra)
    return data


def _write_report(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _solve_scenario(design: MechanismDesign, scenario: Scenario,
                    init: Configuration | None = None):
    """Returns (config, tau, report dict)."""
    if scenario.mode == "tension":
        config, rep = solve_tension(
            design, scenario.tau, scenario.loads, init=init,
            opts=scenario.solver_options,
        )
        extra = {
            "converged": rep.converged,
            "iterations": rep.iterations,
            "final_residual_norm": rep.final_residual_norm,
            "backtrack_count": rep.backtrack_count,
            "clamped_joints": list(rep.clamped_joints),
        }
        return config, np.asarray(scenario.tau), rep, extra
    tau, config, rep = solve_displacement(
        design, scenario.lengths, scenario.loads,
        tau_init=scenario.tau_init, opts=scenario.displacement_options,
    )
    extra = {
        "converged": rep.converged,
        "outer_iterations": rep.outer_iterations,
        "inner_iterations": rep.inner_iterations,
        "final_residual_norm": rep.final_residual_norm,
        "gradient_norm": rep.gradient_norm,
        "objective_mm2": rep.objective,
        "target_lengths_mm": list(rep.target_lengths),
        "backtrack_count": rep.backtrack_count,
    }
    return config, tau, rep, extra


def _check_scenario_targets(design: MechanismDesign, scenario: Scenario) -> None:
    for load in scenario.loads:
        if not 1 <= load.target_link <= design.n:
            raise ParseError(
                f"load target_link {load.target_link} outside 1..{design.n}")


def cmd_solve(args) -> int:
    try:
        design = load_design(args.design)
        scenario = _scenario_with_flags(load_scenario(args.scenario), args)
        _check_scenario_targets(design, scenario)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        config, tau, _, extra = _solve_scenario(design, scenario)
    except ContactRolloffError as exc:
        _write_failure(out_dir, scenario, "contact_rolloff", str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ROLLOFF
    except (NoConvergenceError, SolveError) as exc:
        _write_failure(out_dir, scenario, "no_convergence", str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    write_solution_csv(out_dir / "solution.csv", design, config)
    lengths = tendon_lengths(design, config)
    extra["status"] = "ok"
    _write_report(out_dir / "report.json", _report_dict(scenario, tau, lengths, extra))
    if args.svg:
        (out_dir / "config.svg").write_text(
            render_svg(design, [config], scenario.loads)
        )
    log.info("solved %s -> %s", args.scenario, out_dir)
    return EXIT_OK


def _write_failure(out_dir: Path, scenario: Scenario, status: str, message: str) -> None:
    _write_report(out_dir / "report.json", {
        "mode": scenario.mode, "status": status, "message": message,
    })


def _scenario_with_flags(scenario: Scenario, args) -> Scenario:
    solver = scenario.solver_options
    if getattr(args, "tol", None) is not None:
        solver = replace(solver, tol_residual=args.tol)
    if getattr(args, "max_iters", None) is not None:
        solver = replace(solver, max_iters=args.max_iters)
    disp = replace(scenario.displacement_options, inner=solver)
    return replace(scenario, solver_options=solver, displacement_options=disp)


def cmd_sweep(args) -> int:
    try:
        design = load_design(args.design)
        template = json.loads(Path(args.scenario).read_text())
        sweep = json.loads(Path(args.sweep).read_text())
        parameter = sweep["parameter"]
        values = sweep["values"]
        if not isinstance(values, list) or not values:
            raise ParseError("sweep needs a non-empty list of values")
        scenarios = []
        for value in values:
            item = copy.deepcopy(template)
            set_by_path(item, parameter, value)
            scenario = _scenario_with_flags(scenario_from_dict(item), args)
            _check_scenario_targets(design, scenario)
            scenarios.append(scenario)
    except (ParseError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[dict] = [{} for _ in values]
    configs: list[Configuration | None] = [None] * len(values)

    def run_item(idx: int, init: Configuration | None):
        scenario = scenarios[idx]
        item_dir = out_dir / f"item_{idx:03d}"
        item_dir.mkdir(exist_ok=True)
        if init is not None and scenario.mode == "tension":
            # keep the previous geometry but refit forces to the new inputs;
            # the stale forces of a different tension level mislead Newton
            init = Configuration.from_unknowns(
                design, init.s,
                initial_forces(design, init.s, scenario.tau, scenario.loads),
            )
        try:
            config, tau, _, extra = _solve_scenario(design, scenario, init=init)
        except SolveError:
            init = None
            config = None
        if config is None:
            try:
                config, tau, _, extra = _solve_scenario(design, scenario, init=None)
            except SolveError as exc:
                status = "contact_rolloff" if isinstance(exc, ContactRolloffError) else "no_convergence"
                _write_failure(item_dir, scenario, status, str(exc))
                results[idx] = {"status": status}
                return None
        write_solution_csv(item_dir / "solution.csv", design, config)
        lengths = tendon_lengths(design, config)
        extra["status"] = "ok"
        _write_report(item_dir / "report.json", _report_dict(scenario, tau, lengths, extra))
        tip = config.poses[-1]
        results[idx] = {
            "status": "ok",
            "tip_x_mm": tip.translation[0],
            "tip_y_mm": tip.translation[1],
            "tip_theta_rad": tip.angle,
            "iterations": extra.get("iterations", extra.get("outer_iterations", 0)),
            "residual": extra["final_residual_norm"],
        }
        configs[idx] = config
        return config

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            list(pool.map(lambda i: run_item(i, None), range(len(values))))
    else:
        # sequential items warm-start from the previous solution
        previous = None
        for idx in range(len(values)):
            previous = run_item(idx, previous) or previous

    lines = ["index,value,status,tip_x_mm,tip_y_mm,tip_theta_rad,iterations,residual"]
    for idx, value in enumerate(values):
        res = results[idx]
        if res.get("status") == "ok":
            lines.append(",".join([
                str(idx), _fmt_value(value), "ok",
                _fmt(res["tip_x_mm"]), _fmt(res["tip_y_mm"]),
                _fmt(res["tip_theta_rad"]), str(res["iterations"]),
                _fmt(res["residual"]),
            ]))
        else:
            lines.append(f"{idx},{_fmt_value(value)},{res.get('status', 'failed')},,,,,")
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")

    if args.svg:
        solved = [c for c in configs if c is not None]
        if solved:
            (out_dir / "sweep.svg").write_text(
                render_svg(design, solved, scenarios[0].loads)
            )
    return EXIT_OK if all(r.get("status") == "ok" for r in results) else EXIT_NO_CONVERGENCE


def cmd_verify(args) -> int:
    try:
        design = load_design(args.design)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    problems = validate(design)
    if problems:
        for problem in problems:
            print(f"invalid design: {problem}", file=sys.stderr)
        return EXIT_PARSE
    try:
        rows = run_verification(design, seed=args.seed)
    except RolljointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    width = max(len(f"{r.suite}:{r.name}") for r in rows)
    failures = 0
    for row in rows:
        mark = "PASS" if row.passed else "FAIL"
        if not row.passed:
            failures += 1
        print(f"{row.suite + ':' + row.name:<{width}}  {mark}  {row.detail}")
    print(f"{len(rows) - failures}/{len(rows)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rolljoint",
        description="Quasi-static solver for tendon-driven rolling-contact joint mechanisms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one scenario")
    solve.add_argument("--design", required=True)
    solve.add_argument("--scenario", required=True)
    solve.add_argument("--out", required=True)
    solve.add_argument("--svg", action="store_true", help="also render config.svg")
    solve.add_argument("--tol", type=float, default=None)
    solve.add_argument("--max-iters", type=int, default=None)
    solve.set_defaults(func=cmd_solve)

    sweep = sub.add_parser("sweep", help="solve a scenario across parameter values")
    sweep.add_argument("--design", required=True)
    sweep.add_argument("--scenario", required=True, help="scenario template JSON")
    sweep.add_argument("--sweep", required=True, help='JSON {"parameter": path, "values": [...]}')
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--svg", action="store_true", help="render all poses overlaid")
    sweep.add_argument("--tol", type=float, default=None)
    sweep.add_argument("--max-iters", type=int, default=None)
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="run the self-check suites on a design")
    verify.add_argument("--design", required=True)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
