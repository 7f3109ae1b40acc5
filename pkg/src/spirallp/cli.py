"""Command-line front end: solve, crossover, analyze, and bench.

Exit codes
  solve:      0 optimal, 2 iteration/time limit, 3 diverging, 1 parse/IO error
  crossover:  0 vertex, 4 primal_only, 5 timeout/failed, 1 parse/IO error
  analyze:    0 success, 1 parse/IO error
  bench:      0 when every instance was attempted, 1 on harness errors

The default seed is 0 and may be overridden with the SPIRALLP_SEED
environment variable; all other defaults are flag-only.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .crossover import CrossoverConfig, run_crossover, support_count
from .model import BoxLp, GeneralLp, reformulate
from .mps import MpsParseError, parse_mps_file
from .pdhg import PdhgState, StepConfig, solve, trajectory_to_csv
from .scaling import ruiz_equilibrate
from .spiral import phases_to_json, segment_phases

SOLVE_EXIT = {"optimal": 0, "iter_limit": 2, "time_limit": 2, "diverging": 3}
CROSSOVER_EXIT = {"vertex": 0, "primal_only": 4, "timeout": 5, "failed": 5}


def _default_seed() -> int:
    try:
        return int(os.environ.get("SPIRALLP_SEED", "0"))
    except ValueError:
        return 0


def _add_common_flags(p: argparse.ArgumentParser, time_limit_default=None,
                      max_iter_default=200_000):
    p.add_argument("--tol", type=float, default=1e-8,
                   help="relative KKT tolerance (default 1e-8)")
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="random seed (default 0, env SPIRALLP_SEED)")
    p.add_argument("--time-limit", type=float, default=time_limit_default,
                   help="wall-clock budget in seconds")
    p.add_argument("--max-iter", type=int, default=max_iter_default,
                   help="iteration cap for the solver")
    p.add_argument("--step-scale", type=float, default=0.9,
                   help="step size safety factor eta = scale / ||A||_2")
    p.add_argument("--ols", choices=("auto", "direct", "iterative"),
                   default="auto", help="least-squares backend")
    p.add_argument("--direct-threshold", type=int, default=1000,
                   help="dimension below which auto uses the direct backend")
    p.add_argument("--trajectory", type=Path, default=None,
                   help="write the recorded trajectory to this CSV path")
    p.add_argument("--stride", type=int, default=0,
                   help="trajectory recording stride (0 = off)")
    p.add_argument("--output", type=Path, default=None,
                   help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json",
                   help="stdout report format")
    p.add_argument("--eta", type=float, default=None,
                   help="explicit step size (overrides --step-scale)")
    p.add_argument("--restart", type=int, default=None,
                   help="halpern restart period (0 disables)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spirallp",
        description="PDHG LP solver with spiral analysis and simplex-free crossover",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an MPS instance with PDHG")
    p_solve.add_argument("input", type=Path)
    _add_common_flags(p_solve)
    p_solve.add_argument("--no-scale", action="store_true",
                         help="skip Ruiz equilibration")
    p_solve.set_defaults(func=cmd_solve)

    p_cross = sub.add_parser("crossover",
                             help="solve then push to a vertex")
    p_cross.add_argument("input", type=Path)
    _add_common_flags(p_cross, time_limit_default=300.0,
                      max_iter_default=5_000_000)
    p_cross.add_argument("--warm", type=Path, default=None,
                         help="JSON {x, y} in reformulated variable order")
    p_cross.add_argument("--no-scale", action="store_true",
                         help="skip Ruiz equilibration")
    p_cross.set_defaults(func=cmd_crossover)

    p_analyze = sub.add_parser("analyze",
                               help="record a stride-1 trajectory and export phases")
    p_analyze.add_argument("input", type=Path)
    _add_common_flags(p_analyze)
    p_analyze.add_argument("--warm", type=Path, default=None,
                           help="JSON {x, y} starting point")
    p_analyze.add_argument("--form", choices=("auto", "standard", "reform"),
                           default="auto",
                           help="analyze the equality form directly or reformulate")
    p_analyze.set_defaults(func=cmd_analyze)

    p_bench = sub.add_parser("bench",
                             help="solve+crossover every MPS file in a directory")
    p_bench.add_argument("input", type=Path)
    _add_common_flags(p_bench, time_limit_default=300.0,
                      max_iter_default=5_000_000)
    p_bench.add_argument("--workers", type=int, default=1,
                         help="parallel instances (default 1)")
    p_bench.add_argument("--no-scale", action="store_true",
                         help="skip Ruiz equilibration")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _emit(report: dict, args) -> None:
    text = json.dumps(_jsonable(report), indent=2)
    if args.output is not None:
        args.output.write_text(text + "\n")
    if args.format == "text":
        for key, value in report.items():
            if isinstance(value, (list, np.ndarray)) and len(value) > 8:
                value = f"[{len(value)} values]"
            print(f"{key}: {value}")
    elif args.output is None:
        print(text)


def _load_warm(path: Path, n: int, m: int) -> PdhgState:
    data = json.loads(path.read_text())
    x = np.asarray(data["x"], dtype=float)
    y = np.asarray(data["y"], dtype=float)
    if x.shape != (n,) or y.shape != (m,):
        raise ValueError(
            f"warm start shape mismatch: expected x ({n},) and y ({m},), "
            f"got {x.shape} and {y.shape}"
        )
    return PdhgState(x=x, y=y, k=0)


def _step_config(args, stride: int | None = None,
                 time_limit: float | None = None,
                 restart: int | None = None) -> StepConfig:
    restart_period = args.restart if args.restart is not None else restart
    if restart_period == 0:
        restart_period = None
    return StepConfig(
        eta=args.eta,
        safety=args.step_scale,
        max_iter=args.max_iter,
        tol=args.tol,
        restart_period=restart_period,
        record_stride=args.stride if stride is None else stride,
        time_limit=args.time_limit if time_limit is None else time_limit,
    )


def _solve_report(result, lp: BoxLp, name: str, x_out, y_out,
                  scaled: bool) -> dict:
    report = {
        "command": "solve",
        "instance": name,
        "status": result.status,
        "iterations": result.state.k,
        "objective": lp.objective(result.state.x),
        "eta": result.eta,
        "scaled": scaled,
        "residuals": {
            "primal": result.residuals.primal_res,
            "dual": result.residuals.dual_res,
            "gap": result.residuals.gap,
        },
        "wall_time_sec": result.wall_time_sec,
        "size": {
            "rows": int(lp.shape[0]),
            "cols": int(lp.shape[1]),
            "nnz": int(lp.A.nnz),
        },
        "x": x_out,
        "y": y_out,
    }
    if result.idv is not None:
        report["idv"] = {
            "norm": float(np.linalg.norm(result.idv)),
            "v": result.idv,
        }
    return report


def cmd_solve(args) -> int:
    general = parse_mps_file(args.input)
    reform = reformulate(general)
    lp = reform.to_box()
    scaled = None if args.no_scale else ruiz_equilibrate(lp)
    work = lp if scaled is None else scaled.lp
    cfg = _step_config(args)
    result = solve(work, None, cfg)
    if args.trajectory is not None and result.trajectory is not None:
        trajectory_to_csv(result.trajectory, args.trajectory)
    x_out = result.state.x if scaled is None else scaled.unscale_x(result.state.x)
    y_out = result.state.y if scaled is None else scaled.unscale_y(result.state.y)
    report = _solve_report(result, work, general.name, x_out, y_out,
                           scaled is not None)
    _emit(report, args)
    return SOLVE_EXIT.get(result.status, 2)


def cmd_crossover(args) -> int:
    general = parse_mps_file(args.input)
    reform = reformulate(general)
    lp = reform.to_box()
    n_struct = int(general.shape[1])
    scaled = None if args.no_scale else ruiz_equilibrate(lp)
    work = lp if scaled is None else scaled.lp
    budget = args.time_limit
    start = time.perf_counter()

    if args.warm is not None:
        z = _load_warm(args.warm, lp.shape[1], lp.shape[0])
        if scaled is not None:
            xs, ys = scaled.scale_point(z.x, z.y)
            z = PdhgState(xs, ys, 0)
        solve_summary = {"status": "warm", "iterations": 0}
    else:
        cfg = _step_config(args, restart=4096, time_limit=budget)
        result = solve(work, None, cfg)
        z = result.state
        solve_summary = {
            "status": result.status,
            "iterations": result.state.k,
            "residuals": {
                "primal": result.residuals.primal_res,
                "dual": result.residuals.dual_res,
                "gap": result.residuals.gap,
            },
        }
        if result.status != "optimal":
            status = "timeout" if result.status == "time_limit" else "failed"
            report = {
                "command": "crossover",
                "instance": general.name,
                "status": status,
                "solve": solve_summary,
                "support_before": support_count(work, z.x, 1e-8,
                                                limit=n_struct),
                "wall_time_sec": time.perf_counter() - start,
            }
            _emit(report, args)
            return CROSSOVER_EXIT[status]

    remaining = None
    if budget is not None:
        remaining = max(budget - (time.perf_counter() - start), 1e-3)
    ccfg = CrossoverConfig(
        seed=args.seed,
        time_limit=remaining,
        aux_tol=args.tol,
        ols_method=args.ols,
        direct_threshold=args.direct_threshold,
    )
    cres = run_crossover(work, z, ccfg)
    report = {"command": "crossover", "instance": general.name,
              "scaled": scaled is not None}
    report.update(cres.report)
    # Benchmark tables count support over the original problem's variables;
    # the box-wide counts (including the appended row variables) stay
    # available under separate keys.
    report["support_box_before"] = report["support_before"]
    report["support_box_after"] = report["support_after"]
    report["support_before"] = support_count(work, z.x, 1e-8, limit=n_struct)
    report["support_after"] = support_count(work, cres.x, 1e-8, limit=n_struct)
    report["solve"] = solve_summary
    report["x"] = cres.x if scaled is None else scaled.unscale_x(cres.x)
    report["y"] = cres.y if scaled is None else scaled.unscale_y(cres.y)
    _emit(report, args)
    return CROSSOVER_EXIT.get(cres.status, 5)


def _analysis_form(general: GeneralLp, form: str) -> BoxLp:
    equality_rows = bool(
        np.all(np.isfinite(general.row_lower))
        and np.all(general.row_lower == general.row_upper)
    )
    if form == "standard" or (form == "auto" and equality_rows):
        if not equality_rows:
            raise ValueError(
                "standard form requires every row to be an equality"
            )
        return BoxLp(
            A=general.A,
            b=general.row_lower,
            c=general.c,
            lower=general.col_lower,
            upper=general.col_upper,
            c0=general.objective_shift,
            name=general.name,
        )
    return reformulate(general).to_box()


def cmd_analyze(args) -> int:
    general = parse_mps_file(args.input)
    lp = _analysis_form(general, args.form)
    z0 = None
    if args.warm is not None:
        z0 = _load_warm(args.warm, lp.shape[1], lp.shape[0])
    cfg = StepConfig(
        eta=args.eta,
        safety=args.step_scale,
        max_iter=args.max_iter,
        tol=args.tol,
        restart_period=None,
        record_stride=1,
        time_limit=args.time_limit,
    )
    result = solve(lp, z0, cfg)
    phases = segment_phases(result.trajectory, lp)
    if args.trajectory is not None:
        trajectory_to_csv(result.trajectory, args.trajectory)
    report = {
        "command": "analyze",
        "instance": general.name,
        "status": result.status,
        "iterations": result.state.k,
        "eta": result.eta,
        "phase_count": len(phases),
        "phases": json.loads(phases_to_json(phases, lp)),
    }
    _emit(report, args)
    return 0


BENCH_COLUMNS = ("prob", "nRows", "nCols", "supp_in", "supp_out", "status",
                 "time_sec")


def _bench_one(path_str: str, options: dict) -> dict:
    """Solve + crossover a single instance; never raises."""
    path = Path(path_str)
    row = {
        "prob": path.stem,
        "nRows": 0,
        "nCols": 0,
        "supp_in": 0,
        "supp_out": 0,
        "status": "error",
        "time_sec": 0.0,
    }
    start = time.perf_counter()
    try:
        general = parse_mps_file(path)
        reform = reformulate(general)
        lp = reform.to_box()
        n_struct = int(general.shape[1])
        if options.get("scale", True):
            lp = ruiz_equilibrate(lp).lp
        row["nRows"], row["nCols"] = (int(d) for d in general.shape)
        cfg = StepConfig(
            tol=options["tol"],
            max_iter=options["max_iter"],
            safety=options["step_scale"],
            restart_period=options["restart"],
            time_limit=options["time_limit"],
        )
        result = solve(lp, None, cfg)
        row["supp_in"] = support_count(lp, result.state.x, 1e-8, limit=n_struct)
        if result.status != "optimal":
            row["status"] = (
                "timeout" if result.status == "time_limit" else "failed"
            )
            row["time_sec"] = time.perf_counter() - start
            return row
        remaining = None
        if options["time_limit"] is not None:
            remaining = max(
                options["time_limit"] - (time.perf_counter() - start), 1e-3
            )
        ccfg = CrossoverConfig(
            seed=options["seed"],
            time_limit=remaining,
            aux_tol=options["tol"],
            ols_method=options["ols"],
            direct_threshold=options["direct_threshold"],
        )
        cres = run_crossover(lp, result.state, ccfg)
        row["supp_out"] = support_count(lp, cres.x, 1e-8, limit=n_struct)
        row["status"] = cres.status
    except (MpsParseError, OSError, ValueError) as err:
        row["status"] = "error"
        row["error"] = str(err)
    row["time_sec"] = time.perf_counter() - start
    return row


def _format_bench_table(rows: list[dict]) -> str:
    headers = BENCH_COLUMNS
    table = [headers]
    for row in rows:
        table.append(
            tuple(
                f"{row[h]:.2f}" if h == "time_sec" else str(row[h])
                for h in headers
            )
        )
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = []
    for r in table:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)))
    return "\n".join(lines)


def cmd_bench(args) -> int:
    directory = args.input
    if not directory.is_dir():
        raise OSError(f"not a directory: {directory}")
    paths = sorted(
        p for p in directory.iterdir()
        if p.suffix.lower() == ".mps" and p.is_file()
    )
    if args.restart is None:
        restart = 4096
    elif args.restart == 0:
        restart = None
    else:
        restart = args.restart
    options = {
        "tol": args.tol,
        "seed": args.seed,
        "time_limit": args.time_limit,
        "max_iter": args.max_iter,
        "step_scale": args.step_scale,
        "ols": args.ols,
        "direct_threshold": args.direct_threshold,
        "restart": restart,
        "scale": not args.no_scale,
    }
    if args.workers > 1 and len(paths) > 1:
        with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_bench_one, [str(p) for p in paths],
                                 [options] * len(paths)))
    else:
        rows = [_bench_one(str(p), options) for p in paths]

    if args.output is not None:
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(BENCH_COLUMNS)
            for row in rows:
                writer.writerow([row[h] for h in BENCH_COLUMNS])

    counts = {"vertex": 0, "primal_only": 0, "timeout": 0, "failed": 0,
              "error": 0}
    for row in rows:
        counts[row["status"]] = counts.get(row["status"], 0) + 1
    if args.format == "json":
        print(json.dumps(_jsonable({"rows": rows, "summary": counts}), indent=2))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(BENCH_COLUMNS)
        for row in rows:
            writer.writerow([row[h] for h in BENCH_COLUMNS])
    else:
        print(_format_bench_table(rows))
        print(
            "summary: "
            + "  ".join(f"{k}={v}" for k, v in counts.items() if v or k == "vertex")
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MpsParseError, OSError, ValueError, KeyError,
            json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
