"""Command-line front end: solve catalog problems, build error tables,
run grid-refinement studies and dump operational-matrix rows.

Data written to ``--out`` is deterministic (full-precision CSV, no
timestamps); timings and diagnostics go to stderr.  Exit codes: 0 success,
1 solver failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

import numpy as np

from .basis import Grid
from .operational import build_op_matrices
from .problems import PROBLEM_IDS, build_problem
from .reference import exact_solution
from .solver import SolverConfig, error_report, solve

__all__ = ["RunRecord", "main"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one (problem, alpha, m) solve."""

    problem: str
    alpha: float
    m: int
    errors: tuple | None  # per-unknown max node errors, when a closed form exists
    seconds: float
    status: str
    failed_node: int | None
    max_newton_iters: int
    max_residual: float
    relaxed_nodes: int


def _run_once(problem_id: str, alpha: float, m: int) -> tuple[RunRecord, object]:
    problem = build_problem(problem_id, alpha)
    t0 = time.perf_counter()
    sol = solve(problem, SolverConfig(m=m))
    seconds = time.perf_counter() - t0
    exact = exact_solution(problem_id, alpha)
    errors = None
    if exact is not None and sol.ok:
        errors = tuple(error_report(sol, exact))
    rec = RunRecord(
        problem=problem_id,
        alpha=alpha,
        m=m,
        errors=errors,
        seconds=seconds,
        status=sol.status,
        failed_node=sol.failed_node,
        max_newton_iters=int(sol.newton_iters.max()),
        max_residual=float(sol.residuals.max()),
        relaxed_nodes=len(sol.relaxed_nodes),
    )
    return rec, sol


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def _cmd_solve(args) -> int:
    rec, sol = _run_once(args.problem, args.alpha, args.m)
    _diag(
        f"{args.problem} alpha={args.alpha} m={args.m}: {rec.status} "
        f"in {rec.seconds:.3f}s (max newton iters {rec.max_newton_iters}, "
        f"max residual {rec.max_residual:.3g}, relaxed nodes {rec.relaxed_nodes})"
    )
    if not sol.ok:
        _diag(f"solver failed at node {rec.failed_node} "
              f"(t={sol.grid.node(rec.failed_node):g})")
        return 1
    exact = exact_solution(args.problem, args.alpha)
    n = sol.y.shape[0]
    header = ["t"] + [f"y{i + 1}" for i in range(n)]
    if exact is not None:
        header += [f"err{i + 1}" for i in range(n)]
    lines = [",".join(header)]
    nodes = sol.grid.nodes()
    exact_vals = None
    if exact is not None:
        exact_vals = np.stack([np.asarray(fn(nodes), dtype=float) for fn in exact])
    for j, t in enumerate(nodes):
        row = [_fmt(t)] + [_fmt(v) for v in sol.y[:, j]]
        if exact_vals is not None:
            row += [_fmt(abs(sol.y[i, j] - exact_vals[i, j])) for i in range(n)]
        lines.append(",".join(row))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _require_exact(problem_id: str, alpha: float) -> bool:
    if exact_solution(problem_id, alpha) is None:
        _diag(
            f"no closed-form solution for {problem_id} at alpha={alpha}; "
            "error tables need one (ex1/ex2 at 0.5, ex3/ex4 at 1)"
        )
        return False
    return True


def _cmd_table(args) -> int:
    if not _require_exact(args.problem, args.alpha):
        return 2
    rows = []
    for m in args.m_values:
        rec, _ = _run_once(args.problem, args.alpha, m)
        if rec.status != "converged":
            _diag(f"solver failed at node {rec.failed_node} for m={m}")
            return 1
        rows.append(rec)
    n = len(rows[0].errors)
    header = ["m"] + [f"eps{i + 1}" for i in range(n)]
    print(",".join(header + ["seconds"]))
    for rec in rows:
        print(
            ",".join([str(rec.m)] + [_fmt(e) for e in rec.errors] + [f"{rec.seconds:.6f}"])
        )
    if args.out:
        lines = [",".join(header)]
        lines += [",".join([str(r.m)] + [_fmt(e) for e in r.errors]) for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_convergence(args) -> int:
    if len(args.m_values) < 2:
        _diag("convergence needs at least two m values")
        return 2
    if not _require_exact(args.problem, args.alpha):
        return 2
    recs = []
    for m in args.m_values:
        rec, _ = _run_once(args.problem, args.alpha, m)
        if rec.status != "converged":
            _diag(f"solver failed at node {rec.failed_node} for m={m}")
            return 1
        recs.append(rec)
    n = len(recs[0].errors)
    errs = np.array([r.errors for r in recs])
    ms = np.array([r.m for r in recs], dtype=float)
    print(",".join(["m"] + [f"eps{i + 1}" for i in range(n)]))
    for r in recs:
        print(",".join([str(r.m)] + [_fmt(e) for e in r.errors]))
    print(",".join(["pair"] + [f"ratio{i + 1}" for i in range(n)] + [f"order{i + 1}" for i in range(n)]))
    for k in range(len(recs) - 1):
        ratios = errs[k] / errs[k + 1]
        orders = np.log(ratios) / np.log(ms[k + 1] / ms[k])
        print(
            ",".join(
                [f"{recs[k].m}->{recs[k + 1].m}"]
                + [f"{v:.4g}" for v in ratios]
                + [f"{v:.4g}" for v in orders]
            )
        )
    # least-squares slope of log(err) vs log(m) over the full list
    fitted = np.array(
        [-np.polyfit(np.log(ms), np.log(errs[:, i]), 1)[0] for i in range(n)]
    )
    print(",".join(["fitted"] + [f"{v:.4g}" for v in fitted]))
    print("PASS" if np.all(fitted >= 1.7) else "FAIL")
    return 0


def _cmd_matrices(args) -> int:
    grid = Grid(args.m, args.t_end)
    mats = build_op_matrices(args.alpha, grid)
    row = getattr(mats, f"p_{args.which}").row
    _emit("\n".join(_fmt(v) for v in row) + "\n", args.out)
    return 0


def _parse_m_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad m list {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"bad m list {text!r}")
    return vals


def _alpha_arg(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad order {text!r}")
    if not (0.0 < a <= 1.0):
        raise argparse.ArgumentTypeError(f"order must lie in (0, 1], got {a}")
    return a


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hfdae",
        description="Fractional DAE solver on the hybrid piecewise-linear basis",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_problem_flags(sp, need_m: str):
        sp.add_argument("--problem", required=True, choices=PROBLEM_IDS)
        sp.add_argument("--alpha", required=True, type=_alpha_arg)
        if need_m == "single":
            sp.add_argument("--m", required=True, type=_positive_int)
        else:
            sp.add_argument("--m", type=_positive_int)
            sp.add_argument("--m-list", dest="m_list", type=_parse_m_list)
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("solve", help="solve one problem and emit the node table")
    add_problem_flags(sp, "single")
    sp.set_defaults(fn=_cmd_solve)

    sp = sub.add_parser("table", help="max-error table over a list of grid sizes")
    add_problem_flags(sp, "list")
    sp.set_defaults(fn=_cmd_table)

    sp = sub.add_parser("convergence", help="error ratios and fitted order")
    add_problem_flags(sp, "list")
    sp.set_defaults(fn=_cmd_convergence)

    sp = sub.add_parser("matrices", help="dump an operational-matrix first row")
    sp.add_argument("--alpha", required=True, type=_alpha_arg)
    sp.add_argument("--m", required=True, type=_positive_int)
    sp.add_argument("--which", required=True, choices=("ss", "st", "ts", "tt"))
    sp.add_argument("--t-end", dest="t_end", type=float, default=1.0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_matrices)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "m_list"):
        if args.m_list and args.m:
            parser.error("give either --m or --m-list, not both")
        if not args.m_list and not args.m:
            parser.error("need --m or --m-list")
        args.m_values = args.m_list or [args.m]
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
