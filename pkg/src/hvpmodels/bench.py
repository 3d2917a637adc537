"""Benchmark suites, performance profiles and the ``bench`` command line.

Usage::

    python -m hvpmodels.bench run --set appB --metric hvp --seeds 3 --out results/
    python -m hvpmodels.bench profile --in results/runs.csv --metric iters
    python -m hvpmodels.bench check

Failed runs enter the profiles as ``t = inf``. Per-problem values are
medians over seeds.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import EmptyInput
from .drivers import METHODS, RunRecord, SolverConfig, solve
from .problems import PROBLEM_SETS, MismatchReport, fd_check, problem_set, registry, select_problems

logger = logging.getLogger(__name__)

METRICS = {"hvp": "hvp", "iters": "iters", "fevals": "fevals"}
CSV_COLUMNS = (
    "problem",
    "n",
    "method",
    "seed",
    "status",
    "iters",
    "hvp",
    "fevals",
    "gevals",
    "final_f",
    "final_gnorm",
    "wall_ms",
)
N_TAUS = 64

# which solvers each set was designed to compare
DEFAULT_METHODS = {
    "appB": ("inexact_newton", "hessian_model"),
    "appC": ("inexact_newton", "hessian_model_sparse"),
    "appD": ("inexact_newton", "newton_model"),
}


@dataclass
class ProfileCurve:
    solver: str
    taus: np.ndarray
    rho: np.ndarray


# ---------------------------------------------------------------------------
# performance profiles
# ---------------------------------------------------------------------------


def _clean_table(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 2 or t.size == 0:
        raise EmptyInput("performance profile needs a nonempty problems x solvers table")
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise ValueError("metric values must be nonnegative or inf")
    solved = np.isfinite(t).any(axis=1)
    if not solved.all():
        # kept in the denominator: they count as failures for every solver
        warnings.warn(f"{int((~solved).sum())} problem(s) unsolved by every solver", stacklevel=3)
    return t


def performance_ratios(t) -> np.ndarray:
    """``t[p, s] / min_s t[p, s]`` with failures kept at ``inf``.

    Rows where every solver failed raise a warning and stay all ``inf``. A zero
    best value (a start point that is already stationary) gives ratio 1
    to the solvers that matched it and ``inf`` to the rest.
    """
    t = _clean_table(t)
    best = t.min(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = t / best
    r[t == best] = 1.0
    r[~np.isfinite(t)] = np.inf
    r[np.isnan(r)] = np.inf
    return r


def tau_grid(ratios, n_points: int = N_TAUS) -> np.ndarray:
    """Geometric grid from 1 to the largest finite ratio."""
    finite = np.asarray(ratios, dtype=float)
    finite = finite[np.isfinite(finite)]
    top = float(finite.max()) if finite.size else 1.0
    if top <= 1.0:
        return np.ones(1)
    return np.geomspace(1.0, top, n_points)


def performance_profile(t, taus=None, solvers=None) -> list[ProfileCurve]:
    """Fraction of problems on which each solver is within ``tau`` of the best.

    Parameters
    ----------
    t : array_like, shape (n_problems, n_solvers)
        Positive costs; ``inf`` marks a failure.
    taus : array_like, optional
        Evaluation points; defaults to :func:`tau_grid` of the ratios.
    solvers : sequence of str, optional
        Curve labels; defaults to ``s0, s1, ...``.
    """
    r = performance_ratios(t)
    taus = tau_grid(r) if taus is None else np.asarray(taus, dtype=float)
    if np.any(taus < 1.0):
        raise ValueError("tau values must be >= 1")
    if solvers is None:
        solvers = [f"s{k}" for k in range(r.shape[1])]
    if len(solvers) != r.shape[1]:
        raise ValueError("one label per solver column")
    n_prob = r.shape[0]
    curves = []
    for k, name in enumerate(solvers):
        rho = (r[:, k][None, :] <= taus[:, None]).sum(axis=1) / n_prob
        curves.append(ProfileCurve(name, taus.copy(), rho))
    return curves


# ---------------------------------------------------------------------------
# runs and tables
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    # repr of a Python float is the shortest round-tripping form
    return repr(float(x))


def record_row(rec: RunRecord, timing: bool = False) -> dict:
    c = rec.counters
    return {
        "problem": rec.problem,
        "n": rec.n,
        "method": rec.method,
        "seed": rec.seed,
        "status": rec.status,
        "iters": c.n_iter,
        "hvp": c.n_hvp,
        "fevals": c.n_f,
        "gevals": c.n_grad,
        "final_f": _fmt(rec.final_f),
        "final_gnorm": _fmt(rec.final_grad_norm),
        # wall time would make two identical runs differ byte for byte
        "wall_ms": _fmt(rec.wall_ms) if timing else "nan",
    }


def write_runs(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def read_runs(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def metric_table(rows, metric: str, methods=None):
    """Median-over-seeds table from run rows.

    Returns ``(problems, methods, t)`` with ``t[i, j] = inf`` when the
    median run of method ``j`` on problem ``i`` did not converge.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}")
    if not rows:
        raise EmptyInput("no runs to tabulate")
    problems, found = [], []
    values: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        key = f"{row['problem']}-{row['n']}"
        if key not in problems:
            problems.append(key)
        if row["method"] not in found:
            found.append(row["method"])
        v = float(row[METRICS[metric]]) if row["status"] == "converged" else np.inf
        values.setdefault((key, row["method"]), []).append(v)
    methods = list(methods) if methods is not None else found
    t = np.full((len(problems), len(methods)), np.inf)
    for i, p in enumerate(problems):
        for j, m in enumerate(methods):
            if (p, m) in values:
                t[i, j] = np.median(values[(p, m)])
    return problems, methods, t


def write_profile(curves, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau"] + [c.solver for c in curves])
        for k, tau in enumerate(curves[0].taus):
            w.writerow([_fmt(tau)] + [_fmt(c.rho[k]) for c in curves])


def profile_from_rows(rows, metric: str):
    problems, methods, t = metric_table(rows, metric)
    return performance_profile(t, solvers=methods)


@dataclass
class SuiteResult:
    rows: list[dict]
    records: list[RunRecord]
    problems: list[str]
    methods: list[str]
    table: np.ndarray
    curves: list[ProfileCurve]
    summary: dict


def _run_one(args):
    problem, method, seed, overrides = args
    rec = solve(problem, SolverConfig(method=method, seed=seed, **overrides))
    rec.x = None  # keep worker results small
    return rec


def _summary(rows, problems, methods, t, metric, seeds):
    status_counts = {m: {} for m in methods}
    for row in rows:
        d = status_counts[row["method"]]
        d[row["status"]] = d.get(row["status"], 0) + 1
    out = {
        "metric": metric,
        "seeds": list(seeds),
        "methods": list(methods),
        "problems": list(problems),
        "median_metric": {
            p: {m: (None if not np.isfinite(t[i, j]) else float(t[i, j])) for j, m in enumerate(methods)}
            for i, p in enumerate(problems)
        },
        "status_counts": status_counts,
    }
    if "inexact_newton" in methods:
        base = methods.index("inexact_newton")
        ratios = {}
        for j, m in enumerate(methods):
            if j == base:
                continue
            both = np.isfinite(t[:, j]) & np.isfinite(t[:, base]) & (t[:, base] > 0)
            r = t[both, j] / t[both, base]
            ratios[m] = {"median_ratio": float(np.median(r)) if r.size else None, "n_pairs": int(r.size)}
        out["ratio_to_inexact_newton"] = ratios
    return out


def run_suite(
    problems,
    methods,
    seeds=(0,),
    metric: str = "hvp",
    out_dir=None,
    jobs: int = 1,
    timing: bool = False,
    **overrides,
) -> SuiteResult:
    """Run every (problem, method, seed) triple and build the profile.

    ``problems`` is a set name or a list of :class:`ProblemDef`. Extra
    keyword arguments go to :class:`SolverConfig`. Individual failures are
    recorded and never abort the suite.
    """
    if isinstance(problems, str):
        problems = problem_set(problems)
    methods = list(methods)
    seeds = list(seeds)
    if not problems or not methods or not seeds:
        raise EmptyInput("problems, methods and seeds must be nonempty")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    tasks = [(p, m, s, overrides) for p in problems for m in methods for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, tasks))
    else:
        records = [_run_one(t) for t in tasks]
    for rec in records:
        logger.info("%s-%d %s seed=%d: %s", rec.problem, rec.n, rec.method, rec.seed, rec.status)
    rows = [record_row(r, timing) for r in records]
    # the profile is built from the written rows so a reread reproduces it
    str_rows = [{k: str(v) for k, v in row.items()} for row in rows]
    keys, methods, t = metric_table(str_rows, metric, methods)
    curves = performance_profile(t, solvers=methods)
    summary = _summary(str_rows, keys, methods, t, metric, seeds)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_runs(rows, out / "runs.csv")
        write_profile(curves, out / f"profile_{metric}.csv")
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return SuiteResult(rows, records, keys, methods, t, curves, summary)


# ---------------------------------------------------------------------------
# self check
# ---------------------------------------------------------------------------


def _check_invariants(rng) -> list[str]:
    """Quick randomized spot checks; returns failure messages."""
    from .cg import truncated_cg
    from .hessian_model import assemble, solve_determined
    from .newton_model import build_conditions, descent_safeguard, solve_newton
    from .sampling import SampleSet, ball_points, fixed_directions

    failures = []
    for trial in range(20):
        n = int(rng.integers(2, 8))
        A = rng.standard_normal((n, n))
        C = A @ A.T + n * np.eye(n)
        b = rng.standard_normal(n)
        x = rng.standard_normal(n)
        f = lambda y: 0.5 * y @ C @ y + b @ y  # noqa: E731
        g = C @ x + b
        p = n * (n + 1) // 2 - n
        dirs, v = fixed_directions(rng, n, p)
        pts = x + 0.01 * dirs
        sys_ = assemble(x, g, f(x), pts, [f(y) for y in pts], 0.01 * v, C @ (0.01 * v))
        H = solve_determined(sys_).H
        if np.linalg.norm(H - C) > 1e-7 * np.linalg.norm(C):
            failures.append(f"hessian recovery inexact on quadratic (trial {trial})")
        pts = ball_points(rng, x, 0.01, n)
        S = SampleSet(x, pts, np.array([f(y) for y in pts]), np.array([C @ (y - x) for y in pts]))
        d = solve_newton(*build_conditions(x, f(x), S))
        newton = -np.linalg.solve(C, g)
        if np.linalg.norm(d - newton) > 1e-7 * np.linalg.norm(newton):
            failures.append(f"newton recovery inexact on quadratic (trial {trial})")
        res = truncated_cg(lambda u: C @ u, g, 1e-12)
        if np.linalg.norm(res.d - newton) > 1e-6 * np.linalg.norm(newton):
            failures.append(f"cg disagrees with direct solve (trial {trial})")
        dn = rng.standard_normal(n)
        out = descent_safeguard(dn, g)
        if -g @ out < 0.95 * np.linalg.norm(g) * np.linalg.norm(out) - 1e-10:
            failures.append(f"safeguard output below eta (trial {trial})")
    curves = performance_profile([[1, 2], [4, 2]], taus=[1.0, 2.0])
    if not (np.array_equal(curves[0].rho, [0.5, 1.0]) and np.array_equal(curves[1].rho, [0.5, 1.0])):
        failures.append("2x2 profile example does not reproduce")
    return failures


def check(verbose: bool = True) -> bool:
    ok = True
    for p in registry():
        try:
            rep = fd_check(p)
        except MismatchReport as exc:
            rep, ok = exc.report, False
        if verbose:
            print(rep)
    from .core import make_rng

    failures = _check_invariants(make_rng(0, "check"))
    for msg in failures:
        print("FAIL", msg)
    if verbose and not failures:
        print("invariant spot checks: ok")
    return ok and not failures


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def _parser():
    ap = argparse.ArgumentParser(prog="python -m hvpmodels.bench", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark suite")
    run.add_argument("--set", dest="pset", choices=sorted(PROBLEM_SETS), default="appB")
    run.add_argument("--problems", help="comma-separated NAME or NAME-n; overrides --set")
    run.add_argument("--methods", help="comma-separated methods (default depends on the set)")
    run.add_argument("--metric", choices=sorted(METRICS), default="hvp")
    run.add_argument("--seeds", type=int, default=3, help="number of seeds per run")
    run.add_argument("--seed", type=int, default=0, help="first seed")
    run.add_argument("--out", default="bench_out")
    run.add_argument("--force-rule", default="sqrt", help="sqrt or const:<value>")
    run.add_argument("--safeguard", choices=("deficit", "always", "descent"), default="deficit")
    run.add_argument("--max-iter", type=int, default=2000)
    run.add_argument("--wall-clock", type=float, default=60.0, help="per-run limit in seconds")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--timing", action="store_true", help="record wall_ms (breaks byte-identical output)")

    prof = sub.add_parser("profile", help="recompute a profile from runs.csv")
    prof.add_argument("--in", dest="inp", required=True)
    prof.add_argument("--metric", choices=sorted(METRICS), default="hvp")
    prof.add_argument("--out", help="output CSV (default: profile_<metric>.csv next to the input)")

    sub.add_parser("check", help="derivative checks and invariant spot checks")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "check":
        return 0 if check() else 1

    if args.command == "profile":
        rows = read_runs(args.inp)
        curves = profile_from_rows(rows, args.metric)
        out = Path(args.out) if args.out else Path(args.inp).with_name(f"profile_{args.metric}.csv")
        write_profile(curves, out)
        for c in curves:
            print(f"{c.solver:22s} rho(1) = {c.rho[0]:.3f}")
        return 0

    problems = select_problems(args.problems) if args.problems else problem_set(args.pset)
    methods = args.methods.split(",") if args.methods else DEFAULT_METHODS[args.pset]
    seeds = range(args.seed, args.seed + args.seeds)
    res = run_suite(
        problems,
        methods,
        seeds,
        args.metric,
        out_dir=args.out,
        jobs=args.jobs,
        timing=args.timing,
        force_rule=args.force_rule,
        safeguard=args.safeguard,
        max_iter=args.max_iter,
        wall_clock=args.wall_clock,
    )
    for c in res.curves:
        print(f"{c.solver:22s} rho(1) = {c.rho[0]:.3f}")
    for m, r in res.summary.get("ratio_to_inexact_newton", {}).items():
        if r["median_ratio"] is not None:
            print(f"median {args.metric} ratio {m}/inexact_newton = {r['median_ratio']:.3f} over {r['n_pairs']} problems")
    print(f"wrote {args.out}/runs.csv, profile_{args.metric}.csv, summary.json")
    failed = [r for r in res.rows if r["status"] == "numeric_failure"]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
