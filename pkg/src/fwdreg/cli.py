"""Command-line front end.

Commands: fit, verify, rates, sparse-eig, compare. CSV input uses a
header row with the response in a column named "y" and every other
column treated as a covariate, in header order. JSON reports carry a
schema_version field and use shortest round-trip float formatting, so a
fixed seed yields byte-identical reports.

Exit codes: 0 ok, 2 input/config error, 3 data degeneracy,
4 bound-check failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Any, Optional, Sequence

import numpy as np

from . import oracle, theory_bounds
from .core_linalg import Dataset, column_moments, gram, least_squares_on_support
from .errors import (
    BudgetExceeded,
    FwdregError,
    ZeroVarianceColumn,
)
from .forward_select import FitResult, forward_regression
from .simulate import SimConfig, oracle_threshold, simulate_dataset

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_BOUND_FAILURE = 4


# ---------------------------------------------------------------------------
# I/O helpers


def _jsonify(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and dataclasses to plain
    Python types so json.dumps emits shortest round-trip decimals."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonify(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonify(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(path: str) -> tuple[list[str], np.ndarray, Optional[np.ndarray]]:
    """Read a data CSV: (covariate names, raw design, response or None).

    The response column must be named "y"; if absent, every column is a
    covariate (useful for sparse-eig).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    header = [h.strip() for h in header]
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric cell ({exc})") from None
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: row width does not match header")
    if "y" in header:
        yi = header.index("y")
        names = [h for i, h in enumerate(header) if i != yi]
        cols = [i for i in range(len(header)) if i != yi]
        return names, data[:, cols], data[:, yi]
    return header, data, None


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


# ---------------------------------------------------------------------------
# fit


def fit_csv(path: str, t: float) -> dict:
    """Standardize, run forward regression and express coefficients in the
    original units of the input columns."""
    names, raw, y = read_csv(path)
    if y is None:
        raise ValueError(f"{path}: no response column named 'y'")
    mean, scale = column_moments(raw)
    floor = 1e-13 * (np.abs(mean) + 1.0)
    bad = np.flatnonzero(scale <= floor)
    if bad.size:
        raise ZeroVarianceColumn(int(bad[0]))
    x = (raw - mean) / scale
    y_mean = float(y.mean())
    ds = Dataset(x=x, y=y - y_mean)
    fr = forward_regression(ds, t)

    # back-transformation: standardized slope b maps to b / scale in the
    # original units; the intercept restores both the column and y means
    beta = fr.theta_hat / scale
    intercept = y_mean - float(beta @ mean)
    return {
        "schema_version": SCHEMA_VERSION,
        "threshold": t,
        "support": list(fr.support),
        "support_names": [names[j] for j in fr.support],
        "coefficients": {names[j]: float(beta[j]) for j in fr.support},
        "intercept": intercept,
        "loss": fr.loss,
        "budget_exhausted": fr.budget_exhausted,
        "trace": [
            {"index": s.index, "name": names[s.index], "gain": s.gain,
             "loss_after": s.loss_after}
            for s in fr.trace.steps
        ],
    }


def cmd_fit(args: argparse.Namespace) -> int:
    report = fit_csv(args.input, args.threshold)
    write_json(args.out, report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _verify_one(
    cfg: SimConfig, rep: int, safety: float, phi_size: int,
    eig_budget: int, timing: bool,
) -> dict:
    started = time.perf_counter()
    rep_cfg = replace(cfg, seed=cfg.seed + rep)
    ds = simulate_dataset(rep_cfg)
    g = gram(ds)
    eig = theory_bounds.exact_eig_source(g, budget=eig_budget)
    phi = eig(phi_size).value
    t = oracle_threshold(ds, phi, safety=safety).t
    fr = forward_regression(ds, t)

    s0_support = set(np.flatnonzero(ds.theta0).tolist())
    s0 = len(s0_support)
    bounds = theory_bounds.verify_theorem1(fr, ds, t, eig)
    l2_ok, l1_ok = theory_bounds.verify_theorem3(fr, eig(max(fr.s_hat + s0, 1)))
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return {
        "seed": rep_cfg.seed,
        "t": t,
        "s_hat": fr.s_hat,
        "n_true_selected": len(set(fr.support) & s0_support),
        "n_false_selected": len(set(fr.support) - s0_support),
        "pred_error_norm": fr.pred_error_norm,
        "l1_error": fr.l1_error,
        "l2_error": fr.l2_error,
        "noise_sup": bounds.noise_sup,
        "c1": bounds.c1,
        "pred_bound_holds": bounds.pred_bound_holds,
        "threshold_ok": bounds.threshold_ok,
        "c2_of_m": [
            {"m": c.m, "c2": c.c2, "holds": c.holds} for c in bounds.c2_of_m
        ],
        "count_bound_holds": all(c.holds for c in bounds.c2_of_m),
        "theorem3_l2_ok": l2_ok,
        "theorem3_l1_ok": l1_ok,
        "eig_method": bounds.eig_method,
        "caveat_flag": bounds.caveat_flag,
        # wall-clock is inherently nondeterministic, so it is opt-in to
        # keep fixed-seed reports byte identical
        "runtime_ms": elapsed_ms if timing else None,
    }


def _median_iqr(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return {"median": float(med), "iqr": float(q3 - q1)}


def run_verify(
    cfg: SimConfig,
    replications: int,
    safety: float = 1.1,
    phi_size: Optional[int] = None,
    threads: int = 1,
    timing: bool = False,
    eig_budget: int = theory_bounds.DEFAULT_SUBSET_BUDGET,
) -> tuple[dict, bool]:
    """Simulate, fit and bound-check ``replications`` seeds.

    Returns (report, all_bounds_hold). Replications are independent given
    their seeds, so thread scheduling cannot change the report.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    phi_size = phi_size if phi_size is not None else min(cfg.p, max(2 * cfg.s0, 1))

    def worker(rep: int) -> dict:
        return _verify_one(cfg, rep, safety, phi_size, eig_budget, timing)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(worker, range(replications)))
    else:
        records = [worker(rep) for rep in range(replications)]

    all_pass = all(
        r["pred_bound_holds"] and r["count_bound_holds"]
        and r["theorem3_l2_ok"] and r["theorem3_l1_ok"]
        for r in records
    )
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "replications": replications,
        "safety": safety,
        "phi_size": phi_size,
        "records": records,
        "aggregates": {
            key: _median_iqr([r[key] for r in records])
            for key in ("s_hat", "pred_error_norm", "l1_error", "l2_error")
        },
        "all_bounds_hold": all_pass,
    }
    return report, all_pass


def load_sim_config(path: str) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        return SimConfig.from_dict(payload)
    except TypeError as exc:
        raise ValueError(f"{path}: bad SimConfig ({exc})") from None


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = load_sim_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    report, all_pass = run_verify(
        cfg,
        replications=args.replications,
        safety=args.safety,
        phi_size=args.phi_size,
        threads=args.threads,
        timing=args.timing,
    )
    write_json(args.out, report)
    if not all_pass:
        print("bound check failed on at least one replication", file=sys.stderr)
        return EXIT_BOUND_FAILURE
    return EXIT_OK


# ---------------------------------------------------------------------------
# rates


def run_rates(
    cfg: SimConfig,
    n_grid: Sequence[int],
    replications: int,
    safety: float = 1.1,
    draws: int = 500,
    threads: int = 1,
) -> dict:
    """Sweep n at fixed p, s0 and regress log median error on log n.

    Sparse eigenvalues for the threshold use the sampled surrogate, since
    exact enumeration is infeasible at sweep-scale p.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 4 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be increasing with at least 4 points")
    phi_size = min(cfg.p, max(2 * cfg.s0, 1))

    def worker(job: tuple[int, int]) -> tuple[float, int]:
        gi, rep = job
        rep_cfg = replace(cfg, n=n_grid[gi], seed=cfg.seed + 1_000_003 * gi + rep)
        ds = simulate_dataset(rep_cfg)
        g = gram(ds)
        phi = theory_bounds.sparse_eig_sampled(
            g, phi_size, draws=draws, seed=rep_cfg.seed
        ).value
        t = oracle_threshold(ds, phi, safety=safety).t
        fr = forward_regression(ds, t)
        return fr.pred_error_norm, fr.s_hat

    jobs = [(gi, rep) for gi in range(len(n_grid)) for rep in range(replications)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, jobs))
    else:
        results = [worker(job) for job in jobs]

    rows = []
    for gi, n in enumerate(n_grid):
        chunk = results[gi * replications : (gi + 1) * replications]
        rows.append(
            {
                "n": n,
                "median_pred_error_norm": float(np.median([c[0] for c in chunk])),
                "median_s_hat": float(np.median([c[1] for c in chunk])),
            }
        )

    errors = [r["median_pred_error_norm"] for r in rows]
    if min(errors) < 1e-14:
        slope = None
        slope_flag = "degenerate: median error is numerically zero"
    else:
        slope = float(
            np.polyfit(np.log([r["n"] for r in rows]), np.log(errors), 1)[0]
        )
        slope_flag = None
    return {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "replications": replications,
        "n_grid": n_grid,
        "rows": rows,
        "slope": slope,
        "slope_flag": slope_flag,
    }


def cmd_rates(args: argparse.Namespace) -> int:
    cfg = load_sim_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    summary = run_rates(
        cfg,
        n_grid=[int(v) for v in args.n_grid.split(",")],
        replications=args.replications,
        safety=args.safety,
        draws=args.draws,
        threads=args.threads,
    )
    write_csv(
        args.out,
        ["n", "median_pred_error_norm", "median_s_hat"],
        [
            [r["n"], repr(r["median_pred_error_norm"]), repr(r["median_s_hat"])]
            for r in summary["rows"]
        ],
    )
    print(json.dumps(_jsonify({"slope": summary["slope"],
                               "slope_flag": summary["slope_flag"]})))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sparse-eig


def cmd_sparse_eig(args: argparse.Namespace) -> int:
    names, raw, _y = read_csv(args.input)
    mean, scale = column_moments(raw)
    floor = 1e-13 * (np.abs(mean) + 1.0)
    bad = np.flatnonzero(scale <= floor)
    if bad.size:
        raise ZeroVarianceColumn(int(bad[0]))
    x = (raw - mean) / scale
    ds = Dataset(x=x, y=np.zeros(x.shape[0]))
    g = gram(ds)
    if args.mode == "exact":
        try:
            rep = theory_bounds.sparse_eig_exact(g, args.s)
        except BudgetExceeded as exc:
            print(
                f"exact enumeration over budget ({exc}); rerun with "
                f"--mode sampled --draws N",
                file=sys.stderr,
            )
            return EXIT_INPUT
    else:
        rep = theory_bounds.sparse_eig_sampled(
            g, args.s, draws=args.draws, seed=args.seed or 0
        )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "s": rep.s,
        "value": rep.value,
        "method": rep.method,
        "witness": list(rep.witness),
        "witness_names": [names[j] for j in rep.witness],
        "subsets_examined": rep.subsets_examined,
        "upper_bound_only": rep.method == "sampled",
    }
    write_json(args.out, payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare


def compare_csv(path: str, t: float, k: Optional[int] = None) -> dict:
    """Greedy-vs-exhaustive comparison at equal support size.

    The greedy support is the first k forward selections (k defaults to
    the full selected size), refit by least squares; the exhaustive side
    is the best size-k subset.
    """
    names, raw, y = read_csv(path)
    if y is None:
        raise ValueError(f"{path}: no response column named 'y'")
    mean, scale = column_moments(raw)
    floor = 1e-13 * (np.abs(mean) + 1.0)
    bad = np.flatnonzero(scale <= floor)
    if bad.size:
        raise ZeroVarianceColumn(int(bad[0]))
    x = (raw - mean) / scale
    ds = Dataset(x=x, y=y - float(y.mean()))
    fr = forward_regression(ds, t)
    k = fr.s_hat if k is None else int(k)

    greedy_support = tuple(sorted(s.index for s in fr.trace.steps[:k]))
    _theta, greedy_loss = least_squares_on_support(ds, greedy_support)
    best_support, best_loss = oracle.best_subset(ds, k)
    return {
        "schema_version": SCHEMA_VERSION,
        "threshold": t,
        "k": k,
        "greedy_support": list(greedy_support),
        "greedy_support_names": [names[j] for j in greedy_support],
        "greedy_loss": greedy_loss,
        "best_subset_support": list(best_support),
        "best_subset_support_names": [names[j] for j in best_support],
        "best_subset_loss": best_loss,
        "greedy_gap": greedy_loss - best_loss,
    }


def cmd_compare(args: argparse.Namespace) -> int:
    report = compare_csv(args.input, args.threshold, args.k)
    write_json(args.out, report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwdreg",
        description="Thresholded forward regression with bound diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a CSV dataset by forward regression")
    fit.add_argument("--input", "-i", required=True)
    fit.add_argument("--threshold", "-t", type=float, required=True)
    fit.add_argument("--out", "-o", required=True)
    fit.set_defaults(func=cmd_fit)

    verify = sub.add_parser(
        "verify", help="simulate and check prediction/selection bounds"
    )
    verify.add_argument("--config", required=True, help="SimConfig JSON path")
    verify.add_argument("--replications", type=int, default=100)
    verify.add_argument("--out", "-o", required=True)
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--threads", type=int, default=1)
    verify.add_argument("--safety", type=float, default=1.1)
    verify.add_argument("--phi-size", type=int, default=None)
    verify.add_argument(
        "--timing", action="store_true",
        help="record per-replication wall clock (breaks byte determinism)",
    )
    verify.set_defaults(func=cmd_verify)

    rates = sub.add_parser("rates", help="error-rate sweep over sample sizes")
    rates.add_argument("--config", required=True, help="SimConfig JSON path")
    rates.add_argument("--n-grid", required=True, help="comma list, e.g. 200,400,800,1600")
    rates.add_argument("--replications", type=int, default=100)
    rates.add_argument("--out", "-o", required=True, help="output CSV path")
    rates.add_argument("--seed", type=int, default=None)
    rates.add_argument("--threads", type=int, default=1)
    rates.add_argument("--safety", type=float, default=1.1)
    rates.add_argument("--draws", type=int, default=500)
    rates.set_defaults(func=cmd_rates)

    eig = sub.add_parser("sparse-eig", help="minimum sparse eigenvalue of the Gram matrix")
    eig.add_argument("--input", "-i", required=True)
    eig.add_argument("--s", type=int, required=True)
    eig.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    eig.add_argument("--draws", type=int, default=1000)
    eig.add_argument("--seed", type=int, default=0)
    eig.add_argument("--out", "-o", required=True)
    eig.set_defaults(func=cmd_sparse_eig)

    compare = sub.add_parser("compare", help="greedy vs exhaustive best subset")
    compare.add_argument("--input", "-i", required=True)
    compare.add_argument("--threshold", "-t", type=float, required=True)
    compare.add_argument("--k", type=int, default=None)
    compare.add_argument("--out", "-o", required=True)
    compare.set_defaults(func=cmd_compare)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ZeroVarianceColumn as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (FwdregError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
