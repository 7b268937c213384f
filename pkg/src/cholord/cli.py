"""Command-line surface.

Exit codes: 0 success, 2 invalid configuration (bad flags or values),
3 unusable input data, 4 numerical failure. Every subcommand is
deterministic given identical flags and ``--seed``; primary output files are
byte-identical across reruns (the one exception is the wall-clock diagnostics
file written by ``bench``, whose deterministic companion is ``bench.csv``).
"""

from __future__ import annotations

import functools
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import fileio
from .bivariate import decide_bivariate
from .cscs import CscsConfig, EdgeSet, support_diagnostics
from .errors import CholordError, InvalidRange, NumericalError, TooFewRows
from .linalg import sample_covariance, validate_covariance
from .major import majorization_table
from .metrics import compare_graphs
from .ordering import (
    benchmark_order,
    debiased_cholesky,
    greedy_order_with_stats,
    loglog_slope,
)
from .pipeline import fit_edges, rolling_windows, structure_recovery_replicate
from .sem import make_scenario

EXIT_DATA = 3
EXIT_NUMERIC = 4


def _cli_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except NumericalError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except (CholordError, OSError) as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)

    return wrapper


class _Ctx:
    def __init__(self, seed: int, out_dir: Path, quiet: bool):
        self.seed = seed
        self.out_dir = out_dir
        self.quiet = quiet

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def say(self, msg: str) -> None:
        if not self.quiet:
            click.echo(msg)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="Base RNG seed.")
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="Directory for output files.",
)
@click.option("--quiet", is_flag=True, help="Suppress progress output.")
@click.pass_context
def cli(ctx, seed, out_dir, quiet):
    """Topological-ordering recovery and sparse DAG estimation from covariances."""
    ctx.obj = _Ctx(seed, out_dir, quiet)


def _positive(value, name):
    if value <= 0:
        raise click.BadParameter(f"{name} must be positive, got {value}")
    return value


@cli.command()
@click.option("--case", type=click.IntRange(1, 3), required=True,
              help="Noise scenario: 1 equal Gaussian (0.7), 2 Gaussian in [0.7, 1.7], 3 Gaussian mixture.")
@click.option("--p", "p", type=int, required=True, help="Number of variables.")
@click.option("--n", "n", type=int, required=True, help="Number of samples.")
@click.option("--expected-degree", type=float, default=2.0, show_default=True)
@click.option("--weight-lo", type=float, default=0.3, show_default=True)
@click.option("--weight-hi", type=float, default=1.0, show_default=True)
@click.pass_obj
@_cli_errors
def simulate(obj, case, p, n, expected_degree, weight_lo, weight_hi):
    """Write a simulated dataset (data.csv) and its generating DAG (dag.json)."""
    _positive(p, "--p")
    _positive(n, "--n")
    if not 0 < weight_lo < weight_hi:
        raise click.BadParameter("--weight-lo/--weight-hi must satisfy 0 < lo < hi")
    data, dag = make_scenario(case, p, n, expected_degree, (weight_lo, weight_hi), obj.seed)
    cfg = {
        "seed": obj.seed, "case": case, "p": p, "n": n,
        "expected_degree": expected_degree, "weight_lo": weight_lo, "weight_hi": weight_hi,
    }
    data_path = obj.path("data.csv")
    fileio.write_matrix_csv(data_path, data.values, names=[f"x{i}" for i in range(p)])
    fileio.write_sidecar(data_path, "simulate", cfg)
    dag_path = obj.path("dag.json")
    fileio.write_dag_json(dag_path, dag)
    fileio.write_sidecar(dag_path, "simulate", cfg)
    obj.say(f"wrote {data_path} ({n} x {p}) and {dag_path} ({len(dag.edges)} edges)")


def _load_covariance(data, covariance, debias, omega):
    if (data is None) == (covariance is None):
        raise click.UsageError("provide exactly one of --data or --covariance")
    if covariance is not None:
        S, _ = fileio.read_matrix_csv(covariance)
        return validate_covariance(S), S.shape[0], None
    X, _ = fileio.read_matrix_csv(data)
    if X.shape[0] < 2:
        raise TooFewRows("need at least 2 data rows to estimate a covariance")
    if debias:
        L = debiased_cholesky(X, omega=omega)
        return L @ L.T, X.shape[1], X
    return sample_covariance(X), X.shape[1], X


@cli.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--covariance", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Precomputed covariance CSV (bypasses the data path, e.g. for n < p workflows).")
@click.option("--first", type=int, default=0, show_default=True, help="Starting variable.")
@click.option("--first-scan", is_flag=True, help="Try every starting variable, keep the best.")
@click.option("--debias", is_flag=True, help="Rebuild the covariance from the debiased Cholesky factor.")
@click.option("--omega", type=click.Choice(["unbiased", "literal"]), default="unbiased",
              show_default=True, help="Debiasing convention used with --debias.")
@click.option("--engine", type=click.Choice(["auto", "numpy", "numba"]), default="auto",
              show_default=True)
@click.pass_obj
@_cli_errors
def order(obj, data, covariance, first, first_scan, debias, omega, engine):
    """Estimate a topological ordering; write ordering.json.

    The sample covariance uses the 1/n normalization (matching the debiasing
    constants), with mean-centered columns.
    """
    S, p, _ = _load_covariance(data, covariance, debias, omega)
    if not 0 <= first < p:
        raise click.BadParameter(f"--first must lie in [0, {p - 1}]")
    ordering, stats = greedy_order_with_stats(S, first=first, scan_first=first_scan, engine=engine)
    out = obj.path("ordering.json")
    fileio.write_ordering_json(out, ordering, stats.f_value, stats.diag)
    fileio.write_sidecar(out, "order", {
        "seed": obj.seed, "data": data, "covariance": covariance, "first": first,
        "first_scan": first_scan, "debias": debias, "omega": omega, "engine": stats.engine,
    })
    obj.say(f"wrote {out}: f = {stats.f_value:.6g}, prepends = {stats.prepends}")


@cli.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--ordering", "ordering_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help="ordering.json produced by the order command.")
@click.option("--lambda", "lam", type=float, default=None,
              help="Penalty; default is 2 sqrt(log p / n) unless --cv.")
@click.option("--cv", is_flag=True, help="Select the penalty by K-fold cross-validation.")
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--tau", type=str, default="auto", show_default=True,
              help="Threshold, a float or 'auto' (0.5 sqrt(log p / n)).")
@click.pass_obj
@_cli_errors
def fit(obj, data, ordering_path, lam, cv, folds, tau):
    """Sparse factor fit under a given ordering; write edges.csv and factor.csv."""
    X, _ = fileio.read_matrix_csv(data)
    ordering = fileio.read_ordering_json(ordering_path)
    if ordering.p != X.shape[1]:
        raise click.BadParameter("--ordering length does not match the data columns")
    if tau != "auto":
        try:
            tau = float(tau)
        except ValueError:
            raise click.BadParameter("--tau must be a float or 'auto'") from None
    try:
        cfg = CscsConfig(lam=0.0 if lam is None else lam, tau=tau, folds=folds)
    except InvalidRange as exc:
        raise click.BadParameter(str(exc)) from None
    edges, T, hp = fit_edges(X, ordering, lam=lam, tau=cfg.tau, cv=cv, folds=cfg.folds,
                             seed=obj.seed)
    cfg = {"seed": obj.seed, "data": data, "ordering": ordering_path,
           "lam": hp["lam"], "cv": cv, "folds": folds, "tau": hp["tau"]}
    edges_path = obj.path("edges.csv")
    fileio.write_edges_csv(edges_path, edges)
    fileio.write_sidecar(edges_path, "fit", cfg)
    factor_path = obj.path("factor.csv")
    fileio.write_matrix_csv(factor_path, T)
    fileio.write_sidecar(factor_path, "fit", cfg)
    diag = support_diagnostics(T, X.shape[0])
    obj.say(
        f"wrote {edges_path} ({len(edges.edges)} edges) and {factor_path}; "
        f"min |off-diag| = {diag['min_abs_offdiag']}, rate sqrt(s log p / n) = "
        f"{diag['rate_s_logp_n']:.4g}"
    )


@cli.command("check-major")
@click.option("--dag", "dag_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Graph JSON with p, order, edges, noise_vars.")
@click.option("--max-p", type=int, default=8, show_default=True,
              help="Refuse graphs larger than this (p! orderings are enumerated).")
@click.pass_obj
@_cli_errors
def check_major(obj, dag_path, max_p):
    """Check the weak-majorization ordering condition over all orderings.

    Writes major_table.csv with one row per non-identity ordering: the
    ordering, its sorted conditional-variance vector and the per-row verdict.
    """
    dag = fileio.read_dag_json(dag_path)
    rows = majorization_table(dag, max_p=max_p)
    table_path = obj.path("major_table.csv")
    with table_path.open("w", encoding="utf-8", newline="") as fh:
        cols = ",".join(f"y{k + 1}" for k in range(dag.p))
        fh.write(f"rho,{cols},majorized\n")
        for perm, y, ok in rows:
            rho = "-".join(str(i) for i in perm)
            ys = ",".join(fileio.fmt_float(v) for v in y)
            fh.write(f"{rho},{ys},{str(ok).lower()}\n")
    fileio.write_sidecar(table_path, "check-major", {"seed": obj.seed, "dag": dag_path, "max_p": max_p})
    violations = [perm for perm, _, ok in rows if not ok]
    if violations:
        witness = "-".join(str(i) for i in violations[0])
        click.echo(f"violated: witness ordering {witness} ({len(violations)} of {len(rows)} rows)")
    else:
        click.echo(f"holds: all {len(rows)} non-identity orderings majorize the noise variances")
    obj.say(f"wrote {table_path}")


@cli.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--mu", type=float, default=0.1, show_default=True,
              help="Relative-gap threshold below which the verdict is 'none'.")
@click.option("--regressor", type=click.Choice(["linear", "knn"]), default="linear",
              show_default=True)
@click.pass_obj
@_cli_errors
def bivariate(obj, data, mu, regressor):
    """Cause-effect-or-none decision for a two-column dataset."""
    if not 0 <= mu <= 1:
        raise click.BadParameter("--mu must lie in [0, 1]")
    X, _ = fileio.read_matrix_csv(data)
    decision = decide_bivariate(X, mu_threshold=mu, regressor=regressor)
    out = obj.path("bivariate.json")
    fileio.write_json(out, decision.to_json_dict())
    fileio.write_sidecar(out, "bivariate", {"seed": obj.seed, "data": data, "mu": mu,
                                            "regressor": regressor})
    click.echo(
        '{"verdict": "%s", "f_x": %s, "f_y": %s, "mu": %s}'
        % (decision.verdict, repr(decision.f_x), repr(decision.f_y), repr(decision.mu))
    )


@cli.command("eval")
@click.option("--edges", "edges_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Estimated edges CSV (files mode).")
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Ground-truth DAG JSON (files mode).")
@click.option("--ordering", "ordering_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Optional ordering.json; enables the ordering-validity field.")
@click.option("--sweep", is_flag=True, help="Replicate sweep mode: simulate/order/fit/evaluate.")
@click.option("--case", type=click.IntRange(1, 3), default=1, show_default=True)
@click.option("--p", "p", type=int, default=20, show_default=True)
@click.option("--n", "n", type=int, default=500, show_default=True)
@click.option("--reps", type=int, default=10, show_default=True)
@click.option("--expected-degree", type=float, default=2.0, show_default=True)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@click.pass_obj
@_cli_errors
def eval_cmd(obj, edges_path, truth_path, ordering_path, sweep, case, p, n, reps, expected_degree,
             lam, workers):
    """Structure-recovery metrics, from files or as a seeded replicate sweep.

    Files mode writes metrics.json; sweep mode writes sweep.csv with one row
    per replicate (for aggregate TPR/TDR/SHD curves).
    """
    if sweep:
        _positive(reps, "--reps")
        _positive(workers, "--workers")

        def one(i):
            r = structure_recovery_replicate(case, p, n, seed=obj.seed + i,
                                             expected_degree=expected_degree, lam=lam)
            return i, r.report

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = sorted(pool.map(one, range(reps)))
        else:
            results = [one(i) for i in range(reps)]
        out = obj.path("sweep.csv")
        with out.open("w", encoding="utf-8", newline="") as fh:
            fh.write("replicate,seed,tpr,tdr,shd,ordering_valid\n")
            for i, rep in results:
                fh.write(f"{i},{obj.seed + i},{fileio.fmt_float(rep.tpr)},"
                         f"{fileio.fmt_float(rep.tdr)},{rep.shd},"
                         f"{str(rep.ordering_valid).lower()}\n")
        fileio.write_sidecar(out, "eval", {"seed": obj.seed, "sweep": True, "case": case, "p": p,
                                           "n": n, "reps": reps,
                                           "expected_degree": expected_degree, "lam": lam,
                                           "workers": workers})
        obj.say(f"wrote {out} ({reps} replicates)")
        return
    if edges_path is None or truth_path is None:
        raise click.UsageError("files mode needs --edges and --truth (or use --sweep)")
    truth = fileio.read_dag_json(truth_path)
    raw_edges = fileio.read_edges_csv(edges_path)
    if ordering_path is not None:
        ordering = fileio.read_ordering_json(ordering_path)
        report = compare_graphs(EdgeSet(tuple(raw_edges), ordering), truth)
    else:
        report = compare_graphs([(u, v) for u, v, _ in raw_edges], truth)
    out = obj.path("metrics.json")
    fileio.write_json(out, report.to_json_dict())
    fileio.write_sidecar(out, "eval", {"seed": obj.seed, "edges": edges_path,
                                       "truth": truth_path, "ordering": ordering_path})
    click.echo(f"tpr = {report.tpr:.4g}, tdr = {report.tdr:.4g}, shd = {report.shd}")


@cli.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--window", type=int, required=True, help="Window length in rows.")
@click.option("--step", type=int, default=None, help="Step in rows [default: window].")
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--first-scan", is_flag=True)
@click.pass_obj
@_cli_errors
def rolling(obj, data, window, step, lam, first_scan):
    """Rolling-window ordering + fit; average degree per window."""
    _positive(window, "--window")
    step = window if step is None else step
    _positive(step, "--step")
    X, _ = fileio.read_matrix_csv(data)
    rows = rolling_windows(X, window, step, lam=lam, scan_first=first_scan)
    out = obj.path("rolling.csv")
    with out.open("w", encoding="utf-8", newline="") as fh:
        fh.write("window_start,avg_degree,avg_degree_scaled\n")
        for r in rows:
            fh.write(f"{r['window_start']},{fileio.fmt_float(r['avg_degree'])},"
                     f"{fileio.fmt_float(r['avg_degree_scaled'])}\n")
    fileio.write_sidecar(out, "rolling", {"seed": obj.seed, "data": data, "window": window,
                                          "step": step, "lam": lam, "first_scan": first_scan})
    obj.say(f"wrote {out} ({len(rows)} windows)")


@cli.command()
@click.option("--p-list", type=str, default="50,100,200,400", show_default=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--engine", type=click.Choice(["auto", "numpy", "numba"]), default="auto",
              show_default=True)
@click.pass_obj
@_cli_errors
def bench(obj, p_list, runs, engine):
    """Wall-time scaling of the greedy ordering on random SPD inputs.

    bench.csv holds the deterministic per-size facts (prepend counts, final
    norm); bench_times.csv holds the measured wall times, which naturally
    vary between runs. The fitted log-log slope is printed.
    """
    try:
        ps = [int(tok) for tok in p_list.split(",") if tok.strip()]
    except ValueError:
        raise click.BadParameter("--p-list must be a comma-separated list of integers") from None
    if not ps or any(q < 2 for q in ps):
        raise click.BadParameter("--p-list needs integers >= 2")
    _positive(runs, "--runs")
    results = benchmark_order(ps, runs=runs, seed=obj.seed, engine=engine)
    cfg = {"seed": obj.seed, "p_list": p_list, "runs": runs, "engine": results[0]["engine"]}
    out = obj.path("bench.csv")
    with out.open("w", encoding="utf-8", newline="") as fh:
        fh.write("p,prepends,f_value\n")
        for r in results:
            fh.write(f"{r['p']},{r['prepends']},{fileio.fmt_float(r['f_value'])}\n")
    fileio.write_sidecar(out, "bench", cfg)
    times_path = obj.path("bench_times.csv")
    with times_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("p,run,seconds\n")
        for r in results:
            for k, t in enumerate(r["times"]):
                fh.write(f"{r['p']},{k},{fileio.fmt_float(t)}\n")
    fileio.write_sidecar(times_path, "bench", cfg)
    for r in results:
        click.echo(f"p = {r['p']:>5}  median = {r['median_seconds']:.6f} s  "
                   f"prepends = {r['prepends']}")
    if len(results) >= 2:
        slope = loglog_slope([r["p"] for r in results], [r["median_seconds"] for r in results])
        click.echo(f"log-log slope = {slope:.3f}")
    obj.say(f"wrote {out} and {times_path}")


def main():
    cli(prog_name="cholord")


if __name__ == "__main__":
    main()
