"""Command line entry point: ``wsclust gen|run|sweep|plot``.

Failures print one JSON object ``{"error": ..., "type": ...}`` to stderr and
exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from ..datasets import HardInstanceSpec, SbmSpec, generate_hard_instance, generate_sbm
from ..errors import NoFeasibleRadius, WSClustError
from ..kcenter import KCENTER_ROW_FIELDS, KCenterWSParams, gonzalez_baseline, kcenter_row, kcenter_weak_strong
from ..kmeans import (KMEANS_ROW_FIELDS, KMeansWSParams, approx_ratio, kmeans_row,
                      kmeans_strong_baseline, kmeans_weak_strong, kmeans_weak_strong_solve)
from ..metric import Dataset, EuclideanMetric, load_labels, load_matrix, load_points_csv, write_matrix, write_points_csv
from ..oracles import CORRUPTION_MODES, WeakOracleConfig, make_oracles
from .config import ALGORITHMS, load_config
from .plot import emit_plot
from .records import read_records
from .sweep import run_sweep


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliUsage(message)


class _CliUsage(Exception):
    pass


def _fail(message: str, kind: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": message, "type": kind}) + "\n")
    return code


def load_metric(data: str, labels=None):
    lab = None if labels is None else load_labels(labels)
    if data.endswith(".csv"):
        ds = load_points_csv(data)
        if lab is not None:
            ds = Dataset(ds.points, lab)
        return EuclideanMetric(ds)
    return load_matrix(data, lab)


def _write_row(fields, row) -> None:
    w = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerow({k: ("true" if v is True else "false" if v is False else v) for k, v in row.items()})


def cmd_gen(args) -> int:
    if args.kind == "sbm":
        ds = generate_sbm(SbmSpec(args.n, args.k, dim=args.dim, mu_scale=args.scale, seed=args.seed))
        write_points_csv(args.output, ds)
    else:
        metric = generate_hard_instance(HardInstanceSpec(args.n, args.k, l=args.l, c=args.c, seed=args.seed))
        write_matrix(args.output, metric)
        if args.labels:
            Path(args.labels).write_text("\n".join(str(int(v)) for v in metric.labels) + "\n")
    return 0


def cmd_run(args) -> int:
    metric = load_metric(args.data, args.labels)
    corruption = args.corruption
    if corruption is None:
        corruption = "label-swap" if metric.labels is not None and metric.labels.max() > 0 else "uniform-range"
    config = WeakOracleConfig(args.delta, corruption, args.oracle_seed)
    oracles = make_oracles(metric, config, strong_cap=args.budget_cap)
    # the baseline gets its own ledger so the printed counts cover the algorithm only
    reference = make_oracles(metric, config)
    algo = args.algo
    if algo in ("kmeans-ws", "kmeans-strong", "kmeans-weak"):
        base = kmeans_strong_baseline(metric, reference.strong, args.k, seed=args.seed).cost
        if algo == "kmeans-ws":
            params = KMeansWSParams(args.k, epsilon=args.eps, c_iter=args.c_iter, c_ball=args.c_ball,
                                    t_override=args.t, seed=args.seed, strong_cap=args.budget_cap)
            if args.bicriteria:
                _, res = kmeans_weak_strong(metric, oracles.weak, oracles.strong, params)
            else:
                res, _ = kmeans_weak_strong_solve(metric, oracles.weak, oracles.strong, params)
        else:
            oracle = oracles.weak if algo == "kmeans-weak" else oracles.strong
            res = kmeans_strong_baseline(metric, oracle, args.k, seed=args.seed)
        row = kmeans_row(res, algo=algo, n=metric.n, k=args.k, delta=args.delta, eps=args.eps,
                         c_ball=args.c_ball, c_iter=args.c_iter, seed=args.seed,
                         approx_factor=approx_ratio(res.cost, base))
        _write_row(KMEANS_ROW_FIELDS, row)
        return 0

    base = gonzalez_baseline(metric, reference.strong, args.k, seed=args.seed).cost
    if algo == "kcenter-ws":
        params = KCenterWSParams(args.k, epsilon=args.eps, c_sample=args.c_sample, c_ball=args.c_ball,
                                 seed=args.seed, search_mode=args.search_mode)
        try:
            res = kcenter_weak_strong(metric, oracles.weak, oracles.strong, params)
        except NoFeasibleRadius as exc:
            status = exc.outcome.status if exc.outcome is not None else "no_feasible_radius"
            return _fail(f"no feasible radius ({status})", "NoFeasibleRadius", 3)
    else:
        oracle = oracles.weak if algo == "gonzalez-weak" else oracles.strong
        res = gonzalez_baseline(metric, oracle, args.k, seed=args.seed)
    row = kcenter_row(res, algo=algo, n=metric.n, k=args.k, delta=args.delta, eps=args.eps,
                      c_sample=args.c_sample, c_ball=args.c_ball, seed=args.seed,
                      search_mode=args.search_mode, approx_factor=approx_ratio(res.cost, base))
    _write_row(KCENTER_ROW_FIELDS, row)
    return 0


def cmd_sweep(args) -> int:
    spec = load_config(args.config)
    result = run_sweep(spec, workers=args.workers)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.config).with_suffix("")
    paths = result.write(out_dir)
    sys.stdout.write(result.summary_text())
    sys.stdout.write(f"records: {paths['records']}\nsummary: {paths['summary']}\nplot: {paths['plot']}\n")
    return 0


def cmd_plot(args) -> int:
    records = read_records(args.csv)
    emit_plot(records, args.output, x=args.x, y=args.y)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wsclust", description="Clustering with weak and strong distance oracles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("kind", choices=("sbm", "hard"))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scale", type=float, default=1e5, help="SBM mean scale")
    g.add_argument("--dim", type=int, default=None, help="SBM dimension (default k)")
    g.add_argument("--l", type=float, default=None, help="hard-instance inter-group distance")
    g.add_argument("--c", type=float, default=1.0, help="l = c (n - k) when --l is absent")
    g.add_argument("--labels", help="hard instance: also write labels here")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="one run, printed as a CSV row")
    r.add_argument("algo", choices=ALGORITHMS)
    r.add_argument("--data", required=True, help="points CSV or distance-matrix file")
    r.add_argument("--labels")
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--delta", type=float, default=0.0)
    r.add_argument("--eps", type=float, default=None)
    r.add_argument("--c-ball", type=float, default=0.05)
    r.add_argument("--c-iter", type=float, default=None)
    r.add_argument("--t", type=int, default=None, help="k-means oversampling rounds")
    r.add_argument("--c-sample", type=float, default=0.05)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--oracle-seed", type=int, default=0)
    r.add_argument("--corruption", choices=CORRUPTION_MODES, default=None)
    r.add_argument("--search-mode", choices=("binary", "linear"), default="binary")
    r.add_argument("--budget-cap", type=int, default=None)
    r.add_argument("--bicriteria", action="store_true", help="k-means: report the oversampled set")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a sweep from a key=value config")
    s.add_argument("config")
    s.add_argument("--out-dir")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="SVG from a records CSV")
    pl.add_argument("csv")
    pl.add_argument("-o", "--output", required=True)
    pl.add_argument("--x", default="strong_distinct")
    pl.add_argument("--y", default="true_cost")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "eps", "unset") is None:
            args.eps = 0.1 if args.algo.startswith(("kcenter", "gonzalez")) else 0.5
        return args.func(args)
    except _CliUsage as exc:
        return _fail(str(exc), "UsageError", 2)
    except WSClustError as exc:
        code = 2 if isinstance(exc, ValueError) else 1
        return _fail(str(exc), type(exc).__name__, code)
    except OSError as exc:
        return _fail(f"{exc.strerror}: {exc.filename}", type(exc).__name__, 1)


if __name__ == "__main__":
    raise SystemExit(main())
