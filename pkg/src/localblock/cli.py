"""Command-line entry point: ``localblock {stats,predict,eval,correlate}``.

Exit status is 0 on success, 1 when some experiment cells failed, and 2 for
usage, input or configuration errors.  Whenever ``--output`` names a file a
run manifest is written next to it as ``<output>.manifest.json``.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .analysis import SUMMARY_HEADER, PairFilter, correlate
from .evaluation import ConfigError, ExperimentConfig, run_experiment, write_results_csv
from .graph import DomainError, EdgeListOptions, GraphParseError, file_checksum, read_edge_list
from .metrics import STATS_HEADER, topology_stats
from .predictors import CapacityError, PredictorId, score_all_pairs

log = logging.getLogger("localblock")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
PREDICTOR_CHOICES = [p.value for p in PredictorId]


class UsageError(Exception):
    pass


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load_graph(path: str, delimiter: str | None):
    try:
        return read_edge_list(path, EdgeListOptions(delimiter=delimiter))
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path!r}: {exc.strerror or exc}") from None
    except GraphParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write_manifest(args, output: str | None, extra_outputs: list[str], config: dict, dataset: str,
                    base_seed: int | None, started: str) -> None:
    if output is None or output == "-":
        return
    manifest = {
        "tool": "localblock",
        "version": __version__,
        "subcommand": args.command,
        "config": config,
        "dataset": {"path": str(dataset), "sha256": file_checksum(dataset)},
        "base_seed": base_seed,
        "started": started,
        "finished": _now(),
        "outputs": [str(p) for p in [output, *extra_outputs]],
    }
    with open(f"{output}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _num(x):
    return repr(float(x)) if isinstance(x, float) else x


def cmd_stats(args) -> int:
    started = _now()
    g = _load_graph(args.graph, args.delimiter)
    try:
        st = topology_stats(g)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    name = args.name or Path(args.graph).stem
    row = st.as_row(name)
    with _open_out(args.output) as fh:
        if args.format == "json":
            json.dump(dict(zip(STATS_HEADER, row)), fh)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(STATS_HEADER)
            w.writerow([_num(x) for x in row])
    _write_manifest(args, args.output, [], {"graph": args.graph, "name": name}, args.graph, None, started)
    return EXIT_OK


def _read_pairs(path: str, g, delimiter: str | None) -> list[tuple[int, int]]:
    index = {g.label(u): u for u in range(g.num_nodes)}
    pairs = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line[0] in "#%":
                    continue
                tokens = line.split(delimiter) if delimiter else line.split()
                if len(tokens) < 2:
                    raise UsageError(f"{path}:{lineno}: expected two node labels")
                a, b = tokens[0].strip(), tokens[1].strip()
                for t in (a, b):
                    if t not in index:
                        raise UsageError(f"{path}:{lineno}: node {t!r} is not in the graph")
                if a == b:
                    raise UsageError(f"{path}:{lineno}: pair of identical nodes {a!r}")
                pairs.append((index[a], index[b]))
    except OSError as exc:
        raise UsageError(f"cannot read pairs file {path!r}: {exc.strerror or exc}") from None
    return pairs


def cmd_predict(args) -> int:
    started = _now()
    g = _load_graph(args.graph, args.delimiter)
    p = PredictorId.parse(args.predictor)
    if args.pairs:
        pairs = _read_pairs(args.pairs, g, args.delimiter)
        table = score_all_pairs(g, p, eager=False)
        rows = [(r, s, table.score(r, s)) for r, s in pairs]
    else:
        if args.top < 1:
            raise UsageError("--top must be >= 1")
        try:
            table = score_all_pairs(g, p, eager=True, cap=args.eager_cap)
        except CapacityError as exc:
            raise UsageError(str(exc)) from None
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        rows = table.top(args.top, exclude_edges=not args.include_edges)
    with _open_out(args.output) as fh:
        if args.format == "json":
            json.dump([{"u": g.label(r), "v": g.label(s), "score": v} for r, s, v in rows], fh)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "v", "score"])
            for r, s, v in rows:
                w.writerow([g.label(r), g.label(s), repr(float(v))])
    config = {"graph": args.graph, "predictor": p.value, "pairs": args.pairs, "top": args.top,
              "include_edges": args.include_edges}
    _write_manifest(args, args.output, [], config, args.graph, None, started)
    return EXIT_OK


def cmd_eval(args) -> int:
    started = _now()
    try:
        cfg = ExperimentConfig.from_file(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config!r}: {exc.strerror or exc}") from None
    except ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    g = _load_graph(cfg.dataset, None)
    progress = None
    if args.progress:
        def progress(done, total):
            print(f"\r{done}/{total} trials", end="" if done < total else "\n", file=sys.stderr)
    results = run_experiment(cfg, graph=g, workers=args.threads, progress=progress)
    name = args.name or Path(cfg.dataset).stem
    with _open_out(args.output) as fh:
        if args.format == "json":
            json.dump([
                {
                    "dataset": name, "predictor": r.predictor.value, "mode": r.mode, "fraction": r.fraction,
                    "trials": r.trials, "auc_mean": r.mean if r.ok else None,
                    "auc_std": r.std if r.ok else None, "method": r.method if r.ok else "failed",
                    "comparisons": r.comparisons_per_trial, "error": r.error,
                }
                for r in results
            ], fh)
            fh.write("\n")
        else:
            write_results_csv(results, name, fh)
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"cell {r.predictor.value}/{r.mode}/{r.fraction} failed: {r.error}", file=sys.stderr)
    _write_manifest(args, args.output, [], cfg.echo(), cfg.dataset, cfg.base_seed, started)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_correlate(args) -> int:
    started = _now()
    g = _load_graph(args.graph, args.delimiter)
    axes = PREDICTOR_CHOICES + ["distance"]
    for axis in (args.x, args.y):
        if axis not in axes:
            raise UsageError(f"unknown axis {axis!r}; expected one of {', '.join(axes)}")
    if args.sample:
        pf = PairFilter("sample", args.sample, args.seed, nonadjacent=args.nonadjacent)
    else:
        pf = PairFilter("nonadjacent" if args.nonadjacent else "all")
    try:
        rep = correlate(g, args.x, args.y, pf)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.points:
        with open(args.points, "w", encoding="utf-8", newline="") as fh:
            rep.write_points(fh, g)
        rep.points_path = args.points
    with _open_out(args.output) as fh:
        if args.format == "json":
            json.dump(dict(zip(SUMMARY_HEADER, [rep.x_label, rep.y_label, rep.n_points, rep.pearson,
                                                rep.spearman, rep.excluded_unreachable, rep.pair_filter]))
                      | {"points": rep.points_path}, fh)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            w.writerow(rep.summary_row())
    config = {"graph": args.graph, "x": args.x, "y": args.y, "sample": args.sample,
              "nonadjacent": args.nonadjacent, "points": args.points}
    _write_manifest(args, args.output, [args.points] if args.points else [], config, args.graph,
                    args.seed, started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localblock",
        description="Local Blocking link prediction: statistics, scoring, AUC experiments, correlations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, graph=True):
        if graph:
            p.add_argument("--graph", required=True, help="edge-list file")
            p.add_argument("--comma", dest="delimiter", action="store_const", const=",", default=None,
                           help="fields are comma separated (default: whitespace)")
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("stats", help="topology statistics of a graph")
    common(p)
    p.add_argument("--name", help="dataset name for the CSV row (default: file stem)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("predict", help="score node pairs with one predictor")
    common(p)
    p.add_argument("--predictor", required=True, type=str.lower, choices=PREDICTOR_CHOICES)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--pairs", help="file with one node-label pair per line")
    target.add_argument("--top", type=int, help="emit the K best-scoring non-adjacent pairs")
    p.add_argument("--include-edges", action="store_true", help="let --top also rank existing edges")
    p.add_argument("--eager-cap", type=int, default=5000, help="max nodes for all-pairs scoring")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="run an AUC experiment grid from a config file")
    common(p, graph=False)
    p.add_argument("--config", required=True, help="INI file with an [experiment] section")
    p.add_argument("--name", help="dataset name in the CSV (default: dataset file stem)")
    p.add_argument("--threads", type=int, default=1, help="worker processes (output is identical for any value)")
    p.add_argument("--progress", action="store_true", help="print trial progress to stderr")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("correlate", help="correlate two predictors, or a predictor with hop distance")
    common(p)
    p.add_argument("--x", required=True, type=str.lower, help="pa, cn, aa, ra, lb or distance")
    p.add_argument("--y", required=True, type=str.lower, help="pa, cn, aa, ra, lb or distance")
    p.add_argument("--sample", type=int, default=0, help="uniformly sample N distinct pairs (default: all)")
    p.add_argument("--seed", type=int, default=0, help="seed for --sample")
    p.add_argument("--nonadjacent", action="store_true", help="only pairs that are not edges")
    p.add_argument("--points", help="write one CSV row per pair to this file")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.print_usage(sys.stderr)
        print("localblock: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"localblock {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
