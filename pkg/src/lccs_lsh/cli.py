"""``lccs-lsh`` command line: build, query, truth and sweep."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from .bench.io import FormatError, load_fvecs, load_ivecs, write_ivecs
from .bench.metrics import ground_truth, recall_at_k
from .bench.sweep import best_by_recall_bin, dataset_from_grid, load_grid, parse_probes, sweep, write_csv
from .families import W_PRESETS
from .index import IndexConfig, build_index, load_index
from .multiprobe import MAX_GAP, mp_query

log = logging.getLogger("lccs_lsh")


def _width(text: str) -> float:
    """A positive float or one of the named presets."""
    if text in W_PRESETS:
        return W_PRESETS[text]
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or one of {sorted(W_PRESETS)}, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError("w must be positive")
    return value


def _meta_path(index_path: str) -> str:
    return index_path + ".json"


def cmd_build(args) -> int:
    X = load_fvecs(args.data).astype(np.float64)
    if args.m is None and args.alpha is None:
        args.m = 128
    cfg = IndexConfig(m=args.m, metric=args.metric, w=args.w, seed=args.seed,
                      alpha=args.alpha, R=args.R, c=args.c)
    t0 = time.perf_counter()
    index = build_index(X, cfg)
    elapsed = time.perf_counter() - t0
    index.save(args.out)
    # points are not stored in the index; remember where they came from
    with open(_meta_path(args.out), "w") as fh:
        json.dump({"data": os.path.abspath(args.data)}, fh)
    print(f"built {index!r} in {elapsed:.2f}s, {index.nbytes} bytes -> {args.out}")
    return 0


def _load_cli_index(args):
    data = args.data
    if data is None:
        try:
            with open(_meta_path(args.index)) as fh:
                data = json.load(fh)["data"]
        except (OSError, KeyError, ValueError):
            raise SystemExit(f"no --data given and no readable {_meta_path(args.index)}")
    return load_index(args.index, load_fvecs(data).astype(np.float64))


def cmd_query(args) -> int:
    index = _load_cli_index(args)
    Q = load_fvecs(args.queries).astype(np.float64)
    probes = parse_probes(args.probes, index.m)
    out = np.full((len(Q), args.k), -1, dtype=np.int64)
    times = []
    for r, q in enumerate(Q):
        t0 = time.perf_counter()
        if probes == 1:
            res = index.query(q, args.k, args.candidates)
        else:
            res = mp_query(index, q, args.k, args.candidates, probes, args.max_gap)
        times.append(time.perf_counter() - t0)
        out[r, : len(res.ids)] = res.ids
    if args.out:
        write_ivecs(args.out, out)
    msg = f"{len(Q)} queries, {probes} probe(s), mean {1e3 * np.mean(times):.3f} ms/query"
    if args.truth:
        truth = load_ivecs(args.truth)
        if truth.shape[0] != len(Q) or truth.shape[1] < args.k:
            raise SystemExit(f"truth file has shape {truth.shape}, need ({len(Q)}, >= {args.k})")
        recall = np.mean([recall_at_k(out[r][out[r] >= 0], truth[r, : args.k], args.k) for r in range(len(Q))])
        msg += f", recall@{args.k} {recall:.4f}"
    print(msg)
    return 0


def cmd_truth(args) -> int:
    X = load_fvecs(args.data)
    Q = load_fvecs(args.queries)
    gt = ground_truth(X, Q, args.k, metric=args.metric)
    write_ivecs(args.out, gt.ids)
    print(f"wrote {gt.ids.shape[0]} x {args.k} neighbor ids -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    grid = load_grid(args.config)
    ds = dataset_from_grid(grid)
    records = sweep(ds, grid)
    write_csv(args.out, records)
    failed = sum(r.error is not None for r in records)
    print(f"{len(records)} records ({failed} failed) -> {args.out}")
    if args.best:
        for r in best_by_recall_bin(records):
            print(f"{r.method:8s} recall {r.recall:.3f}  {r.qtime_ms:8.3f} ms  m={r.m} lambda={r.lam} probes={r.probes}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lccs-lsh", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="hash a dataset and build its index")
    b.add_argument("--data", required=True, help="points as fvecs")
    b.add_argument("--metric", choices=("euclidean", "angular"), default="euclidean")
    b.add_argument("--m", type=int, help="hash string length (default 128 unless --alpha)")
    b.add_argument("--w", type=_width, help=f"bucket width or preset {sorted(W_PRESETS)}")
    b.add_argument("--alpha", type=float, help="derive m = n^(alpha*rho); needs --R and --c")
    b.add_argument("--R", type=float, help="near radius used with --alpha")
    b.add_argument("--c", type=float, help="approximation ratio used with --alpha")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer k-NN queries from a saved index")
    q.add_argument("--index", required=True)
    q.add_argument("--data", help="points the index was built on (default: recorded at build time)")
    q.add_argument("--queries", required=True, help="queries as fvecs")
    q.add_argument("--k", type=int, default=10)
    q.add_argument("--candidates", type=int, default=100, help="lambda (per probe when --probes > 1)")
    q.add_argument("--probes", default="1", help="probe count, e.g. 1, 129 or 2m+1")
    q.add_argument("--max-gap", type=int, default=MAX_GAP)
    q.add_argument("--truth", help="ivecs ground truth for a recall report")
    q.add_argument("--out", help="ivecs of returned ids (-1 pads short answers)")
    q.set_defaults(func=cmd_query)

    t = sub.add_parser("truth", help="exact k nearest neighbors by exhaustive scan")
    t.add_argument("--data", required=True)
    t.add_argument("--queries", required=True)
    t.add_argument("--k", type=int, default=10)
    t.add_argument("--metric", choices=("euclidean", "angular"), default="euclidean")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_truth)

    s = sub.add_parser("sweep", help="run a parameter grid and write CSV")
    s.add_argument("--config", required=True, help="JSON grid file")
    s.add_argument("--out", required=True)
    s.add_argument("--best", action="store_true", help="print the fastest run per 5%% recall bin")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FormatError, ValueError, OSError) as err:
        print(f"lccs-lsh {args.command}: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
