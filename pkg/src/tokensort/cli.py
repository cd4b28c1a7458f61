"""Command-line interface.

One binary, subcommands for each workflow: sorting token-set files, training
the latent-sort model, exporting key grids, ambiguity/error analysis, metric
computation, the path-quality benchmark, and planar graph generation.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .analysis import (
    ambiguity_error,
    ambiguity_sets,
    sorting_error,
    uniform_ambiguity_P,
    validate_probability_matrix,
)
from .core import (
    TokenSet,
    read_token_sets,
    write_graphs,
    write_sequences,
)
from .datagen import PlanarGenConfig, generate_planar_graph
from .latentsort import (
    TrainConfig,
    encode_batch,
    latent_sort,
    load_model,
    save_model,
    train,
)
from .metrics import ehd, emd, set_prf, size_diff
from .sorters import KEY_SCHEMES, SCHEME_NAMES
from .tspbench import BenchConfig, run_tsp_benchmark


class UsageError(Exception):
    pass


def _sort_fn(scheme: str, model_path: str | None):
    if scheme == "latent":
        if not model_path:
            raise UsageError("--model is required with --scheme latent")
        model = load_model(model_path)
        return lambda ts: latent_sort(model, ts)
    if scheme in KEY_SCHEMES:
        if model_path:
            raise UsageError("--model only applies to --scheme latent")
        return KEY_SCHEMES[scheme]
    raise UsageError(f"scheme {scheme!r} does not sort token sets; choose one of "
                     f"{sorted(KEY_SCHEMES) + ['latent']}")


def cmd_sort(args) -> int:
    fn = _sort_fn(args.scheme, args.model)
    sets = read_token_sets(args.infile)
    write_sequences(args.out, [fn(ts) for ts in sets])
    return 0


def cmd_train_latent(args) -> int:
    sets = read_token_sets(args.infile)
    cfg = TrainConfig(epochs=args.epochs, lgp_coefficient=args.lgp, seed=args.seed)
    model, history = train(sets, cfg)
    save_model(model, args.out)
    hist_path = args.out + ".history.csv"
    with open(hist_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "recon", "lgp", "lr"])
        for row in history:
            w.writerow([row["epoch"], repr(row["recon"]), repr(row["lgp"]), repr(row["lr"])])
    return 0


GRID_KEYS = {
    # raw scalar maps over R^2; the CLI min-max normalizes over the grid
    "mean-squared": lambda pts: np.mean(pts * pts, axis=1),
    "summation": lambda pts: pts.sum(axis=1),
}


def cmd_ambiguity_grid(args) -> int:
    if bool(args.model) == bool(args.scheme):
        raise UsageError("give exactly one of --model or --scheme")
    res = args.res
    axis = np.linspace(0.0, 1.0, res)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    if args.model:
        model = load_model(args.model)
        if model.token_dim != 2:
            raise UsageError("ambiguity-grid requires a 2-D token model")
        keys = encode_batch(model, pts)
    else:
        if args.scheme not in GRID_KEYS:
            raise UsageError(f"grid scheme must be one of {sorted(GRID_KEYS)}")
        keys = GRID_KEYS[args.scheme](pts)
    lo, hi = float(keys.min()), float(keys.max())
    norm = (keys - lo) / (hi - lo) if hi > lo else np.zeros_like(keys)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "key"])
        for p, k in zip(pts, norm):
            w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(k))])
    return 0


def cmd_analyze(args) -> int:
    fn = _sort_fn(args.scheme, args.model)
    report = []
    for idx, ts in enumerate(read_token_sets(args.infile)):
        seq = fn(ts)
        keys = seq.keys if seq.keys is not None else np.zeros(ts.size)
        groups = ambiguity_sets(TokenSet(seq.rows), keys)
        p = uniform_ambiguity_P(groups, ts.size)
        validate_probability_matrix(p)
        report.append({
            "index": idx,
            "set_size": ts.size,
            "ambiguity_sets": [sorted(g) for g in groups],
            "ambiguity_error": ambiguity_error(seq, groups),
            "sorting_error": sorting_error(p, seq),
        })
    with open(args.report, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_metrics(args) -> int:
    pred = read_token_sets(args.pred)
    gt = read_token_sets(args.gt)
    if len(pred) != len(gt):
        raise UsageError(f"pred has {len(pred)} sets, gt has {len(gt)}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "emd", "ehd", "precision", "recall", "f1", "size_diff"])
        for i, (a, b) in enumerate(zip(pred, gt)):
            prf = set_prf(a, b, match_tol=args.match_tol)
            w.writerow([
                i, repr(emd(a, b)), repr(ehd(a, b)),
                repr(prf["precision"]), repr(prf["recall"]), repr(prf["f1"]),
                size_diff(a, b),
            ])
    return 0


def cmd_tsp_bench(args) -> int:
    cfg = BenchConfig(set_size=args.n, n_runs=args.runs,
                      use_lgp=args.lgp == "on", seed=args.seed)
    if args.epochs is not None:
        cfg = replace(cfg, train=replace(cfg.train, epochs=args.epochs))
    if args.train_sets is not None:
        cfg = replace(cfg, n_train_sets=args.train_sets)
    result = run_tsp_benchmark(cfg)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "runs", "lgp", "mean", "std"])
        w.writerow([args.n, args.runs, args.lgp,
                    repr(result["mean_percentile"]), repr(result["std_percentile"])])
    return 0


def cmd_gen_planar(args) -> int:
    graphs = []
    for k in range(args.count):
        cfg = PlanarGenConfig(seed=args.seed * 1000 + k)
        graphs.append(generate_planar_graph(cfg))
    write_graphs(args.out, graphs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tokensort",
                                description="token ordering toolkit")
    p.add_argument("--version", action="version", version=f"tokensort {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sort", help="order token sets with a named scheme")
    s.add_argument("--scheme", required=True, choices=SCHEME_NAMES)
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--model")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_sort)

    s = sub.add_parser("train-latent", help="train the latent-sort autoencoder")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--epochs", type=int, default=200)
    s.add_argument("--lgp", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_train_latent)

    s = sub.add_parser("ambiguity-grid", help="export a key raster over [0,1]^2")
    s.add_argument("--model")
    s.add_argument("--scheme", choices=sorted(GRID_KEYS))
    s.add_argument("--res", type=int, default=64)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_ambiguity_grid)

    s = sub.add_parser("analyze", help="ambiguity sets and error report")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--scheme", required=True, choices=SCHEME_NAMES)
    s.add_argument("--model")
    s.add_argument("--report", required=True)
    s.set_defaults(fn=cmd_analyze)

    s = sub.add_parser("metrics", help="set metrics between two token-set files")
    s.add_argument("--pred", required=True)
    s.add_argument("--gt", required=True)
    s.add_argument("--match-tol", type=float, default=0.0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_metrics)

    s = sub.add_parser("tsp-bench", help="open-path quality benchmark")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--lgp", choices=["on", "off"], default="on")
    s.add_argument("--epochs", type=int, default=None)
    s.add_argument("--train-sets", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_tsp_bench)

    s = sub.add_parser("gen-planar", help="generate random planar graphs")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_gen_planar)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"tokensort: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as e:
        print(f"tokensort: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
