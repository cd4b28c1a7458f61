"""Open-path quality benchmark for learned orderings.

For small point sets every open path can be enumerated (M!/2 after collapsing
reversals), so the quality of an ordering is the exact fraction of paths that
are strictly longer. A random ordering scores ~0.5 in expectation; perfect
length-sorting scores close to 1.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import TokenSet
from .latentsort import TrainConfig, latent_sort, train

MAX_ENUM_POINTS = 10  # 10!/2 = 1.8M paths, still fine; beyond that refuse


def path_length(points: np.ndarray, order: np.ndarray | list[int] | None = None) -> float:
    """Total Euclidean length of the open path visiting points in order."""
    pts = points if order is None else points[np.asarray(order)]
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def percentile_longer(points: np.ndarray, order: np.ndarray | list[int]) -> float:
    """Fraction of all distinct open paths strictly longer than the given one.

    Paths and their reversals have equal length, so enumeration fixes
    perm[0] < perm[-1], covering each undirected path exactly once.
    """
    m = len(points)
    if m > MAX_ENUM_POINTS:
        raise ValueError(f"refusing to enumerate paths for {m} > {MAX_ENUM_POINTS} points")
    if sorted(order) != list(range(m)):
        raise ValueError("order must be a permutation of range(len(points))")
    ref = path_length(points, order)
    longer = 0
    total = 0
    for perm in itertools.permutations(range(m)):
        if perm[0] > perm[-1]:
            continue
        total += 1
        if path_length(points, perm) > ref:
            longer += 1
    return longer / total


@dataclass
class BenchConfig:
    set_size: int = 8
    n_runs: int = 10
    n_train_sets: int = 2000
    use_lgp: bool = True
    seed: int = 0
    train: TrainConfig = field(default_factory=lambda: TrainConfig(epochs=60, lgp_coefficient=0.01))


def _uniform_sets(n_sets: int, set_size: int, rng: np.random.Generator) -> list[TokenSet]:
    return [TokenSet(rng.uniform(0.0, 1.0, size=(set_size, 2))) for _ in range(n_sets)]


def run_tsp_benchmark(cfg: BenchConfig) -> dict:
    """Benchmark latent-sort path quality over cfg.n_runs independent runs.

    Each run draws a fresh evaluation point set and a fresh training corpus
    of uniform 2-D sets, trains a model from scratch, orders the evaluation
    points with it, and records the fraction of enumerated open paths that
    are strictly longer. Reports the mean and sample standard deviation of
    the per-run percentiles.
    """
    if not 2 <= cfg.set_size <= MAX_ENUM_POINTS:
        raise ValueError(f"set_size must be in [2, {MAX_ENUM_POINTS}]")
    if cfg.n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    train_cfg = cfg.train
    if not cfg.use_lgp:
        train_cfg = replace(train_cfg, lgp_coefficient=0.0)

    t0 = time.perf_counter()
    percentiles = np.empty(cfg.n_runs)
    for run in range(cfg.n_runs):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7, run]))
        eval_set = TokenSet(rng.uniform(0.0, 1.0, size=(cfg.set_size, 2)))
        train_sets = _uniform_sets(cfg.n_train_sets, cfg.set_size, rng)
        run_cfg = replace(train_cfg, seed=train_cfg.seed + run)
        model, _ = train(train_sets, run_cfg)
        seq = latent_sort(model, eval_set)
        # recover the permutation the sort applied
        order = _order_of(eval_set.values, seq.rows)
        percentiles[run] = percentile_longer(eval_set.values, order)

    return {
        "set_size": cfg.set_size,
        "n_runs": cfg.n_runs,
        "use_lgp": cfg.use_lgp,
        "seed": cfg.seed,
        "mean_percentile": float(percentiles.mean()),
        "std_percentile": float(percentiles.std(ddof=1)) if cfg.n_runs > 1 else 0.0,
        "percentiles": percentiles.tolist(),
        "total_seconds": time.perf_counter() - t0,
    }


def _order_of(original: np.ndarray, arranged: np.ndarray) -> np.ndarray:
    """Permutation p with original[p] == arranged, resolving duplicates
    left to right."""
    m = len(original)
    used = np.zeros(m, dtype=bool)
    order = np.empty(m, dtype=int)
    for i in range(m):
        hit = np.where(~used & np.all(original == arranged[i], axis=1))[0]
        if len(hit) == 0:
            raise ValueError("arranged rows are not a permutation of the originals")
        used[hit[0]] = True
        order[i] = hit[0]
    return order
