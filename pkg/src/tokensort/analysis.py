"""Ordering-error analysis: ambiguity sets, soft permutation (P) matrices,
Gaussian swap probabilities, rank distributions, the tridiagonal neighbor-swap
approximation, and neighbor-distance error bounds.

Conventions: P is M x M with p[i][j] = probability that position i of the
produced sequence holds element j of the target order, so E[Y] = P @ Y*.
Rows are distributions over elements.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import SortedSequence, TokenSet
from .latentsort import LatentSortModel, decode_batch, encode_batch

ROW_SUM_TOL = 1e-9
DEFAULT_KEY_TOL = 1e-9


def validate_probability_matrix(p: np.ndarray, tol: float = ROW_SUM_TOL) -> None:
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"P must be square, got shape {p.shape}")
    if np.any(p < -tol) or np.any(p > 1 + tol):
        raise ValueError("P entries must lie in [0, 1]")
    rows = p.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > tol:
        raise ValueError(f"P rows must sum to 1 (max deviation {np.max(np.abs(rows - 1.0)):.3e})")


@dataclass(frozen=True)
class LatentGaussianProfile:
    """Per-position Gaussian model of the 1-D latents: means and variances."""

    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.means, dtype=np.float64)
        var = np.asarray(self.variances, dtype=np.float64)
        if mu.shape != var.shape or mu.ndim != 1:
            raise ValueError("means and variances must be 1-D arrays of equal length")
        if not np.all(np.isfinite(mu)):
            raise ValueError("means must be finite")
        if np.any(var < 0):
            raise ValueError("variances must be non-negative")
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)

    @property
    def size(self) -> int:
        return self.means.shape[0]


def ambiguity_sets(x: TokenSet, keys, tol: float = DEFAULT_KEY_TOL) -> list[list[int]]:
    """Partition token indices by key equality within `tol`, closed transitively.

    Returns one sorted index group per partition class, ordered by smallest
    member. Exact duplicates in keys always land in the same group.
    """
    keys = np.asarray(keys, dtype=np.float64)
    m = x.size
    if keys.shape != (m,):
        raise ValueError(f"need {m} keys, got shape {keys.shape}")
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = np.argsort(keys, kind="stable")
    for a, b in zip(order[:-1], order[1:]):
        if abs(keys[b] - keys[a]) <= tol:
            parent[find(int(a))] = find(int(b))
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def group_of(groups: list[list[int]], i: int) -> list[int]:
    for g in groups:
        if i in g:
            return g
    raise ValueError(f"index {i} not covered by the grouping")


def _check_partition(groups: list[list[int]], m: int) -> None:
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(m)):
        raise ValueError("groups must partition 0..M-1")


def ambiguity_error(x_star: SortedSequence, groups: list[list[int]]) -> float:
    """Sum over positions of the squared distance between each token and the
    mean of its ambiguity group."""
    y = x_star.rows
    _check_partition(groups, y.shape[0])
    err = 0.0
    for g in groups:
        mean = y[g].mean(axis=0)
        err += float(np.sum((y[g] - mean) ** 2))
    return err


def uniform_ambiguity_P(groups: list[list[int]], m: int) -> np.ndarray:
    """Row-stochastic matrix spreading each position uniformly over its group."""
    _check_partition(groups, m)
    p = np.zeros((m, m))
    for g in groups:
        w = 1.0 / len(g)
        for i in g:
            p[i, g] = w
    return p


def sorting_error(p: np.ndarray, y_star: SortedSequence) -> float:
    """Squared Frobenius norm of P @ Y* - Y*."""
    p = np.asarray(p, dtype=np.float64)
    y = y_star.rows
    if p.shape != (y.shape[0], y.shape[0]):
        raise ValueError(f"P shape {p.shape} does not conform with Y* ({y.shape})")
    diff = p @ y - y
    return float(np.sum(diff * diff))


def _phi(z: float) -> float:
    """Standard normal CDF via the error function (abs error well under 1e-12)."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def swap_probability(mu_i: float, var_i: float, mu_j: float, var_j: float) -> float:
    """P(h_i < h_j) for independent Gaussian latents.

    Degenerate case (both variances zero): 1 / 0 / 0.5 by mean comparison.
    """
    s2 = var_i + var_j
    if s2 <= 0.0:
        if mu_i < mu_j:
            return 1.0
        if mu_i > mu_j:
            return 0.0
        return 0.5
    return _phi(-(mu_i - mu_j) / math.sqrt(s2))


def rank_probability_matrix(profile: LatentGaussianProfile, renormalize: bool = False,
                            max_size: int = 12) -> np.ndarray:
    """P[k][i] = probability that element i lands at rank k, treating pairwise
    comparisons of the Gaussian latents as independent.

    Exact for M = 2. For M >= 3 the independence assumption makes rows sum to
    slightly more or less than 1; they are left as computed unless
    `renormalize` is set, so the approximation stays visible.
    """
    m = profile.size
    if m > max_size:
        raise ValueError(f"combinatorial enumeration limited to M <= {max_size}, got {m}")
    mu, var = profile.means, profile.variances
    # c[i][j] = P(h_i > h_j)
    c = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                c[i, j] = swap_probability(mu[j], var[j], mu[i], var[i])
    p = np.zeros((m, m))
    for i in range(m):
        others = [j for j in range(m) if j != i]
        for k in range(m):
            total = 0.0
            for smaller in itertools.combinations(others, k):
                smaller_set = set(smaller)
                prod = 1.0
                for j in others:
                    # j below i contributes P(h_i > h_j); j above contributes the rest
                    prod *= c[i, j] if j in smaller_set else (1.0 - c[i, j])
                total += prod
            p[k, i] = total
    if renormalize:
        p /= p.sum(axis=1, keepdims=True)
    return p


def tridiagonal_P(profile: LatentGaussianProfile) -> np.ndarray:
    """Neighbor-swap-only approximation of P for an ascending latent profile.

    Only adjacent comparisons keep their Gaussian probabilities; farther pairs
    are rounded to certainty. Each element's column is an exact distribution
    over the three nearest positions; rows also sum to 1 up to products of
    neighbor swap probabilities (negligible for well-separated profiles).
    """
    mu, var = profile.means, profile.variances
    m = profile.size
    if np.any(np.diff(mu) < 0):
        raise ValueError("tridiagonal approximation requires non-decreasing latent means")
    p = np.zeros((m, m))
    for j in range(m):
        # x = P(element j sorts below its left neighbor), y = below its right
        x = swap_probability(mu[j], var[j], mu[j - 1], var[j - 1]) if j > 0 else 0.0
        y = swap_probability(mu[j], var[j], mu[j + 1], var[j + 1]) if j < m - 1 else 1.0
        p[j, j] = x * (1.0 - y) + y * (1.0 - x)
        if j > 0:
            p[j - 1, j] = x * y
        if j < m - 1:
            p[j + 1, j] = (1.0 - x) * (1.0 - y)
    return p


def _check_tridiagonal(p: np.ndarray) -> None:
    mask = np.ones_like(p, dtype=bool)
    m = p.shape[0]
    idx = np.arange(m)
    mask[idx, idx] = False
    mask[idx[:-1], idx[1:]] = False
    mask[idx[1:], idx[:-1]] = False
    if np.any(p[mask] != 0.0):
        raise ValueError("P must be tridiagonal")


def neighbor_error_bound(y_star: SortedSequence, p: np.ndarray) -> tuple[float, float]:
    """Ordering error of a tridiagonal P in neighbor-difference form.

    exact: sum_i || p_{i,i-1} (x*_{i-1} - x*_i) + p_{i,i+1} (x*_{i+1} - x*_i) ||^2
    upper: the triangle-inequality bound sum_i (||.|| + ||.||)^2, always >= exact.
    Boundary rows contribute their single existing neighbor term.
    """
    p = np.asarray(p, dtype=np.float64)
    y = y_star.rows
    if p.shape != (y.shape[0], y.shape[0]):
        raise ValueError("shape mismatch")
    _check_tridiagonal(p)
    m = y.shape[0]
    exact = upper = 0.0
    for i in range(m):
        left = p[i, i - 1] * (y[i - 1] - y[i]) if i > 0 else np.zeros(y.shape[1])
        right = p[i, i + 1] * (y[i + 1] - y[i]) if i < m - 1 else np.zeros(y.shape[1])
        exact += float(np.sum((left + right) ** 2))
        upper += (float(np.linalg.norm(left)) + float(np.linalg.norm(right))) ** 2
    return exact, upper


def empirical_constants(m: LatentSortModel, data: TokenSet, samples: int = 1000,
                        seed: int = 0) -> dict[str, float]:
    """Sampled estimates of the encoder/decoder difference-quotient maxima and
    the reconstruction-error ceiling.

    K_e: max |dh| / ||dx|| over random token pairs;
    K_d: max ||d x_hat|| / |dh| over the same pairs' latents;
    B:   max ||x - decode(encode(x))|| over all tokens.
    """
    rng = np.random.default_rng(seed)
    x = data.values
    h = encode_batch(m, x)
    x_hat = decode_batch(m, h)
    b_hat = float(np.max(np.linalg.norm(x - x_hat, axis=1)))

    n = x.shape[0]
    i = rng.integers(0, n, size=samples)
    j = rng.integers(0, n, size=samples)
    keep = i != j
    i, j = i[keep], j[keep]
    dx = np.linalg.norm(x[i] - x[j], axis=1)
    dh = np.abs(h[i] - h[j])
    dxh = np.linalg.norm(x_hat[i] - x_hat[j], axis=1)
    nz = dx > 0
    k_e = float(np.max(dh[nz] / dx[nz])) if np.any(nz) else 0.0
    nzh = dh > 0
    k_d = float(np.max(dxh[nzh] / dh[nzh])) if np.any(nzh) else 0.0
    return {"K_e": k_e, "K_d": k_d, "B": b_hat}
