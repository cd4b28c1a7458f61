"""Synthetic data: planar graphs via Delaunay triangulation with collapse
post-processing, and uniform random token sets."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Graph, TokenSet

PREDICATE_TOL = 1e-12


@dataclass(frozen=True)
class PlanarGenConfig:
    n_init: int = 15
    collapse_distance: float = 0.1
    min_edge_angle_degrees: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.n_init < 3:
            raise ValueError("n_init must be >= 3")
        if not 0.0 < self.collapse_distance < 1.0:
            raise ValueError("collapse_distance must be in (0, 1)")
        if not 0.0 < self.min_edge_angle_degrees < 180.0:
            raise ValueError("min_edge_angle_degrees must be in (0, 180)")


class DegenerateInputError(ValueError):
    pass


def _circumcircle(a, b, c):
    """Center and squared radius of the circle through a, b, c.

    Raises on (near-)collinear triples.
    """
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if abs(d) < PREDICATE_TOL:
        raise DegenerateInputError("collinear triangle")
    a2 = a[0] * a[0] + a[1] * a[1]
    b2 = b[0] * b[0] + b[1] * b[1]
    c2 = c[0] * c[0] + c[1] * c[1]
    ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d
    uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d
    r2 = (a[0] - ux) ** 2 + (a[1] - uy) ** 2
    return (ux, uy), r2


def in_circumcircle(tri_pts, p, tol: float = PREDICATE_TOL) -> bool:
    """True if p lies strictly inside the circumcircle of the triangle."""
    (ux, uy), r2 = _circumcircle(*tri_pts)
    d2 = (p[0] - ux) ** 2 + (p[1] - uy) ** 2
    return d2 < r2 - tol


def delaunay(points) -> list[tuple[int, int, int]]:
    """Bowyer-Watson incremental Delaunay triangulation in 2-D.

    Returns triangles as sorted index triples into the input points.
    Raises on fewer than 3 distinct points or all-collinear input; exact
    duplicates are dropped with a warning (indices refer to the originals).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    keep: list[int] = []
    seen: set[bytes] = set()
    for i, p in enumerate(pts):
        key = p.tobytes()
        if key in seen:
            warnings.warn("duplicate points dropped before triangulation", stacklevel=2)
            continue
        seen.add(key)
        keep.append(i)
    if len(keep) < 3:
        raise DegenerateInputError("need at least 3 distinct points")

    # super-triangle comfortably enclosing everything
    lo = pts[keep].min(axis=0)
    hi = pts[keep].max(axis=0)
    span = max(float((hi - lo).max()), 1.0)
    cx, cy = (lo + hi) / 2.0
    big = 20.0 * span
    s0 = (cx - big, cy - big)
    s1 = (cx + big, cy - big)
    s2 = (cx, cy + big)
    coords: dict[int, tuple[float, float]] = {-1: s0, -2: s1, -3: s2}
    for i in keep:
        coords[i] = (float(pts[i, 0]), float(pts[i, 1]))

    tris: list[tuple[int, int, int]] = [(-3, -2, -1)]
    for i in keep:
        p = coords[i]
        bad = []
        for t in tris:
            try:
                if in_circumcircle([coords[v] for v in t], p, tol=-PREDICATE_TOL):
                    bad.append(t)
            except DegenerateInputError:
                bad.append(t)
        boundary: dict[tuple[int, int], int] = {}
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
                boundary[e] = boundary.get(e, 0) + 1
        tris = [t for t in tris if t not in set(bad)]
        for e, count in boundary.items():
            if count == 1:
                tris.append(tuple(sorted((e[0], e[1], i))))

    result = [t for t in tris if all(v >= 0 for v in t)]
    if not result:
        raise DegenerateInputError("all points collinear")
    return sorted(result)


def _merge_close_nodes(pts: np.ndarray, min_dist: float):
    """Union-find merge of nodes closer than min_dist, iterated because the
    centroid replacement can create new close pairs. Returns (new_points,
    mapping old index -> new index)."""
    mapping = np.arange(len(pts))
    while True:
        n = len(pts)
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        merged_any = False
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(pts[i] - pts[j]) < min_dist:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)
                        merged_any = True
        if not merged_any:
            return pts, mapping
        roots = sorted({find(i) for i in range(n)})
        index_of = {r: k for k, r in enumerate(roots)}
        new_pts = np.empty((len(roots), 2))
        for r in roots:
            members = [i for i in range(n) if find(i) == r]
            new_pts[index_of[r]] = pts[members].mean(axis=0)
        step = np.array([index_of[find(i)] for i in range(n)])
        mapping = step[mapping]
        pts = new_pts


def _collapse_narrow_angles(pts: np.ndarray, edges: set[tuple[int, int]], min_angle_rad: float):
    """Remove the longer edge of any incident pair meeting at an angle below
    the threshold; repeat until no pair offends."""
    def length(e):
        return float(np.linalg.norm(pts[e[0]] - pts[e[1]]))

    changed = True
    while changed:
        changed = False
        for node in range(len(pts)):
            incident = sorted(e for e in edges if node in e)
            worst = None
            for a in range(len(incident)):
                for b in range(a + 1, len(incident)):
                    e1, e2 = incident[a], incident[b]
                    u = pts[e1[0] + e1[1] - node] - pts[node]
                    v = pts[e2[0] + e2[1] - node] - pts[node]
                    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
                    if nu == 0 or nv == 0:
                        continue
                    cos = float(np.dot(u, v) / (nu * nv))
                    angle = math.acos(min(1.0, max(-1.0, cos)))
                    if angle < min_angle_rad:
                        loser = e1 if length(e1) >= length(e2) else e2
                        if worst is None or length(loser) > length(worst):
                            worst = loser
            if worst is not None:
                edges.discard(worst)
                changed = True
    return edges


def generate_planar_graph(cfg: PlanarGenConfig) -> Graph:
    """Random planar graph: uniform points, Delaunay edges, then merge nodes
    closer than cfg.collapse_distance (cluster centroid replaces the cluster)
    and remove the longer edge of any incident pair at an angle below
    cfg.min_edge_angle_degrees, to a fixpoint. Self-loops and duplicate edges
    are dropped. Retries with derived seeds if no edges survive."""
    last_err = "no attempts made"
    for attempt in range(10):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, attempt]))
        pts = rng.uniform(0.0, 1.0, size=(cfg.n_init, 2))
        try:
            tris = delaunay(pts)
        except DegenerateInputError as e:
            last_err = str(e)
            continue
        merged, mapping = _merge_close_nodes(pts, cfg.collapse_distance)
        edges: set[tuple[int, int]] = set()
        for t in tris:
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
                u, v = int(mapping[a]), int(mapping[b])
                if u != v:
                    edges.add((min(u, v), max(u, v)))
        edges = _collapse_narrow_angles(
            merged, edges, math.radians(cfg.min_edge_angle_degrees)
        )
        if edges:
            return Graph(merged, tuple(sorted(edges)))
        last_err = "all edges collapsed away"
    raise RuntimeError(f"planar generation failed after 10 attempts: {last_err}")


def generate_uniform_sets(m: int, n: int, count: int, seed: int = 0) -> list[TokenSet]:
    """count token sets of m tokens drawn uniformly from [0,1]^n."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    return [TokenSet(rng.uniform(0.0, 1.0, size=(m, n))) for _ in range(count)]
