"""Nets, covering numbers, Hausdorff measure and dimension estimates, and
Hausdorff / Gromov-Hausdorff distances."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .space import DiscreteSpace, ParameterError, Region
from .volumes import DomainError, omega

__all__ = [
    "CoveringProfile",
    "Correspondence",
    "GHBounds",
    "ApproximationVerdict",
    "maximal_separated_set",
    "covering_number",
    "hausdorff_measure_estimate",
    "dimension_estimate",
    "hausdorff_distance",
    "distortion",
    "gh_distance_small",
    "check_epsilon_approximation",
]


def maximal_separated_set(space: DiscreteSpace, eps: float, seed: int = 0) -> np.ndarray:
    """Greedy maximal eps-separated set over a seeded vertex order.

    Pairwise distances are >= eps and no vertex can be added, so every vertex
    lies within eps of the set.
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    order = np.random.default_rng(seed).permutation(space.n)
    gap = np.full(space.n, np.inf)
    chosen = []
    for v in order:
        if gap[v] >= eps:
            chosen.append(int(v))
            gap = np.minimum(gap, space.row(int(v)))
    return np.array(sorted(chosen), dtype=np.int64)


def _sweep_cover(space, delta):
    """Greedy cover by closed delta-balls, sweeping away from an extreme vertex.

    The first uncovered vertex u (in sweep order) is covered by the ball
    around the vertex of B̄_delta(u) farthest along the sweep.
    """
    start = int(np.argmax(space.row(0)))
    ds = space.row(start)
    order = np.argsort(ds, kind="stable")
    covered = np.zeros(space.n, dtype=bool)
    centers = []
    pos = 0

    def ball(v):
        d = dijkstra(space.adjacency, directed=False, indices=v, limit=delta * (1 + 1e-12))
        return np.flatnonzero(d <= delta)

    while True:
        while pos < space.n and covered[order[pos]]:
            pos += 1
        if pos == space.n:
            break
        near = ball(int(order[pos]))
        c = int(near[np.argmax(ds[near])])
        centers.append(c)
        covered[ball(c)] = True
    return centers


def covering_number(space: DiscreteSpace, delta: float) -> int:
    """Size of a greedy cover by closed delta-balls (an upper bound on N(delta))."""
    if delta <= 0:
        raise ParameterError("delta must be positive")
    return len(_sweep_cover(space, delta))


def hausdorff_measure_estimate(space: DiscreteSpace, s: float, delta: float) -> float:
    """omega_s * sum (diam U_i / 2)^s over a partition into sets of diameter <= delta.

    The cells are the Voronoi cells of a greedy cover by closed delta/2-balls,
    so each has diameter at most delta.
    """
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    centers = _sweep_cover(space, delta / 2)
    D = space.rows(centers)
    owner = np.argmin(D, axis=0)
    total = 0.0
    for j in range(len(centers)):
        cell = np.flatnonzero(owner == j)
        if cell.size == 0:
            continue
        diam = float(space.rows(cell)[:, cell].max()) if cell.size > 1 else 0.0
        total += (diam / 2) ** s if s > 0 else 1.0
    return omega(s) * total


@dataclass
class CoveringProfile:
    scales: tuple
    covering: tuple
    separated: tuple
    slope: float
    residual: float

    def __float__(self):
        return self.slope


def dimension_estimate(space: DiscreteSpace, scale_grid=None, seed: int = 0) -> CoveringProfile:
    """Slope of log N(delta) against log(1/(delta + h/2)).

    The vertices are an h/2-net of the modelled continuum, so a cover by
    delta-balls of the vertices covers the continuum at radius delta + h/2;
    fitting against that radius removes the mesh bias at small scales.
    Greedy counts are replaced by their running minimum from small to large
    scales (a cover at one scale is a cover at every larger one).
    """
    if scale_grid is None:
        top = space.eccentricity(int(np.argmax(space.row(0)))) / 8
        scale_grid = np.geomspace(3 * space.mesh, top, 6) if top > 3 * space.mesh else []
    scales = sorted(float(d) for d in scale_grid if d > 2 * space.mesh)
    if len(scales) < 3 or scales[-1] / scales[0] < 1.5:
        raise ParameterError("degenerate scale grid: need >= 3 scales above 2h")
    raw = [covering_number(space, d) for d in scales]
    env = list(np.minimum.accumulate(raw))
    sep = [len(maximal_separated_set(space, 2 * d + space.mesh, seed)) for d in scales]
    x = np.log(1 / (np.array(scales) + space.mesh / 2))
    y = np.log(np.array(env, dtype=float))
    coef, res = np.polyfit(x, y, 1, full=True)[:2]
    resid = float(np.sqrt(res[0] / len(scales))) if len(res) else 0.0
    return CoveringProfile(tuple(scales), tuple(int(v) for v in env), tuple(sep),
                           float(coef[0]), resid)


def _members(A):
    m = A.members if isinstance(A, Region) else np.asarray(list(A), dtype=np.int64)
    if m.size == 0:
        raise ParameterError("Hausdorff distance of an empty set")
    return m


def hausdorff_distance(space: DiscreteSpace, A, B) -> float:
    """max of sup_a d(a, B) and sup_b d(b, A), exact on vertex sets."""
    a, b = _members(A), _members(B)
    return float(max(space.distance_to_set(b)[a].max(), space.distance_to_set(a)[b].max()))


def _matrix(X):
    if isinstance(X, DiscreteSpace):
        return X.rows(np.arange(X.n))
    D = np.asarray(X, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ParameterError("distance matrix must be square")
    return D


@dataclass(frozen=True)
class Correspondence:
    pairs: tuple
    distortion: float

    @classmethod
    def build(cls, DX, DY, pairs):
        pairs = tuple(sorted(set((int(i), int(j)) for i, j in pairs)))
        xs = {i for i, _ in pairs}
        ys = {j for _, j in pairs}
        if xs != set(range(len(DX))) or ys != set(range(len(DY))):
            raise ParameterError("relation is not surjective on both sides")
        return cls(pairs, distortion(DX, DY, pairs))


def distortion(DX, DY, pairs) -> float:
    p = np.asarray(pairs, dtype=np.int64)
    i, j = p[:, 0], p[:, 1]
    return float(np.abs(DX[np.ix_(i, i)] - DY[np.ix_(j, j)]).max())


@dataclass
class GHBounds:
    lower: float
    upper: float
    exact: bool
    correspondence: Correspondence | None = None


def _feasible(DX, DY, t):
    """A correspondence with distortion <= t, found by backtracking, or None."""
    nx, ny = len(DX), len(DY)
    cand = [(i, j) for i in range(nx) for j in range(ny)]
    m = len(cand)
    ci = np.array([c[0] for c in cand])
    cj = np.array([c[1] for c in cand])
    ok = np.abs(DX[np.ix_(ci, ci)] - DY[np.ix_(cj, cj)]) <= t
    by_x = [[k for k in range(m) if ci[k] == i] for i in range(nx)]
    by_y = [[k for k in range(m) if cj[k] == j] for j in range(ny)]

    def search(chosen, allowed, cov_x, cov_y):
        todo = [("x", i) for i in range(nx) if not cov_x[i]] + \
               [("y", j) for j in range(ny) if not cov_y[j]]
        if not todo:
            return list(chosen)
        best = None
        for side, e in todo:
            opts = [k for k in (by_x[e] if side == "x" else by_y[e]) if allowed[k]]
            if not opts:
                return None
            if best is None or len(opts) < len(best):
                best = opts
        for k in best:
            cx, cy = cov_x.copy(), cov_y.copy()
            cx[ci[k]] = cy[cj[k]] = True
            found = search(chosen + [k], allowed & ok[k], cx, cy)
            if found is not None:
                return found
        return None

    hit = search([], np.ones(m, dtype=bool), np.zeros(nx, bool), np.zeros(ny, bool))
    return None if hit is None else [cand[k] for k in hit]


def _heuristic_upper(DX, DY, seed=0, tries=64):
    """Distortion of random graph(f) ∪ graph(g)^T relations, plus the full relation."""
    rng = np.random.default_rng(seed)
    nx, ny = len(DX), len(DY)
    full = max(DX.max(), DY.max())
    best, best_pairs = full, [(i, j) for i in range(nx) for j in range(ny)]
    for _ in range(tries):
        f = rng.integers(ny, size=nx)
        g = rng.integers(nx, size=ny)
        pairs = [(i, int(f[i])) for i in range(nx)] + [(int(g[j]), j) for j in range(ny)]
        d = distortion(DX, DY, pairs)
        if d < best:
            best, best_pairs = d, pairs
    return best, best_pairs


def gh_distance_small(X, Y, budget: int = 64, heuristic: bool = False, seed: int = 0) -> GHBounds:
    """Bounds on the Gromov-Hausdorff distance, half the minimal distortion of a
    correspondence.  Exact when |X|·|Y| <= budget."""
    DX, DY = _matrix(X), _matrix(Y)
    nx, ny = len(DX), len(DY)
    if nx == 0 or ny == 0:
        raise ParameterError("empty space")
    ecc_x, ecc_y = DX.max(axis=1), DY.max(axis=1)
    lower = max(abs(ecc_x.max() - ecc_y.max()), abs(ecc_x.min() - ecc_y.min())) / 2
    if nx * ny > budget:
        if not heuristic:
            raise ParameterError(f"|X|·|Y| = {nx * ny} exceeds budget {budget}; "
                                 "pass heuristic=True for bounds")
        up, pairs = _heuristic_upper(DX, DY, seed)
        return GHBounds(lower, up / 2, False, Correspondence.build(DX, DY, pairs))
    diffs = np.abs(DX[:, :, None, None] - DY[None, None, :, :]).ravel()
    thresholds = np.unique(np.concatenate([[0.0], diffs]))
    lo, hi = 0, len(thresholds) - 1
    best = _feasible(DX, DY, thresholds[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        found = _feasible(DX, DY, thresholds[mid])
        if found is None:
            lo = mid + 1
        else:
            hi, best = mid, found
    corr = Correspondence.build(DX, DY, best)
    value = corr.distortion / 2
    return GHBounds(value, value, True, corr)


@dataclass
class ApproximationVerdict:
    passed: bool
    failed: tuple
    worst_distortion: float
    worst_pair: tuple | None
    worst_gap: float
    worst_uncovered: int | None


def check_epsilon_approximation(X: DiscreteSpace, Y: DiscreteSpace, phi, eps: float):
    """(i) |d_X(a,b) - d_Y(phi a, phi b)| < eps for all a, b; (ii) every vertex of
    Y lies within eps of phi(X)."""
    phi = np.asarray(phi, dtype=np.int64)
    if phi.shape != (X.n,):
        raise ParameterError("phi must map every vertex of X")
    if phi.min() < 0 or phi.max() >= Y.n:
        raise ParameterError("phi maps outside Y")
    image, inv = np.unique(phi, return_inverse=True)
    DYi = Y.rows(image)
    worst, pair = 0.0, None
    for start in range(0, X.n, 512):
        idx = np.arange(start, min(X.n, start + 512))
        diff = np.abs(X.rows(idx) - DYi[inv[idx]][:, phi])
        k = int(np.argmax(diff))
        if diff.flat[k] > worst:
            worst = float(diff.flat[k])
            pair = (int(idx[k // X.n]), int(k % X.n))
    gaps = DYi.min(axis=0)
    u = int(np.argmax(gaps))
    failed = []
    if worst >= eps:
        failed.append("i")
    if gaps[u] >= eps:
        failed.append("ii")
    return ApproximationVerdict(not failed, tuple(failed), worst, pair, float(gaps[u]),
                                u if gaps[u] >= eps else None)
