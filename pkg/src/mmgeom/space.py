"""Discretized metric measure spaces and the metric queries built on them.

A :class:`DiscreteSpace` is a connected graph with positive edge lengths and
nonnegative vertex weights.  Its shortest-path distance plays the role of the
metric and the vertex weights the role of the measure.  Vertices are
addressed by integer index everywhere in the library; string ids exist for
files and reports.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

__all__ = [
    "SpaceError",
    "ParameterError",
    "DiscreteSpace",
    "Region",
    "ShadowParams",
    "REGION_KINDS",
    "distance_matrix",
    "region",
    "components",
    "geodesic_shadow",
    "length_space_defect",
    "nonbranching_witnesses",
    "is_convex",
    "restrict",
    "rescale",
    "explicit_region",
]

REGION_KINDS = ("ball", "closed_ball", "annulus", "sphere", "component", "explicit")

# rows of the distance matrix kept in memory, in float64 entries
_ROW_CACHE_ENTRIES = 60_000_000


class SpaceError(ValueError):
    """The data does not describe a valid discretized length space."""


class ParameterError(ValueError):
    """A query parameter is out of range."""


class DiscreteSpace:
    """Weighted graph standing in for a metric measure space (X, d, mu).

    Parameters
    ----------
    ids : sequence of str
        Vertex identifiers, unique.
    weights : array_like
        Vertex measure weights, nonnegative with positive sum.
    edges : array_like of shape (m, 2)
        Vertex index pairs.
    lengths : array_like of shape (m,)
        Positive edge lengths.
    mesh : float
        Characteristic edge length ``h``.
    tau : float, optional
        Betweenness tolerance, default ``2 * mesh``.
    coords : array_like, optional
        Coordinates kept for provenance and plotting only.
    measure_scale : float
        Global factor applied to every reported measure.  Ratios of measures
        never see it, so rescaling the measure leaves them bit-identical.
    """

    def __init__(self, ids, weights, edges, lengths, mesh, tau=None, coords=None,
                 meta=None, measure_scale=1.0):
        self.ids = [str(i) for i in ids]
        self.weights = np.asarray(weights, dtype=float).copy()
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.edges = edges.copy()
        self.lengths = np.asarray(lengths, dtype=float).reshape(-1).copy()
        self.mesh = float(mesh)
        self.tau = 2.0 * self.mesh if tau is None else float(tau)
        self.coords = None if coords is None else np.asarray(coords, dtype=float).copy()
        self.meta = dict(meta or {})
        self.measure_scale = float(measure_scale)
        self._index = {v: i for i, v in enumerate(self.ids)}
        self._validate()
        n = len(self.ids)
        both = np.concatenate([self.edges, self.edges[:, ::-1]])
        self.adjacency = csr_matrix(
            (np.concatenate([self.lengths, self.lengths]), (both[:, 0], both[:, 1])),
            shape=(n, n))
        self._rows = OrderedDict()
        self._edge_arrays = None
        self._row_budget = max(64, _ROW_CACHE_ENTRIES // max(n, 1))
        for arr in (self.weights, self.edges, self.lengths):
            arr.setflags(write=False)

    def _validate(self):
        n = len(self.ids)
        if n == 0:
            raise SpaceError("space has no vertices")
        if len(self._index) != n:
            raise SpaceError("vertex ids are not unique")
        if self.weights.shape != (n,):
            raise SpaceError(f"expected {n} weights, got shape {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            bad = int(np.flatnonzero(~(self.weights >= 0))[0])
            raise SpaceError(f"vertex {self.ids[bad]!r} has negative or invalid weight")
        if not self.weights.sum() > 0:
            raise SpaceError("total measure must be positive")
        if len(self.lengths) != len(self.edges):
            raise SpaceError("edges and lengths differ in count")
        if len(self.edges) and (self.edges.min() < 0 or self.edges.max() >= n):
            raise SpaceError("edge refers to an unknown vertex")
        bad = np.flatnonzero(~(self.lengths > 0) | ~np.isfinite(self.lengths))
        if len(bad):
            u, v = self.edges[bad[0]]
            raise SpaceError(
                f"edge ({self.ids[u]!r}, {self.ids[v]!r}) has nonpositive length "
                f"{self.lengths[bad[0]]}")
        if np.any(self.edges[:, 0] == self.edges[:, 1]):
            raise SpaceError("self-loops are not allowed")
        if not self.mesh > 0:
            raise SpaceError(f"mesh must be positive, got {self.mesh}")
        if not self.tau >= 0:
            raise SpaceError(f"tau must be nonnegative, got {self.tau}")
        if not self.measure_scale > 0:
            raise SpaceError("measure_scale must be positive")
        if n > 1:
            adj = csr_matrix((np.ones(len(self.edges)), (self.edges[:, 0], self.edges[:, 1])),
                             shape=(n, n))
            ncomp, _ = connected_components(adj, directed=False)
            if ncomp != 1:
                raise SpaceError("not a length space model: graph is disconnected")

    # -- basic accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.ids)

    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        family = self.meta.get("family", "custom")
        return f"DiscreteSpace({family}, n={self.n}, mesh={self.mesh:g})"

    def index(self, vertex) -> int:
        """Index of a vertex given by id or index."""
        if isinstance(vertex, (int, np.integer)):
            if not 0 <= vertex < self.n:
                raise ParameterError(f"vertex index {vertex} out of range")
            return int(vertex)
        key = str(vertex)
        if key in self._index:
            return self._index[key]
        named = self.meta.get("points", {})
        if key in named:
            return int(named[key])
        raise ParameterError(f"unknown vertex {vertex!r}")

    @property
    def guard(self) -> float:
        """Half-mesh guard band separating open from closed balls."""
        return self.mesh / 2

    @property
    def exact_tol(self) -> float:
        """Tolerance for predicates meant to hold exactly (midpoints, branching)."""
        return self.mesh / 4

    @property
    def total_measure(self) -> float:
        return self.measure_scale * float(self.weights.sum())

    def measure(self, members) -> float:
        return self.measure_scale * self.raw_measure(members)

    def raw_measure(self, members) -> float:
        """Sum of stored weights, without ``measure_scale``."""
        members = np.asarray(members, dtype=np.int64)
        return float(self.weights[members].sum()) if members.size else 0.0

    @property
    def edge_arrays(self):
        """Upper-triangular edge endpoint arrays (u, v), cached."""
        if self._edge_arrays is None:
            coo = self.adjacency.tocoo()
            keep = coo.row < coo.col
            self._edge_arrays = (coo.row[keep].astype(np.int64), coo.col[keep].astype(np.int64))
        return self._edge_arrays

    def neighbors(self, i):
        a = self.adjacency
        sl = slice(a.indptr[i], a.indptr[i + 1])
        return a.indices[sl], a.data[sl]

    def nearest_vertex(self, point) -> int:
        """Vertex whose coordinates are closest to ``point`` (needs coords)."""
        if self.coords is None:
            raise ParameterError("space carries no coordinates")
        diff = self.coords - np.asarray(point, dtype=float)[None, :]
        return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))

    # -- distances -------------------------------------------------------

    def rows(self, indices) -> np.ndarray:
        """Distance rows ``d(indices[j], .)`` as a (len(indices), n) array."""
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        missing = [int(i) for i in dict.fromkeys(indices.tolist()) if i not in self._rows]
        if missing:
            block = dijkstra(self.adjacency, directed=False, indices=missing)
            for i, row in zip(missing, block):
                row.setflags(write=False)
                self._rows[i] = row
        out = np.empty((len(indices), self.n))
        for j, i in enumerate(indices.tolist()):
            self._rows.move_to_end(i)
            out[j] = self._rows[i]
        while len(self._rows) > self._row_budget:
            self._rows.popitem(last=False)
        return out

    def row(self, i) -> np.ndarray:
        return self.rows([self.index(i)])[0]

    def dist(self, i, j) -> float:
        return float(self.row(i)[self.index(j)])

    def distance_to_set(self, members) -> np.ndarray:
        """d(., A) for every vertex, by a multi-source search."""
        members = np.asarray(members, dtype=np.int64)
        if members.size == 0:
            raise ParameterError("distance to an empty set")
        return dijkstra(self.adjacency, directed=False, indices=members, min_only=True)

    def eccentricity(self, i) -> float:
        return float(self.row(i).max())


def distance_matrix(space: DiscreteSpace) -> np.ndarray:
    """Full shortest-path distance matrix (symmetric, zero diagonal)."""
    return space.rows(np.arange(space.n))


@dataclass(frozen=True)
class ShadowParams:
    """Radii (s1, s2) of the shadow window and (r1, r2) of the annulus holding U."""

    s1: float
    s2: float
    r1: float
    r2: float
    tau: float | None = None

    def __post_init__(self):
        s1, s2, r1, r2 = self.s1, self.s2, self.r1, self.r2
        if not (0 <= s1 < s2 and s1 <= r1 < r2 and s2 <= r2):
            raise ParameterError(
                f"need 0 <= s1 < s2, s1 <= r1 < r2, s2 <= r2; got s=({s1}, {s2}), r=({r1}, {r2})")
        if self.tau is not None and self.tau < 0:
            raise ParameterError("tau must be nonnegative")

    def scaled(self, a: float) -> "ShadowParams":
        tau = None if self.tau is None else a * self.tau
        return ShadowParams(a * self.s1, a * self.s2, a * self.r1, a * self.r2, tau)


@dataclass(frozen=True, eq=False)
class Region:
    kind: str
    members: np.ndarray
    measure: float
    center: int | None = None
    r1: float = 0.0
    r2: float = 0.0
    note: str = ""
    raw_measure: float = field(default=0.0, repr=False)

    def __len__(self):
        return len(self.members)

    def __contains__(self, i):
        pos = np.searchsorted(self.members, i)
        return bool(pos < len(self.members) and self.members[pos] == i)

    @property
    def empty(self) -> bool:
        return len(self.members) == 0

    def as_set(self) -> frozenset:
        return frozenset(self.members.tolist())

    def issubset(self, other: "Region") -> bool:
        return bool(np.isin(self.members, other.members).all())


def explicit_region(space: DiscreteSpace, members, kind="explicit", center=None,
                    r1=0.0, r2=0.0, note="") -> Region:
    members = np.unique(np.asarray(list(members) if not isinstance(members, np.ndarray)
                                   else members, dtype=np.int64))
    raw = space.raw_measure(members)
    return Region(kind, members, space.measure_scale * raw, center, r1, r2, note, raw)


def _membership(space: DiscreteSpace, kind: str, d: np.ndarray, r1: float, r2: float):
    g = space.guard
    if kind == "ball":
        return d < r1 - g
    if kind == "closed_ball":
        return d <= r1 + g
    if kind == "annulus":
        if r1 == 0:
            return (d > 0) & (d < r2 - g)  # the closed ball of radius 0 is {x}
        return (d > r1 + g) & (d < r2 - g)
    if kind == "sphere":
        return np.abs(d - r1) <= space.tau
    raise ParameterError(f"unknown metric region kind {kind!r}")


def region(space: DiscreteSpace, kind: str, x, r1: float, r2: float | None = None) -> Region:
    """Metric region around ``x``.

    ``ball`` and ``closed_ball`` use radius ``r1``; ``annulus`` is
    ``B_{r2}(x)`` minus the closed ball of radius ``r1``; ``sphere`` is the
    tolerance sphere ``|d(x, y) - r1| <= tau``.  Points within half a mesh step
    of a ball boundary belong to the closed ball only.
    """
    x = space.index(x)
    if r1 < 0 or (r2 is not None and r2 < 0):
        raise ParameterError("radii must be nonnegative")
    if kind == "annulus":
        if r2 is None or r2 < r1:
            raise ParameterError(f"annulus needs r1 <= r2, got r1={r1}, r2={r2}")
    else:
        r2 = r1 if r2 is None else r2
    d = space.row(x)
    members = np.flatnonzero(_membership(space, kind, d, r1, r2))
    return explicit_region(space, members, kind, x, r1, r2)


def induced_labels(space: DiscreteSpace, members: np.ndarray):
    """Component labels of the subgraph induced on ``members`` (sorted, unique)."""
    m = members.size
    pos = np.full(space.n, -1, dtype=np.int64)
    pos[members] = np.arange(m)
    u, v = space.edge_arrays
    pu, pv = pos[u], pos[v]
    keep = (pu >= 0) & (pv >= 0)
    sub = coo_matrix((np.ones(int(keep.sum())), (pu[keep], pv[keep])), shape=(m, m))
    return connected_components(sub, directed=False)


def components(space: DiscreteSpace, reg, excluded=()) -> list[Region]:
    """Connected components of the subgraph induced on ``reg`` minus ``excluded``.

    ``reg`` may be a :class:`Region` or any collection of vertex indices.
    Components are ordered by their smallest vertex index.
    """
    members = reg.members if isinstance(reg, Region) else np.asarray(list(reg), dtype=np.int64)
    keep = np.setdiff1d(members, np.asarray(list(excluded), dtype=np.int64))
    if keep.size == 0:
        return []
    _, labels = induced_labels(space, keep)
    order = np.argsort(labels, kind="stable")
    splits = np.flatnonzero(np.diff(labels[order])) + 1
    groups = [keep[g] for g in np.split(order, splits)]
    groups.sort(key=lambda g: int(g.min()))
    return [explicit_region(space, g, "component") for g in groups]


def _pair_distances(space: DiscreteSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """d(a_i, b_j) as a (len(a), len(b)) array, searching from the smaller side."""
    if len(a) <= len(b):
        return space.rows(a)[:, b]
    return space.rows(b)[:, a].T


def geodesic_shadow(space: DiscreteSpace, x, U: Region, params: ShadowParams) -> Region:
    """Vertices of the annulus A_{s1,s2}(x) lying on a geodesic from x to U.

    Membership: ``y`` in the annulus and ``d(x,y) + d(y,z) - d(x,z) <= tau``
    for some ``z`` in ``U``.
    """
    x = space.index(x)
    tau = space.tau if params.tau is None else params.tau
    if U.empty:
        return explicit_region(space, [], "explicit", x, params.s1, params.s2,
                               note="empty U: ratio undefined")
    dx = space.row(x)
    cand = np.flatnonzero(_membership(space, "annulus", dx, params.s1, params.s2))
    if cand.size == 0:
        return explicit_region(space, [], "explicit", x, params.s1, params.s2)
    z = U.members
    D = _pair_distances(space, cand, z)
    excess = dx[cand][:, None] + D - dx[z][None, :]
    hit = (excess <= tau).any(axis=1)
    return explicit_region(space, cand[hit], "explicit", x, params.s1, params.s2)


def length_space_defect(space: DiscreteSpace, max_pairs: int | None = None, seed: int = 0) -> float:
    """max over pairs of (min_z max(d(x,z), d(z,y)) - d(x,y)/2).

    Exact over all pairs by default; ``max_pairs`` restricts to a seeded
    sample of source vertices for large spaces.
    """
    n = space.n
    sources = np.arange(n)
    if max_pairs is not None and n * n > max_pairs:
        rng = np.random.default_rng(seed)
        sources = np.sort(rng.choice(n, size=max(1, max_pairs // n), replace=False))
    D = space.rows(np.arange(n)) if n <= 3000 else None
    worst = 0.0
    for x in sources:
        dx = D[x] if D is not None else space.row(x)
        # for every y: min over z of max(d(x,z), d(z,y))
        block = 256
        for start in range(0, n, block):
            ys = np.arange(start, min(n, start + block))
            Dy = D[ys] if D is not None else space.rows(ys)
            mids = np.maximum(dx[None, :], Dy).min(axis=1)
            worst = max(worst, float((mids - dx[ys] / 2).max()))
    return max(worst, 0.0)


def nonbranching_witnesses(space: DiscreteSpace, tolerance: float | None = None,
                           max_scale: float | None = None, limit: int = 100):
    """Quadruples (y, x0, x1, x2) violating the discrete nonbranching property.

    ``y`` is a ``tolerance``-midpoint of (x0, x1) and of (x0, x2) while
    ``d(x1, x2) > tolerance``.  ``max_scale`` bounds ``d(x0, x1)``.
    """
    tol = space.exact_tol if tolerance is None else tolerance
    D = distance_matrix(space)
    found = []
    for x0 in range(space.n):
        d0 = D[x0]
        for y in range(space.n):
            if y == x0:
                continue
            half = d0[y]
            ok = (np.abs(d0 / 2 - half) <= tol) & (np.abs(D[y] - half) <= tol)
            if max_scale is not None:
                ok &= d0 <= max_scale
            cand = np.flatnonzero(ok)
            if cand.size < 2:
                continue
            sub = D[np.ix_(cand, cand)]
            i, j = np.nonzero(np.triu(sub > tol))
            if i.size:
                found.append((y, x0, int(cand[i[0]]), int(cand[j[0]])))
                if len(found) >= limit:
                    return found
    return found


def is_convex(space: DiscreteSpace, A, tolerance: float | None = None) -> bool:
    """True iff every vertex between two members of A (betweenness test) is in A."""
    members = A.members if isinstance(A, Region) else np.asarray(sorted(A), dtype=np.int64)
    if members.size == 0:
        raise ParameterError("convexity of an empty set")
    tol = space.exact_tol if tolerance is None else tolerance
    inside = np.zeros(space.n, dtype=bool)
    inside[members] = True
    R = space.rows(members)
    for a in range(len(members)):
        da = R[a]
        for b in range(a + 1, len(members)):
            between = da + R[b] <= da[members[b]] + tol
            if np.any(between & ~inside):
                return False
    return True


def restrict(space: DiscreteSpace, A) -> DiscreteSpace:
    """Induced sub-space on A, carrying the restricted measure."""
    members = A.members if isinstance(A, Region) else np.asarray(sorted(A), dtype=np.int64)
    if members.size == 0:
        raise ParameterError("cannot restrict to an empty set")
    pos = -np.ones(space.n, dtype=np.int64)
    pos[members] = np.arange(len(members))
    keep = (pos[space.edges[:, 0]] >= 0) & (pos[space.edges[:, 1]] >= 0)
    edges = pos[space.edges[keep]]
    coords = None if space.coords is None else space.coords[members]
    meta = dict(space.meta, restricted_from=space.meta.get("family", "custom"))
    try:
        return DiscreteSpace([space.ids[i] for i in members], space.weights[members],
                             edges, space.lengths[keep], space.mesh, space.tau, coords,
                             meta, space.measure_scale)
    except SpaceError as exc:
        raise SpaceError(f"cannot restrict to a non-connected set: {exc}") from None


def rescale(space: DiscreteSpace, a: float, b: float) -> DiscreteSpace:
    """The space (X, a d, b mu): lengths, mesh and tau times a, measure times b."""
    if not (a > 0 and b > 0):
        raise ParameterError(f"rescale needs a, b > 0, got a={a}, b={b}")
    coords = None if space.coords is None else a * space.coords
    meta = dict(space.meta)
    return DiscreteSpace(space.ids, space.weights, space.edges, a * space.lengths,
                         a * space.mesh, a * space.tau, coords, meta,
                         b * space.measure_scale)

