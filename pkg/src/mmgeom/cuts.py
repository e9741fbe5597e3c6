"""Local cut points, degrees, r-cut points, ends and branch tests.

Everything here is phrased through distances and induced-subgraph
connectivity, never through a chosen shortest path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components, dijkstra

from .space import DiscreteSpace, ParameterError, components, explicit_region, induced_labels
from .volumes import DomainError, delta_threshold

__all__ = [
    "RCutVerdict",
    "CutProfile",
    "LineArrangement",
    "LabelingError",
    "DiamReport",
    "AccumulationReport",
    "default_radius_grid",
    "ball_components",
    "cut_profile",
    "is_r_cut_point",
    "cut_points",
    "ends_at_scale",
    "diam_check",
    "branch_point_test",
    "weak_branch_test",
    "stands_in_line",
    "cut_set_accumulation_check",
]


class LabelingError(ValueError):
    """The component labeling conventions for a triple cannot be met."""


@dataclass(frozen=True)
class RCutVerdict:
    r: float
    failed: tuple = ()
    n_components: int = 0

    @property
    def passed(self) -> bool:
        return not self.failed

    @property
    def tag(self) -> str:
        # the highest-numbered failing condition is the most specific one:
        # a connected ball around a point of degree >= 2 fails (i) and (ii)
        return "pass" if self.passed else f"fail({self.failed[-1]})"


@dataclass
class CutProfile:
    point: int
    radii: tuple
    counts: tuple
    raw_counts: tuple
    degree_estimate: int
    r_cut_verdicts: dict = field(default_factory=dict)

    @property
    def is_local_cut(self) -> bool:
        return self.degree_estimate >= 2

    def r_cut_radii(self):
        return [r for r, v in self.r_cut_verdicts.items() if v.passed]


def default_radius_grid(space: DiscreteSpace, x=None, count: int = 6) -> tuple:
    """Geometric grid from 4h up to a quarter of the eccentricity of x (or of the diameter)."""
    lo = 4 * space.mesh
    if x is not None:
        top = space.eccentricity(x) / 4
    else:
        far = int(np.argmax(space.row(0)))
        top = space.eccentricity(far) / 4  # double sweep: near the diameter
    if top <= lo:
        return (lo,)
    return tuple(float(v) for v in np.geomspace(lo, top, count))


def ball_components(space: DiscreteSpace, x: int, r: float, d=None):
    """Components of the closed ball of radius r around x with x removed.

    Returns a list of (members, far, meets_sphere) where ``far`` marks a
    vertex at distance >= r/2 and ``meets_sphere`` a vertex of the
    tolerance sphere of radius r.
    """
    d = space.row(x) if d is None else d
    members = np.flatnonzero(d <= r + space.guard)
    members = members[members != x]
    if members.size == 0:
        return []
    ncomp, labels = induced_labels(space, members)
    dm = d[members]
    far = np.zeros(ncomp, dtype=bool)
    meets = np.zeros(ncomp, dtype=bool)
    np.logical_or.at(far, labels, dm >= r / 2)
    np.logical_or.at(meets, labels, np.abs(dm - r) <= space.tau)
    order = sorted(range(ncomp), key=lambda c: int(members[labels == c].min()))
    return [(members[labels == c], bool(far[c]), bool(meets[c])) for c in order]


def _neighbors_connected(space: DiscreteSpace, x: int) -> bool:
    """True when the neighbours of x induce a connected subgraph.

    Every component of a closed ball minus its centre contains a neighbour of
    the centre, so such a vertex is never a cut point at radii covering its
    neighbours.
    """
    nb, _ = space.neighbors(x)
    if nb.size <= 1:
        return True
    return induced_labels(space, np.sort(nb))[0] == 1


def _check_radius(space, r):
    if r < 4 * space.mesh * (1 - 1e-12):
        raise ParameterError(f"radius {r} is below 4h = {4 * space.mesh} (mesh artifact zone)")


class _Splitter:
    """Component statistics of B̄_r(x) minus x for many radii.

    Every vertex of the ball reaches x along a shortest path that stays in the
    ball, so contracting each shortest-path tree hanging off a neighbour of x
    keeps connectivity; components are then merged through edges joining
    different trees.
    """

    def __init__(self, space, x):
        d, pred = dijkstra(space.adjacency, directed=False, indices=x, return_predecessors=True)
        root = pred.astype(np.int64)
        root[x] = x
        first = root == x
        root[first] = np.flatnonzero(first)
        while True:
            nxt = root[root]
            if np.array_equal(nxt, root):
                break
            root = nxt
        self.space, self.x, self.d, self.root = space, x, d, root

    def stats(self, r):
        """(component count, far flags, sphere flags) at radius r."""
        sp, d, root = self.space, self.d, self.root
        inball = d <= r + sp.guard
        inball[self.x] = False
        idx = np.flatnonzero(inball)
        if idx.size == 0:
            return 0, np.zeros(0, bool), np.zeros(0, bool)
        roots, inv = np.unique(root[idx], return_inverse=True)
        parent = list(range(roots.size))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        u, v = sp.edge_arrays
        m = inball[u] & inball[v]
        ru, rv = root[u[m]], root[v[m]]
        cross = ru != rv
        if cross.any():
            pairs = np.unique(np.sort(np.stack([ru[cross], rv[cross]], 1), axis=1), axis=0)
            pa = np.searchsorted(roots, pairs[:, 0])
            pb = np.searchsorted(roots, pairs[:, 1])
            for a, b in zip(pa.tolist(), pb.tolist()):
                fa, fb = find(a), find(b)
                if fa != fb:
                    parent[fa] = fb
        comp = np.array([find(a) for a in range(roots.size)])
        _, comp = np.unique(comp, return_inverse=True)
        lab = comp[inv]
        ncomp = int(comp.max()) + 1
        far = np.zeros(ncomp, bool)
        meets = np.zeros(ncomp, bool)
        np.logical_or.at(far, lab, d[idx] >= r / 2)
        np.logical_or.at(meets, lab, np.abs(d[idx] - r) <= sp.tau)
        return ncomp, far, meets


def _verdict_from(r, degree, ncomp, meets) -> RCutVerdict:
    failed = []
    if ncomp < 2:
        failed.append("i")
    if ncomp != degree:
        failed.append("ii")
    if not meets.all():
        failed.append("iii")
    return RCutVerdict(r, tuple(failed), ncomp)


def cut_profile(space: DiscreteSpace, x, radius_grid=None) -> CutProfile:
    """Component counts of B̄_r(x) minus x over a radius grid.

    Only components reaching distance r/2 are counted towards the degree,
    which suppresses dangling mesh fragments.
    """
    x = space.index(x)
    radii = tuple(default_radius_grid(space, x) if radius_grid is None else radius_grid)
    for r in radii:
        _check_radius(space, r)
    if space.neighbors(x)[0].size == 0:
        raise ParameterError(f"vertex {x} is isolated")
    split = _Splitter(space, x)
    stats = [split.stats(r) for r in radii]
    counts = tuple(int(far.sum()) for _, far, _ in stats)
    raw = tuple(c for c, _, _ in stats)
    degree = max(1, max(counts))
    profile = CutProfile(x, radii, counts, raw, degree)
    for r, (c, _, meets) in zip(radii, stats):
        profile.r_cut_verdicts[r] = _verdict_from(r, degree, c, meets)
    return profile


def is_r_cut_point(space: DiscreteSpace, x, r: float, degree: int | None = None,
                   radius_grid=None) -> RCutVerdict:
    """Check conditions (i)-(iii) of an r-cut point.

    (i) the closed ball minus x is disconnected, (ii) its component count
    equals the degree (estimated from ``radius_grid`` unless given), (iii)
    every component meets the tolerance sphere of radius r.
    """
    x = space.index(x)
    _check_radius(space, r)
    if degree is None:
        degree = cut_profile(space, x, radius_grid).degree_estimate
    c, _, meets = _Splitter(space, x).stats(r)
    return _verdict_from(r, degree, c, meets)


def cut_points(space: DiscreteSpace, radius_grid=None, vertices=None) -> list[CutProfile]:
    """Profiles of every local cut point among ``vertices`` (default: all)."""
    vertices = range(space.n) if vertices is None else [space.index(v) for v in vertices]
    if radius_grid is None:
        radius_grid = default_radius_grid(space)
    out = []
    for x in vertices:
        if _neighbors_connected(space, x) and space.neighbors(x)[1].max() <= min(radius_grid):
            continue
        prof = cut_profile(space, x, radius_grid)
        if prof.is_local_cut:
            out.append(prof)
    return out


def ends_at_scale(space: DiscreteSpace, base, R: float) -> int:
    """Components of X minus B_R(base) containing a vertex at distance >= 2R."""
    base = space.index(base)
    d = space.row(base)
    outside = np.flatnonzero(d >= R - space.guard)
    count = 0
    for comp in components(space, outside):
        if d[comp.members].max() >= 2 * R - space.guard:
            count += 1
    return count


@dataclass
class DiamReport:
    point: int
    r: float
    delta: float
    bound: float
    diameters: list
    violations: list

    @property
    def violated(self) -> bool:
        return bool(self.violations)


def diam_check(space: DiscreteSpace, x, r: float, k: float, n: float, C: float,
               R: float | None = None, degree: int | None = None) -> DiamReport:
    """Per-component diameter of (O ∩ S_r(x)) against (2 - delta) r."""
    x = space.index(x)
    if C >= math.sqrt(2):
        raise DomainError(f"diameter bound not applicable for C >= sqrt(2) (C={C})")
    verdict = is_r_cut_point(space, x, r, degree)
    if not verdict.passed:
        raise ParameterError(f"vertex {x} is not an r-cut point at r={r} ({verdict.tag})")
    delta = delta_threshold(k, n, C, R if R is not None else r)
    bound = (2 - delta) * r
    diams, bad = [], []
    for i, (members, _, _) in enumerate(ball_components(space, x, r)):
        d = space.row(x)
        sph = members[np.abs(d[members] - r) <= space.tau]
        diam = float(space.rows(sph)[:, sph].max()) if sph.size else 0.0
        diams.append(diam)
        if diam > bound:
            bad.append(i)
    return DiamReport(x, r, delta, bound, diams, bad)


def _anchors(space, x, l):
    d = space.row(x)
    anchors = np.flatnonzero(np.abs(d - l) <= space.guard)
    if anchors.size == 0:
        raise ParameterError(f"no anchor vertex at distance {l} from {x}")
    return anchors


def branch_point_test(space: DiscreteSpace, x, l: float, eps_grid, tol: float | None = None) -> str:
    """``branch`` iff, for every anchor and every eps, two distinct points of
    B_eps(x) lie beyond x at equal distance (within ``tol``) from the anchor."""
    x = space.index(x)
    tol = space.exact_tol if tol is None else tol
    eps_grid = np.atleast_1d(np.asarray(eps_grid, dtype=float))
    dx = space.row(x)
    for g0 in _anchors(space, x, l):
        dg = space.row(g0)
        for eps in eps_grid:
            near = np.flatnonzero((dx < eps - space.guard) & (dg > dg[x] + tol))
            vals = np.sort(dg[near])
            if vals.size < 2 or not np.any(np.diff(vals) <= tol):
                return "not_branch"
    return "branch"


def weak_branch_test(space: DiscreteSpace, x, l: float, eps, tol: float | None = None) -> str:
    """Discrete weak-branch criterion.

    For every anchor g0 at distance l and every pair x1 != x2 in B_eps(x) with
    d(g0, xi) > d(g0, x), some w != x must lie between x and both xi.
    """
    x = space.index(x)
    tol = space.exact_tol if tol is None else tol
    dx = space.row(x)
    any_pair = False
    for e in np.atleast_1d(np.asarray(eps, dtype=float)):
        ball = np.flatnonzero(dx < e - space.guard)
        ball = ball[ball != x]
        if ball.size < 2:
            continue
        for g0 in _anchors(space, x, l):
            dg = space.row(g0)
            adm = ball[dg[ball] > dg[x] + tol]
            if adm.size < 2:
                continue
            any_pair = True
            D = space.rows(adm)[:, ball].T  # d(w, xi): rows w in ball, columns xi
            between = np.abs(dx[ball][:, None] + D - dx[adm][None, :]) <= tol
            shared = between.T.astype(np.int64) @ between.astype(np.int64)
            np.fill_diagonal(shared, 1)
            if np.any(shared == 0):
                return "not_weak_branch"
    return "weak_branch" if any_pair else "vacuous"


@dataclass
class LineArrangement:
    triple: tuple
    r: float
    labels: dict
    stands_in_line: bool


def _two_components(space, x, r):
    comps = [m for m, _, _ in ball_components(space, x, r)]
    if len(comps) != 2:
        raise LabelingError(
            f"vertex {x}: closed ball of radius {r} minus the point has {len(comps)} "
            "components; the labeling needs exactly two")
    return comps


def stands_in_line(space: DiscreteSpace, x1, x2, x3, r: float) -> LineArrangement:
    """Label the components around three r-cut points and test O2' ∩ O3' != ∅.

    The triple is relabeled so that the first point's component O1' holds the
    other two and the second point is strictly closer to the first than the
    third is.
    """
    pts = [space.index(v) for v in (x1, x2, x3)]
    comps = {p: _two_components(space, p, r) for p in pts}
    reasons = []
    for a, b, c in itertools.permutations(pts):
        holder = [m for m in comps[a] if b in m and c in m]
        if not holder:
            reasons.append(f"O1' of {a} does not contain both {b} and {c}")
            continue
        if not space.dist(a, b) < space.dist(a, c):
            reasons.append(f"d({a},{b}) < d({a},{c}) fails")
            continue
        labels = {"x1": a, "x2": b, "x3": c}
        outer = {}
        for p in (b, c):
            with_a = [m for m in comps[p] if a in m]
            if len(with_a) != 1:
                raise LabelingError(f"no component around {p} contains {a}")
            outer[p] = next(m for m in comps[p] if a not in m)
        labels["O2_prime_size"] = int(outer[b].size)
        labels["O3_prime_size"] = int(outer[c].size)
        meet = np.intersect1d(outer[b], outer[c]).size > 0
        return LineArrangement((a, b, c), r, labels, bool(meet))
    raise LabelingError("labeling impossible: " + "; ".join(dict.fromkeys(reasons)))


@dataclass
class AccumulationReport:
    r: float
    gate: float
    r_cut_points: list
    degrees: dict
    chains: list
    triples_checked: int = 0
    not_in_line: list = field(default_factory=list)
    skipped_triples: int = 0
    degree_violations: list = field(default_factory=list)

    @property
    def violated(self) -> bool:
        return bool(self.not_in_line or self.degree_violations)


def cut_set_accumulation_check(space: DiscreteSpace, r: float, k: float = 0.0, n: float = 2.0,
                               C: float = 1.0, R: float | None = None,
                               radius_grid=None) -> AccumulationReport:
    """Enumerate r-cut points and inspect chains closer than delta r / 6."""
    _check_radius(space, r)
    delta = delta_threshold(k, n, C, R if R is not None else r)
    gate = delta * r / 6
    grid = tuple(sorted(set(radius_grid or default_radius_grid(space)) | {r}))
    points, degrees = [], {}
    for prof in cut_points(space, grid):
        v = prof.r_cut_verdicts.get(r)
        if v is not None and v.passed:
            points.append(prof.point)
            degrees[prof.point] = prof.degree_estimate
    report = AccumulationReport(r, gate, points, degrees, [])
    if not points:
        return report
    pts = np.array(points)
    D = space.rows(pts)[:, pts]
    close = (D < gate).astype(np.int8)
    ncomp, labels = connected_components(close, directed=False)
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        if idx.size < 2:
            continue
        # order along the chain from an extreme member
        start = idx[np.argmax(D[idx[0], idx])]
        idx = idx[np.argsort(D[start, idx], kind="stable")]
        chain = [int(pts[i]) for i in idx]
        report.chains.append(chain)
        high = [p for p in chain if degrees[p] >= 3]
        for a, b in itertools.combinations(high, 2):
            if space.dist(a, b) < gate:
                report.degree_violations.append((a, b))
        for i in range(len(idx) - 2):
            tri = idx[i:i + 3]
            if D[np.ix_(tri, tri)].max() >= gate:
                continue
            members = [int(pts[t]) for t in tri]
            if any(degrees[m] != 2 for m in members):
                report.skipped_triples += 1
                continue
            try:
                arr = stands_in_line(space, *members, r)
            except LabelingError:
                report.skipped_triples += 1
                continue
            report.triples_checked += 1
            if not arr.stands_in_line:
                report.not_in_line.append(tuple(members))
    return report


def component_region(space, members):
    return explicit_region(space, members, "component")
