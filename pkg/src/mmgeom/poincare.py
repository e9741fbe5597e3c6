"""Upper gradients and sampled Poincaré (1, p) ratios on discrete spaces.

For a ball B = B_r(x) the (1, p) inequality asks

    mean_B |u - u_B| <= C_P * r * (mean_B g^p)^(1/p)

for every function u and upper gradient g.  ``implied_CP`` is the smallest
C_P making one configuration pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .cuts import default_radius_grid, cut_profile
from .space import DiscreteSpace, ParameterError, components, region

__all__ = [
    "ScalarField",
    "GradientField",
    "PoincareReport",
    "CPEstimate",
    "DecayFit",
    "FIELD_FAMILIES",
    "local_slope",
    "sample_paths",
    "verify_upper_gradient",
    "poincare_ratio",
    "thmB_witness",
    "estimate_CP",
    "volume_decay_exponent",
]

FIELD_FAMILIES = ("coordinate", "distance", "u_N")


@dataclass(frozen=True)
class ScalarField:
    values: np.ndarray
    name: str = "u"

    def as_dict(self, space):
        return dict(zip(space.ids, self.values.tolist()))


@dataclass(frozen=True)
class GradientField:
    values: np.ndarray
    kind: str = "supplied"  # "local_slope" | "supplied"

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ParameterError("gradient values must be nonnegative")


def _values(field):
    return np.asarray(field.values if hasattr(field, "values") else field, dtype=float)


def local_slope(space: DiscreteSpace, u, within=None) -> GradientField:
    """max over neighbours y of |u(x) - u(y)| / d(x, y).

    With ``within`` only edges between members of that vertex set count and
    the slope vanishes elsewhere.
    """
    vals = _values(u)
    if vals.shape != (space.n,):
        raise ParameterError(f"field has shape {vals.shape}, expected ({space.n},)")
    a, b = space.edge_arrays
    lens = np.asarray(space.adjacency[a, b]).ravel()
    if within is not None:
        mask = np.zeros(space.n, dtype=bool)
        mask[np.asarray(within, dtype=np.int64)] = True
        keep = mask[a] & mask[b]
        a, b, lens = a[keep], b[keep], lens[keep]
    slope = np.abs(vals[a] - vals[b]) / lens
    g = np.zeros(space.n)
    np.maximum.at(g, a, slope)
    np.maximum.at(g, b, slope)
    return GradientField(g, "local_slope")


def sample_paths(space: DiscreteSpace, n_paths: int = 20, walk_length: int = 50, seed: int = 0):
    """Shortest paths between random pairs followed by random walks."""
    rng = np.random.default_rng(seed)
    paths = []
    starts = rng.choice(space.n, size=min(n_paths, space.n), replace=False)
    _, pred = dijkstra(space.adjacency, directed=False, indices=starts, return_predecessors=True)
    for row, s in zip(pred, starts):
        t = int(rng.integers(space.n))
        path = [t]
        while path[-1] != s:
            path.append(int(row[path[-1]]))
        paths.append(path[::-1])
    for s in starts:
        path = [int(s)]
        for _ in range(walk_length):
            nb, _ = space.neighbors(path[-1])
            path.append(int(rng.choice(nb)))
        paths.append(path)
    return paths


def verify_upper_gradient(space: DiscreteSpace, u, g, paths=None, seed: int = 0) -> list[dict]:
    """Paths where |u(end) - u(start)| exceeds the trapezoid integral of g by
    more than the mesh slack 2h * max g."""
    uv, gv = _values(u), _values(g)
    paths = sample_paths(space, seed=seed) if paths is None else paths
    slack = 2 * space.mesh * float(gv.max(initial=0.0))
    out = []
    for path in paths:
        p = np.asarray(path, dtype=np.int64)
        if p.size < 2:
            continue
        lens = np.asarray(space.adjacency[p[:-1], p[1:]]).ravel()
        if np.any(lens == 0):
            raise ParameterError("path uses a non-edge")
        integral = float(np.sum(lens * (gv[p[:-1]] + gv[p[1:]]) / 2))
        jump = abs(float(uv[p[-1]] - uv[p[0]]))
        if jump > integral + slack:
            out.append({"path": p.tolist(), "jump": jump, "integral": integral, "slack": slack})
    return out


@dataclass
class PoincareReport:
    center: int
    r: float
    p: float
    lhs: float
    rhs_unit: float
    implied_CP: float
    family: str = "explicit"

    @property
    def infinite(self) -> bool:
        return math.isinf(self.implied_CP)


def poincare_ratio(space: DiscreteSpace, u, g, x, r: float, p: float,
                   family: str = "explicit") -> PoincareReport:
    """Exact weighted sums over the open ball B_r(x)."""
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    x = space.index(x)
    ball = region(space, "ball", x, r)
    if ball.raw_measure <= 0:
        raise ParameterError(f"ball of radius {r} around {x} has zero measure")
    m = ball.members
    w = space.weights[m]
    total = w.sum()
    uv, gv = _values(u)[m], _values(g)[m]
    uB = float(np.dot(w, uv) / total)
    lhs = float(np.dot(w, np.abs(uv - uB)) / total)
    gmean = float(np.dot(w, gv ** p) / total) ** (1.0 / p)
    rhs = r * gmean
    if lhs == 0:
        implied = 0.0
    elif rhs == 0:
        implied = math.inf
    else:
        implied = lhs / rhs
    return PoincareReport(x, r, p, lhs, rhs, implied, family)


def thmB_witness(space: DiscreteSpace, x, r: float, N: float | None = None,
                 rho: float | None = None):
    """Lipschitz witness concentrated on two components of B_r(x) minus x.

    On the i-th of the two heaviest components O_i the value is
    s_i / mu(O_i) outside the collar B_{rho_i}(x), rho_i = 1/(N mu(O_i)), and
    s_i * N * d(x, .) inside it, with signs s_1 = +1, s_2 = -1; it is 0
    elsewhere.  Give either ``N`` or the collar width ``rho`` of the heavier
    component.  Returns (u, g, info) with g the local slope inside the ball.
    """
    x = space.index(x)
    ball = region(space, "ball", x, r)
    comps = components(space, ball, excluded=[x])
    if len(comps) < 2:
        raise ParameterError(f"vertex {x} is not a local cut point at radius {r}")
    comps = sorted(comps, key=lambda c: -c.raw_measure)[:2]
    big = max(c.raw_measure for c in comps)
    if N is None:
        if rho is None:
            raise ParameterError("give N or rho")
        N = 1.0 / (rho * big)
    d = space.row(x)
    u = np.zeros(space.n)
    rhos = []
    for sign, comp in zip((1.0, -1.0), comps):
        mu = comp.raw_measure
        rho_i = 1.0 / (N * mu)
        rhos.append(rho_i)
        m = comp.members
        u[m] = sign * np.minimum(N * d[m], 1.0 / mu)
    g = local_slope(space, u, within=ball.members)
    info = {"N": N, "rho": rhos, "measures": [c.raw_measure for c in comps], "r": r}
    return ScalarField(u, "u_N"), g, info


@dataclass
class CPEstimate:
    value: float
    witness: PoincareReport | None
    n_configs: int

    def __float__(self):
        return self.value


def _sample_centers(space, sample, seed):
    if sample is not None:
        return [space.index(s) for s in sample]
    rng = np.random.default_rng(seed)
    named = sorted(int(v) for v in space.meta.get("points", {}).values())
    drawn = rng.choice(space.n, size=min(space.n, 6), replace=False).tolist()
    return list(dict.fromkeys(named + sorted(drawn)))


def estimate_CP(space: DiscreteSpace, p: float, R: float, family=FIELD_FAMILIES, sample=None,
                radii=None, seed: int = 0) -> CPEstimate:
    """max implied_CP over the field families, centres and radii r <= R.

    ``coordinate``: the coordinate functions; ``distance``: d(x, .) for the
    centres; ``u_N``: the cut-point witness with collars 2h, 4h, 8h at every
    centre detected as a local cut point.
    """
    family = tuple(family)
    unknown = set(family) - set(FIELD_FAMILIES)
    if not family or unknown:
        raise ParameterError(f"family must be a nonempty subset of {FIELD_FAMILIES}")
    centers = _sample_centers(space, sample, seed)
    if radii is None:
        radii = np.geomspace(max(8 * space.mesh, R / 8), R, 4) if R > 8 * space.mesh else [R]
    radii = [float(r) for r in radii if r <= R * (1 + 1e-12)]
    fields = []
    if "coordinate" in family and space.coords is not None:
        for j in range(space.coords.shape[1]):
            u = space.coords[:, j]
            if np.ptp(u) > 0:
                fields.append(("coordinate", None, u, local_slope(space, u)))
    if "distance" in family:
        for c in centers:
            u = space.row(c)
            fields.append(("distance", None, u, local_slope(space, u)))
    reports = []
    for name, _, u, g in fields:
        for c in centers:
            for r in radii:
                if region(space, "ball", c, r).raw_measure > 0:
                    reports.append(poincare_ratio(space, u, g, c, r, p, name))
    if "u_N" in family:
        for c in centers:
            if not cut_profile(space, c, default_radius_grid(space, c, count=4)).is_local_cut:
                continue
            for r in radii:
                for rho in (2 * space.mesh, 4 * space.mesh, 8 * space.mesh):
                    try:
                        u, g, _ = thmB_witness(space, c, r, rho=rho)
                    except ParameterError:
                        continue
                    reports.append(poincare_ratio(space, u, g, c, r, p, "u_N"))
    if not reports:
        return CPEstimate(0.0, None, 0)
    best = max(reports, key=lambda rep: rep.implied_CP)
    return CPEstimate(best.implied_CP, best, len(reports))


@dataclass
class DecayFit:
    beta: float
    intercept: float
    residual: float
    radii: tuple
    measures: tuple


def volume_decay_exponent(space: DiscreteSpace, x, radius_grid=None) -> DecayFit:
    """Least-squares slope of log mu(B_r(x)) against log r."""
    x = space.index(x)
    if radius_grid is None:
        radius_grid = np.geomspace(4 * space.mesh, space.eccentricity(x) / 2, 8)
    pairs = []
    for r in radius_grid:
        if r < 4 * space.mesh * (1 - 1e-12):
            continue
        m = region(space, "ball", x, r).raw_measure
        if m > 0:
            pairs.append((float(r), m))
    if len(pairs) < 3:
        raise ParameterError("need at least 3 usable radii (>= 4h, positive ball measure)")
    lr = np.log([q[0] for q in pairs])
    lm = np.log([q[1] for q in pairs])
    coef, res = np.polyfit(lr, lm, 1, full=True)[:2]
    beta, c = coef
    resid = float(np.sqrt(res[0] / len(pairs))) if len(res) else 0.0
    return DecayFit(float(beta), float(c), resid, tuple(q[0] for q in pairs),
                    tuple(q[1] for q in pairs))
