"""Deterministic generators for the example spaces.

One-dimensional families are metric graphs: every curve is subdivided into
pieces of length at most ``h`` and each vertex carries half the total length
of its incident pieces, which realizes the one-dimensional Hausdorff
measure.  Two-dimensional families are king-graph lattices whose vertex
weights are the areas of the lattice cells intersected with the region.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from urllib.parse import parse_qsl

import numpy as np

from .space import DiscreteSpace

__all__ = ["ZooError", "ZooSpec", "FAMILIES", "generate", "parse_zoo", "default_mesh"]

MESH_ENV = "MMGEOM_MESH"


class ZooError(ValueError):
    """Invalid family name or parameters."""


def default_mesh(fallback: float = 0.01) -> float:
    value = os.environ.get(MESH_ENV)
    return float(value) if value else fallback


@dataclass(frozen=True)
class ZooSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def with_params(self, **changes) -> "ZooSpec":
        return ZooSpec(self.family, {**self.params, **changes}, self.seed)


class _MetricGraph:
    """Accumulates junction points and subdivided curves."""

    def __init__(self, h):
        self.h = h
        self.coords = []
        self.edges = []
        self.lengths = []

    def node(self, xy):
        self.coords.append(tuple(float(c) for c in xy))
        return len(self.coords) - 1

    def curve(self, a, b, length, point_at):
        """Join nodes a and b by a curve of the given length; point_at(t), t in (0, 1)."""
        k = max(1, math.ceil(length / self.h - 1e-9))
        prev = a
        for j in range(1, k):
            cur = self.node(point_at(j / k))
            self._edge(prev, cur, length / k)
            prev = cur
        self._edge(prev, b, length / k)

    def segment(self, a, b):
        pa, pb = np.array(self.coords[a]), np.array(self.coords[b])
        self.curve(a, b, float(np.linalg.norm(pb - pa)), lambda t: pa + t * (pb - pa))

    def arc(self, a, b, center, radius, theta0, theta1):
        cx, cy = center
        self.curve(a, b, abs(theta1 - theta0) * radius,
                   lambda t: (cx + radius * math.cos(theta0 + t * (theta1 - theta0)),
                              cy + radius * math.sin(theta0 + t * (theta1 - theta0))))

    def _edge(self, u, v, length):
        self.edges.append((u, v))
        self.lengths.append(length)

    def build(self, meta, points=None):
        n = len(self.coords)
        weights = np.zeros(n)
        e = np.array(self.edges, dtype=np.int64)
        ln = np.array(self.lengths)
        np.add.at(weights, e[:, 0], ln / 2)
        np.add.at(weights, e[:, 1], ln / 2)
        meta = dict(meta, measure_model="hausdorff1", points=points or {})
        return DiscreteSpace([f"v{i}" for i in range(n)], weights, e, ln, self.h,
                             coords=np.array(self.coords), meta=meta)


def _segments_on_line(g, xs, y=0.0):
    """Chain nodes at sorted abscissae xs on the horizontal line y; returns node ids."""
    ids = [g.node((x, y)) for x in xs]
    for a, b in zip(ids, ids[1:]):
        g.segment(a, b)
    return ids


def _require(cond, message):
    if not cond:
        raise ZooError(message)


# -- one-dimensional families ------------------------------------------------

def interval(L=1.0, h=None):
    h = h or default_mesh()
    _require(L > 0 and h > 0 and h <= L, "interval needs 0 < h <= L")
    g = _MetricGraph(h)
    a, b = g.node((0.0, 0.0)), g.node((L, 0.0))
    g.segment(a, b)
    return g, {"left": a, "right": b}


def path(L=10.0, h=None):
    return interval(L, h or default_mesh(L / 1000))


def star(d=3, L=1.0, h=None):
    h = h or default_mesh()
    _require(int(d) == d and d >= 1, "star needs an integer number of arms d >= 1")
    _require(L > 0 and h <= L, "star needs 0 < h <= L")
    g = _MetricGraph(h)
    c = g.node((0.0, 0.0))
    for i in range(int(d)):
        th = 2 * math.pi * i / d
        tip = g.node((L * math.cos(th), L * math.sin(th)))
        g.segment(c, tip)
    return g, {"center": c}


def cycle(L=1.0, h=None):
    h = h or default_mesh()
    _require(L > 0 and h <= L / 3, "cycle needs h <= L/3")
    R = L / (2 * math.pi)
    g = _MetricGraph(h)
    a, b = g.node((R, 0.0)), g.node((-R, 0.0))
    g.arc(a, b, (0, 0), R, 0.0, math.pi)
    g.arc(b, a, (0, 0), R, math.pi, 2 * math.pi)
    return g, {"base": a, "antipode": b}


def spokes(m=4, h=None):
    """Segments of length 2^-i at angle 2^-i pi from the origin, i < m."""
    h = h or default_mesh()
    _require(int(m) == m and m >= 1, "spokes needs integer m >= 1")
    _require(2.0 ** -(m - 1) >= 4 * h, "shortest spoke must span at least 4 mesh steps")
    g = _MetricGraph(h)
    o = g.node((0.0, 0.0))
    for i in range(int(m)):
        r, th = 2.0**-i, math.pi * 2.0**-i
        tip = g.node((r * math.cos(th), r * math.sin(th)))
        g.segment(o, tip)
    return g, {"origin": o}


def tangent_circles(m=2, h=None):
    """Circles of radius 1/i through the origin, centred at (0, 1/i), i <= m."""
    h = h or default_mesh()
    _require(int(m) == m and m >= 1, "tangent_circles needs integer m >= 1")
    _require(math.pi / m >= 4 * h, "smallest circle too small for the mesh")
    g = _MetricGraph(h)
    o = g.node((0.0, 0.0))
    for i in range(1, int(m) + 1):
        r = 1.0 / i
        top = g.node((0.0, 2 * r))
        g.arc(o, top, (0.0, r), r, -math.pi / 2, math.pi / 2)
        g.arc(o, top, (0.0, r), r, -math.pi / 2, -3 * math.pi / 2)
    return g, {"origin": o}


def comb(m=None, h=None):
    """Unit axes joined by the diagonals x + y = 2^-i for i < m."""
    h = h or default_mesh()
    if m is None:
        # smallest diagonal loop below the 4h cut-detection scale
        m = 1
        while (1 + 1 / math.sqrt(2)) * 2.0 ** -(m - 1) >= 4 * h:
            m += 1
    _require(int(m) == m and m >= 1, "comb needs integer m >= 1")
    g = _MetricGraph(h)
    o = g.node((0.0, 0.0))
    marks = sorted({2.0**-i for i in range(int(m))} | {1.0})
    xs = [o] + [g.node((t, 0.0)) for t in marks]
    ys = [o] + [g.node((0.0, t)) for t in marks]
    for chain in (xs, ys):
        for a, b in zip(chain, chain[1:]):
            g.segment(a, b)
    for i in range(int(m)):
        j = marks.index(2.0**-i) + 1
        g.segment(xs[j], ys[j])
    return g, {"origin": o}


def circle_plus_ray(L=3.0, h=None):
    """Unit circle with the ray [1, 1 + L] x {0} attached at (1, 0)."""
    h = h or default_mesh()
    g = _MetricGraph(h)
    east, west = g.node((1.0, 0.0)), g.node((-1.0, 0.0))
    g.arc(east, west, (0, 0), 1.0, 0.0, math.pi)
    g.arc(east, west, (0, 0), 1.0, 0.0, -math.pi)
    tip = g.node((1.0 + L, 0.0))
    g.segment(east, tip)
    return g, {"west": west, "junction": east}


def ladder_teeth(m=8, h=None):
    """Base [0, 2] x {0} with vertical teeth {2/i} x [0, 2], i <= m."""
    h = h or default_mesh()
    _require(int(m) == m and m >= 1, "ladder_teeth needs integer m >= 1")
    _require(2 / m - 2 / (m + 1) >= 2 * h, "teeth closer than two mesh steps")
    g = _MetricGraph(h)
    xs = sorted({0.0} | {2.0 / i for i in range(1, int(m) + 1)})
    base = _segments_on_line(g, xs)
    for x, b in zip(xs, base):
        if x > 0:
            top = g.node((x, 2.0))
            g.segment(b, top)
    return g, {"corner": base[0]}


# -- lattice families ---------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _king_lattice(points, weights, h, meta, points_named):
    """King-graph space on integer lattice points (scaled by h)."""
    pts = np.asarray(points, dtype=np.int64)
    dim = pts.shape[1]
    lookup = {tuple(p): i for i, p in enumerate(pts.tolist())}
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=dim) if o > (0,) * dim]
    edges, lengths = [], []
    for off in offsets:
        step = h * math.sqrt(sum(abs(c) for c in off))
        for i, p in enumerate(pts.tolist()):
            j = lookup.get(tuple(a + b for a, b in zip(p, off)))
            if j is not None:
                edges.append((i, j))
                lengths.append(step)
    meta = dict(meta, measure_model="lebesgue",
                points={k: lookup[v] for k, v in points_named.items()})
    return DiscreteSpace([f"v{i}" for i in range(len(pts))], weights,
                         np.array(edges, dtype=np.int64).reshape(-1, 2), lengths, h,
                         coords=pts * h, meta=meta)


def grid(n=2, L=1.0, h=None):
    """King lattice on the cube [0, L]^n with cell-volume weights."""
    h = h or default_mesh(0.02)
    _require(int(n) == n and n >= 1, "grid needs integer n >= 1")
    k = round(L / h)
    _require(k >= 2 and abs(k * h - L) < 1e-9 * L, "grid needs L to be a multiple of h")
    axis = np.arange(k + 1)
    pts = np.array(list(itertools.product(axis, repeat=int(n))))
    per_axis = np.where((pts == 0) | (pts == k), h / 2, h)
    weights = per_axis.prod(axis=1)
    mid = tuple([k // 2] * int(n))
    return pts, weights, {"center": mid}, h


def _overlap(lo, hi, a, b):
    return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)


def three_pronged(h=None, bar=0.6, width=0.1, neck=0.6, neck_width=None):
    """T-bar and bottom lobe (rectangles) joined by a one-column neck.

    The bar [-bar, bar] x [0, width] holds two opposite prongs; the neck is
    the segment {0} x (-neck, 0) whose cells carry the area of a strip of
    width ``neck_width``; the lobe is [-bar, bar] x [-neck - width, -neck].
    """
    h = h or default_mesh()
    neck_width = h / 10 if neck_width is None else neck_width
    kb, kw, kn = round(bar / h), round(width / h), round(neck / h)
    _require(min(kb, kw, kn) >= 2, "three_pronged dimensions must span >= 2 mesh steps")
    _require(0 < neck_width <= h, "neck_width must lie in (0, h]")
    pts, weights = [], []

    def rect(y0):
        for i in range(-kb, kb + 1):
            for j in range(kw + 1):
                wx = h / 2 if abs(i) == kb else h
                wy = h / 2 if j in (0, kw) else h
                pts.append((i, y0 + j))
                weights.append(wx * wy)

    rect(0)
    for j in range(1, kn):
        pts.append((0, -j))
        weights.append(neck_width * h)
    rect(-kn - kw)
    return pts, weights, {"neck_top": (0, -1), "junction": (0, 0)}, h


def cusp(n=2, alpha=3.0, L=0.5, h=None):
    """Two-sided cusp {|x1| <= |x2|^alpha, |x2| <= L} with exact cell areas."""
    h = h or default_mesh()
    _require(n == 2, "cusp is generated for n = 2 only")
    _require(alpha > 0 and L > 0 and round(L / h) >= 4, "cusp needs alpha > 0 and L >= 4h")
    kL = round(L / h)
    width = lambda t: np.abs(t) ** alpha  # noqa: E731
    pts, weights = [], []
    # per row j: integrate the horizontal overlap over the cell's x2-range
    sub = 8
    for j in range(-kL, kL + 1):
        lo, hi = max((j - 0.5) * h, -L), min((j + 0.5) * h, L)
        edges_t = np.linspace(lo, hi, sub + 1)
        t = ((edges_t[:-1, None] + edges_t[1:, None]) / 2
             + (edges_t[1:, None] - edges_t[:-1, None]) / 2 * _GL_NODES[None, :]).ravel()
        wt = (((edges_t[1:] - edges_t[:-1]) / 2)[:, None] * _GL_WEIGHTS[None, :]).ravel()
        w = width(t)
        imax = int(math.ceil(float(w.max()) / h + 0.5))
        for i in range(-imax, imax + 1):
            area = float(np.dot(wt, _overlap((i - 0.5) * h, (i + 0.5) * h, -w, w)))
            if area > 0 or i == 0:
                pts.append((i, j))
                weights.append(area)
    return pts, weights, {"origin": (0, 0)}, h


FAMILIES = {
    "interval": interval,
    "path": path,
    "star": star,
    "cycle": cycle,
    "spokes": spokes,
    "tangent_circles": tangent_circles,
    "comb": comb,
    "circle_plus_ray": circle_plus_ray,
    "ladder_teeth": ladder_teeth,
    "grid": grid,
    "grid_Rn": grid,
    "three_pronged": three_pronged,
    "cusp": cusp,
}

_LATTICE = {"grid", "grid_Rn", "three_pronged", "cusp"}
_INT_PARAMS = {"d", "m", "n"}


def generate(spec: ZooSpec | str, **params) -> DiscreteSpace:
    """Build the space named by ``spec`` (a :class:`ZooSpec` or family name)."""
    if isinstance(spec, str):
        spec = ZooSpec(spec, params)
    elif params:
        spec = spec.with_params(**params)
    try:
        maker = FAMILIES[spec.family]
    except KeyError:
        raise ZooError(f"unknown family {spec.family!r}; known: {sorted(FAMILIES)}") from None
    kwargs = {}
    for key, value in spec.params.items():
        if value is None:
            continue
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ZooError(f"{spec.family}: parameter {key}={value!r} is not a number") from None
        if key in _INT_PARAMS:
            _require(value == int(value), f"{spec.family}: parameter {key} must be an integer")
            value = int(value)
        kwargs[key] = value
    try:
        built = maker(**kwargs)
    except TypeError as exc:
        raise ZooError(f"bad parameters for {spec.family}: {exc}") from None
    meta = {"family": spec.family, "params": dict(spec.params)}
    if spec.family in _LATTICE:
        pts, weights, named, h = built
        return _king_lattice(pts, weights, h, meta, named)
    g, named = built
    return g.build(meta, named)


def parse_zoo(text: str) -> ZooSpec:
    """Parse ``zoo:NAME?key=value&key=value`` (the ``zoo:`` prefix is optional)."""
    if text.startswith("zoo:"):
        text = text[4:]
    name, _, query = text.partition("?")
    params, seed = {}, None
    for key, value in parse_qsl(query, keep_blank_values=False):
        if key == "seed":
            seed = int(value)
        else:
            params[key] = value
    if name not in FAMILIES:
        raise ZooError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
    return ZooSpec(name, params, seed)
