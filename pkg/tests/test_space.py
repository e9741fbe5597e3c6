import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmgeom import io
from mmgeom.space import (
    DiscreteSpace, ParameterError, ShadowParams, SpaceError, components, distance_matrix,
    explicit_region, geodesic_shadow, is_convex, length_space_defect, nonbranching_witnesses,
    region, rescale, restrict,
)
from mmgeom.zoo import generate


def graph(n_vertices, edges, lengths=None, mesh=1.0, weights=None):
    lengths = np.ones(len(edges)) if lengths is None else lengths
    weights = np.ones(n_vertices) if weights is None else weights
    return DiscreteSpace([str(i) for i in range(n_vertices)], weights, edges, lengths, mesh)


def at(space, x, y=0.0):
    return space.nearest_vertex((x, y))


# -- distances ---------------------------------------------------------------

def test_path_graph_distance():
    s = graph(3, [(0, 1), (1, 2)])
    assert s.dist(0, 2) == 2.0


def test_single_vertex_matrix():
    s = graph(1, np.zeros((0, 2)))
    assert distance_matrix(s).shape == (1, 1)
    assert distance_matrix(s)[0, 0] == 0.0


def test_four_cycle_opposite():
    s = graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    D = distance_matrix(s)
    assert D[0, 2] == 2.0 and D[1, 3] == 2.0


def test_matrix_is_a_metric(tripod):
    D = distance_matrix(generate("star", d=3, h=0.05))
    assert np.allclose(D, D.T)
    assert np.all(np.diag(D) == 0)
    off = D + np.eye(len(D))
    assert np.all(off > 0)
    # triangle inequality on every triple
    assert np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :] + 1e-12)


def test_disconnected_rejected():
    with pytest.raises(SpaceError, match="not a length space model"):
        graph(4, [(0, 1), (2, 3)])


@pytest.mark.parametrize("kwargs, match", [
    (dict(lengths=[1.0, -1.0]), "nonpositive length"),
    (dict(weights=[1.0, -1.0, 1.0]), "negative"),
    (dict(weights=[0.0, 0.0, 0.0]), "total measure"),
])
def test_validation_errors(kwargs, match):
    with pytest.raises(SpaceError, match=match):
        graph(3, [(0, 1), (1, 2)], **kwargs)


def test_self_loop_and_duplicate_ids():
    with pytest.raises(SpaceError):
        graph(2, [(0, 0), (0, 1)])
    with pytest.raises(SpaceError, match="unique"):
        DiscreteSpace(["a", "a"], [1, 1], [(0, 1)], [1.0], 1.0)


# -- regions -----------------------------------------------------------------

def test_interval_ball_measure(interval):
    b = region(interval, "ball", at(interval, 0.5), 0.2)
    assert abs(b.measure - 0.4) <= 2 * interval.mesh
    assert b.measure == pytest.approx(interval.weights[b.members].sum(), abs=0)


def test_zero_ball_empty(interval):
    assert region(interval, "ball", 0, 0.0).empty


def test_tripod_closed_ball_whole(tripod):
    c = tripod.index("center")
    assert len(region(tripod, "closed_ball", c, 1.0)) == tripod.n


def test_annulus_members_strictly_inside(tripod):
    c = tripod.index("center")
    a = region(tripod, "annulus", c, 0.2, 0.5)
    d = tripod.row(c)[a.members]
    assert np.all((d > 0.2) & (d < 0.5))


def test_sphere_tolerance(interval):
    x = at(interval, 0.5)
    s = region(interval, "sphere", x, 0.3)
    d = interval.row(x)[s.members]
    assert np.all(np.abs(d - 0.3) <= interval.tau)


def test_region_errors(interval):
    with pytest.raises(ParameterError):
        region(interval, "annulus", 0, 0.5, 0.2)
    with pytest.raises(ParameterError):
        region(interval, "ball", 0, -1.0)
    with pytest.raises(ParameterError):
        region(interval, "blob", 0, 0.1)


def test_shadow_params_ordering():
    ShadowParams(0.1, 0.2, 0.3, 0.4)
    for bad in [(0.2, 0.1, 0.3, 0.4), (0.1, 0.2, 0.05, 0.4), (0.1, 0.5, 0.3, 0.4)]:
        with pytest.raises(ParameterError):
            ShadowParams(*bad)


def test_sphere_measure_shrinks():
    # the tolerance sphere carries vanishing measure as the mesh and tau go to 0
    masses = []
    for h in (0.02, 0.01, 0.005):
        s = generate("grid", h=h)
        x = s.nearest_vertex((0.5, 0.5))
        masses.append(region(s, "sphere", x, 0.3).measure)
    assert masses[0] > masses[1] > masses[2]
    line = [region(generate("interval", h=h), "sphere", 0, 0.5).measure
            for h in (0.01, 0.005, 0.0025)]
    assert line[0] > line[1] > line[2]


# -- components --------------------------------------------------------------

def test_interval_third_two_components(interval):
    x = at(interval, 1 / 3)
    assert len(components(interval, region(interval, "ball", x, 0.1), [x])) == 2


def test_tripod_three_components(tripod):
    c = tripod.index("center")
    assert len(components(tripod, region(tripod, "closed_ball", c, 0.5), [c])) == 3


def test_cycle_ball_two_components(cycle):
    x = 0
    assert len(components(cycle, region(cycle, "ball", x, 0.3), [x])) == 2


def test_components_empty_input(interval):
    assert components(interval, explicit_region(interval, []), []) == []


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0.05, 0.9), t=st.floats(0.0, 1.0), drop=st.integers(0, 5))
def test_components_partition(tripod, r, t, drop):
    c = tripod.index("center")
    reg = region(tripod, "closed_ball", c, r)
    rng = np.random.default_rng(drop)
    excluded = set(rng.choice(tripod.n, size=drop, replace=False).tolist()) | {c}
    parts = components(tripod, reg, excluded)
    union = np.concatenate([p.members for p in parts]) if parts else np.array([], int)
    assert len(union) == len(set(union.tolist()))
    assert set(union.tolist()) == set(reg.members.tolist()) - excluded
    total = sum(tripod.weights[p.members].sum() for p in parts)
    assert total == pytest.approx(tripod.weights[sorted(set(reg.members.tolist()) - excluded)].sum(),
                                  rel=1e-12)


# -- geodesic shadows --------------------------------------------------------

def test_interval_shadow(interval):
    U = explicit_region(interval, [at(interval, t) for t in np.arange(0.51, 0.6, 0.01)])
    sh = geodesic_shadow(interval, 0, U, ShadowParams(0.3, 0.4, 0.5, 0.6))
    d = interval.row(0)[sh.members]
    assert np.all((d > 0.3) & (d < 0.4))
    assert abs(sh.measure - 0.1) <= 2 * interval.mesh


def test_tripod_stub_shadow(tripod):
    h = tripod.mesh
    c = tripod.index("center")
    dc = tripod.row(c)
    arms = components(tripod, region(tripod, "closed_ball", c, 1.0), [c])
    l, eps = 0.3, 10 * h
    base = arms[0].members[np.argmin(np.abs(dc[arms[0].members] - l))]
    stubs = [m for arm in arms[1:] for m in arm.members if 0 < dc[m] < eps]
    U = explicit_region(tripod, stubs)
    sh = geodesic_shadow(tripod, base, U, ShadowParams(l - eps, l, l, l + eps))
    assert set(sh.members.tolist()) <= set(arms[0].members.tolist()) | {c}
    assert abs(sh.measure - eps) <= 3 * h
    assert abs(U.measure - 2 * eps) <= 3 * h


def test_adjacent_vertex_shadow():
    s = graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    U = explicit_region(s, [4])
    sh = geodesic_shadow(s, 0, U, ShadowParams(0.0, 4.0, 3.5, 4.5, tau=0.0))
    assert sh.members.tolist() == [1, 2, 3]


def test_empty_shadow_for_empty_U(interval):
    sh = geodesic_shadow(interval, 0, explicit_region(interval, []), ShadowParams(0.1, 0.2, 0.3, 0.4))
    assert sh.empty


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), s1=st.floats(0.05, 0.3), w=st.floats(0.05, 0.2))
def test_shadow_in_annulus_and_between(tripod, seed, s1, w):
    rng = np.random.default_rng(seed)
    x = int(rng.integers(tripod.n))
    dx = tripod.row(x)
    params = ShadowParams(s1, s1 + w, s1 + w, s1 + 2 * w)
    ring = np.flatnonzero((dx > params.r1) & (dx < params.r2))
    if ring.size == 0:
        return
    U = explicit_region(tripod, rng.choice(ring, size=min(5, ring.size), replace=False))
    sh = geodesic_shadow(tripod, x, U, params)
    ann = region(tripod, "annulus", x, params.s1, params.s2)
    assert sh.issubset(ann)
    for y in sh.members:
        excess = dx[y] + tripod.row(y)[U.members] - dx[U.members]
        assert excess.min() <= tripod.tau + 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_shadow_monotone(tripod, seed):
    rng = np.random.default_rng(seed)
    x = int(rng.integers(tripod.n))
    dx = tripod.row(x)
    params = ShadowParams(0.1, 0.2, 0.3, 0.5)
    ring = np.flatnonzero((dx > 0.3) & (dx < 0.5))
    if ring.size < 2:
        return
    big = rng.choice(ring, size=min(10, ring.size), replace=False)
    small = big[: max(1, len(big) // 2)]
    a = geodesic_shadow(tripod, x, explicit_region(tripod, small), params)
    b = geodesic_shadow(tripod, x, explicit_region(tripod, big), params)
    assert a.issubset(b)


# -- defect, branching, convexity --------------------------------------------

def test_defect_interval(interval):
    assert length_space_defect(interval) <= interval.mesh / 2 + 1e-12


def test_defect_single_edge():
    s = graph(2, [(0, 1)])
    assert length_space_defect(s) == 0.5


def test_defect_cycle():
    s = generate("cycle", h=0.02)
    assert length_space_defect(s) <= s.mesh


def test_nonbranching():
    assert nonbranching_witnesses(generate("interval", h=0.05)) == []
    found = nonbranching_witnesses(generate("star", d=3, h=0.05), limit=5)
    assert found
    s = generate("star", d=3, h=0.05)
    D = distance_matrix(s)
    y, x0, x1, x2 = found[0]
    assert abs(D[x0, y] - D[x0, x1] / 2) <= s.exact_tol
    assert D[x1, x2] > s.exact_tol
    c = generate("cycle", h=0.02)
    assert nonbranching_witnesses(c, max_scale=0.25) == []


def test_convexity(interval, tripod):
    sub = [at(interval, t) for t in np.arange(0.2, 0.41, 0.01)]
    assert is_convex(interval, sub)
    c = generate("cycle", h=0.05)
    n = c.n
    arcs = list(range(0, 3)) + list(range(n // 2, n // 2 + 3))
    assert not is_convex(c, arcs)
    arm = components(tripod, region(tripod, "closed_ball", tripod.index("center"), 1.0),
                     [tripod.index("center")])[0]
    assert is_convex(tripod, list(arm.members) + [tripod.index("center")])
    with pytest.raises(ParameterError):
        is_convex(interval, [])


def test_restrict(interval):
    sub = [at(interval, t) for t in np.arange(0.2, 0.41, 0.01)]
    r = restrict(interval, sub)
    assert r.n == len(sub)
    assert r.total_measure == pytest.approx(interval.weights[sub].sum())
    with pytest.raises(SpaceError, match="non-connected"):
        restrict(interval, [0, interval.n - 1])


# -- rescaling ---------------------------------------------------------------

def test_rescale_identity(tripod):
    r = rescale(tripod, 1, 1)
    assert np.array_equal(distance_matrix(r), distance_matrix(tripod))
    assert r.total_measure == tripod.total_measure


def test_rescale_interval_length(interval):
    r = rescale(interval, 2, 1)
    left, right = r.index("left"), r.index("right")
    assert r.dist(left, right) == pytest.approx(2.0)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.1, 10), b=st.floats(0.1, 10), r=st.floats(0.05, 0.8))
def test_rescale_covariance(a, b, r):
    s = generate("star", d=3, h=0.05)
    t = rescale(s, a, b)
    assert np.allclose(distance_matrix(t), a * distance_matrix(s), rtol=1e-12)
    c = s.index("center")
    reg_s = region(s, "closed_ball", c, r)
    reg_t = region(t, "closed_ball", c, a * r)
    assert np.array_equal(reg_s.members, reg_t.members)
    assert reg_t.measure == pytest.approx(b * reg_s.measure, rel=1e-12)


def test_rescale_errors(interval):
    for a, b in [(0, 1), (1, -1)]:
        with pytest.raises(ParameterError):
            rescale(interval, a, b)


# -- file format -------------------------------------------------------------

def test_round_trip_exact(tmp_path):
    s = rescale(generate("star", d=3, h=0.1 / 3), math.pi, 1 / 7)
    path = tmp_path / "s.json"
    io.save(s, path)
    t = io.load(path)
    assert t.ids == s.ids
    assert np.array_equal(t.weights, s.weights)
    assert np.array_equal(t.lengths, s.lengths)
    assert np.array_equal(t.edges, s.edges)
    assert (t.mesh, t.tau, t.measure_scale) == (s.mesh, s.tau, s.measure_scale)
    assert np.array_equal(distance_matrix(t), distance_matrix(s))
    assert io.dumps(t) == io.dumps(s)


def test_load_errors():
    doc = {"vertices": [{"id": "a", "w": 1}, {"id": "b", "w": 1}],
           "edges": [{"u": "a", "v": "b", "len": -1}], "mesh": 1}
    with pytest.raises(io.SpaceFileError, match="'a', 'b'"):
        io.from_document(doc)
    doc["edges"] = []
    with pytest.raises(io.SpaceFileError, match="not a length space model"):
        io.from_document(doc)
    with pytest.raises(io.SpaceFileError, match="missing field"):
        io.from_document({"vertices": []})
    with pytest.raises(io.SpaceFileError, match="line 1"):
        io.loads("{not json")
