import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmgeom.cuts import (
    LabelingError, ball_components, branch_point_test, cut_points, cut_profile,
    cut_set_accumulation_check, default_radius_grid, diam_check, ends_at_scale,
    is_r_cut_point, stands_in_line, weak_branch_test,
)
from mmgeom.space import ParameterError
from mmgeom.volumes import DomainError
from mmgeom.zoo import generate


@pytest.fixture(scope="module")
def circle_ray():
    return generate("circle_plus_ray", h=0.01)


@pytest.fixture(scope="module")
def tangent():
    return generate("tangent_circles", h=0.01)


def at(space, x, y=0.0):
    return space.nearest_vertex((x, y))


def test_default_grid(interval):
    g = default_radius_grid(interval, at(interval, 0.5))
    assert g[0] == pytest.approx(4 * interval.mesh)
    assert g[-1] == pytest.approx(0.125)
    assert list(g) == sorted(g)


def test_interval_third(interval_fine):
    s = interval_fine
    x = at(s, 1 / 3)
    grid = tuple(np.round(np.arange(0.05, 0.55, 0.01), 10))
    prof = cut_profile(s, x, grid)
    assert prof.degree_estimate == 2 and prof.is_local_cut
    for r, v in prof.r_cut_verdicts.items():
        if r > 1 / 3 + s.mesh:
            assert v.tag == "fail(iii)"
        elif r < 1 / 3 - s.mesh:
            assert v.passed


def test_interval_endpoint_not_cut(interval):
    assert not cut_profile(interval, "left").is_local_cut


@pytest.mark.parametrize("d", [3, 4, 5])
def test_star_center_degree(d):
    s = generate("star", d=d, h=0.01)
    assert cut_profile(s, "center").degree_estimate == d


def test_circle_plus_ray(circle_ray):
    s = circle_ray
    assert is_r_cut_point(s, "west", math.pi / 2).passed
    for r in (math.pi, 3.5):
        assert is_r_cut_point(s, "west", r).tag == "fail(ii)"


def test_tangency_point(tangent):
    assert cut_profile(tangent, "origin").degree_estimate == 4


def test_comb_origin_not_cut():
    s = generate("comb", h=0.01)
    assert not cut_profile(s, "origin").is_local_cut


def test_cycle_points_are_cut(cycle):
    prof = cut_profile(cycle, 0)
    assert prof.degree_estimate == 2


def test_radius_below_mesh_zone(interval):
    with pytest.raises(ParameterError, match="4h"):
        cut_profile(interval, 5, [interval.mesh])
    with pytest.raises(ParameterError):
        is_r_cut_point(interval, 5, 2 * interval.mesh)


def test_ball_components_flags(interval):
    x = at(interval, 0.5)
    comps = ball_components(interval, x, 0.1)
    assert len(comps) == 2
    assert all(far and meets for _, far, meets in comps)
    near_end = ball_components(interval, at(interval, 0.05), 0.1)
    assert [meets for _, _, meets in near_end].count(False) == 1


SPACES = [("interval", dict(h=0.01)), ("star", dict(d=3, h=0.01)),
          ("circle_plus_ray", dict(h=0.02)), ("tangent_circles", dict(h=0.02))]


@settings(max_examples=25, deadline=None)
@given(which=st.integers(0, len(SPACES) - 1), seed=st.integers(0, 10_000))
def test_profile_invariants(which, seed):
    name, params = SPACES[which]
    s = generate(name, **params)
    x = int(np.random.default_rng(seed).integers(s.n))
    prof = cut_profile(s, x)
    assert prof.degree_estimate >= 1
    passed = [prof.r_cut_verdicts[r].passed for r in sorted(prof.radii)]
    # passing at r forces passing at every smaller grid radius
    for i, ok in enumerate(passed):
        if ok:
            assert all(passed[:i])


def test_cut_points_cover_star():
    s = generate("star", d=3, h=0.02)
    found = {p.point: p.degree_estimate for p in cut_points(s)}
    assert found[s.index("center")] == 3
    assert all(deg == 2 for v, deg in found.items() if v != s.index("center"))


def test_ends():
    big = generate("star", d=4, L=100, h=1.0)
    assert ends_at_scale(big, "center", 10) == 4
    assert ends_at_scale(generate("path", h=0.1), "left", 2) == 1
    assert ends_at_scale(generate("interval", h=0.01), "left", 0.6) == 0


def test_diam_check(interval):
    rep = diam_check(interval, at(interval, 0.5), 0.1, 0, 2, 1)
    assert rep.delta == pytest.approx(1 / 12)
    assert not rep.violated
    assert max(rep.diameters) <= 2 * interval.tau
    with pytest.raises(DomainError):
        diam_check(interval, at(interval, 0.5), 0.1, 0, 2, math.sqrt(2))
    with pytest.raises(ParameterError, match="not an r-cut point"):
        diam_check(interval, at(interval, 0.5), 0.6, 0, 2, 1)


def test_three_pronged_diameter_violation():
    s = generate("three_pronged", h=0.01)
    prof = cut_profile(s, "neck_top")
    assert prof.degree_estimate == 2
    reps = [diam_check(s, "neck_top", r, 0, 2, 1) for r in prof.r_cut_radii()]
    assert reps and all(rep.violated for rep in reps)


def test_branching(interval, tangent):
    x = at(interval, 0.5)
    assert branch_point_test(interval, x, 0.3, [0.05, 0.1]) == "not_branch"
    assert weak_branch_test(interval, x, 0.3, [0.05, 0.1]) == "weak_branch"
    assert branch_point_test(tangent, "origin", 0.5, [0.05, 0.1]) == "branch"
    assert weak_branch_test(tangent, "origin", 0.5, [0.05, 0.1]) == "not_weak_branch"
    with pytest.raises(ParameterError, match="anchor"):
        weak_branch_test(interval, x, 5.0, 0.1)


def test_star_center_branch():
    s = generate("star", d=3, h=0.01)
    assert branch_point_test(s, "center", 0.5, [0.05, 0.1]) == "branch"
    assert weak_branch_test(s, "center", 0.5, [0.05]) == "not_weak_branch"


def test_triples_on_interval(interval):
    r = 0.2
    x1, x2, x3 = (at(interval, t) for t in (0.45, 0.5, 0.52))
    arr = stands_in_line(interval, x3, x1, x2, r)
    assert arr.stands_in_line
    a, b, c = arr.triple
    assert interval.dist(a, b) < interval.dist(a, c)


def test_tripod_triple_not_in_line(tripod):
    c = tripod.index("center")
    dc = tripod.row(c)
    ang = np.arctan2(tripod.coords[:, 1], tripod.coords[:, 0]) % (2 * np.pi)
    pick = []
    for k, t in enumerate((0.05, 0.07, 0.09)):
        arm = np.flatnonzero(np.isclose(ang, 2 * np.pi * k / 3, atol=1e-6))
        pick.append(int(arm[np.argmin(np.abs(dc[arm] - t))]))
    arr = stands_in_line(tripod, *pick, 0.3)
    assert not arr.stands_in_line


def test_labeling_error(interval):
    far = [at(interval, t) for t in (0.2, 0.5, 0.8)]
    with pytest.raises(LabelingError):
        stands_in_line(interval, *far, 0.1)
    with pytest.raises(LabelingError, match="exactly two"):
        stands_in_line(generate("star", d=3, h=0.01), "center", 3, 4, 0.1)


def test_accumulation_interval(interval_fine):
    rep = cut_set_accumulation_check(interval_fine, 0.3)
    assert rep.gate == pytest.approx(0.3 / 72)
    assert rep.triples_checked > 100
    assert not rep.violated


def test_accumulation_tripod_has_no_degree_clusters():
    rep = cut_set_accumulation_check(generate("star", d=3, h=0.002), 0.3)
    assert rep.degree_violations == []
    assert not rep.not_in_line
