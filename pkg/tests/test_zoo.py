import math

import numpy as np
import pytest

from mmgeom import io
from mmgeom.space import distance_matrix, length_space_defect
from mmgeom.zoo import FAMILIES, ZooError, ZooSpec, default_mesh, generate, parse_zoo

COARSE = {
    "interval": dict(h=0.02),
    "path": dict(h=0.5),
    "star": dict(d=3, h=0.02),
    "cycle": dict(h=0.02),
    "spokes": dict(h=0.02),
    "tangent_circles": dict(h=0.05),
    "comb": dict(h=0.02),
    "circle_plus_ray": dict(h=0.05),
    "ladder_teeth": dict(m=4, h=0.01),
    "grid": dict(h=0.05),
    "grid_Rn": dict(n=3, h=0.25),
    "three_pronged": dict(h=0.05),
    "cusp": dict(h=0.05),
}


def test_every_family_listed():
    assert set(COARSE) == set(FAMILIES)


@pytest.mark.parametrize("family", sorted(COARSE))
def test_family_is_a_length_space(family):
    s = generate(family, **COARSE[family])
    assert s.total_measure > 0
    assert np.all(s.weights >= 0)
    assert length_space_defect(s) <= s.mesh
    for name in s.meta.get("points", {}):
        assert 0 <= s.index(name) < s.n


@pytest.mark.parametrize("family", ["star", "three_pronged", "tangent_circles"])
def test_generation_deterministic(family):
    a, b = generate(family, **COARSE[family]), generate(family, **COARSE[family])
    assert io.dumps(a) == io.dumps(b)


def test_interval_counts():
    s = generate("interval", h=1e-3)
    assert s.n == 1001
    assert abs(s.total_measure - 1) <= 1e-3


@pytest.mark.parametrize("family, params, expected", [
    ("star", dict(d=3, L=1.0, h=0.02), 3.0),
    ("cycle", dict(L=1.0, h=0.02), 1.0),
    ("grid", dict(h=0.05), 1.0),
    ("grid_Rn", dict(n=3, h=0.25), 1.0),
    # two-sided cusp area 2 * int_{-L}^{L} |t|^a dt = 4 L^(a+1) / (a+1)
    ("cusp", dict(alpha=3.0, L=0.5, h=0.05), 4 * 0.5**4 / 4),
    ("cusp", dict(alpha=1.0, L=0.5, h=0.05), 4 * 0.5**2 / 2),
    ("circle_plus_ray", dict(L=3.0, h=0.05), 2 * math.pi + 3.0),
])
def test_total_measures(family, params, expected):
    assert generate(family, **params).total_measure == pytest.approx(expected, rel=1e-9)


def test_tangent_circles_measure():
    # circles of circumference 2 pi / j for j = 1..m
    m = 3
    s = generate("tangent_circles", m=m, h=0.02)
    assert s.total_measure == pytest.approx(sum(2 * math.pi / j for j in range(1, m + 1)),
                                            rel=1e-9)


def test_star_arms():
    s = generate("star", d=5, L=2.0, h=0.1)
    c = s.index("center")
    assert len(s.neighbors(c)[0]) == 5
    assert s.eccentricity(c) == pytest.approx(2.0)


def test_three_pronged_geometry():
    s = generate("three_pronged", h=0.05)
    top, junction = s.index("neck_top"), s.index("junction")
    assert s.dist(top, junction) == pytest.approx(0.05)
    assert s.coords[junction].tolist() == [0.0, 0.0]


@pytest.mark.parametrize("family, params, pair", [
    ("interval", {}, ("left", "right")),
    ("star", dict(d=3), None),
    ("cycle", {}, ("base", "antipode")),
])
def test_refinement_convergence(family, params, pair):
    h = 0.02
    a, b = generate(family, h=h, **params), generate(family, h=h / 2, **params)
    assert abs(a.total_measure - b.total_measure) <= 2 * h
    if pair:
        da = a.dist(a.index(pair[0]), a.index(pair[1]))
        db = b.dist(b.index(pair[0]), b.index(pair[1]))
        assert abs(da - db) <= 2 * h


def test_grid_refinement():
    a, b = generate("grid", h=0.1), generate("grid", h=0.05)
    assert abs(a.total_measure - b.total_measure) <= 0.2
    corner = lambda s: s.nearest_vertex((0.0, 0.0))  # noqa: E731
    far = lambda s: s.nearest_vertex((1.0, 1.0))  # noqa: E731
    assert abs(a.dist(corner(a), far(a)) - b.dist(corner(b), far(b))) <= 0.2


def test_parse_zoo():
    spec = parse_zoo("zoo:star?d=4&L=2&seed=7")
    assert spec == ZooSpec("star", {"d": "4", "L": "2"}, 7)
    s = generate(spec.with_params(h=0.1))
    assert len(s.neighbors(s.index("center"))[0]) == 4
    assert parse_zoo("interval").family == "interval"


@pytest.mark.parametrize("bad", [
    lambda: generate("moebius"),
    lambda: parse_zoo("zoo:moebius"),
    lambda: generate("star", d=2.5),
    lambda: generate("interval", h=2.0),
    lambda: generate("cusp", n=3),
    lambda: generate("grid", L=1.0, h=0.3),
    lambda: generate("star", colour=1),
])
def test_invalid_parameters(bad):
    with pytest.raises(ZooError):
        bad()


def test_mesh_environment(monkeypatch):
    monkeypatch.setenv("MMGEOM_MESH", "0.05")
    assert default_mesh() == 0.05
    assert generate("interval").n == 21
    monkeypatch.delenv("MMGEOM_MESH")
    assert default_mesh(0.3) == 0.3


def test_generated_round_trip(tmp_path):
    s = generate("cusp", h=0.05)
    io.save(s, tmp_path / "c.json")
    t = io.load(tmp_path / "c.json")
    assert np.array_equal(distance_matrix(s), distance_matrix(t))
    assert t.meta["family"] == "cusp"
    assert t.index("origin") == s.index("origin")
