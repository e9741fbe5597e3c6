"""Cross-theorem battery.

The theorems are proven statements, so a record whose hypotheses hold but
whose conclusion fails indicts the discretization or the implementation; it
is reported as a model violation and never as a refutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bishop_gromov import SamplingPlan, estimate_min_C
from .cuts import (LabelingError, cut_points, cut_set_accumulation_check, default_radius_grid,
                   diam_check, ends_at_scale, weak_branch_test)
from .poincare import estimate_CP, volume_decay_exponent
from .space import DiscreteSpace, ParameterError
from .zoo import ZooSpec, generate

__all__ = ["TheoremRecord", "SuiteResult", "calibrated_n", "theorem_suite"]

STATUSES = ("pass", "n/a", "model_violation")
SQRT2 = math.sqrt(2)


@dataclass
class TheoremRecord:
    name: str
    statement: str
    hypothesis: bool | None
    conclusion: bool | None
    status: str
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status}")


@dataclass
class SuiteResult:
    records: list
    min_C: float
    slack: float
    n: float
    cut_points: list

    @property
    def status(self) -> str:
        return "violations" if any(r.status == "model_violation" for r in self.records) else "pass"


def calibrated_n(space: DiscreteSpace) -> float:
    """1 for length-measure graphs, the lattice dimension for area/volume lattices."""
    if space.meta.get("measure_model") == "lebesgue":
        return float(space.coords.shape[1]) if space.coords is not None else 2.0
    return 1.0


def _record(name, statement, hyp, concl, detail):
    if hyp is None or hyp is False:
        status = "n/a"
    else:
        status = "pass" if concl else "model_violation"
    return TheoremRecord(name, statement, hyp, concl, status, detail)


def _sq_tol(C, slack):
    return C * C * ((1 + slack) ** 2 - 1)


def theorem_suite(space: DiscreteSpace, spec: ZooSpec | None = None, k: float = 0.0,
                  n: float | None = None, p: float = 2.0, seed: int = 0,
                  refinements: int = 3, max_points: int = 8) -> SuiteResult:
    """Run every cross-theorem check on ``space``.

    ``spec`` enables the refinement-based Poincaré check; without it that
    record is marked n/a.  ``n`` defaults to 1 for length-measure graphs and 2
    for area lattices.  Checks that need n > 1 use max(n, 2), which is legal
    because raising n only weakens the comparison inequality.
    """
    n = calibrated_n(space) if n is None else n
    n_delta = max(n, 2.0)
    plan = SamplingPlan(seed=seed)
    est = estimate_min_C(space, k, n, plan)
    C, slack = est.value, est.slack
    grid = default_radius_grid(space, count=4)
    profiles = cut_points(space, grid)
    degrees = [pr.degree_estimate for pr in profiles]
    max_deg = max(degrees, default=0)
    below_sqrt2 = C * (1 + slack) < SQRT2
    rng = np.random.default_rng(seed)
    if len(profiles) > max_points:
        pick = sorted(rng.choice(len(profiles), size=max_points, replace=False))
        high = [pr for pr in profiles if pr.degree_estimate >= 3]
        sample = list({pr.point: pr for pr in high + [profiles[i] for i in pick]}.values())
    else:
        sample = profiles
    recs = []
    base = {"min_C": C, "slack": slack, "n": n, "k": k}

    recs.append(_record(
        "degree_bound", "deg(x) <= C^2 + 1 at every local cut point", bool(profiles),
        max_deg <= C * C + 1 + _sq_tol(C, slack),
        dict(base, max_degree=max_deg, bound=C * C + 1)))

    graph = space.meta.get("measure_model") == "hausdorff1"
    recs.append(_record(
        "graph_degree_bound", "deg(x) <= C + 1 on graphs with length measure", graph and bool(profiles),
        max_deg <= C + 1 + C * slack, dict(base, max_degree=max_deg, bound=C + 1)))

    recs.append(_record(
        "degree_two", "deg(x) = 2 at every local cut point when C < sqrt(2)",
        below_sqrt2 and bool(profiles), all(d == 2 for d in degrees),
        dict(base, degrees=sorted(set(degrees)))))

    verdicts = {}
    if below_sqrt2:
        for pr in sample:
            l = max(pr.radii) / 2
            eps = max(4 * space.mesh, l / 4)
            try:
                verdicts[pr.point] = weak_branch_test(space, pr.point, l, eps)
            except ParameterError as exc:
                verdicts[pr.point] = f"skipped: {exc}"
    recs.append(_record(
        "weak_branching", "local cut points are weak branch points of all geodesics when C < sqrt(2)",
        below_sqrt2 and bool(sample),
        all(v != "not_weak_branch" for v in verdicts.values()),
        dict(base, verdicts={space.ids[x]: v for x, v in verdicts.items()})))

    recs.append(_diam_record(space, sample, k, n_delta, C, slack, base))

    pool = sorted({int(v) for v in space.meta.get("points", {}).values()}
                  | set(rng.choice(space.n, size=min(space.n, 16), replace=False).tolist()))
    eb = min(pool, key=space.eccentricity)
    R = space.eccentricity(eb) / 3
    ends = ends_at_scale(space, eb, R)
    recs.append(_record(
        "ends_bound", "number of ends <= C^2 + 1", True, ends <= C * C + 1 + _sq_tol(C, slack),
        dict(base, ends=ends, base_point=space.ids[eb], R=R)))

    recs.append(_line_record(space, grid, k, n_delta, C, slack, below_sqrt2, base))
    recs.append(_poincare_record(space, spec, profiles, p, refinements, seed))
    return SuiteResult(recs, C, slack, n, [pr.point for pr in profiles])


def _diam_record(space, sample, k, n, C, slack, base):
    """Checked directly when C < sqrt(2); otherwise its contrapositive at C = 1."""
    C_test = max(1.0, C) if C < SQRT2 else 1.0
    hits, checked = [], 0
    for pr in sample:
        for r in pr.r_cut_radii():
            try:
                rep = diam_check(space, pr.point, r, k, n, C_test)
            except ParameterError:
                continue
            checked += 1
            if rep.violated:
                hits.append({"point": space.ids[pr.point], "r": r, "diameters": rep.diameters,
                             "bound": rep.bound})
    detail = dict(base, C_test=C_test, checked=checked, violations=hits[:5])
    if not checked:
        return _record("sphere_diameter", "diam(O ∩ S_r(x)) <= (2 - delta) r", None, None, detail)
    if C * (1 + slack) < SQRT2:
        # hypothesis measured to hold: the bound must hold
        return _record("sphere_diameter", "diam(O ∩ S_r(x)) <= (2 - delta) r", True, not hits, detail)
    # contrapositive: a diameter violation at C_test requires BG to fail at C_test
    consistent = (not hits) or C > C_test
    detail["mode"] = "contrapositive"
    return _record("sphere_diameter", "diam(O ∩ S_r(x)) <= (2 - delta) r", True, consistent, detail)


def _line_record(space, grid, k, n, C, slack, below, base):
    name, stmt = "cut_points_in_line", "nearby triples of r-cut points stand in a line when C < sqrt(2)"
    if not below:
        return _record(name, stmt, False, None, base)
    r = max(grid)
    try:
        rep = cut_set_accumulation_check(space, r, k, n, max(1.0, C))
    except (ParameterError, LabelingError) as exc:
        return _record(name, stmt, True, False, dict(base, error=str(exc)))
    detail = dict(base, r=r, r_cut_points=len(rep.r_cut_points), triples=rep.triples_checked,
                  not_in_line=rep.not_in_line[:5], degree_violations=rep.degree_violations[:5])
    return _record(name, stmt, bool(rep.triples_checked), not rep.violated, detail)


def _poincare_record(space, spec, profiles, p, refinements, seed):
    name = "poincare_obstruction"
    stmt = "a cut point with mu(B_r)/r^p -> 0 rules out a (1,p) Poincaré inequality"
    if spec is None or not profiles:
        return _record(name, stmt, None, None, {"reason": "needs a zoo spec and a cut point"})
    named = space.meta.get("points", {})
    cut_set = {pr.point for pr in profiles}
    cands = [int(v) for v in named.values() if int(v) in cut_set] or [profiles[0].point]
    x = cands[0]
    try:
        fit = volume_decay_exponent(space, x)
    except ParameterError as exc:
        return _record(name, stmt, None, None, {"reason": str(exc)})
    detail = {"point": space.ids[x], "decay_exponent": fit.beta, "p": p}
    if fit.beta <= p:
        return _record(name, stmt, False, None, detail)
    R = space.eccentricity(x) * 0.8
    values = []
    h0 = space.mesh
    for j in range(refinements + 1):
        sp = generate(spec.with_params(h=h0 / 2 ** j))
        key = next((kk for kk, v in named.items() if int(v) == x), None)
        xj = sp.index(key) if key is not None else sp.nearest_vertex(space.coords[x])
        values.append(estimate_CP(sp, p, R, family=("u_N",), sample=[xj], radii=[R],
                                  seed=seed).value)
    growth = [b / a if a > 0 else math.inf for a, b in zip(values, values[1:])]
    detail.update(cp=values, growth=growth)
    return _record(name, stmt, True, all(g >= 1.5 for g in growth), detail)
