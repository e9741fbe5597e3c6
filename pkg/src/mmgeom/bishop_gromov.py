"""Sampled verification of the generalized Bishop-Gromov inequality.

For a base x, a set U inside the annulus A_{r1,r2}(x) and its geodesic
shadow S in A_{s1,s2}(x) the inequality reads

    mu(U) / mu(S) <= C * V(r1, r2) / V(s1, s2).

The smallest C making one configuration pass is its ``implied_C``.  Every
check here is sampled: an empty violation list means "no violation found".
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cuts import ball_components, cut_points, default_radius_grid
from .space import (DiscreteSpace, ParameterError, Region, ShadowParams, components,
                    explicit_region, geodesic_shadow, region)
from .volumes import volume_ratio

__all__ = [
    "FAMILIES",
    "BGReport",
    "SamplingPlan",
    "MinCEstimate",
    "bg_ratio",
    "iter_configurations",
    "check_bg",
    "estimate_min_C",
    "usual_bg_reports",
    "check_usual_bg",
    "doubling_estimate",
    "model_slack",
]

FAMILIES = ("full_annulus", "annulus_components", "ball_caps", "random_subsets", "cut_stubs")

# declared extra slack for lattice models, whose king-move metric only
# approximates the Euclidean one
LATTICE_SLACK = 0.08


def model_slack(space: DiscreteSpace) -> float:
    return LATTICE_SLACK if space.meta.get("measure_model") == "lebesgue" else 0.0


@dataclass
class BGReport:
    base: int
    U: Region
    params: ShadowParams
    k: float
    n: float
    lhs: float
    rhs_unit: float
    implied_C: float
    shadow: Region
    mesh_slack: float
    family: str = "explicit"

    @property
    def infinite(self) -> bool:
        return math.isinf(self.implied_C)

    def passes(self, C: float) -> bool:
        return self.implied_C <= C

    def key(self):
        p = self.params
        return (self.family, self.base, p.s1, p.s2, p.r1, p.r2, tuple(self.U.members[:4].tolist()))


@dataclass(frozen=True)
class SamplingPlan:
    """Deterministic recipe for the configurations tested by the checker.

    ``radius_grid`` gives outer radii; ``bases`` fixes base vertices (ids or
    indices) and otherwise ``n_bases`` are drawn with ``seed``.
    """

    seed: int = 0
    radius_grid: tuple | None = None
    bases: tuple | None = None
    n_bases: int = 8
    families: tuple = FAMILIES
    per_family: int = 3
    stub_eps: float | None = None
    max_stub_points: int = 24
    estimate_max_slack: float = 0.1

    def __post_init__(self):
        unknown = set(self.families) - set(FAMILIES)
        if unknown:
            raise ParameterError(f"unknown set families {sorted(unknown)}")
        if self.n_bases < 1 or self.per_family < 1:
            raise ParameterError("plan counts must be positive")

    def grid(self, space):
        if self.radius_grid is not None:
            return tuple(float(r) for r in self.radius_grid)
        g = default_radius_grid(space, count=6)
        return tuple(r for r in g if r >= 10 * space.mesh) or (g[-1],)

    def base_points(self, space):
        if self.bases is not None:
            return [space.index(b) for b in self.bases]
        rng = np.random.default_rng(self.seed)
        named = sorted(int(v) for v in space.meta.get("points", {}).values())
        count = min(space.n, self.n_bases)
        drawn = rng.choice(space.n, size=count, replace=False).tolist()
        return list(dict.fromkeys(named + sorted(drawn)))[: max(count, len(named))]

    def with_families(self, families):
        return dataclasses.replace(self, families=tuple(families))


@dataclass
class MinCEstimate:
    value: float
    slack: float
    witness: BGReport | None
    n_configs: int
    cut_points_used: list = field(default_factory=list)

    def __float__(self):
        return self.value


def _mesh_slack(space, params: ShadowParams) -> float:
    return 4 * space.mesh / min(params.s2 - params.s1, params.r2 - params.r1)


def bg_ratio(space: DiscreteSpace, base, U, params: ShadowParams, k: float, n: float,
             family: str = "explicit") -> BGReport:
    """Evaluate one configuration (base, U, radii)."""
    base = space.index(base)
    if not isinstance(U, Region):
        U = explicit_region(space, U)
    if U.raw_measure <= 0:
        raise ParameterError("U must have positive measure")
    d = space.row(base)[U.members]
    tau = space.tau if params.tau is None else params.tau
    if d.min() < params.r1 - tau or d.max() > params.r2 + tau:
        raise ParameterError(
            f"U is not inside the annulus ({params.r1}, {params.r2}) around {base} within tau")
    shadow = geodesic_shadow(space, base, U, params)
    rhs = volume_ratio(k, n, params.r1, params.r2, params.s1, params.s2)
    if shadow.raw_measure > 0:
        lhs = U.raw_measure / shadow.raw_measure
        implied = lhs / rhs
    else:
        lhs = implied = math.inf
    return BGReport(base, U, params, k, n, lhs, rhs, implied, shadow,
                    _mesh_slack(space, params), family)


def _windows(space, r):
    """(s1, s2, r1, r2) windows for an outer radius r; widths are >= 10h."""
    w = max(r / 4, 10 * space.mesh)
    out = [(0.0, r / 2, r / 2, r), (max(0.0, r - 2 * w), r - w, r - w, r)]
    out.append((max(0.0, r / 2 - w / 2), r / 2 + w / 2, r - w, r))
    seen, res = set(), []
    for s1, s2, r1, r2 in out:
        if min(s2 - s1, r2 - r1) < 10 * space.mesh * 0.999:
            continue
        if (s1, s2, r1, r2) not in seen:
            seen.add((s1, s2, r1, r2))
            res.append(ShadowParams(s1, s2, r1, r2))
    return res


def _stub_configs(space, plan, cut_list, rng):
    """U = epsilon-stubs around a cut point, base placed on one of its branches."""
    eps_grid = (plan.stub_eps,) if plan.stub_eps is not None else (10 * space.mesh, 40 * space.mesh)
    for prof in cut_list:
        x = prof.point
        r = max(prof.radii)
        l = min(max(20 * space.mesh, r / 4), r / 2)
        comps = [m for m, far, _ in ball_components(space, x, r) if far]
        dx = space.row(x)
        for i, eps in itertools.product(range(len(comps)), eps_grid):
            Oi = comps[i]
            base = int(Oi[np.argmin(np.abs(dx[Oi] - l))])
            others = np.concatenate([m for j, m in enumerate(comps) if j != i]) if len(comps) > 1 \
                else np.empty(0, np.int64)
            stub = others[dx[others] < eps - space.guard]
            lp = space.dist(base, x)
            if stub.size == 0 or lp <= eps:
                continue
            params = ShadowParams(lp - eps, lp, lp, lp + eps)
            db = space.row(base)[stub]
            stub = stub[(db >= lp - space.tau) & (db <= lp + eps + space.tau)]
            if stub.size:
                yield base, explicit_region(space, stub, "explicit", base, lp, lp + eps,
                                            note=f"stubs around {x}"), params


def _stub_points(space, plan, rng):
    profiles = cut_points(space, default_radius_grid(space, count=4))
    high = [p for p in profiles if p.degree_estimate >= 3]
    low = [p for p in profiles if p.degree_estimate == 2]
    if len(low) > plan.max_stub_points:
        pick = rng.choice(len(low), size=plan.max_stub_points, replace=False)
        low = [low[i] for i in sorted(pick)]
    return high + low


def iter_configurations(space: DiscreteSpace, plan: SamplingPlan):
    """Yield (family, base, U, params) in a deterministic order."""
    rng = np.random.default_rng(plan.seed)
    bases = plan.base_points(space)
    grid = plan.grid(space)
    fams = set(plan.families)
    for x in bases:
        for r in grid:
            for p in _windows(space, r):
                ann = region(space, "annulus", x, p.r1, p.r2)
                if ann.raw_measure <= 0:
                    continue
                if "full_annulus" in fams:
                    yield "full_annulus", x, ann, p
                if "annulus_components" in fams:
                    comps = components(space, ann)
                    if len(comps) > 1:
                        for c in comps[: plan.per_family]:
                            if c.raw_measure > 0:
                                yield "annulus_components", x, c, p
                if "ball_caps" in fams:
                    rho = max((p.r2 - p.r1) / 2, 20 * space.mesh)
                    for z in rng.choice(ann.members, size=min(plan.per_family, ann.members.size),
                                        replace=False):
                        dz = space.row(int(z))
                        cap = ann.members[dz[ann.members] < rho]
                        cap_reg = explicit_region(space, cap, "explicit", x, p.r1, p.r2)
                        if cap_reg.raw_measure > 0:
                            yield "ball_caps", x, cap_reg, p
                if "random_subsets" in fams:
                    for _ in range(plan.per_family):
                        keep = ann.members[rng.random(ann.members.size) < 0.5]
                        sub = explicit_region(space, keep, "explicit", x, p.r1, p.r2)
                        if sub.raw_measure > 0:
                            yield "random_subsets", x, sub, p
    if "cut_stubs" in fams:
        for base, U, p in _stub_configs(space, plan, _stub_points(space, plan, rng), rng):
            yield "cut_stubs", base, U, p


def _all_reports(space, k, n, plan):
    reports = [bg_ratio(space, x, U, p, k, n, fam) for fam, x, U, p in iter_configurations(space, plan)]
    reports.sort(key=BGReport.key)
    return reports


def check_bg(space: DiscreteSpace, k: float, n: float, C: float,
             plan: SamplingPlan | None = None) -> list[BGReport]:
    """Sampled configurations with implied_C > C (1 + mesh_slack + model slack)."""
    plan = plan or SamplingPlan()
    extra = model_slack(space)
    return [r for r in _all_reports(space, k, n, plan)
            if r.implied_C > C * (1 + r.mesh_slack + extra)]


def estimate_min_C(space: DiscreteSpace, k: float, n: float,
                   plan: SamplingPlan | None = None) -> MinCEstimate:
    """Largest implied_C over the plan; cut-point stubs are always included.

    Apart from the stubs, only configurations whose mesh slack is at most
    ``plan.estimate_max_slack`` enter the maximum (all of them if none
    qualifies): narrow windows carry boundary-vertex errors of the same order
    as their slack.
    """
    plan = plan or SamplingPlan()
    if "cut_stubs" not in plan.families:
        plan = plan.with_families(plan.families + ("cut_stubs",))
    reports = _all_reports(space, k, n, plan)
    stubs = [r for r in reports if r.family == "cut_stubs"]
    rest = [r for r in reports if r.family != "cut_stubs"]
    tight = [r for r in rest if r.mesh_slack <= plan.estimate_max_slack]
    reports = stubs + (tight or rest)
    if not reports:
        return MinCEstimate(1.0, 0.0, None, 0)
    best = max(reports, key=lambda r: (r.implied_C, -r.mesh_slack))
    stub_points = sorted({int(r.U.note.split()[-1]) for r in reports if r.family == "cut_stubs"})
    value = max(1.0, best.implied_C)
    return MinCEstimate(value, best.mesh_slack + model_slack(space), best, len(reports), stub_points)


def usual_bg_reports(space: DiscreteSpace, k: float, n: float, plan: SamplingPlan | None = None):
    """Ball-ratio form: mu(B_R)/mu(B_r) against V(0,R)/V(0,r) for r < R in the grid."""
    plan = plan or SamplingPlan()
    grid = sorted(plan.grid(space))
    out = []
    for x in plan.base_points(space):
        for i, r in enumerate(grid):
            small = region(space, "ball", x, r)
            if small.raw_measure <= 0:
                continue
            for R in grid[i + 1:]:
                big = region(space, "ball", x, R)
                lhs = big.raw_measure / small.raw_measure
                rhs = volume_ratio(k, n, 0.0, R, 0.0, r)
                params = ShadowParams(0.0, r, 0.0, R)
                out.append(BGReport(x, big, params, k, n, lhs, rhs, lhs / rhs, small,
                                    4 * space.mesh / r, "balls"))
    return out


def check_usual_bg(space: DiscreteSpace, k: float, n: float, C: float,
                   plan: SamplingPlan | None = None) -> list[BGReport]:
    extra = model_slack(space)
    return [r for r in usual_bg_reports(space, k, n, plan)
            if r.implied_C > C * (1 + r.mesh_slack + extra)]


def doubling_estimate(space: DiscreteSpace, R: float, sample=None, seed: int = 0,
                      radii=None) -> float:
    """max mu(B_2r(x)) / mu(B_r(x)) over sampled x and r <= R/2."""
    if space.n == 1:
        return 1.0
    if sample is None:
        rng = np.random.default_rng(seed)
        sample = rng.choice(space.n, size=min(space.n, 16), replace=False)
    elif isinstance(sample, int):
        rng = np.random.default_rng(seed)
        sample = rng.choice(space.n, size=min(space.n, sample), replace=False)
    if radii is None:
        lo = min(4 * space.mesh, R / 2)
        radii = np.geomspace(lo, R / 2, 6)
    best = 1.0
    for x in sample:
        x = space.index(x if isinstance(x, str) else int(x))
        for r in radii:
            small = region(space, "ball", x, r).raw_measure
            if small > 0:
                best = max(best, region(space, "ball", x, 2 * r).raw_measure / small)
    return best
