"""Command-line entry point: ``mmgeom COMMAND --space SOURCE [options]``.

Exit status: 0 when every check passes (or the command only reports),
1 when violations were found, 2 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .bishop_gromov import (FAMILIES, SamplingPlan, check_bg, check_usual_bg, estimate_min_C,
                            model_slack)
from .cuts import cut_points, default_radius_grid, diam_check, ends_at_scale
from .dimension import dimension_estimate, gh_distance_small
from .poincare import FIELD_FAMILIES, estimate_CP, volume_decay_exponent
from .report import encode, envelope, format_table
from .space import DiscreteSpace
from .suite import theorem_suite
from .zoo import ZooSpec, generate, parse_zoo

__all__ = ["main", "build_parser", "load_source", "run"]


class UsageError(ValueError):
    pass


def load_source(source: str) -> tuple[DiscreteSpace, ZooSpec | None]:
    """A ``zoo:NAME?params`` spec or a path to a space file."""
    if source.startswith("zoo:"):
        spec = parse_zoo(source)
        return generate(spec), spec
    return io.load(source), None


def _floats(text):
    if text is None:
        return None
    return tuple(float(v) for v in text.split(",") if v.strip())


def _plan(args, space):
    bases = tuple(args.bases.split(",")) if getattr(args, "bases", None) else None
    fams = tuple(args.families.split(",")) if getattr(args, "families", None) else FAMILIES
    return SamplingPlan(seed=args.seed, radius_grid=_floats(getattr(args, "radii", None)),
                        bases=bases, families=fams)


def _bg_record(rep, space, C=None):
    rec = encode(rep, space)
    if C is not None:
        rec["pass"] = rep.passes(C)
    return rec


def cmd_generate(args, space, spec):
    recs = [{"vertices": space.n, "edges": int(space.adjacency.nnz // 2), "mesh": space.mesh,
             "total_measure": space.total_measure, "family": space.meta.get("family", "file")}]
    if args.out_space:
        io.save(space, args.out_space)
        recs[0]["written"] = str(args.out_space)
    return recs, {"status": "pass"}, {}


def cmd_check_bg(args, space, spec):
    plan = _plan(args, space)
    fn = check_usual_bg if args.usual else check_bg
    bad = fn(space, args.k, args.n, args.C, plan)
    recs = [_bg_record(r, space, args.C) for r in bad]
    summary = {"status": "violations" if bad else "pass", "violations": len(bad),
               "note": "sampled check: no violation found is not a proof" if not bad else ""}
    return recs, summary, {"mesh_slack": "4h/min(s2-s1, r2-r1)", "model_slack": model_slack(space)}


def cmd_min_c(args, space, spec):
    est = estimate_min_C(space, args.k, args.n, _plan(args, space))
    rec = {"min_C": est.value, "slack": est.slack, "configurations": est.n_configs,
           "stub_cut_points": [space.ids[i] for i in est.cut_points_used]}
    if est.witness is not None:
        rec["witness"] = _bg_record(est.witness, space)
    return [rec], {"status": "pass", "min_C": est.value}, {"slack": est.slack}


def cmd_cut_points(args, space, spec):
    grid = _floats(args.radii) or default_radius_grid(space)
    profiles = cut_points(space, grid)
    recs = []
    for pr in profiles:
        rec = encode(pr, space)
        rec["point"] = space.ids[pr.point]
        rec["r_cut_verdicts"] = {str(r): v.tag for r, v in pr.r_cut_verdicts.items()}
        recs.append(rec)
    degs = [pr.degree_estimate for pr in profiles]
    return recs, {"status": "pass", "cut_points": len(profiles), "max_degree": max(degs, default=0)}, {}


def cmd_diam_bound(args, space, spec):
    rep = diam_check(space, args.point, args.r, args.k, args.n, args.C)
    rec = encode(rep, space)
    rec["point"] = space.ids[rep.point]
    return [rec], {"status": "violations" if rep.violated else "pass"}, {}


def cmd_ends(args, space, spec):
    count = ends_at_scale(space, args.base, args.R)
    return [{"base": args.base, "R": args.R, "ends": count}], {"status": "pass", "ends": count}, {}


def cmd_poincare(args, space, spec):
    fams = tuple(args.family.split(",")) if args.family else FIELD_FAMILIES
    centers = args.centers.split(",") if args.centers else None
    est = estimate_CP(space, args.p, args.R, family=fams, sample=centers,
                      radii=_floats(args.radii), seed=args.seed)
    rec = {"CP": est.value, "configurations": est.n_configs}
    if est.witness is not None:
        rec["witness"] = encode(est.witness, space)
        rec["witness"]["center"] = space.ids[est.witness.center]
    return [rec], {"status": "pass", "CP": est.value}, {}


def cmd_decay(args, space, spec):
    fit = volume_decay_exponent(space, args.point, _floats(args.radii))
    return [encode(fit)], {"status": "pass", "beta": fit.beta}, {}


def cmd_dim(args, space, spec):
    prof = dimension_estimate(space, _floats(args.scales), seed=args.seed)
    return [encode(prof)], {"status": "pass", "dimension": prof.slope}, {}


def cmd_gh(args, space, spec):
    other, _ = load_source(args.space2)
    b = gh_distance_small(space, other, budget=args.budget, heuristic=args.heuristic, seed=args.seed)
    rec = {"lower": b.lower, "upper": b.upper, "exact": b.exact}
    if b.correspondence is not None:
        rec["correspondence"] = [[space.ids[i], other.ids[j]] for i, j in b.correspondence.pairs]
    return [rec], {"status": "pass", "lower": b.lower, "upper": b.upper}, {}


def cmd_theorem_suite(args, space, spec):
    res = theorem_suite(space, spec, k=args.k, n=args.n, p=args.p, seed=args.seed)
    recs = [encode(r, space) for r in res.records]
    counts = {s: sum(r.status == s for r in res.records) for s in ("pass", "n/a", "model_violation")}
    summary = {"status": res.status, **counts, "min_C": res.min_C}
    if res.status != "pass":
        summary["note"] = "model violation: inspect discretization and slack"
    return recs, summary, {"bg_slack": res.slack}


COMMANDS = {
    "generate": cmd_generate,
    "check-bg": cmd_check_bg,
    "min-c": cmd_min_c,
    "cut-points": cmd_cut_points,
    "diam-bound": cmd_diam_bound,
    "ends": cmd_ends,
    "poincare": cmd_poincare,
    "decay": cmd_decay,
    "dim": cmd_dim,
    "gh": cmd_gh,
    "theorem-suite": cmd_theorem_suite,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmgeom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--space", required=True, help="zoo:NAME?key=value&... or a space file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "table"), default="json")
        return p

    p = add("generate", "build a space and optionally save it")
    p.add_argument("--out-space", help="path for the space file")

    for name, help_text in (("check-bg", "sampled generalized Bishop-Gromov check"),
                            ("min-c", "estimate the smallest constant C")):
        p = add(name, help_text)
        p.add_argument("--k", type=float, default=0.0)
        p.add_argument("--n", type=float, default=1.0)
        if name == "check-bg":
            p.add_argument("--C", type=float, default=1.0)
            p.add_argument("--usual", action="store_true", help="ball-ratio form instead")
        p.add_argument("--radii", help="comma-separated outer radii")
        p.add_argument("--bases", help="comma-separated base vertices")
        p.add_argument("--families", help="comma-separated set families")

    p = add("cut-points", "local cut points with degrees and r-cut verdicts")
    p.add_argument("--radii")

    p = add("diam-bound", "sphere-diameter bound at an r-cut point")
    p.add_argument("--point", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--n", type=float, default=2.0)
    p.add_argument("--C", type=float, default=1.0)

    p = add("ends", "far-reaching components outside a ball")
    p.add_argument("--base", required=True)
    p.add_argument("--R", type=float, required=True)

    p = add("poincare", "estimate the Poincaré constant")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--family", help=f"comma-separated subset of {','.join(FIELD_FAMILIES)}")
    p.add_argument("--centers")
    p.add_argument("--radii")

    p = add("decay", "volume decay exponent at a point")
    p.add_argument("--point", required=True)
    p.add_argument("--radii")

    p = add("dim", "covering-number dimension estimate")
    p.add_argument("--scales")

    p = add("gh", "Gromov-Hausdorff distance bounds")
    p.add_argument("--space2", required=True)
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--heuristic", action="store_true")

    p = add("theorem-suite", "cross-theorem battery")
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--p", type=float, default=2.0)
    return parser


def run(argv=None) -> tuple[int, dict]:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in vars(args).items() if k not in ("out", "format")}
    try:
        space, spec = load_source(args.space)
        records, summary, slacks = COMMANDS[args.command](args, space, spec)
    except (ValueError, OSError) as exc:
        env = envelope(config, [], {"status": "error", "error": f"{type(exc).__name__}: {exc}"})
        return 2, env
    env = envelope(config, records, summary, slacks)
    return (1 if summary.get("status") == "violations" else 0), env


def main(argv=None) -> int:
    status, env = run(argv)
    args = build_parser().parse_args(argv)
    text = json.dumps(env, indent=2) + "\n" if args.format == "json" else format_table(env)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if status == 2:
        sys.stderr.write(env["summary"]["error"] + "\n")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
