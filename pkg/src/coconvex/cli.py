"""Command-line front end.

Exit codes: 0 success, 1 inequality violated, 2 unreadable input,
3 geometric precondition violated, 4 solver did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
import warnings
from dataclasses import fields

import numpy as np

from . import __version__
from .core import (
    co_sum,
    coconvex_volume,
    cone_volume_measure,
    mixed_volume,
    support_height,
    surface_area_measure,
    truncate,
)
from .exceptions import DomainError, NonConvergence, ParseError
from .geometry import facet_simplices
from .inequalities import bm_check, minkowski_first_check
from .io import body_to_dict, load, measure_to_dict
from .oracles import mc_volume
from .solver import SolverConfig, exhaustion_experiment, solve_cone_volume, solve_surface

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_DOMAIN, EXIT_NONCONVERGENCE = 0, 1, 2, 3, 4
SEED_ENV = "COCONVEX_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _fmt(x) -> str:
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def _table(rows, header=None) -> str:
    rows = [[_fmt(c) for c in r] for r in rows]
    if header:
        rows.insert(0, list(header))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _vec(v) -> str:
    return "(" + ", ".join(f"{x:.10g}" for x in v) + ")"


def _measure_rows(mu):
    return [[_vec(u), float(m)] for u, m in zip(mu.directions, mu.masses)]


def _measure_csv(mu) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = mu.directions.shape[1] if len(mu) else 0
    w.writerow([f"u_{i + 1}" for i in range(n)] + ["mass"])
    for u, m in zip(mu.directions, mu.masses):
        w.writerow([repr(float(x)) for x in u] + [repr(float(m))])
    return buf.getvalue()


def _solver_config(args, scene) -> SolverConfig:
    names = {f.name for f in fields(SolverConfig)}
    unknown = set(scene.config) - names - {"lambda", "samples"}
    if unknown:
        raise ParseError(f"config: unknown keys {sorted(unknown)}")
    cfg = {k: v for k, v in scene.config.items() if k in names}
    if args.tol is not None:
        cfg["tol_residual"] = args.tol
    if args.max_iters is not None:
        cfg["max_iters"] = args.max_iters
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        return SolverConfig(**cfg)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"config: {exc}") from None


def _parse_stages(spec: str):
    try:
        return [[int(i) for i in part.split(",") if i.strip()] for part in spec.split(";") if part.strip()]
    except ValueError:
        raise ParseError(f"--stages: expected e.g. '0;0,1', got {spec!r}") from None


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human)


# ---------------------------------------------------------------------------
# subcommands


def cmd_volume(args, scene):
    body = scene.body(args.body)
    v = coconvex_volume(body)
    _emit(args, {"body": args.body, "volume": v}, _fmt(v))
    return EXIT_OK


def cmd_measures(args, scene):
    body = scene.body(args.body)
    S, M = surface_area_measure(body), cone_volume_measure(body)
    if args.csv:
        mu = S if args.csv == "surface" else M
        sys.stdout.write(_measure_csv(mu))
        return EXIT_OK
    human = (
        "surface area measure\n"
        + _table(_measure_rows(S), ["direction", "mass"])
        + "\n\ncone-volume measure\n"
        + _table(_measure_rows(M), ["direction", "mass"])
    )
    _emit(args, {"surface": measure_to_dict(S), "cone_volume": measure_to_dict(M)}, human)
    return EXIT_OK


def cmd_cosum(args, scene):
    s = co_sum(scene.body(args.a), scene.body(args.b))
    rows = [[_vec(u), float(f)] for u, f in zip(s.directions, s.offsets)]
    _emit(args, body_to_dict(s), _table(rows, ["direction", "f"]))
    return EXIT_OK


def cmd_mixedvol(args, scene):
    names = [x.strip() for x in args.bodies.split(",") if x.strip()]
    v = mixed_volume([scene.body(x) for x in names])
    _emit(args, {"bodies": names, "mixed_volume": v}, _fmt(v))
    return EXIT_OK


def cmd_check(args, scene):
    a, b = scene.body(args.a), scene.body(args.b)
    if args.kind == "bm":
        lam = args.lam if args.lam is not None else scene.config.get("lambda")
        if lam is None:
            raise ParseError("check bm needs --lambda")
        verdict = bm_check(a, b, float(lam))
    else:
        verdict = minkowski_first_check(a, b)
    rows = [[k, getattr(verdict, k)] for k in ("lhs", "rhs", "slack", "holds", "equality", "homothetic")]
    _emit(args, {"kind": args.kind, **verdict.as_dict()}, _table(rows))
    return EXIT_OK if verdict.holds else EXIT_VIOLATION


def cmd_solve(args, scene):
    cfg = _solver_config(args, scene)
    solve = solve_surface if args.problem == "surface" else solve_cone_volume
    try:
        report = solve(scene.cone, scene.measure(args.measure), cfg, strict=True)
        code = EXIT_OK
    except NonConvergence as exc:
        report, code = exc.report, EXIT_NONCONVERGENCE
        print(f"error: {exc}", file=sys.stderr)
    rows = [[_vec(u), float(f)] for u, f in zip(report.body.directions, report.f)]
    human = (
        _table(rows, ["direction", "f"])
        + "\n\n"
        + _table(
            [
                ["residual", report.residual],
                ["iterations", report.iterations],
                ["newton_steps", report.newton_steps],
                ["converged", report.converged],
            ]
        )
    )
    _emit(args, report.as_dict(), human)
    return code


def cmd_exhaust(args, scene):
    cfg = _solver_config(args, scene)
    res = exhaustion_experiment(scene.cone, scene.measure(args.measure), _parse_stages(args.stages), cfg)
    code = EXIT_OK if all(r.converged for r in res.reports) else EXIT_NONCONVERGENCE
    rows = [[j, r.residual, r.converged, " ".join(f"{x:.8g}" for x in r.f)] for j, r in enumerate(res.reports)]
    human = _table(rows, ["stage", "residual", "converged", "f"])
    human += "\n\nsupport distance\n" + _table([[f"{x:.3e}" for x in row] for row in res.distances])
    payload = {"stages": [r.as_dict() for r in res.reports], "distances": res.distances.tolist()}
    _emit(args, payload, human)
    return code


def cmd_oracle(args, scene):
    body = scene.body(args.body)
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get(SEED_ENV, scene.config.get("seed") or 0))
    samples = args.samples or int(scene.config.get("samples", 10**6))
    est = mc_volume(body, samples, seed, workers=args.workers)
    exact = coconvex_volume(body)
    rows = [["estimate", est.estimate], ["stderr", est.stderr], ["exact", exact], ["samples", est.samples], ["seed", est.seed]]
    payload = {"estimate": est.estimate, "stderr": est.stderr, "exact": exact, "samples": est.samples, "seed": est.seed}
    _emit(args, payload, _table(rows))
    return EXIT_OK


def off_mesh(body, t=None) -> str:
    """OFF text for the boundary of ``K cap C_t`` in R^3, outward triangles."""
    if body.dim != 3:
        raise DomainError(f"OFF export needs a body in R^3, got dimension {body.dim}")
    t = support_height(body) if t is None else float(t)
    P = truncate(body, t)
    center = P.vertices.mean(axis=0)
    tris = []
    for F in P.facets:
        for simplex in facet_simplices(P, F):
            i, j, k = simplex
            a, b, c = P.vertices[[i, j, k]]
            if np.cross(b - a, c - a) @ (a - center) < 0:
                j, k = k, j
            tris.append((i, j, k, F.tag))
    lines = ["OFF", f"{len(P.vertices)} {len(tris)} 0"]
    lines += [" ".join(repr(float(x)) for x in v) for v in P.vertices]
    lines += [f"3 {i} {j} {k}" for i, j, k, _ in tris]
    return "\n".join(lines) + "\n"


def cmd_export(args, scene):
    text = off_mesh(scene.body(args.body), args.t)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coconvex", description="Coconvex bodies in polyhedral cones.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-s", "--scene", required=True, help="scene file (JSON)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("volume", help="coconvex volume of a body")
    q.add_argument("body")
    q.set_defaults(func=cmd_volume)

    q = sub.add_parser("measures", help="surface area and cone-volume measures")
    q.add_argument("body")
    q.add_argument("--csv", choices=["surface", "conevolume"], help="write one measure as CSV")
    q.set_defaults(func=cmd_measures)

    q = sub.add_parser("cosum", help="co-sum of two bodies")
    q.add_argument("a")
    q.add_argument("b")
    q.set_defaults(func=cmd_cosum)

    q = sub.add_parser("mixedvol", help="mixed volume of n comma-separated bodies")
    q.add_argument("bodies")
    q.set_defaults(func=cmd_mixedvol)

    q = sub.add_parser("check", help="inequality checks")
    q.add_argument("kind", choices=["bm", "mink1"])
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--lambda", dest="lam", type=float)
    q.set_defaults(func=cmd_check)

    for name, func, help_ in [
        ("solve", cmd_solve, "solve a Minkowski problem"),
        ("exhaust", cmd_exhaust, "staged cone-volume solves"),
    ]:
        q = sub.add_parser(name, help=help_)
        if name == "solve":
            q.add_argument("problem", choices=["surface", "conevolume"])
        q.add_argument("--measure", required=True)
        if name == "exhaust":
            q.add_argument("--stages", required=True, help="nested atom index sets, e.g. '0;0,1'")
        q.add_argument("--tol", type=float)
        q.add_argument("--max-iters", type=int)
        q.add_argument("--seed", type=int)
        q.set_defaults(func=func)

    q = sub.add_parser("oracle", help="independent checks")
    q.add_argument("kind", choices=["mc"])
    q.add_argument("body")
    q.add_argument("--samples", type=int)
    q.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or 0")
    q.add_argument("--workers", type=int, default=1)
    q.set_defaults(func=cmd_oracle)

    q = sub.add_parser("export", help="mesh export")
    q.add_argument("format", choices=["off"])
    q.add_argument("body")
    q.add_argument("--t", type=float, help="truncation height (default: support height)")
    q.add_argument("-o", "--out")
    q.set_defaults(func=cmd_export)
    return p


def run_command(argv=None) -> int:
    """Run the CLI and return the exit code instead of exiting."""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                args = build_parser().parse_args(argv)
                scene = load(args.scene)
                return args.func(args, scene)
            finally:
                for w in caught:
                    print(f"warning: {w.message}", file=sys.stderr)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


def main(argv=None) -> None:
    sys.exit(run_command(argv))
