"""Command line entry point: ``polyplank <subcommand> ...``.

Reports are JSON on stdout (``"schema": 1``, seed echoed), a one-line
summary goes to stderr.  Exit codes: 0 certified, 2 suspect or check
failed, 1 input error (nothing on stdout).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bernstein, corollaries, covering, homogenization
from .distance import DistanceConfig, brute_force_bounds, closest_point
from .errors import OptimizationError, PlankError
from .io import decode_vector, dumps
from .maximizer import CERTIFIED, MaximizerConfig, find_witness
from .objective import PlankInstance
from .poly import MultiPoly, TrigPoly, trig_root_order

EXIT_OK, EXIT_INPUT, EXIT_SUSPECT = 0, 1, 2


class InputError(PlankError):
    pass


def _load_json(source: str):
    """Parse ``source`` as a path, falling back to inline JSON text."""
    path = Path(source)
    if path.exists():
        text, where = path.read_text(), str(path)
    elif source.lstrip().startswith(("{", "[")):
        text, where = source, "<inline>"
    else:
        raise InputError(f"{source}: no such file")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _with_source(source: str, fn):
    try:
        return fn()
    except PlankError as exc:
        raise InputError(f"{source}: {exc}") from exc


def parse_instance(path: str, exploratory: bool | None = None, normalize: bool = False):
    """Load a plank instance, a vector configuration or a cylinder list from JSON."""
    data = _load_json(path)
    if isinstance(data, dict) and "domain" in data:
        return _with_source(path, lambda: PlankInstance.from_json(data, exploratory))
    if isinstance(data, dict) and "vectors" in data:
        return _with_source(path, lambda: corollaries.VectorConfig.from_json(data, normalize))
    if isinstance(data, dict) and "cylinders" in data:
        data = data["cylinders"]
    if isinstance(data, list):
        return _with_source(path, lambda: [covering.Cylinder.from_json(c, f"cylinders[{i}]") for i, c in enumerate(data)])
    raise InputError(f"{path}: unrecognised document (expected an instance, vectors or cylinders)")


def _expect(obj, kind, path: str, what: str):
    if not isinstance(obj, kind):
        raise InputError(f"{path}: expected {what}")
    return obj


def _config(args) -> MaximizerConfig:
    kw = {"seed": args.seed, "oracle": args.oracle}
    if args.starts is not None:
        kw["starts"] = args.starts
    if args.tol is not None:
        kw["margin_tol"] = args.tol
    return MaximizerConfig(**kw)


def _emit(report: dict, summary: str, code: int) -> int:
    print(dumps(report))
    print(summary, file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_witness(args) -> int:
    inst = _expect(parse_instance(args.instance, True if args.exploratory else None), PlankInstance,
                   args.instance, "a plank instance")
    config = _config(args)
    rep = find_witness(inst, config, DistanceConfig(seed=args.seed))
    out = rep.to_json()
    out["budget"], out["budget_limit"] = inst.budget, inst.budget_limit
    code = EXIT_OK if rep.status == CERTIFIED else EXIT_SUSPECT
    return _emit(out, f"{rep.status}: min margin {min(rep.margins):.3e} over {len(rep.items)} items", code)


def cmd_covering(args) -> int:
    cyl = _expect(parse_instance(args.cylinders), list, args.cylinders, "a list of cylinders")
    res = covering.uncovered_witness(cyl, args.radius, _config(args))
    out = res.to_json()
    out["seed"] = args.seed
    if res.status == covering.NOT_VIOLATED:
        return _emit(out, f"{res.status}: sum delta^2 = {res.width_sq_sum:.6g} >= R^2", EXIT_OK)
    code = EXIT_OK if res.found else EXIT_SUSPECT
    return _emit(out, f"{res.status}: min margin {min(res.margins):.3e}", code)


def _trig_from_json(data) -> TrigPoly:
    if not isinstance(data, dict) or "a" not in data:
        raise InputError('trigonometric polynomial JSON needs {"a": [...], "b": [...]}')
    a = decode_vector(data["a"], "a")
    b = decode_vector(data["b"], "b") if data.get("b") else None
    if np.iscomplexobj(a) or (b is not None and np.iscomplexobj(b)):
        raise InputError("trigonometric coefficients must be real")
    return TrigPoly(a, b)


def cmd_bernstein(args) -> int:
    if args.action == "verify":
        if args.poly is None:
            raise InputError("bernstein verify needs --poly")
        q = _trig_from_json(_load_json(args.poly))
        k = args.k if args.k is not None else trig_root_order(q, 0.0)
        rep = bernstein.verify_lemma(q, k)
        out = rep.to_json()
        out["seed"] = args.seed
        out["bernstein_ratio"] = bernstein.bernstein_inequality_check(q)
        code = EXIT_OK if rep.holds else EXIT_SUSPECT
        return _emit(out, f"t0 = {rep.t0:.12g}, bounds {rep.bound_a:.6g} / {rep.bound_b:.6g}", code)
    if args.n is None or args.k is None:
        raise InputError("bernstein needs --n and --k")
    a, b = bernstein.lemma_bounds(args.n, args.k)
    return _emit({"schema": 1, "n": args.n, "k": args.k, "bound_a": a, "bound_b": b, "seed": args.seed},
                 f"bound_a = {a:.12g}, bound_b = {b:.12g}", EXIT_OK)


def _vectors(args) -> corollaries.VectorConfig:
    return _expect(parse_instance(args.vectors, normalize=args.normalize), corollaries.VectorConfig,
                   args.vectors, "a vector configuration")


def _vector_emit(res, args, label: str) -> int:
    out = res.to_json()
    out["seed"] = args.seed
    code = EXIT_OK if res.holds else EXIT_SUSPECT
    return _emit(out, f"{label}: {'holds' if res.holds else 'FAILED'}", code)


def cmd_span_avoid(args) -> int:
    vc = _vectors(args)
    res = corollaries.span_avoidance_witness(vc.vectors, args.k, _config(args))
    return _vector_emit(res, args, f"min distance {res.min_distance:.10g} vs bound {res.bound:.10g}")


def cmd_many_vectors(args) -> int:
    vc = _vectors(args)
    res = corollaries.many_vectors_witness(vc.vectors, _config(args), seed=args.seed)
    return _vector_emit(res, args, f"min distance {res.min_distance:.10g} vs bound {res.bound:.10g}")


def cmd_polarization(args) -> int:
    vc = _vectors(args)
    kw = {"seed": args.seed, "starts": args.starts or 256}
    res = corollaries.polarization_witness(vc.vectors, vc.shifts, MaximizerConfig(**kw))
    return _vector_emit(res, args, f"product {res.value:.10g} vs bound {res.bound:.10g}")


def cmd_steinhaus(args) -> int:
    vc = _vectors(args)
    res = corollaries.steinhaus_witness(vc.vectors, seed=args.seed)
    out = res.to_json()
    out["seed"] = args.seed
    out["d"] = vc.d
    ok = res.norm_sq >= vc.d - 1e-9
    return _emit(out, f"|u|^2 = {res.norm_sq:.10g} (d = {vc.d})", EXIT_OK if ok else EXIT_SUSPECT)


def cmd_appendix_check(args) -> int:
    inst = _expect(parse_instance(args.instance, True), PlankInstance, args.instance, "a plank instance")
    if inst.radius is None:
        raise InputError("appendix-check needs a complex_ball instance")
    try:
        schedule = [float(s) for s in args.delta0.split(",")]
    except ValueError as exc:
        raise InputError(f"--delta0: {exc}") from exc
    grid = homogenization.make_grid(inst.polys, inst.radius, args.grid_points, args.seed)
    rep = homogenization.convergence_report(inst.polys, inst.deltas, inst.radius, schedule, grid)
    out = rep.to_json()
    out["seed"] = args.seed
    code = EXIT_OK if rep.passed else EXIT_SUSPECT
    errs = ", ".join(f"{e:.3e}" for e in rep.errors)
    return _emit(out, f"sup errors {errs}", code)


def cmd_oracle_distance(args) -> int:
    poly = _with_source(args.poly, lambda: MultiPoly.from_json(_load_json(args.poly)))
    point = _with_source("--point", lambda: decode_vector(_load_json(args.point), "point"))
    if poly.field == "complex" or np.iscomplexobj(point):
        poly, point = poly.as_complex(), point.astype(complex)
    bounds = brute_force_bounds(poly, point, args.resolution)
    fast = closest_point(poly, point, DistanceConfig(seed=args.seed))
    out = {"schema": 1, "seed": args.seed, "lower": bounds.lower, "upper": bounds.upper,
           "resolution": bounds.resolution, "cells": bounds.cells, "fast_distance": fast.distance}
    agree = bounds.lower - 2 * bounds.diameter <= fast.distance <= bounds.upper + 2 * bounds.diameter
    out["agree"] = agree
    return _emit(out, f"oracle [{bounds.lower:.6g}, {bounds.upper:.6g}], fast path {fast.distance:.6g}",
                 EXIT_OK if agree else EXIT_SUSPECT)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (echoed in the report)")
    common.add_argument("--starts", type=int, default=None, help="multistart count (default 64*d)")
    common.add_argument("--tol", type=float, default=None, help="margin tolerance for certification")
    common.add_argument("--oracle", action="store_true", help="cross-check distances by subdivision when d <= 2")
    common.add_argument("--exploratory", action="store_true", help="allow budgets above the theorem limit")

    parser = argparse.ArgumentParser(prog="polyplank", description="Polynomial plank witnesses and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("witness", parents=[common], help="witness point for a plank instance")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("covering", parents=[common], help="uncovered point of a ball")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--cylinders", required=True)
    p.set_defaults(func=cmd_covering)

    p = sub.add_parser("bernstein", parents=[common], help="maximiser bounds for trigonometric polynomials")
    p.add_argument("action", nargs="?", choices=["verify"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--poly", help='file or inline JSON {"a": [...], "b": [...]}')
    p.set_defaults(func=cmd_bernstein)

    for name, func, helptext in (("span-avoid", cmd_span_avoid, "point far from all k-spans"),
                                 ("many-vectors", cmd_many_vectors, "point far from n lines"),
                                 ("polarization", cmd_polarization, "product of linear forms"),
                                 ("steinhaus", cmd_steinhaus, "dual-basis phase combination")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--vectors", required=True)
        p.add_argument("--normalize", action="store_true", help="rescale input vectors to unit length")
        if name == "span-avoid":
            p.add_argument("--k", type=int, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("appendix-check", parents=[common], help="homogenised objective convergence")
    p.add_argument("--instance", required=True)
    p.add_argument("--delta0", default="10,100,1000")
    p.add_argument("--grid-points", type=int, default=100)
    p.set_defaults(func=cmd_appendix_check)

    p = sub.add_parser("oracle-distance", parents=[common], help="subdivision bounds on a distance")
    p.add_argument("--poly", required=True)
    p.add_argument("--point", required=True, help="JSON list, [re, im] pairs for complex")
    p.add_argument("--resolution", type=float, default=1e-3)
    p.set_defaults(func=cmd_oracle_distance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OptimizationError as exc:
        return _emit({"schema": 1, "seed": args.seed, "status": "optimization_suspect", "error": str(exc)},
                     f"optimization_suspect: {exc}", EXIT_SUSPECT)
    except (PlankError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
