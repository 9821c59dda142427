"""Command-line front end: ``bpplab <command> [options]``.

Every command prints a JSON report (keys sorted, no timestamps) and exits
with 0 when all checks pass or match their expectations, 1 on a failed
verification and 2 on a usage error. ``--config file.json`` supplies option
values by their long names (dashes or underscores); explicit flags win and
unknown keys are rejected. ``BPP_LAB_THREADS`` caps BLAS threads when
threadpoolctl is installed.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys

import numpy as np

from . import barrier as bar
from . import counterexamples as cx
from . import fdlab, geometry
from .domains import Ball
from .errors import DomainError, NotFoundError, SolverError
from .operator import FAMILIES, coefficient_family, growth_check
from .weightfn import RadialWeight


class UsageError(Exception):
    pass


# -- option syntax ----------------------------------------------------------

def _floats(text, what):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None


def parse_weight(text):
    """``constant:<v>``, ``power:<c>,<alpha>`` or ``file:<csv>``."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "constant":
            (v,) = _floats(rest, "weight")
            return RadialWeight.constant(v)
        if kind == "power":
            c, alpha = _floats(rest, "weight")
            return RadialWeight.power(c, alpha)
        if kind == "file":
            return RadialWeight.from_csv(rest)
    except (ValueError, OSError) as exc:
        raise UsageError(f"bad weight {text!r}: {exc}") from None
    raise UsageError(f"unknown weight syntax {text!r}")


def parse_grid(text):
    """``annulus:R,eps,Nr,Nt[,q]``, ``interval:a,b,N[,q]`` or ``rectangle:lo1,hi1,N1,lo2,hi2,N2,...``."""
    kind, _, rest = text.partition(":")
    vals = _floats(rest, "grid")
    try:
        if kind == "annulus" and len(vals) in (4, 5):
            q = vals[4] if len(vals) == 5 else 0.9
            return fdlab.PolarAnnulus(vals[0], vals[1], int(vals[2]), int(vals[3]), q=q)
        if kind == "interval" and len(vals) in (3, 4):
            q = vals[3] if len(vals) == 4 else 1.0
            return fdlab.interval_grid(vals[0], vals[1], int(vals[2]), q)
        if kind == "rectangle" and len(vals) >= 3 and len(vals) % 3 == 0:
            triples = np.asarray(vals).reshape(-1, 3)
            return fdlab.rectangle_grid(triples[:, 0], triples[:, 1], triples[:, 2].astype(int))
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    raise UsageError(f"unknown grid syntax {text!r}")


def _clean(obj):
    """Replace non-finite floats by strings so the report stays strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# -- commands -----------------------------------------------------------------

def cmd_barrier(a):
    weight = parse_weight(a.weight)
    b = bar.Barrier.build(a.n, a.R, a.m, weight, eps=a.eps)
    ball = Ball((0.0,) * a.n, a.R)
    coeffs = coefficient_family(a.coeffs, a.n, ball, weight,
                                **({"max_depth": b.eps, "seed": a.seed} if a.coeffs == "adversarial" else {}))
    if coeffs.certificate is None:
        coeffs = coeffs.with_certificate(growth_check(coeffs, weight, ball, max_depth=b.eps, seed=a.seed))
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = bar.residual_check(b, coeffs, seed=a.seed, count=a.samples)
    report = {"barrier": b.to_json(), "coeffs": a.coeffs, "certified": res.certified,
              "residual": res.to_json()}
    return report, res.passed


def cmd_verify_operator(a):
    weight = parse_weight(a.weight)
    n = a.n
    center = tuple(_floats(a.center, "center")) if a.center else (0.0,) * n
    ball = Ball(center, a.R)
    params = json.loads(a.params) if a.params else {}
    if a.coeffs == "adversarial":
        params.setdefault("seed", a.seed)
        params.setdefault("n_samples", a.samples)
        if a.max_depth is not None:
            params.setdefault("max_depth", a.max_depth)
    try:
        coeffs = coefficient_family(a.coeffs, n, ball, weight, **params)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    cert = coeffs.certificate or growth_check(coeffs, weight, ball, n_samples=a.samples,
                                              seed=a.seed, max_depth=a.max_depth)
    passed = cert.passed
    report = {"coeffs": a.coeffs, "certificate": cert.to_json()}
    if a.expect is not None:
        report["expected_pass"] = a.expect == "pass"
        return report, passed == (a.expect == "pass")
    return report, passed


def _load_scene(text):
    if text in geometry.SCENES:
        return geometry.example_scene(text)
    try:
        with open(text) as fh:
            return geometry.SingularSetScene.from_json(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load scene {text!r}: {exc}") from None


def cmd_outward_ball(a):
    scene = _load_scene(a.scene)
    hs = _floats(a.h, "resolutions")
    runs = []
    for h in hs:
        entry = {"search": geometry.outward_ball_search(scene, h).to_json()}
        if a.falsify:
            entry["falsify"] = geometry.falsify_outward_ball(scene, h=h).to_json()
        runs.append(entry)
    report = {"scene": scene.to_json() if a.full_scene else scene.name or a.scene, "runs": runs}
    ok = True
    if a.expect is not None:
        want = a.expect == "found"
        ok = all((r["search"]["status"] == "found") == want for r in runs)
        report["expected"] = a.expect
    return report, ok


def _solve(a):
    grid = parse_grid(a.grid)
    weight = parse_weight(a.weight)
    if isinstance(grid, fdlab.PolarAnnulus):
        ball = Ball(tuple(grid.center), grid.R)
        outer_v, inner_v = _floats(a.boundary, "boundary values")
        mid = grid.R - 0.5 * grid.eps

        def data(X):
            return np.where(np.linalg.norm(X - grid.center, axis=1) > mid, outer_v, inner_v)
    else:
        lo = np.array([ax[0] for ax in grid.axes])
        hi = np.array([ax[-1] for ax in grid.axes])
        ball = Ball(tuple(0.5 * (lo + hi)), float(0.5 * np.min(hi - lo)) * (1 + 1e-9))
        left, right = _floats(a.boundary, "boundary values")

        def data(X):
            return np.where(X[:, 0] <= lo[0], left, right)
    coeffs = coefficient_family(a.coeffs, grid.n, ball, weight)
    return grid, fdlab.solve_dirichlet(coeffs, grid, data, rhs=a.rhs)


def cmd_csmp(a):
    grid, u = _solve(a)
    rep = fdlab.csmp_check(u, tolerance=a.tol)
    if a.csv:
        u.to_csv(a.csv)
    return {"grid": grid.to_json(), "csmp": rep.to_json()}, rep.strict


def cmd_hopf(a):
    grid, u = _solve(a)
    hs = _floats(a.hseq, "h sequence")
    if isinstance(grid, fdlab.PolarAnnulus):
        x_b = grid.center + np.array([grid.R, 0.0])
        nu = np.array([1.0, 0.0])
    else:
        x_b = np.array([ax[-1] for ax in grid.axes[:1]] + [0.5 * (ax[0] + ax[-1]) for ax in grid.axes[1:]])
        nu = np.eye(grid.n)[0]
    rep = fdlab.hopf_quotient(u, x_b, nu, hs)
    return {"grid": grid.to_json(), "x_b": x_b.tolist(), "nu": nu.tolist(), "hopf": rep.to_json()}, rep.positive


def cmd_case(a):
    case = cx.instantiate(a.id)
    rep = cx.verify(case, budget=a.budget, seed=a.seed, strict=False)
    out = rep.to_json()
    out["description"] = case.description
    return out, rep.matches


def cmd_order(a):
    samples = None
    if a.samples:
        try:
            samples = np.loadtxt(a.samples, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read samples {a.samples!r}: {exc}") from None
    kappa = a.kappa if a.kappa is not None else geometry.cone_ratio(a.theta)
    try:
        out = geometry.order_certificate(kappa, a.C, a.n, samples)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return out, out["status"] == "finite_order_bound"


# -- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="bpplab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="also write the report to PATH")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", metavar="FILE", help="JSON file of option values")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("barrier", parents=[common], help="build a comparison function and check its residual")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--weight", required=True)
    s.add_argument("--m", type=float, default=1.0)
    s.add_argument("--eps", type=float)
    s.add_argument("--coeffs", default="adversarial", choices=FAMILIES)
    s.add_argument("--samples", type=int, default=10_000)
    s.set_defaults(func=cmd_barrier)

    s = sub.add_parser("verify-operator", parents=[common], help="growth certificate for a coefficient family")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--R", type=float, default=1.0)
    s.add_argument("--center")
    s.add_argument("--weight", required=True)
    s.add_argument("--coeffs", required=True, choices=FAMILIES)
    s.add_argument("--params", help="JSON object of family parameters")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--max-depth", type=float)
    s.add_argument("--expect", choices=("pass", "fail"))
    s.set_defaults(func=cmd_verify_operator)

    s = sub.add_parser("outward-ball", parents=[common], help="search for or falsify an outward ball")
    s.add_argument("--scene", required=True, help=f"one of {', '.join(geometry.SCENES)} or a JSON file")
    s.add_argument("--h", default="0.1,0.05,0.01", help="comma-separated grid resolutions")
    s.add_argument("--falsify", action="store_true")
    s.add_argument("--full-scene", action="store_true")
    s.add_argument("--expect", choices=("found", "not_found"))
    s.set_defaults(func=cmd_outward_ball)

    for name, func, helptext in (("csmp", cmd_csmp, "solve a Dirichlet problem and compare maxima"),
                                 ("hopf", cmd_hopf, "boundary slope quotients of a discrete solution")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--grid", required=True)
        s.add_argument("--weight", default="power:2,0.5")
        s.add_argument("--coeffs", default="singular_c", choices=FAMILIES)
        s.add_argument("--boundary", required=True, help="outer,inner (annulus) or left,right values")
        s.add_argument("--rhs", type=float, default=0.0)
        if name == "csmp":
            s.add_argument("--tol", type=float, default=0.0)
            s.add_argument("--csv", metavar="PATH", help="export the field")
        else:
            s.add_argument("--hseq", default="0.02,0.01,0.005,0.0025,0.00125,0.000625")
        s.set_defaults(func=func)

    s = sub.add_parser("case", parents=[common], help="verify a counter-example")
    s.add_argument("id", nargs="?", help=", ".join(cx.CASES))
    s.add_argument("--budget", type=int, default=2000)
    s.set_defaults(func=cmd_case)

    s = sub.add_parser("order", parents=[common], help="order bound from the cone chain")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--kappa", type=float)
    g.add_argument("--theta", type=float)
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--samples", metavar="CSV", help="distance,value pairs")
    s.set_defaults(func=cmd_order)
    return p, sub


def parse_args(argv):
    """Parse ``argv``; values from ``--config`` become subcommand defaults."""
    parser, sub = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in sub.choices), None)
    if known.config and command:
        try:
            with open(known.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {known.config!r}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        subparser = sub.choices[command]
        actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
        unknown = sorted(set(cfg) - set(actions))
        if unknown:
            subparser.error(f"unknown config keys: {', '.join(unknown)}")
        for key in cfg:
            actions[key].required = False
        subparser.set_defaults(**cfg)
    args = parser.parse_args(argv)
    if args.command == "case" and args.id not in cx.CASES:
        sub.choices["case"].error(f"case id must be one of {', '.join(cx.CASES)}")
    return args


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)
    limit = contextlib.nullcontext()
    threads = os.environ.get("BPP_LAB_THREADS")
    if threads:
        try:
            from threadpoolctl import threadpool_limits
            limit = threadpool_limits(limits=int(threads))
        except (ImportError, ValueError):
            pass
    try:
        with limit:
            report, ok = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, NotFoundError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        report, ok = {"error": str(exc), "residual": exc.residual}, False
    report = _clean({"command": args.command, "seed": args.seed, "pass": bool(ok), "report": report})
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
