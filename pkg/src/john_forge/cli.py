"""Command-line pipeline: position a body, extract contacts, decompose, run the flow.

Every subcommand writes one JSON document to stdout (``flow`` writes one
JSON line per ``r`` followed by a summary line).  Human-readable
diagnostics go to stderr.  Exit codes:

    0  success
    1  malformed input or arguments
    2  degenerate point set (mvee)
    3  contact configuration outside (or on the boundary of) the solvable region
    4  objective not coercive
    5  verification failed
    6  quadrature budget exceeded
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .body import ConvexBody, body_from_json
from .errors import DegenerateInput, JohnForgeError, QuadratureBudgetExceeded
from .flow import FlowConfig, derivative_check, minimize_Lr
from .isotropic import IsotropicMeasure, extract_weights, normalize_to_lambda, verify_john
from .loewner import ContactSet, contact_points, mvee, to_loewner
from .minimize import CONVERGED, NOT_COERCIVE, MinimizeConfig, minimize_Ic
from .objective import F_VARIANTS, INTERIOR_TOL, DiscreteMeasureProblem, get_F, solvability_check
from .quadrature import QuadConfig

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_DEGENERATE = 2
EXIT_UNSOLVABLE = 3
EXIT_NOT_COERCIVE = 4
EXIT_VERIFY = 5
EXIT_BUDGET = 6


class InputError(Exception):
    pass


@dataclass
class PipelineConfig:
    body: dict | None = None
    points: list | None = None
    F: str = "exp"
    eps: float = 1e-9
    tol: float = 1e-6
    verify_tol: float = 1e-8
    minimize: MinimizeConfig = field(default_factory=MinimizeConfig)
    rs: tuple = (0.9, 0.95, 0.99)
    quad_budget: int = 4_000_000
    verbose: bool = False
    out: str | None = None

    def __post_init__(self):
        if min(self.eps, self.tol, self.verify_tol) <= 0:
            raise InputError("tolerances must be positive")
        if self.F.lower() not in F_VARIANTS:
            raise InputError(f"unknown F variant {self.F!r}; choose from {sorted(F_VARIANTS)}")
        if self.quad_budget < 1:
            raise InputError("quadrature budget must be positive")


def _read_json(path: str):
    try:
        return jsonio.load(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _body(cfg: PipelineConfig) -> ConvexBody:
    try:
        return body_from_json(cfg.body)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid body descriptor: {exc}") from None


def _points_array(data) -> np.ndarray:
    if isinstance(data, dict):
        data = data.get("points")
    try:
        pts = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError("points must be a list of coordinate lists") from None
    if pts.ndim != 2 or pts.shape[0] == 0 or not np.all(np.isfinite(pts)):
        raise InputError("points must be a non-empty list of coordinate lists")
    return pts


def _contacts(cfg: PipelineConfig, artifacts: dict) -> ContactSet:
    if cfg.points is not None:
        try:
            cs = ContactSet.from_json({"points": _points_array(cfg.points).tolist(), "tol": cfg.tol})
        except ValueError as exc:
            raise InputError(str(exc)) from None
    else:
        moved, A, v = to_loewner(_body(cfg), cfg.eps)
        artifacts["position"] = {"A": A, "v": v, "body": moved.to_json()}
        cs = contact_points(moved, cfg.tol)
        if cs.full_sphere:
            raise InputError("the body is a ball; its contact set is the whole sphere")
    artifacts["contacts"] = cs.to_json()
    return cs


# --- subcommands -------------------------------------------------------------

def cmd_mvee(cfg: PipelineConfig):
    pts = _points_array(cfg.points)
    E = mvee(pts, cfg.eps)
    return jsonio.document("mvee", Q=E.Q, center=E.center, iterations=E.iterations,
                           support=E.support()), EXIT_OK


def cmd_position(cfg: PipelineConfig):
    moved, A, v = to_loewner(_body(cfg), cfg.eps)
    return jsonio.document("position", A=A, v=v, body=moved.to_json()), EXIT_OK


def cmd_contacts(cfg: PipelineConfig):
    moved, _, _ = to_loewner(_body(cfg), cfg.eps)
    cs = contact_points(moved, cfg.tol)
    return jsonio.document("contacts", **cs.to_json()), EXIT_OK


def _unsolvable(sol) -> bool:
    return sol.status == "Outside" or (sol.status == "Boundary"
                                       and (sol.t_star is None or sol.t_star <= INTERIOR_TOL))


def cmd_check(cfg: PipelineConfig):
    art: dict = {}
    cs = _contacts(cfg, art)
    sol = solvability_check(cs)
    code = EXIT_OK
    if _unsolvable(sol):
        print(f"contact configuration is {sol.status}; no isotropic measure with "
              "positive weights exists", file=sys.stderr)
        code = EXIT_UNSOLVABLE
    return jsonio.document("check", **sol.to_json()), code


def cmd_decompose(cfg: PipelineConfig):
    art: dict = {}
    cs = _contacts(cfg, art)
    sol = solvability_check(cs)
    art["solvability"] = sol.to_json()
    if _unsolvable(sol):
        print(f"contact configuration is {sol.status}", file=sys.stderr)
        if sol.witness is not None:
            print(f"witness M = {sol.witness.M.tolist()}, w = {sol.witness.w.tolist()}",
                  file=sys.stderr)
        return jsonio.document("decompose", status=sol.status, solvability=sol.to_json()), EXIT_UNSOLVABLE
    prob = DiscreteMeasureProblem(cs.points, get_F(cfg.F))
    res = minimize_Ic(prob, cfg.minimize)
    art["minimize"] = res.to_json()
    if res.status == NOT_COERCIVE:
        print("objective is not coercive on this contact set", file=sys.stderr)
        return jsonio.document("decompose", status=NOT_COERCIVE, minimize=res.to_json()), EXIT_NOT_COERCIVE
    meas = extract_weights(prob, res.minimizer)
    report = verify_john(meas, cfg.verify_tol)
    out = jsonio.document("decompose", status=res.status, F=get_F(cfg.F).name,
                          measure=meas.to_json(),
                          normalized=normalize_to_lambda(meas).to_json(),
                          verification=report.to_json())
    if cfg.verbose:
        out["artifacts"] = art
    code = EXIT_OK if (report.passed and res.status == CONVERGED) else EXIT_VERIFY
    if code:
        print("verification failed", file=sys.stderr)
    return out, code


def cmd_verify(cfg: PipelineConfig):
    data = cfg.points
    if not isinstance(data, dict) or "weights" not in data:
        raise InputError("verify expects an object with 'points' and 'weights'")
    try:
        meas = IsotropicMeasure.from_weights(_points_array(data), data["weights"])
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = verify_john(meas, cfg.verify_tol)
    code = EXIT_OK if report.passed else EXIT_VERIFY
    return jsonio.document("verify", **meas.to_json(), **{"pass": report.passed}), code


def cmd_flow(cfg: PipelineConfig):
    body = _body(cfg)
    if body.n not in (2, 3):
        raise InputError("flow supports n = 2 or 3")
    moved, _, _ = to_loewner(body, cfg.eps)
    fcfg = FlowConfig(quad=QuadConfig(budget=cfg.quad_budget))
    records, results = [], []
    for r in cfg.rs:
        res = minimize_Lr(moved, r, fcfg)
        results.append(res)
        records.append(jsonio.document("flow", **res.to_json()))
    dist = [res.distance for res in results]
    trace_ratio = [float(np.trace(res.M) / np.linalg.norm(res.M)) if np.linalg.norm(res.M) > 0 else 0.0
                   for res in results]
    summary = jsonio.document(
        "flow-summary", rs=list(cfg.rs), distance=dist,
        distance_decreasing=bool(all(b <= a for a, b in zip(dist, dist[1:]))),
        trace_ratio=trace_ratio,
        det_error=[abs(float(np.linalg.det(res.A)) - 1.0) for res in results],
        derivative_check=derivative_check(moved, cfg.rs, results=results))
    records.append(summary)
    return records, EXIT_OK


COMMANDS = {"mvee": cmd_mvee, "position": cmd_position, "contacts": cmd_contacts,
            "check": cmd_check, "decompose": cmd_decompose, "flow": cmd_flow,
            "verify": cmd_verify}


# --- argument handling -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


def _rs(text: str):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("--rs expects a comma-separated list of numbers") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="john-forge", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--body", help="body descriptor JSON file")
    p.add_argument("--points", help="points JSON file (list or {'points': ...})")
    p.add_argument("--F", default="exp", help="objective profile: exp, paperconv, shiftedsquare")
    p.add_argument("--eps", type=float, default=1e-9, help="MVEE tolerance")
    p.add_argument("--tol", type=float, default=1e-6, help="contact-point tolerance")
    p.add_argument("--verify-tol", type=float, default=1e-8)
    p.add_argument("--rs", type=_rs, default=(0.9, 0.95, 0.99))
    p.add_argument("--quad-budget", type=int, default=4_000_000)
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--out", help="write JSON here instead of stdout")
    return p


def config_from_args(args) -> PipelineConfig:
    body = _read_json(args.body) if args.body else None
    points = _read_json(args.points) if args.points else None
    needs_body = args.command in ("position", "contacts", "flow")
    needs_points = args.command in ("mvee", "verify")
    if needs_body and body is None:
        raise InputError(f"{args.command} requires --body")
    if needs_points and points is None:
        raise InputError(f"{args.command} requires --points")
    if args.command in ("check", "decompose") and body is None and points is None:
        raise InputError(f"{args.command} requires --body or --points")
    return PipelineConfig(body=body, points=points, F=args.F, eps=args.eps, tol=args.tol,
                          verify_tol=args.verify_tol, rs=args.rs,
                          quad_budget=args.quad_budget, verbose=args.verbose, out=args.out)


def _emit(payload, path):
    docs = payload if isinstance(payload, list) else [payload]
    text = "".join(jsonio.dumps(d) + "\n" for d in docs)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        payload, code = COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except QuadratureBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (JohnForgeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    _emit(payload, cfg.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
