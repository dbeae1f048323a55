"""Command-line surface: radius, feasible, certify, verify.

Reports are JSON objects with sorted keys and 17-significant-digit float
formatting so that reruns on identical inputs produce identical output
(the wall_time_ms field is the one measured, hence non-reproducible,
entry).  Exit codes: 0 success/positive verdict, 1 negative verdict,
2 inconclusive/unknown, 3 parse or schema error, 4 infeasibility of the
nominal system or candidate point, 5 precondition violation (wrong
constraint class, negative u, Slater failure), 6 certifier/oracle
disagreement.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import oracle
from .efficiency import (EfficiencyCertificate, ConstraintMultiplier,
                         NotFeasiblePointError, SlaterViolatedError,
                         UnsupportedClassError, certify_weak_efficiency)
from .feasibility import (NominalInfeasibleError, ball_robust_feasible,
                          radius_of_robust_feasibility)
from .model import (ProblemFormatError, Singleton, ValidationError,
                    load_problem, validate_dimensions, validate_problem)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_PRECONDITION = 5
EXIT_DISAGREEMENT = 6


def _canonical(obj, out):
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            raise ValueError("non-finite float in report")
        out.append(format(v, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        items = list(obj)
        for i, it in enumerate(items):
            if i:
                out.append(",")
            _canonical(it, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _canonical(obj[k], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    out = []
    _canonical(obj, out)
    return "".join(out)


def _digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _emit(report, as_json):
    if as_json:
        print(canonical_json(report))
        return
    print(f"command:  {report['command']}")
    print(f"verdict:  {report['verdict']}")
    for key, val in sorted(report.get("payload", {}).items()):
        print(f"{key}: {val}")
    if report.get("residuals"):
        print(f"residuals: {report['residuals']}")
    print(f"wall_time_ms: {report['wall_time_ms']}")


def _report(command, digest, verdict, payload, residuals, t0):
    return {
        "command": command,
        "input_digest": digest,
        "verdict": verdict,
        "payload": payload,
        "residuals": residuals,
        "wall_time_ms": int((time.monotonic() - t0) * 1000),
    }


def _load(path):
    problem = load_problem(path)
    validate_dimensions(problem)
    return problem


def _nominal_rows(problem):
    if not all(isinstance(c, Singleton) for c in problem.constraints):
        raise UnsupportedClassError(
            "this command needs all-singleton constraints (nominal system)")
    return [(c.a_bar, c.b_bar) for c in problem.constraints]


def cmd_radius(args) -> int:
    t0 = time.monotonic()
    problem = _load(args.problem_file)
    rows = _nominal_rows(problem)
    res = radius_of_robust_feasibility(rows)
    payload = {
        "radius": res.rho,
        "minimizer": res.p_star.tolist(),
        "weights": res.weights.tolist(),
        "ray_coefficient": res.mu,
        "certified": res.certified,
    }
    recon = res.weights @ np.array([np.concatenate([a, [b]]) for a, b in rows])
    recon[-1] -= res.mu
    residuals = {"reconstruction": float(np.linalg.norm(recon - res.p_star))}
    _emit(_report("radius", _digest(args.problem_file), "ok",
                  payload, residuals, t0), args.json)
    return EXIT_OK


def cmd_feasible(args) -> int:
    t0 = time.monotonic()
    problem = _load(args.problem_file)
    rows = _nominal_rows(problem)
    res = ball_robust_feasible(rows, args.alpha)
    payload = {"alpha": args.alpha, "radius": res.rho}
    residuals = {}
    if res.x is not None:
        payload["witness"] = res.x.tolist()
        slacks = [float(a @ res.x - b) for a, b in rows]
        residuals["nominal_min_slack"] = min(slacks)
    _emit(_report("feasible", _digest(args.problem_file), res.status,
                  payload, residuals, t0), args.json)
    return {"feasible": EXIT_OK, "infeasible": EXIT_NEGATIVE,
            "inconclusive": EXIT_INCONCLUSIVE}[res.status]


def _multiplier_to_dict(rec: ConstraintMultiplier):
    return {
        "mu": rec.mu,
        "scenario_a": np.asarray(rec.scenario_a).tolist(),
        "scenario_b": rec.scenario_b,
        "witness": None if rec.witness is None else np.asarray(rec.witness).tolist(),
        "witness_norm": rec.witness_norm,
        "complementarity": rec.complementarity,
    }


def certificate_to_dict(cert: EfficiencyCertificate) -> dict:
    return {
        "lambda": cert.lambda_nominal.tolist(),
        "lambda_tilde": cert.lambda_perturbed.tolist(),
        "nominal": [_multiplier_to_dict(r) for r in cert.nominal],
        "perturbed": [_multiplier_to_dict(r) for r in cert.perturbed],
        "active_rows": list(cert.active_rows),
        "row_mu": None if cert.row_mu_nominal is None else cert.row_mu_nominal.tolist(),
        "row_mu_tilde": None if cert.row_mu_perturbed is None else cert.row_mu_perturbed.tolist(),
        "residuals": dict(cert.residuals),
    }


def _multiplier_from_dict(d) -> ConstraintMultiplier:
    wit = d.get("witness")
    return ConstraintMultiplier(
        float(d["mu"]), np.asarray(d["scenario_a"], float),
        float(d["scenario_b"]),
        None if wit is None else np.asarray(wit, float),
        float(d.get("witness_norm", 0.0)), float(d.get("complementarity", 0.0)))


def certificate_from_dict(d) -> EfficiencyCertificate:
    return EfficiencyCertificate(
        np.asarray(d["lambda"], float),
        np.asarray(d["lambda_tilde"], float),
        tuple(_multiplier_from_dict(r) for r in d["nominal"]),
        tuple(_multiplier_from_dict(r) for r in d["perturbed"]),
        tuple(d.get("active_rows", ())),
        None if d.get("row_mu") is None else np.asarray(d["row_mu"], float),
        None if d.get("row_mu_tilde") is None else np.asarray(d["row_mu_tilde"], float),
        dict(d.get("residuals", {})))


def _parse_point(text, n):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise ProblemFormatError(f"bad point: {exc}") from exc
    if len(vals) != n:
        raise ProblemFormatError(f"point has {len(vals)} coordinates, expected {n}")
    return np.array(vals)


def cmd_certify(args) -> int:
    t0 = time.monotonic()
    problem = _load(args.problem_file)
    vp = validate_problem(problem)
    x_bar = _parse_point(args.point, problem.n)
    outcome = certify_weak_efficiency(vp, x_bar)
    payload = {"point": x_bar.tolist()}
    if outcome.certificate is not None:
        payload["certificate"] = certificate_to_dict(outcome.certificate)
    if outcome.refutation is not None:
        ref = outcome.refutation
        payload["refutation"] = {
            "reason": ref.reason,
            "endpoint": ref.endpoint,
            "rho": ref.rho,
            "x": None if ref.x is None else np.asarray(ref.x).tolist(),
            "gap": None if ref.gap is None else np.asarray(ref.gap).tolist(),
        }
    residuals = dict(outcome.residuals or {})
    verdict = outcome.status

    exit_code = {"certified": EXIT_OK, "refuted": EXIT_NEGATIVE,
                 "unknown": EXIT_INCONCLUSIVE}[outcome.status]
    if args.oracle:
        ov = oracle.refute_robust_weak_efficiency(problem, x_bar, k=args.oracle)
        payload["oracle"] = {
            "outcome": ov.outcome,
            "checks_run": ov.checks_run,
            "witness": None if ov.witness is None else {
                "rho": ov.witness.rho,
                "x": ov.witness.x.tolist(),
                "gap": ov.witness.gap.tolist(),
            },
        }
        disagree = ((outcome.status == "certified" and ov.outcome == "refuted")
                    or (outcome.status == "refuted" and ov.outcome == "confirmed"))
        if disagree:
            verdict = "disagreement"
            exit_code = EXIT_DISAGREEMENT
    _emit(_report("certify", _digest(args.problem_file), verdict,
                  payload, residuals, t0), args.json)
    return exit_code


def cmd_verify(args) -> int:
    t0 = time.monotonic()
    problem = _load(args.problem_file)
    vp = validate_problem(problem)
    x_bar = _parse_point(args.point, problem.n)
    try:
        with open(args.cert, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ProblemFormatError(f"bad certificate file: {exc}") from exc
    if isinstance(doc, dict) and "payload" in doc:
        doc = doc.get("payload", {}).get("certificate")
    if not isinstance(doc, dict):
        raise ProblemFormatError("certificate payload missing")
    try:
        cert = certificate_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"bad certificate: {exc}") from exc
    report = oracle.verify_certificate(vp, x_bar, cert, tol=args.tol)
    payload = {
        "tol": args.tol,
        "checks": [{"name": c.name, "residual": c.residual, "passed": c.passed}
                   for c in report.checks],
        "first_failing": report.first_failing,
    }
    residuals = {c.name: c.residual for c in report.checks}
    _emit(_report("verify", _digest(args.problem_file),
                  "valid" if report.ok else "invalid",
                  payload, residuals, t0), args.json)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="robustmolp",
        description="Robust feasibility radius and weak-efficiency "
                    "certification for uncertain multi-objective LPs")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("problem_file")
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--json", action="store_true", help="machine-readable report")
        g.add_argument("--text", dest="json", action="store_false",
                       help="human-readable report (default)")
        sp.set_defaults(json=False)

    sp = sub.add_parser("radius", help="radius of robust feasibility")
    common(sp)
    sp.set_defaults(func=cmd_radius)

    sp = sub.add_parser("feasible", help="ball-robust feasibility at a given alpha")
    common(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.set_defaults(func=cmd_feasible)

    sp = sub.add_parser("certify", help="certify robust weak efficiency of a point")
    common(sp)
    sp.add_argument("--point", required=True, help="comma-separated coordinates")
    sp.add_argument("--oracle", type=int, default=0, metavar="K",
                    help="cross-check against a K-point scenario grid")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("verify", help="replay a certificate")
    common(sp)
    sp.add_argument("--point", required=True)
    sp.add_argument("--cert", required=True, help="certificate (or certify report) file")
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ProblemFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.kind == "NegativeU":
            return EXIT_PRECONDITION
        return EXIT_PARSE
    except (NominalInfeasibleError, NotFeasiblePointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SlaterViolatedError, UnsupportedClassError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
