"""Command-line front end.

Every command prints one JSON document (schema ``passage-kit/1``) or a CSV
table on stdout and diagnostics on stderr.  Exit codes: 0 ok, 2 usage,
3 invalid input, 4 hypothesis violation, 5 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import __version__
from .analytic import SolverConfig, lambda_pair, phi_zero, psi_mean, theta
from .apps import (
    branching_total_progeny,
    busy_period,
    busy_period_query,
    idle_type_probabilities,
    load_arrival_law,
)
from .errors import HypothesisError, LawError, SolverError
from .measure import Verdict, check_hypotheses, law_to_document, load_jump_law
from .oracle import mc_first_passage
from .passage import (
    Regime,
    classify_regime,
    classify_regime_discrete,
    expected_passage_time_discrete,
    laplace_first_passage,
    overshoot_law,
    overshoot_law_discrete,
    overshoot_ratio_limit,
    pgf_first_passage_discrete,
)

SCHEMA = "passage-kit/1"
EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_SOLVER = 0, 2, 3, 4, 5
THREADS_ENV = "PASSAGE_KIT_THREADS"


def _num(x):
    """Round to 12 significant digits; non-finite values become strings."""
    if x is None:
        return None
    if isinstance(x, bool) or isinstance(x, int):
        return x
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def _cell(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return "" if x is None else str(x)


def _emit_json(payload: dict, out):
    out.write(json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n")


def _emit_csv(header, rows, out, comments=()):
    for line in comments:
        out.write(f"# {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


def _config(args) -> SolverConfig:
    return SolverConfig(args.rel_tol, args.max_iter, args.bracket_growth)


def _levels(text: str) -> range:
    try:
        if ".." in text:
            a, b = (int(s) for s in text.split("..", 1))
        else:
            a = b = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must look like 'n' or 'n1..n2', got {text!r}")
    if a < 0 or b < a:
        raise argparse.ArgumentTypeError(f"invalid level range {text!r}")
    return range(a, b + 1)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise LawError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


# -- commands -----------------------------------------------------------------------
def cmd_classify(args, out) -> int:
    law = load_jump_law(args.measure)
    cfg = _config(args)
    report = check_hypotheses(law)
    payload = {
        "command": "classify",
        "measure": law_to_document(law),
        "verdict": report.verdict.value,
        "hypotheses": {
            "upward_support_ok": report.upward_support_ok,
            "has_two_jump": report.has_two_jump,
            "has_odd_atom": report.has_odd_atom,
            "has_zero_atom": report.has_zero_atom,
        },
        "regime": classify_regime(law).value,
        "mean": _num(psi_mean(law)),
        "phi_0": _num(phi_zero(law, cfg)),
        "lambda_plus_0": None,
        "lambda_minus_0": None,
        "overshoot_ratio_limit": None,
    }
    status = EXIT_OK
    if report.verdict is Verdict.NEARLY_RIGHT_CONTINUOUS:
        pair = lambda_pair(law, 0.0, cfg)
        payload["lambda_plus_0"] = _num(pair.lambda_plus)
        payload["lambda_minus_0"] = _num(pair.lambda_minus)
        payload["overshoot_ratio_limit"] = _num(overshoot_ratio_limit(law, cfg))
    elif report.verdict is Verdict.SKIP_FREE:
        payload["lambda_plus_0"] = _num(math.exp(-phi_zero(law, cfg)))
        payload["note"] = "skip-free law: passage transform is exp(-Phi(q) n) and the overshoot is always 0"
    else:
        print(f"error: law is {report.verdict.value}; first-passage formulas do not apply",
              file=sys.stderr)
        status = EXIT_HYPOTHESIS
    _emit_json(payload, out)
    return status


def cmd_passage(args, out) -> int:
    law = load_jump_law(args.measure)
    cfg = _config(args)
    rows = []
    for n in args.levels:
        if args.q is not None:
            value = laplace_first_passage(law, args.q, n, cfg)
            ov = overshoot_law(law, args.q, n, cfg)
        else:
            value = pgf_first_passage_discrete(law, args.gamma, n, cfg)
            ov = overshoot_law_discrete(law, n, args.gamma, cfg)
        rows.append((n, value, ov.p0, ov.p1, ov.defect))
    header = ("n", "value", "p0", "p1", "defect")
    if args.format == "csv":
        _emit_csv(header, rows, out)
    else:
        _emit_json({
            "command": "passage",
            "mode": "continuous" if args.q is not None else "discrete",
            "query": _num(args.q if args.q is not None else args.gamma),
            "measure": law_to_document(law),
            "rows": [dict(zip(header, (r[0], *map(_num, r[1:])))) for r in rows],
        }, out)
    return EXIT_OK


def _grid(a: float, b: float, h: float) -> list[float]:
    m = int(math.floor((b - a) / h + 1e-9))
    pts = [a + i * h for i in range(m + 1)]
    if abs(pts[-1] - b) <= 1e-9 * max(1.0, abs(b)):
        pts[-1] = b
    return pts


def cmd_theta_curve(args, out) -> int:
    a, b, h = args.start, args.stop, args.step
    if not h > 0 or b < a or not ((a >= 1 and b >= 1) or (a <= -1 and b <= -1)):
        raise LawError("theta-curve needs step > 0 and an interval inside (-inf, -1] or [1, inf)")
    law = load_jump_law(args.measure)
    cfg = _config(args)
    curve = [(beta, theta(law, beta)) for beta in _grid(a, b, h)]
    roots = {"inverse_lambda_plus_0": math.exp(phi_zero(law, cfg)), "inverse_lambda_minus_0": None}
    if check_hypotheses(law).verdict is Verdict.NEARLY_RIGHT_CONTINUOUS:
        roots["inverse_lambda_minus_0"] = 1.0 / lambda_pair(law, 0.0, cfg).lambda_minus
    if args.format == "json":
        _emit_json({
            "command": "theta-curve",
            "measure": law_to_document(law),
            "roots": {k: _num(v) for k, v in roots.items()},
            "curve": [{"beta": _num(x), "theta": _num(y)} for x, y in curve],
        }, out)
    else:
        comments = [f"{k}={_cell(v)}" for k, v in roots.items()]
        _emit_csv(("beta", "theta"), curve, out, comments)
    return EXIT_OK


def _z(est, analytic):
    if analytic is None or est.stderr is None or math.isnan(est.mean):
        return None
    diff = est.mean - analytic
    if est.stderr == 0 or math.isnan(est.stderr):
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return diff / est.stderr


def cmd_simulate(args, out) -> int:
    walk = load_jump_law(args.measure)
    cfg = _config(args)
    res = mc_first_passage(walk, args.level, args.paths, args.seed, args.max_steps, _threads())
    analytic = {"p0": None, "p1": None, "defect": None, "mean_T": None}
    if check_hypotheses(walk).verdict in (Verdict.NEARLY_RIGHT_CONTINUOUS, Verdict.SKIP_FREE):
        ov = overshoot_law_discrete(walk, args.level, cfg=cfg)
        analytic.update(p0=ov.p0, p1=ov.p1, defect=ov.defect)
        if classify_regime_discrete(walk) is Regime.DRIFTS_UP:
            analytic["mean_T"] = expected_passage_time_discrete(walk, args.level, cfg=cfg)
    estimates = {}
    for name in ("p0", "p1", "defect", "mean_T"):
        est = getattr(res, name)
        estimates[name] = {
            "estimate": _num(est.mean),
            "stderr": _num(est.stderr),
            "samples": est.paths,
            "analytic": _num(analytic[name]),
            "z": _num(_z(est, analytic[name])),
        }
    _emit_json({
        "command": "simulate",
        "measure": law_to_document(walk),
        "level": args.level,
        "paths": args.paths,
        "seed": args.seed,
        "max_steps": args.max_steps,
        "estimates": estimates,
    }, out)
    return EXIT_OK


def _finiteness(report) -> dict:
    return {
        "regime": report.regime.value,
        "finite_almost_surely": report.extinct_almost_surely,
        "finite_mean": report.finite_mean,
    }


def cmd_queue(args, out) -> int:
    F = load_arrival_law(args.arrivals)
    cfg = _config(args)
    value = busy_period(F, args.k, args.gamma, cfg)
    report = branching_total_progeny(F, args.k, 1.0, cfg)
    payload = {
        "command": "queue",
        "arrivals": {"atoms": {str(m): p for m, p in F.atoms}},
        "k": args.k,
        "gamma": _num(args.gamma),
        "busy_period_transform": _num(value),
        "expected_services": _num(report.expected_pairs),
        "busy_period_finiteness": _finiteness(report),
        "idle_type": None,
    }
    try:
        walk = busy_period_query(F, args.k).derived_walk
        payload["derived_walk"] = law_to_document(walk)
        idle = idle_type_probabilities(F, args.k, cfg=cfg)
        payload["idle_type"] = {
            "one_rests": _num(idle.one_rests),
            "both_rest": _num(idle.both_rest),
            "never_idle": _num(idle.never_idle),
        }
    except HypothesisError as exc:
        print(f"note: idle-type split unavailable ({exc})", file=sys.stderr)
    _emit_json(payload, out)
    return EXIT_OK


def cmd_branching(args, out) -> int:
    F = load_arrival_law(args.arrivals)
    report = branching_total_progeny(F, args.k, args.gamma, _config(args))
    _emit_json({
        "command": "branching",
        "offspring": {"atoms": {str(m): p for m, p in F.atoms}},
        "k": args.k,
        "gamma": _num(args.gamma),
        "pairs_transform": _num(report.generating_value),
        "expected_pairs": _num(report.expected_pairs),
        "expected_progeny": _num(report.expected_progeny),
        "extinction": _finiteness(report),
    }, out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    solver = argparse.ArgumentParser(add_help=False)
    g = solver.add_argument_group("root solver")
    g.add_argument("--rel-tol", type=float, default=1e-12)
    g.add_argument("--max-iter", type=int, default=200)
    g.add_argument("--bracket-growth", type=float, default=2.0)

    parser = argparse.ArgumentParser(
        prog="passage-kit",
        description="First-passage laws of integer walks with upward jumps in {1, 2}.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[solver], help="hypothesis verdict, regime and roots at q=0")
    p.add_argument("measure")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("passage", parents=[solver], help="passage transforms and overshoot laws by level")
    p.add_argument("measure")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--q", type=float, help="continuous-time killing rate (>= 0)")
    mode.add_argument("--gamma", type=float, help="discrete-time generating-function argument (>= 1)")
    p.add_argument("--levels", type=_levels, default=_levels("0..10"), help="n or n1..n2")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_passage)

    p = sub.add_parser("theta-curve", parents=[solver], help="sample theta on one branch of |beta| >= 1")
    p.add_argument("measure")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_theta_curve)

    p = sub.add_parser("simulate", parents=[solver], help="Monte Carlo check against the closed forms")
    p.add_argument("measure")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("queue", parents=[solver], help="paired-service queue busy period")
    p.add_argument("arrivals")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(func=cmd_queue)

    p = sub.add_parser("branching", parents=[solver], help="paired branching total progeny")
    p.add_argument("arrivals")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(func=cmd_branching)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    buf = io.StringIO()
    try:
        status = args.func(args, buf)
    except HypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (LawError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(buf.getvalue())
    return status


def run():
    sys.exit(main())
