"""Command-line front end.

Every subcommand reads the JSON model format and prints either stable JSON
(keys sorted, numbers at 12 significant digits) or plain text.  Exit codes:
0 success, 1 usage error, 2 invalid model/formula/selector, 3 a computation
hit its iteration or node budget (any partial result is still printed).
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from .convex_metric import convex_fixpoint
from .dist_metric import dist_fixpoint, dstar_lower_bound, eval_dstar
from .errors import BudgetExceededError, FormulaError, ModelError, PmetricError
from .formulas import SORT_DIST, SORT_STATE, SORT_SUBDIST, to_text
from .mhml import eval_dist, eval_state, synthesize_distinguishing
from .model import SubDistribution, dirac, load_model
from .parser import parse_formula
from .state_metric import fixpoint, kernel, kleene_iterates
from .trace_metric import trace_distance
from .transport import StateMetric, kantorovich

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3


def _round_sig(value, digits=12):
    return float(f"{value:.{digits}g}")


def _jsonable(obj):
    if isinstance(obj, float):
        return _round_sig(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(payload, fmt):
    if fmt == "json":
        print(json.dumps(_jsonable(payload), sort_keys=True, indent=2))
    else:
        for line in _plain_lines(_jsonable(payload), ""):
            print(line)


def _plain_lines(obj, prefix):
    if isinstance(obj, dict):
        for key in sorted(obj):
            yield from _plain_lines(obj[key], f"{prefix}{key}." if prefix else f"{key}.")
    elif isinstance(obj, list):
        for i, item in enumerate(obj):
            yield from _plain_lines(item, f"{prefix}{i}.")
    else:
        yield f"{prefix.rstrip('.')}: {obj}"


_DIST_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*)\s*:\s*([0-9.eE+-]+)\s*$")


def parse_dist_literal(text, model):
    """`{s:0.5,t:0.5}` or a bare state name standing for its point mass."""
    text = text.strip()
    if not text.startswith("{"):
        if text in model.state_index:
            return dirac(text)
        raise ModelError(f"unknown state {text!r} in distribution literal")
    if not text.endswith("}"):
        raise ModelError(f"unterminated distribution literal {text!r}")
    body = text[1:-1].strip()
    entries = {}
    if body:
        for part in body.split(","):
            match = _DIST_RE.match(part)
            if match is None:
                raise ModelError(f"bad distribution entry {part.strip()!r}")
            state, prob = match.group(1), match.group(2)
            if state not in model.state_index:
                raise ModelError(f"unknown state {state!r} in distribution literal")
            if state in entries:
                raise ModelError(f"duplicate state {state!r} in distribution literal")
            try:
                entries[state] = float(prob)
            except ValueError as exc:
                raise ModelError(f"bad probability {prob!r}") from exc
    try:
        return SubDistribution(entries)
    except ValueError as exc:
        raise ModelError(str(exc)) from exc


def _split_pair(text):
    """Split a pair selector on the top-level comma (braces may nest commas)."""
    depth = 0
    for i, ch in enumerate(text):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif ch == "," and depth == 0:
            return text[:i].strip(), text[i + 1:].strip()
    raise ModelError(f"pair selector {text!r} needs a top-level comma")


def _dist_text(dist):
    body = ",".join(f"{s}:{p:.12g}" for s, p in dist.items)
    return "{" + body + "}"


def _state_pairs(model, selectors):
    if selectors:
        out = []
        for sel in selectors:
            s, t = _split_pair(sel)
            for name in (s, t):
                if name not in model.state_index:
                    raise ModelError(f"unknown state {name!r} in --pairs")
            out.append((s, t))
        return out
    return [
        (s, t)
        for i, s in enumerate(model.states)
        for t in model.states[i + 1:]
    ]


def _metric_payload(result, pairs, tol):
    table = result.metric
    payload = {
        "converged": result.converged,
        "iterations": result.iterations,
        "residual": result.residual,
        "tol": tol,
        "pairs": [{"s": s, "t": t, "d": table(s, t)} for s, t in pairs],
    }
    return payload


def _load_metric_table(path):
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    try:
        return StateMetric(raw["states"], raw["values"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"bad metric file {path!r}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="pmetric",
        description="Behavioral pseudometrics and real-valued modal logics "
        "on probabilistic labelled transition systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("model", help="path to a JSON model file")
        cmd.add_argument("--format", choices=["json", "plain"], default="json")
        return cmd

    add("validate", "parse and validate a model file")

    cmd = add("state-metric", "state-based bisimilarity metric")
    cmd.add_argument("--pairs", action="append", metavar="S,T")
    cmd.add_argument("--tol", type=float, default=1e-9)
    cmd.add_argument("--max-iter", type=int, default=None)

    cmd = add("convex-metric", "convex bisimilarity metric")
    cmd.add_argument("--pairs", action="append", metavar="S,T")
    cmd.add_argument("--tol", type=float, default=1e-9)
    cmd.add_argument("--max-iter", type=int, default=None)

    cmd = add("dist-metric", "distribution-based metric at bounded depth")
    cmd.add_argument("--pairs", action="append", required=True, metavar="L,R",
                     help="two distribution literals, e.g. '{s2:0.5,s3:0.5},{t3:1}'")
    cmd.add_argument("--depth", type=int, default=5)
    cmd.add_argument("--allow-null-lift", action="store_true",
                     help="admit steps to the empty subdistribution when no support state moves")

    cmd = add("trace-metric", "trace distance up to a length bound")
    cmd.add_argument("--pairs", action="append", metavar="S,T")
    cmd.add_argument("--max-len", type=int, default=4)

    cmd = add("eval", "evaluate a formula")
    cmd.add_argument("--logic", choices=[SORT_STATE, SORT_DIST, SORT_SUBDIST], required=True)
    cmd.add_argument("--formula", required=True)
    cmd.add_argument("--at", required=True,
                     help="state name (state logic) or distribution literal")
    cmd.add_argument("--allow-null-lift", action="store_true")

    cmd = add("distinguish", "synthesize a distinguishing formula")
    cmd.add_argument("--pair", required=True, metavar="S,T")
    cmd.add_argument("--depth", type=int, default=3, help="metric iterate to separate against")
    cmd.add_argument("--eps", type=float, default=0.01)

    cmd = add("lift", "Kantorovich lifting of a metric table")
    cmd.add_argument("--d", required=True, metavar="FILE",
                     help="JSON metric table {\"states\": [...], \"values\": [[...]]}")
    cmd.add_argument("--left", required=True, metavar="DIST")
    cmd.add_argument("--right", required=True, metavar="DIST")

    cmd = add("report", "write the metric table as CSV plus figures")
    cmd.add_argument("-o", "--out", required=True, metavar="DIR")
    cmd.add_argument("--tol", type=float, default=1e-9)
    cmd.add_argument("--max-iter", type=int, default=None)

    return parser


def _run(args):
    model = load_model(args.model)

    if args.command == "validate":
        _emit(
            {
                "ok": True,
                "states": len(model.states),
                "actions": len(model.actions),
                "transitions": len(model.transitions),
            },
            args.format,
        )
        return EXIT_OK

    if args.command in ("state-metric", "convex-metric"):
        pairs = _state_pairs(model, args.pairs)
        run = fixpoint if args.command == "state-metric" else convex_fixpoint
        result = run(model, tol=args.tol, max_iter=args.max_iter)
        payload = _metric_payload(result, pairs, args.tol)
        if not args.pairs:
            payload["kernel"] = kernel(result.metric)
        _emit(payload, args.format)
        return EXIT_OK if result.converged else EXIT_BUDGET

    if args.command == "dist-metric":
        pairs = []
        for sel in args.pairs:
            left_text, right_text = _split_pair(sel)
            pairs.append(
                (parse_dist_literal(left_text, model), parse_dist_literal(right_text, model))
            )
        values = dist_fixpoint(
            model, pairs, args.depth, allow_null_lift=args.allow_null_lift
        )
        _emit(
            {
                "depth": args.depth,
                "pairs": [
                    {"left": _dist_text(l), "right": _dist_text(r), "d": v}
                    for (l, r), v in zip(pairs, values)
                ],
            },
            args.format,
        )
        return EXIT_OK

    if args.command == "trace-metric":
        pairs = _state_pairs(model, args.pairs)
        rows = []
        for s, t in pairs:
            value, witness = trace_distance(model, s, t, args.max_len)
            rows.append({"s": s, "t": t, "d": value, "witness": " ".join(witness)})
        _emit({"max_len": args.max_len, "pairs": rows}, args.format)
        return EXIT_OK

    if args.command == "eval":
        phi = parse_formula(args.formula, args.logic)
        if args.logic == SORT_STATE:
            if args.at not in model.state_index:
                raise ModelError(f"unknown state {args.at!r}")
            value = eval_state(model, phi, args.at)
        elif args.logic == SORT_DIST:
            value = eval_dist(model, phi, parse_dist_literal(args.at, model))
        else:
            value = eval_dstar(
                model,
                phi,
                parse_dist_literal(args.at, model),
                allow_null_lift=args.allow_null_lift,
            )
        _emit(
            {"logic": args.logic, "formula": args.formula, "at": args.at, "value": value},
            args.format,
        )
        return EXIT_OK

    if args.command == "distinguish":
        s, t = _split_pair(args.pair)
        phi = synthesize_distinguishing(model, s, t, args.depth, args.eps)
        target = kleene_iterates(model, args.depth)[args.depth](s, t)
        gap = abs(eval_state(model, phi, s) - eval_state(model, phi, t))
        _emit(
            {
                "s": s,
                "t": t,
                "k": args.depth,
                "eps": args.eps,
                "iterate_value": target,
                "gap": gap,
                "formula": to_text(phi),
            },
            args.format,
        )
        return EXIT_OK

    if args.command == "lift":
        table = _load_metric_table(args.d)
        left = parse_dist_literal(args.left, model)
        right = parse_dist_literal(args.right, model)
        plan = kantorovich(table, left, right)
        _emit(
            {
                "value": plan.value,
                "dual_value": plan.dual_value,
                "matching": [
                    {"from": s, "to": t, "mass": mass}
                    for (s, t), mass in sorted(plan.matching.items())
                ],
                "duals": plan.duals,
            },
            args.format,
        )
        return EXIT_OK

    if args.command == "report":
        from .report import render_report

        paths, metric, residuals = render_report(
            model, args.out, tol=args.tol, max_iter=args.max_iter
        )
        _emit(
            {
                "written": sorted(paths.values()),
                "iterations": len(residuals),
                "residual": residuals[-1] if residuals else 0.0,
            },
            args.format,
        )
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (ModelError, FormulaError) as exc:
        print(f"pmetric: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceededError as exc:
        print(f"pmetric: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as exc:
        print(f"pmetric: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PmetricError as exc:
        print(f"pmetric: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
