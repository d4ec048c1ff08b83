"""Command-line front end.

Exit codes: 0 success, 2 syntax error, 3 invalid model or profile,
4 capacity exceeded, 5 unsupported construct.  Verdicts go to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Optional, Sequence

from .admissibility import SearchBudget, admissible_status
from .decision import DEFAULT_NODE_BUDGET, frame_valid_rule, is_theorem, satisfiable
from .errors import (CapacityExceeded, FormulaSyntaxError, InvalidModel,
                     NestedKnowledgeUnsupported, UnknownAtom)
from .knowledge import eval_shared_knowledge, eval_voted_knowledge, load_profile, vote_model
from .normal_form import rnf_to_json, rnf_transform
from .semantics import (eval_formula, eval_unbounded, load_model, model_to_json,
                        truth_vector, truth_vector_unbounded)
from .syntax import parse_formula, parse_rule

EXIT_OK, EXIT_SYNTAX, EXIT_MODEL, EXIT_CAPACITY, EXIT_UNSUPPORTED = 0, 2, 3, 4, 5


def _emit(args: argparse.Namespace, doc: dict[str, Any], human: str) -> None:
    if args.json:
        print(json.dumps(doc, sort_keys=True))
    else:
        print(human)


def _pretty(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def cmd_eval(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    f = parse_formula(args.formula)
    if args.mode == "bounded":
        value, tv = eval_formula(model, f, args.pos), truth_vector(model, f)
    else:
        value, tv = eval_unbounded(model, f, args.pos), truth_vector_unbounded(model, f)
    doc = {"value": value, "position": args.pos, "mode": args.mode,
           "truth_vector": {"prefix": list(tv.prefix_truth), "loop": list(tv.loop_truth),
                            "offset": tv.offset}}
    _emit(args, doc, "true" if value else "false")
    return EXIT_OK


def cmd_sat(args: argparse.Namespace) -> int:
    w = satisfiable(parse_formula(args.formula), args.m, args.node_budget)
    if w is None:
        _emit(args, {"verdict": "unsat"}, "UNSAT")
    else:
        _emit(args, {"verdict": "sat", "witness": w.to_json()}, "SAT\n" + _pretty(w.to_json()))
    return EXIT_OK


def cmd_theorem(args: argparse.Namespace) -> int:
    res = is_theorem(parse_formula(args.formula), args.m, args.node_budget)
    if res.valid:
        _emit(args, {"theorem": True}, "true")
    else:
        cm = res.countermodel.to_json()
        _emit(args, {"theorem": False, "countermodel": cm}, "false\n" + _pretty(cm))
    return EXIT_OK


def cmd_rnf(args: argparse.Namespace) -> int:
    nf = rnf_transform(parse_rule(args.rule))
    doc = rnf_to_json(nf)
    doc["count"] = len(nf)
    _emit(args, doc, _pretty(doc))
    return EXIT_OK


def cmd_rule_valid(args: argparse.Namespace) -> int:
    w = frame_valid_rule(parse_rule(args.rule), args.m, args.node_budget)
    if w is None:
        _emit(args, {"valid": True}, "valid")
    else:
        cm = w.to_json()
        _emit(args, {"valid": False, "countermodel": cm}, "invalid\n" + _pretty(cm))
    return EXIT_OK


def cmd_admissible(args: argparse.Namespace) -> int:
    budget = SearchBudget(args.depth, args.letters, args.m, args.node_budget)
    doc = admissible_status(parse_rule(args.rule), budget).to_json()
    _emit(args, doc, _pretty(doc))
    return EXIT_OK


def cmd_know(args: argparse.Namespace) -> int:
    profile = load_profile(args.profile)
    if args.submode == "vote":
        if args.formulas:
            raise argparse.ArgumentTypeError("vote takes no formulas")
        doc = model_to_json(vote_model(profile))
        _emit(args, doc, _pretty(doc))
        return EXIT_OK
    if args.submode == "voted-eval":
        if len(args.formulas) != 1:
            raise argparse.ArgumentTypeError("voted-eval takes exactly one formula")
        value = eval_voted_knowledge(profile, parse_formula(args.formulas[0]), args.pos)
    else:
        if len(args.formulas) != 2:
            raise argparse.ArgumentTypeError("shared takes two formulas: PSI PHI")
        psi, phi = (parse_formula(t) for t in args.formulas)
        value = eval_shared_knowledge(profile, psi, phi, args.pos)
    _emit(args, {"value": value, "position": args.pos, "submode": args.submode},
          "true" if value else "false")
    return EXIT_OK


def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a natural >= 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON document")
    common.add_argument("--m", type=_positive, default=1, help="measure of intransitivity")
    common.add_argument("--node-budget", type=_positive, default=DEFAULT_NODE_BUDGET)

    parser = argparse.ArgumentParser(prog="pastltl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a formula in a model file")
    p.add_argument("formula")
    p.add_argument("--model", required=True)
    p.add_argument("--pos", type=_natural, default=0)
    p.add_argument("--mode", choices=("bounded", "unbounded"), default="bounded")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sat", parents=[common], help="decide satisfiability")
    p.add_argument("formula")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("theorem", parents=[common], help="decide theoremhood")
    p.add_argument("formula")
    p.set_defaults(func=cmd_theorem)

    p = sub.add_parser("rnf", parents=[common], help="reduced normal form of a rule")
    p.add_argument("rule")
    p.set_defaults(func=cmd_rnf)

    p = sub.add_parser("rule-valid", parents=[common], help="validity of a rule in the frame")
    p.add_argument("rule")
    p.set_defaults(func=cmd_rule_valid)

    p = sub.add_parser("admissible", parents=[common], help="admissibility verdict for a rule")
    p.add_argument("rule")
    p.add_argument("--depth", type=_natural, default=2)
    p.add_argument("--letters", type=_natural, default=1, help="fresh letters in the search")
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("know", parents=[common], help="multi-agent knowledge")
    p.add_argument("profile")
    p.add_argument("submode", choices=("vote", "voted-eval", "shared"))
    p.add_argument("formulas", nargs="*")
    p.add_argument("--pos", type=_natural, default=0)
    p.set_defaults(func=cmd_know)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormulaSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    except (InvalidModel, UnknownAtom) as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except CapacityExceeded as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NestedKnowledgeUnsupported as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
