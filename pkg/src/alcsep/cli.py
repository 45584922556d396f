"""Command-line surface.

Exit codes: 0 = positive answer (interpolant found / satisfiable /
entailed / model extracted), 1 = negative answer, 2 = error or exhausted
budget.  Identical inputs and seed give byte-identical verdict output;
wall-clock timing appears only in the JSON stats object.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .config import DEFAULT_BUDGETS, Budgets
from .errors import AlcsepError
from .families import write_family
from .interpolate import InterpolationProblem, compute_interpolant
from .mosaics import decide_joint_consistency, export_trace, extract_model
from .reasoner import entails, sat
from .semantics import emit_model, max_sigma_bisimulation, parse_model
from .syntax import (
    ALCH, ALCQ, parse_concept, parse_ontology, parse_signature, print_concept,
)


def _budgets(args) -> Budgets:
    b = DEFAULT_BUDGETS.override_from_env()
    values = dict(b.__dict__)
    if args.mosaic_cap is not None:
        values["mosaic_cap"] = args.mosaic_cap
    if getattr(args, "node_cap", None) is not None:
        values["node_cap"] = args.node_cap
    if getattr(args, "sat_cap", None) is not None:
        values["sat_call_cap"] = args.sat_cap
    for k, v in values.items():
        if v <= 0:
            raise AlcsepError(f"budget {k} must be positive")
    return Budgets(**values)


def _read(path: str) -> str:
    return Path(path).read_text()


def _concept_arg(text: str):
    if text.startswith("@"):
        return parse_concept(_read(text[1:]))
    return parse_concept(text)


def _load_problem(args):
    if args.problem:
        base = Path(args.problem)
        dialect = (base / "dialect.txt").read_text().split()[0] \
            if (base / "dialect.txt").exists() else args.dialect
        onto_text = (base / "ontology.dl").read_text() \
            if (base / "ontology.dl").exists() else ""
        o = parse_ontology(onto_text, dialect)
        c0 = parse_concept((base / "c0.dl").read_text())
        d0_file = base / "d0.dl"
        d0 = parse_concept(d0_file.read_text()) if d0_file.exists() else None
        sig_file = base / "sigma.txt"
        sigma = parse_signature(sig_file.read_text()) if sig_file.exists() \
            else frozenset()
        return o, c0, d0, sigma
    onto_text = _read(args.ontology) if args.ontology else ""
    o = parse_ontology(onto_text, args.dialect)
    left = getattr(args, "left", None)
    right = getattr(args, "right", None)
    c0 = _concept_arg(left) if left else None
    d0 = _concept_arg(right) if right else None
    sigma = parse_signature(_read(args.sigma)) if args.sigma else frozenset()
    return o, c0, d0, sigma


def _scan_key(seed):
    if seed is None:
        return None
    rng = random.Random(seed)
    salt = rng.random()
    return lambda mid: (hash((mid, salt)), mid)


def cmd_interpolate(args) -> int:
    budgets = _budgets(args)
    o, c0, d0, sigma = _load_problem(args)
    if c0 is None or d0 is None:
        raise AlcsepError("interpolate needs both concepts")
    p = InterpolationProblem(o, c0, d0, sigma)
    res = compute_interpolant(p, budgets=budgets, scan_key=_scan_key(args.seed))
    if args.emit_trace and res.decision is not None:
        Path(args.emit_trace).write_text(export_trace(res.decision.universe) + "\n")
    stats = {
        "types": res.stats.type_count,
        "mosaics": res.stats.mosaic_count,
        "rounds": res.stats.rounds,
        "eliminated": res.stats.eliminated,
        "interpolant_dag_size": res.stats.interpolant_dag_size,
        "sat_calls": res.stats.sat_calls,
        "wall_ms": round(res.stats.wall_ms, 3),
    }
    if res.verdict == "interpolant":
        if args.output == "json":
            print(json.dumps({
                "verdict": "interpolant",
                "interpolant": print_concept(res.interpolant),
                "verified": res.verification == "passed",
                "stats": stats,
            }, sort_keys=True))
        else:
            print("verdict: interpolant")
            print(print_concept(res.interpolant, args.output))
            print(f"verified: {'true' if res.verification == 'passed' else 'false'}")
        return 0
    if args.output == "json":
        print(json.dumps({"verdict": "none", "reason": res.reason, "stats": stats},
                         sort_keys=True))
    else:
        print(f"verdict: none ({res.reason})")
        if res.witness is not None:
            model, z, e1, e2 = res.witness
            print(emit_model(model))
            print("(bisim " + " ".join(f"({a} {b})" for a, b in sorted(z)) + ")")
            print(f"witness: {e1} {e2}")
    return 1


def cmd_sat(args) -> int:
    budgets = _budgets(args)
    o, c0, _d0, _sigma = _load_problem(args)
    if c0 is None:
        raise AlcsepError("sat needs a concept")
    if sat(o, c0, budgets):
        print("sat")
        return 0
    print("unsat")
    return 1


def cmd_entails(args) -> int:
    budgets = _budgets(args)
    o, c0, d0, _sigma = _load_problem(args)
    if c0 is None or d0 is None:
        raise AlcsepError("entails needs both concepts")
    if entails(o, c0, d0, budgets):
        print("entailed")
        return 0
    print("not-entailed")
    return 1


def cmd_bisim(args) -> int:
    i = parse_model(_read(args.model_a))
    j = parse_model(_read(args.model_b))
    sigma = parse_signature(_read(args.sigma)) if args.sigma else frozenset()
    z = max_sigma_bisimulation(i, j, sigma)
    print("(bisim " + " ".join(f"({a} {b})" for a, b in sorted(z)) + ")")
    return 0


def cmd_model(args) -> int:
    budgets = _budgets(args)
    o, c1, c2, sigma = _load_problem(args)
    if c1 is None or c2 is None:
        raise AlcsepError("model needs both concepts (tested jointly as given)")
    decision = decide_joint_consistency(o, c1, c2, sigma, budgets=budgets,
                                        scan_key=_scan_key(args.seed))
    if not decision.consistent:
        print("inconsistent: no surviving mosaic with the required completions")
        return 1
    if o.dialect != ALCH:
        print("consistent (counting dialect: partition certificates only)")
        return 0
    model, z, element_of = extract_model(decision.universe, o, decision.cx)
    print(emit_model(model))
    print("(bisim " + " ".join(f"({a} {b})" for a, b in sorted(z)) + ")")
    return 0


def cmd_generate(args) -> int:
    written = write_family(args.family, args.out, k=args.k)
    for w in written:
        print(w)
    return 0


def _add_common(sp, concepts: int = 2) -> None:
    sp.add_argument("--problem", help="directory with ontology.dl/c0.dl/d0.dl/sigma.txt")
    sp.add_argument("--ontology", "-O", help="ontology file")
    sp.add_argument("--sigma", "-S", help="signature file (whitespace-separated names)")
    sp.add_argument("--dialect", choices=[ALCH, ALCQ], default=ALCH)
    sp.add_argument("--mosaic-cap", type=int, default=None)
    sp.add_argument("--node-cap", type=int, default=None)
    sp.add_argument("--sat-cap", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None,
                    help="shuffle the elimination scan order (result-invariant)")
    if concepts >= 1:
        sp.add_argument("left", nargs="?", help="concept (or @file)")
    if concepts >= 2:
        sp.add_argument("right", nargs="?", help="concept (or @file)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="alcsep",
        description="ALC(Sigma) interpolants under ALCH/ALCQ ontologies")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("interpolate", help="decide and construct an interpolant")
    _add_common(sp)
    sp.add_argument("--output", choices=["tree", "dag", "json"], default="tree")
    sp.add_argument("--emit-trace", help="write the elimination trace to a file")
    sp.set_defaults(fn=cmd_interpolate)

    sp = sub.add_parser("sat", help="concept satisfiability under the ontology")
    _add_common(sp, concepts=1)
    sp.set_defaults(fn=cmd_sat)

    sp = sub.add_parser("entails", help="concept subsumption under the ontology")
    _add_common(sp)
    sp.set_defaults(fn=cmd_entails)

    sp = sub.add_parser("bisim", help="maximal signature bisimulation of two models")
    sp.add_argument("model_a")
    sp.add_argument("model_b")
    sp.add_argument("--sigma", "-S")
    sp.set_defaults(fn=cmd_bisim)

    sp = sub.add_parser("model", help="joint-consistency witness model")
    _add_common(sp)
    sp.set_defaults(fn=cmd_model)

    sp = sub.add_parser("generate", help="write a problem family to a directory")
    sp.add_argument("family", choices=["alch-k", "alch-tower", "alcq-tower"])
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except AlcsepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
