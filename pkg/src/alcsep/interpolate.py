"""Pipeline: interpolant existence, construction, verification, statistics.

The pipeline always reduces "interpolant for O |= C0 below D0" to joint
bisimilar satisfiability of (C0, not D0); inner machinery speaks only
"separator".  Every returned interpolant is verified (signature plus both
entailments); a verification failure is a fatal internal error, never a
silent result.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .config import DEFAULT_BUDGETS, Budgets
from .errors import DialectError, SoundnessError
from .mosaics import Decision, decide_joint_consistency, extract_model, validate_partition
from .reasoner import entails, realizable_types, sat_call_count
from .semantics import check_joint_consistency_witness
from .separators import (
    build_alch_separator_lookup, build_alcq_general, complete_separator,
    restrict_general,
)
from .syntax import (
    ALCH, ConceptTerm, Ontology, closure, dag_size, neg, signature_names,
)


@dataclass
class InterpolationProblem:
    ontology: Ontology
    c0: ConceptTerm
    d0: ConceptTerm
    sigma: frozenset

    def __post_init__(self) -> None:
        if self.ontology.dialect == ALCH:
            if not (self.c0.alc and self.d0.alc):
                raise DialectError("role-hierarchy mode interpolates between "
                                   "existential-level concepts only")


@dataclass
class Stats:
    type_count: int = 0
    mosaic_count: int = 0
    rounds: int = 0
    eliminated: int = 0
    interpolant_dag_size: int = 0
    sat_calls: int = 0
    wall_ms: float = 0.0


@dataclass
class InterpolationResult:
    verdict: str                     # "interpolant" | "none"
    interpolant: Optional[ConceptTerm] = None
    reason: Optional[str] = None     # "jointly-consistent" | "not-entailed"
    verification: str = "unchecked"  # "passed" | "unchecked"
    witness: Optional[tuple] = None  # (model, Z, e1, e2) in the hierarchy dialect
    witness_mosaic: Optional[frozenset] = None
    certificates: Optional[dict] = None
    countermodel_type: Optional[frozenset] = None
    stats: Stats = field(default_factory=Stats)
    decision: Optional[Decision] = None
    separator_registry: list = field(default_factory=list)


def verify_interpolant(o: Ontology, c0: ConceptTerm, d0: ConceptTerm,
                       sigma: frozenset, e: ConceptTerm,
                       budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    """Signature check plus both entailments."""
    if not signature_names(e) <= sigma:
        return False
    if not e.alc:
        return False
    return entails(o, c0, e, budgets) and entails(o, e, d0, budgets)


def interpolant_exists(p: InterpolationProblem, mode: str = "auto",
                       budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    decision = decide_joint_consistency(
        p.ontology, p.c0, neg(p.d0), p.sigma, mode, budgets)
    return not decision.consistent


def compute_interpolant(p: InterpolationProblem, mode: str = "auto",
                        budgets: Budgets = DEFAULT_BUDGETS,
                        scan_key=None, certify_all: bool = False) -> InterpolationResult:
    o = p.ontology
    start = time.monotonic()
    sat_before = sat_call_count()
    n0 = neg(p.d0)

    if not entails(o, p.c0, p.d0, budgets):
        cx = closure(o, p.c0, p.d0)
        cat = realizable_types(cx, o, budgets=budgets)
        hit = cat.completions(*cx.mask_of([p.c0, n0]))
        counter = cat.separand_of_type(hit[0]) if hit else None
        res = InterpolationResult("none", reason="not-entailed",
                                  countermodel_type=counter)
        res.stats = _stats(None, None, start, sat_before)
        res.stats.type_count = len(cat)
        return res

    decision = decide_joint_consistency(o, p.c0, n0, p.sigma, mode, budgets, scan_key)
    u = decision.universe

    if decision.consistent:
        res = InterpolationResult("none", reason="jointly-consistent",
                                  decision=decision)
        res.witness_mosaic = u.mosaics[decision.witness_mosaic]
        if o.dialect == ALCH:
            model, z, element_of = extract_model(u, o, decision.cx)
            e1, e2 = _witness_elements(decision, element_of, p.c0, n0)
            if not check_joint_consistency_witness(
                    o, p.c0, n0, p.sigma, model, e1, model, e2):
                raise SoundnessError("extracted witness model failed certification")
            res.witness = (model, z, e1, e2)
        else:
            res.certificates = decision.certificates
            for role, (s_members, wfam, assign) in decision.certificates.items():
                if not validate_partition(u, decision.witness_mosaic, role,
                                          s_members, wfam, assign):
                    raise SoundnessError("surviving partition certificate invalid")
        res.stats = _stats(u, None, start, sat_before)
        return res

    registry: list = []
    if o.dialect == ALCH:
        lookup = build_alch_separator_lookup(u, budgets)
        top_map = complete_separator(
            u, [frozenset((p.c0.id,)), frozenset((n0.id,))], lookup, budgets=budgets)
        if certify_all:
            registry.extend(lookup(rec.mosaic) for rec in u.trace)
    else:
        general = build_alcq_general(u, budgets)
        top_map = complete_separator(
            u, [frozenset((p.c0.id,)), frozenset((n0.id,))], None,
            general=general, budgets=budgets)
        if certify_all:
            registry.extend(restrict_general(u, general, rec.mosaic)
                            for rec in u.trace)
    registry.append(top_map)

    e = top_map.entry(frozenset((p.c0.id,)))
    if not verify_interpolant(o, p.c0, p.d0, p.sigma, e, budgets):
        raise SoundnessError("constructed interpolant failed verification")

    res = InterpolationResult("interpolant", interpolant=e, verification="passed",
                              decision=decision, separator_registry=registry)
    res.stats = _stats(u, e, start, sat_before)
    return res


def _witness_elements(decision: Decision, element_of: dict,
                      c0: ConceptTerm, n0: ConceptTerm) -> tuple:
    u = decision.universe
    cx = decision.cx
    mid = decision.witness_mosaic
    cat = u.cat
    t1 = t2 = None
    for tid in sorted(u.mosaics[mid]):
        if t1 is None and cx.holds(cat.types[tid], c0):
            t1 = tid
        if t2 is None and cx.holds(cat.types[tid], n0):
            t2 = tid
    if t1 is None or t2 is None:
        raise SoundnessError("witness mosaic lost its completions")
    return element_of[(t1, mid)], element_of[(t2, mid)]


def _stats(u, e, start: float, sat_before: int) -> Stats:
    s = Stats()
    if u is not None:
        s.type_count = len(u.cat)
        s.mosaic_count = len(u.mosaics)
        s.rounds = u.rounds
        s.eliminated = len(u.trace)
    if e is not None:
        s.interpolant_dag_size = dag_size(e)
    s.sat_calls = sat_call_count() - sat_before
    s.wall_ms = (time.monotonic() - start) * 1000.0
    return s
