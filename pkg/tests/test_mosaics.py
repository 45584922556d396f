import random

import pytest

from alcsep.config import Budgets
from alcsep.errors import BudgetError
from alcsep.mosaics import (
    BaseAtomic, StepALCH, StepALCQ, decide_joint_consistency, eliminate,
    enumerate_mosaics, export_trace, extract_model, is_bad_alch, replay_trace,
    validate_partition,
)
from alcsep.reasoner import realizable_types
from alcsep.semantics import (
    check_joint_consistency_witness, is_model, is_sigma_bisimulation, type_map,
)
from alcsep.syntax import (
    ALCH, ALCQ, Ontology, atom, closure, neg, parse_concept, parse_ontology,
    parse_signature, top,
)


def _k1():
    o = parse_ontology("(role-implies r s1p)(role-implies s1p s1)")
    c0 = parse_concept("(and (some r B) (all r (or (not B) A1)))")
    d0 = parse_concept("(not (all s1 (not A1)))")
    sigma = parse_signature("s1p A1")
    return o, c0, d0, sigma


def test_enumerate_counts():
    o = Ontology(ALCH)
    cx = closure(o, atom("A"), top())
    cat = realizable_types(cx, o)
    assert len(cat) == 2
    u = enumerate_mosaics(cat, frozenset())
    assert len(u.mosaics) == 3  # 2^2 - 1


def test_enumerate_budget_error_names_counts():
    o = Ontology(ALCH)
    c = parse_concept("(and (some r A) (some r B) (some s A) (some s B))")
    cx = closure(o, c, top())
    cat = realizable_types(cx, o)
    with pytest.raises(BudgetError) as e:
        enumerate_mosaics(cat, frozenset(), Budgets(mosaic_cap=4))
    assert str(len(cat)) in str(e.value)


def test_atomic_inconsistency_detected():
    o = Ontology(ALCH)
    cx = closure(o, atom("A"), top())
    cat = realizable_types(cx, o)
    u = enumerate_mosaics(cat, frozenset(["A"]))
    pair = u.ids[frozenset(range(2))]
    rec = is_bad_alch(u, pair, frozenset(u.surviving))
    assert isinstance(rec, BaseAtomic)
    assert cx.terms[rec.atom_index].name == "A"
    # without the atom in the signature nothing is bad
    u2 = enumerate_mosaics(cat, frozenset())
    assert all(is_bad_alch(u2, m, frozenset(u2.surviving)) is None
               for m in u2.surviving)


def test_singletons_never_eliminated():
    o, c0, d0, sigma = _k1()
    dec = decide_joint_consistency(o, c0, neg(d0), sigma)
    u = dec.universe
    for mid in u.ids.values():
        if len(u.mosaics[mid]) == 1:
            assert mid in u.surviving


def test_k1_family_inconsistent_with_full_trace():
    o, c0, d0, sigma = _k1()
    dec = decide_joint_consistency(o, c0, neg(d0), sigma)
    assert not dec.consistent
    u = dec.universe
    # every seed pair was eliminated, with a recorded reason
    for mid in u.seeds:
        assert mid not in u.surviving
        assert mid in u.trace_index
    kinds = {type(u.trace_index[mid]) for mid in u.seeds}
    assert kinds == {BaseAtomic, StepALCH}


def test_decide_trivial_and_witnessed():
    o = Ontology(ALCH)
    t = top()
    dec = decide_joint_consistency(o, t, t, frozenset())
    assert dec.consistent

    o2 = parse_ontology("(implies A B)")
    dec = decide_joint_consistency(o2, atom("A"), neg(atom("B")), frozenset())
    assert dec.consistent  # matches the one-point-models witness


def test_elimination_scan_order_invariant():
    rng = random.Random(9)
    from alcsep.families import random_instance
    from alcsep.syntax import parse_concept as pc
    checked = 0
    seed = 0
    while checked < 12:
        seed += 1
        inst = random_instance(random.Random(seed), ALCH)
        o = parse_ontology(inst["ontology.dl"])
        c0, d0 = pc(inst["c0.dl"]), pc(inst["d0.dl"])
        sigma = parse_signature(inst["sigma.txt"])
        cx = closure(o, c0, d0)
        if len(cx) > 12:
            continue
        checked += 1
        base = decide_joint_consistency(o, c0, neg(d0), sigma)
        expect = set(base.universe.surviving)
        for _ in range(4):
            salt = rng.random()
            dec = decide_joint_consistency(
                o, c0, neg(d0), sigma,
                scan_key=lambda m, s=salt: (hash((m, s)), m))
            assert set(dec.universe.surviving) == expect


def test_lazy_agrees_with_exhaustive():
    from alcsep.families import random_instance
    from alcsep.syntax import parse_concept as pc
    checked = 0
    seed = 100
    while checked < 12:
        seed += 1
        inst = random_instance(random.Random(seed), ALCH, atoms=["A"],
                               roles=["r"], depth=1, n_cis=1)
        o = parse_ontology(inst["ontology.dl"])
        c0, d0 = pc(inst["c0.dl"]), pc(inst["d0.dl"])
        sigma = parse_signature(inst["sigma.txt"])
        cx = closure(o, c0, d0)
        cat = realizable_types(cx, o)
        if not 0 < len(cat) <= 8:
            continue
        checked += 1
        lazy = decide_joint_consistency(o, c0, neg(d0), sigma, mode="lazy")
        full = decide_joint_consistency(o, c0, neg(d0), sigma, mode="exhaustive")
        assert lazy.consistent == full.consistent
        # lazy survivors are exactly the full survivors among shared mosaics
        for fs, mid in lazy.universe.ids.items():
            full_mid = full.universe.ids[fs]
            assert (mid in lazy.universe.surviving) == \
                (full_mid in full.universe.surviving)


def test_trace_replay():
    o, c0, d0, sigma = _k1()
    dec = decide_joint_consistency(o, c0, neg(d0), sigma)
    assert replay_trace(dec.universe)


def test_trace_export_format():
    o, c0, d0, sigma = _k1()
    dec = decide_joint_consistency(o, c0, neg(d0), sigma)
    text = export_trace(dec.universe)
    lines = text.splitlines()
    assert len(lines) == len(dec.universe.trace)
    assert all(l.startswith(("base ", "step-alch ")) for l in lines)


# ---------------------------------------------------------------------------
# Counting dialect


def test_alcq_no_thresholds_empty_partition():
    o = Ontology(ALCQ)
    cx = closure(o, atom("A"), top())
    cat = realizable_types(cx, o)
    u = enumerate_mosaics(cat, frozenset(["r"]))
    eliminate(u)
    assert len(u.trace) == 0


def test_alcq_disagreeing_counts_eliminated():
    # two types disagreeing on (some r A) with A, r both visible cannot share
    # a bisimulation class
    o = Ontology(ALCQ)
    c0 = parse_concept("(some r A)")
    d0 = parse_concept("(not (some r A))")
    sigma = parse_signature("r A")
    dec = decide_joint_consistency(o, c0, d0, sigma, mode="exhaustive")
    assert not dec.consistent
    u = dec.universe
    assert any(isinstance(u.trace_index[m], StepALCQ) for m in u.seeds)


def test_alcq_self_inclusion_survives():
    o = Ontology(ALCQ)
    c = parse_concept("(atleast 2 r top)")
    dec = decide_joint_consistency(o, c, neg(c), frozenset(["r"]),
                                   mode="exhaustive")
    assert dec.consistent
    for role, (s_members, wfam, assign) in dec.certificates.items():
        assert validate_partition(dec.universe, dec.witness_mosaic, role,
                                  s_members, wfam, assign)


def test_alcq_replay():
    o = Ontology(ALCQ)
    c0 = parse_concept("(some r A)")
    d0 = parse_concept("(not (some r A))")
    dec = decide_joint_consistency(o, c0, d0, frozenset(["r", "A"]),
                                   mode="exhaustive")
    assert replay_trace(dec.universe)


# ---------------------------------------------------------------------------
# Witness model extraction


def _certify_model(o, c0, n0, sigma, dec):
    u = dec.universe
    cx = dec.cx
    model, z, element_of = extract_model(u, o, cx)
    assert is_model(model, o)
    tmap = type_map(model, cx)
    for (tid, mid), name in element_of.items():
        assert tmap[name] == u.cat.types[tid]
    assert is_sigma_bisimulation(model, model, z, sigma)
    # realization of both concepts at related points
    mid = dec.witness_mosaic
    t1 = next(t for t in u.mosaics[mid] if cx.holds(u.cat.types[t], c0))
    t2 = next(t for t in u.mosaics[mid] if cx.holds(u.cat.types[t], n0))
    e1, e2 = element_of[(t1, mid)], element_of[(t2, mid)]
    assert check_joint_consistency_witness(o, c0, n0, sigma, model, e1, model, e2)


def test_extract_model_certifies():
    o = parse_ontology("(implies A B)")
    c0, n0 = atom("A"), neg(atom("B"))
    dec = decide_joint_consistency(o, c0, n0, frozenset())
    assert dec.consistent
    _certify_model(o, c0, n0, frozenset(), dec)


def test_extract_model_with_roles():
    o = parse_ontology("(role-implies r s)")
    c0 = parse_concept("(some r A)")
    n0 = parse_concept("(all s (not A))")
    # with the marker invisible the sides are compatible, and the witness
    # model must certify end to end
    sigma = frozenset(["s"])
    dec = decide_joint_consistency(o, c0, n0, sigma)
    assert dec.consistent
    _certify_model(o, c0, n0, sigma, dec)
    # making the marker visible forces the clash through the s-edge
    sigma2 = frozenset(["s", "A"])
    dec2 = decide_joint_consistency(o, c0, n0, sigma2)
    assert not dec2.consistent
