"""Polyadic separator synthesis and certification.

A separator for a family of separands (conjunctive sets of closure
concepts; a type is the maximal case) assigns each separand a concept in
the target signature that it entails, with jointly unsatisfiable images.
Separators for eliminated mosaics come from the elimination reason:

  * atomic inconsistency - literal of the splitting atom per type;
  * failed existential requirement (role-hierarchy dialect) - universal
    restrictions over the separator of the successor-constraint family,
    which the completion combinator assembles from the separators of the
    already-eliminated witness candidates;
  * failed partition requirement (counting dialect) - one general
    separator map evolves over the whole trace and every eliminated
    mosaic reads its entries off it.

Everything this module emits can be certified: each entry is checked to
be entailed by its separand and the entries jointly unsatisfiable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

from .config import DEFAULT_BUDGETS, Budgets
from .errors import BudgetError, SoundnessError
from .mosaics import BaseAtomic, MosaicUniverse, StepALCH, StepALCQ
from .reasoner import entails, sat
from .syntax import (
    ConceptTerm, Ontology, bot, conj, disj, neg, only, some, term_by_id, top,
)

Separand = frozenset  # of term ids, read conjunctively

UNCHECKED = "unchecked"
CERTIFIED = "certified"
FAILED = "failed"


def separand_concept(s: Separand) -> ConceptTerm:
    return conj(term_by_id(i) for i in sorted(s))


@dataclass
class SeparatorMap:
    """Separand -> target-signature concept, with a certification status."""

    entries: dict
    scope: str = ""
    certified: str = UNCHECKED
    failure: Optional[tuple] = None

    def entry(self, s: Separand) -> ConceptTerm:
        return self.entries[s]

    def concepts(self) -> list:
        return list(self.entries.values())


@dataclass
class GeneralSeparator:
    """Type id -> concept, defaulting to top for absent types."""

    per_type: dict = field(default_factory=dict)

    def get(self, tid: int) -> ConceptTerm:
        return self.per_type.get(tid, top())


def _type_separand(u: MosaicUniverse, tid: int) -> Separand:
    return u.cat.separand_of_type(tid)


# ---------------------------------------------------------------------------
# Base separators


def base_separator(u: MosaicUniverse, mid: int, atom_index: int) -> SeparatorMap:
    """Literal of the splitting atom, per member type."""
    lit = u.cx.terms[atom_index]
    if lit.name not in u.sigma:
        raise SoundnessError(f"splitting atom {lit.name} outside the signature")
    members = sorted(u.mosaics[mid])
    vals = {bool(u.cat.types[t] >> atom_index & 1) for t in members}
    if len(vals) != 2:
        raise SoundnessError(f"atom {lit.name} does not split mosaic m{mid}")
    entries = {}
    for t in members:
        entries[_type_separand(u, t)] = (
            lit if u.cat.types[t] >> atom_index & 1 else neg(lit))
    return SeparatorMap(entries, scope=f"base m{mid}")


def _on_demand_base_entry(u: MosaicUniverse, profile_vec: list, pick_profile: int,
                          atoms: list) -> ConceptTerm:
    """Entry of the base separator of a profile-split image at a member with
    `pick_profile`: the literal of the least splitting atom."""
    for k, idx in enumerate(atoms):
        vals = {p >> k & 1 for p in profile_vec}
        if len(vals) == 2:
            lit = u.cx.terms[idx]
            return lit if pick_profile >> k & 1 else neg(lit)
    raise SoundnessError("profile vector does not split on any signature atom")


# ---------------------------------------------------------------------------
# Completion combinator


def complete_separator(u: MosaicUniverse, separands: list,
                       sep_for: Callable, general: Optional[GeneralSeparator] = None,
                       budgets: Budgets = DEFAULT_BUDGETS) -> SeparatorMap:
    """Lift separators of all completion images to the separand family.

    Every image (one completion type per maximal separand) must already be
    eliminated; `sep_for` maps an eliminated mosaic id to its SeparatorMap.
    With a general separator the image entry depends on the picked type
    only, so the per-image products collapse.

    The per-separand entry is the disjunction, over its completions, of
    the conjunction of the image entries at that completion.  Images whose
    picks disagree on a signature atom are separated by the on-demand base
    literal; profile-sharing images are exactly the materialized witness
    candidates.
    """
    separands = list(dict.fromkeys(separands))
    compls = {m: u.completions(m) for m in separands}
    entries: dict = {}
    if any(not c for c in compls.values()):
        for m in separands:
            entries[m] = bot() if not compls[m] else top()
        return SeparatorMap(entries, scope="degenerate")

    kept = [m for m in separands if not any(m < other for other in separands)]
    kept.sort(key=lambda m: sorted(m))
    for m in separands:
        if m not in kept:
            entries[m] = top()

    if general is not None:
        for m in kept:
            entries[m] = disj(general.get(t) for t in compls[m])
        return SeparatorMap(entries, scope="completion(general)")

    atoms = u.sigma_atoms
    profile_sets = []
    for m in kept:
        groups: dict[int, list] = {}
        for t in compls[m]:
            groups.setdefault(u.profile(t), []).append(t)
        profile_sets.append(groups)

    def diff_part(i: int, prof: int) -> list:
        """Base literals over profile vectors that split somewhere."""
        out: dict[int, ConceptTerm] = {}
        other_profiles = [sorted(g) for k, g in enumerate(profile_sets) if k != i]
        total = 1
        for p in other_profiles:
            total *= len(p)
        if total > budgets.cand_cap:
            raise BudgetError(
                f"completion combinator: {total} profile vectors for one separand")
        for vec in itertools.product(*other_profiles):
            full = list(vec[:i]) + [prof] + list(vec[i:])
            if len(set(full)) > 1:
                lit = _on_demand_base_entry(u, full, prof, atoms)
                out[lit.id] = lit
        return list(out.values())

    diff_cache: dict = {}
    for i, m in enumerate(kept):
        disjuncts = []
        for t in sorted(compls[m]):
            prof = u.profile(t)
            parts: list = []
            key = (i, prof)
            if key not in diff_cache:
                diff_cache[key] = diff_part(i, prof)
            parts.extend(diff_cache[key])
            # profile-sharing images: materialized, eliminated candidates
            pools = [sorted(g[prof]) for k, g in enumerate(profile_sets)
                     if k != i and prof in g]
            if len(pools) == len(kept) - 1:
                count = 1
                for p in pools:
                    count *= len(p)
                if count > budgets.cand_cap:
                    raise BudgetError(
                        f"completion combinator: {count} images for one separand")
                for picks in itertools.product(*pools):
                    image = frozenset((t,) + picks)
                    mid = u.ids.get(image)
                    if mid is None or mid in u.surviving:
                        raise SoundnessError(
                            "completion image missing or surviving; separand "
                            "family is not fully eliminated")
                    parts.append(sep_for(mid).entry(_type_separand(u, t)))
            disjuncts.append(conj(parts))
        entries[m] = disj(disjuncts)
    return SeparatorMap(entries, scope="completion")


# ---------------------------------------------------------------------------
# Inductive step, role-hierarchy dialect


def step_separator_alch(u: MosaicUniverse, rec: StepALCH,
                        sep_for: Callable,
                        budgets: Budgets = DEFAULT_BUDGETS) -> SeparatorMap:
    """Separator of a mosaic eliminated on (t, some r.C): universal
    restrictions of the successor-family separator for the others, negated
    conjunction for t itself."""
    cx = u.cx
    members = sorted(u.mosaics[rec.mosaic])
    if len(members) == 1:
        raise SoundnessError("inductive step on a singleton mosaic is unreachable "
                             "for realizable types")
    _n, role, (ci, cn) = cx.atl_info[rec.entry_index]
    child = cx.terms[ci] if not cn else neg(cx.terms[ci])
    sig_sups = sorted(s for s in u.o.super_roles(role) if s in u.sigma)
    if not sig_sups:
        raise SoundnessError("inductive step with no signature super-role is "
                             "unreachable for realizable types")

    succ_of = {(t, s): frozenset(u.cat.succ(t, s)[0])
               for t in members for s in sig_sups}
    s0 = frozenset(u.cat.succ(rec.type_id, role)[0] | {child.id})
    family = [s0] + [succ_of[(t, s)] for t in members for s in sig_sups]
    sep_d = complete_separator(u, family, sep_for, budgets=budgets)

    entries: dict = {}
    others = []
    for t in members:
        if t == rec.type_id:
            continue
        entry = conj(only(s, sep_d.entry(succ_of[(t, s)])) for s in sig_sups)
        entries[_type_separand(u, t)] = entry
        others.append(entry)
    entries[_type_separand(u, rec.type_id)] = neg(conj(others))
    return SeparatorMap(entries, scope=f"step m{rec.mosaic}")


def build_alch_separator_lookup(u: MosaicUniverse,
                                budgets: Budgets = DEFAULT_BUDGETS) -> Callable:
    """Memoized mosaic id -> SeparatorMap over the elimination trace.

    Well-founded: the images a step refers to were eliminated strictly
    earlier, so the recursion follows the trace backwards.
    """
    memo: dict[int, SeparatorMap] = {}

    def sep_for(mid: int) -> SeparatorMap:
        got = memo.get(mid)
        if got is not None:
            return got
        rec = u.trace_index.get(mid)
        if rec is None:
            raise SoundnessError(f"no elimination record for mosaic m{mid}")
        if isinstance(rec, BaseAtomic):
            out = base_separator(u, mid, rec.atom_index)
        elif isinstance(rec, StepALCH):
            out = step_separator_alch(u, rec, sep_for, budgets)
        else:
            raise SoundnessError("counting-dialect record in role-hierarchy trace")
        memo[mid] = out
        return out

    return sep_for


# ---------------------------------------------------------------------------
# General separators, counting dialect


def _plainly_contradictory(c: ConceptTerm) -> bool:
    """Syntactic bottom: the conjunction holds a term and its negation."""
    if c is bot():
        return True
    if c.kind != "and":
        return False
    ids = {x.id for x in c.children}
    return any(neg(x).id in ids for x in c.children)


def general_separator_base(u: MosaicUniverse, e0: list) -> GeneralSeparator:
    """Per-type conjunction of the base separators of the mosaics in e0."""
    acc: dict[int, list] = {}
    for mid in e0:
        a = u.atom_split(mid)
        if a is None:
            raise SoundnessError(f"mosaic m{mid} is not atomically inconsistent")
        base = base_separator(u, mid, a)
        for t in sorted(u.mosaics[mid]):
            acc.setdefault(t, []).append(base.entry(_type_separand(u, t)))
    return GeneralSeparator({t: conj(parts) for t, parts in acc.items()})


def step_separator_alcq(u: MosaicUniverse, rec: StepALCQ, sep_n: GeneralSeparator,
                        budgets: Budgets = DEFAULT_BUDGETS) -> GeneralSeparator:
    """One evolution step of the general separator.

    Successor descriptions are the sign patterns over the current entries
    (effectively over the types with a non-top entry; a pattern negating
    top is unsatisfiable and drops out).  delta(t) collects the satisfiable
    patterns-of-children constraints; the least member absorbs the
    negation.
    """
    o = u.o
    members = sorted(u.mosaics[rec.mosaic])
    k_types = sorted(t for t, c in sep_n.per_type.items() if c.id != top().id)
    literals = [sep_n.per_type[t] for t in k_types]

    if 1 << len(set(l.id for l in literals)) > budgets.cand_cap:
        raise BudgetError(f"successor-pattern space over {len(literals)} entries "
                          f"exceeds {budgets.cand_cap}")
    v_plus = []
    for signs in itertools.product((True, False), repeat=len(literals)):
        c = conj(lit if s else neg(lit) for lit, s in zip(literals, signs))
        if not _plainly_contradictory(c):
            v_plus.append(c)
    v_plus = list(dict.fromkeys(v_plus))

    usable = [c for c in v_plus if sat(o, some(rec.role, c), budgets)]
    if 1 << len(usable) > budgets.node_cap:
        raise BudgetError(f"2^{len(usable)} successor-pattern subsets exceed "
                          f"{budgets.node_cap}")

    def nabla(bs: tuple) -> ConceptTerm:
        if not bs:
            return only(rec.role, bot())
        return conj(list(map(lambda c: some(rec.role, c), bs))
                    + [only(rec.role, disj(bs))])

    def delta(t: int) -> ConceptTerm:
        parts = []
        tc = u.cat.type_concept(t)
        for size in range(0, len(usable) + 1):
            for bs in itertools.combinations(usable, size):
                nb = nabla(bs)
                if sat(o, conj([tc, nb]), budgets):
                    parts.append(nb)
        return disj(parts)

    t0 = members[0]
    step_entries = {t: delta(t) for t in members if t != t0}
    step_entries[t0] = neg(conj(step_entries.values()))
    per_type = dict(sep_n.per_type)
    for t in members:
        per_type[t] = conj([step_entries[t], sep_n.get(t)])
    return GeneralSeparator(per_type)


def build_alcq_general(u: MosaicUniverse,
                       budgets: Budgets = DEFAULT_BUDGETS) -> GeneralSeparator:
    """Fold the trace: base mosaics first, then one step per partition failure."""
    e0 = [rec.mosaic for rec in u.trace if isinstance(rec, BaseAtomic)]
    sep = general_separator_base(u, e0)
    for rec in u.trace:
        if isinstance(rec, StepALCQ):
            sep = step_separator_alcq(u, rec, sep, budgets)
    return sep


def restrict_general(u: MosaicUniverse, sep: GeneralSeparator, mid: int) -> SeparatorMap:
    entries = {_type_separand(u, t): sep.get(t) for t in sorted(u.mosaics[mid])}
    return SeparatorMap(entries, scope=f"general m{mid}")


# ---------------------------------------------------------------------------
# Certification


@dataclass
class CertResult:
    status: str
    condition: Optional[str] = None
    separand: Optional[Separand] = None


def certify(sep: SeparatorMap, o: Ontology,
            budgets: Budgets = DEFAULT_BUDGETS) -> CertResult:
    """Check both defining conditions; failure is a result, not an error."""
    for s, concept in sep.entries.items():
        if not entails(o, separand_concept(s), concept, budgets):
            sep.certified = FAILED
            sep.failure = ("entailment", s)
            return CertResult(FAILED, "entailment", s)
    if sat(o, conj(sep.concepts()), budgets):
        sep.certified = FAILED
        sep.failure = ("joint-unsat", None)
        return CertResult(FAILED, "joint-unsat")
    sep.certified = CERTIFIED
    return CertResult(CERTIFIED)
