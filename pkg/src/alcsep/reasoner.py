"""Types, realizability, witnessing functions, satisfiability, entailment.

A type is a bitmask over a `ClosureIndex`: bit i set means indexed concept
i holds, and the negation of entry i holds iff the bit is clear.  Boolean
saturation (conjunction bits agree with their children, inclusion axioms
respected) is enforced by the enumerator; quantifier consistency is the
realizability fixpoint on top of it.

Satisfiability of a concept C under O extends the closure with sub(C) and
asks for a realizable type containing C.  In the role-hierarchy dialect
this membership test runs as a goal-directed search with the usual
greatest-fixpoint reading (a successor cycle counts as support), so large
verification concepts do not force materializing the whole type space.
The counting dialect materializes; its inputs stay desk-sized.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Optional

from .config import DEFAULT_BUDGETS, Budgets
from .errors import BudgetError, DialectError
from .syntax import (
    ALCH, ALCQ, ATLEAST,
    ClosureIndex, ConceptTerm, Ontology, closure, conj, neg, term_by_id, top,
)

INFINITY = -1  # counting value "unboundedly many" in the N* domain

_SAT_CALLS = 0


def sat_call_count() -> int:
    return _SAT_CALLS


# ---------------------------------------------------------------------------
# Saturated assignment enumeration (Boolean layer)


class _Propagator:
    """Unit propagation for the Boolean saturation constraints of a closure."""

    def __init__(self, cx: ClosureIndex):
        self.cx = cx
        self.n = len(cx)

    def propagate(self, assign: list) -> bool:
        """Extend a partial 0/1/None assignment; False on contradiction."""
        cx = self.cx
        if assign[0] == 0:  # top constrained false
            return False
        assign[0] = 1
        changed = True
        while changed:
            changed = False
            for idx, children in cx.and_children.items():
                vals = []
                unknown = []
                for (ci, cn) in children:
                    v = assign[ci]
                    vals.append(None if v is None else (v ^ (1 if cn else 0)))
                    if v is None:
                        unknown.append((ci, cn))
                if all(v == 1 for v in vals):
                    if assign[idx] == 0:
                        return False
                    if assign[idx] is None:
                        assign[idx] = 1
                        changed = True
                elif any(v == 0 for v in vals):
                    if assign[idx] == 1:
                        return False
                    if assign[idx] is None:
                        assign[idx] = 0
                        changed = True
                elif assign[idx] == 1:
                    for (ci, cn) in unknown:
                        assign[ci] = 0 if cn else 1
                        changed = True
                elif assign[idx] == 0 and len(unknown) == 1 and all(
                        v in (1, None) for v in vals):
                    ci, cn = unknown[0]
                    assign[ci] = 1 if cn else 0
                    changed = True
            for (li, ln), (ri, rn) in cx.ci_refs:
                lv = assign[li]
                rv = assign[ri]
                lval = None if lv is None else (lv ^ (1 if ln else 0))
                rval = None if rv is None else (rv ^ (1 if rn else 0))
                if lval == 1 and rval == 0:
                    return False
                if lval == 1 and rval is None:
                    assign[ri] = 0 if rn else 1
                    changed = True
                if rval == 0 and lval is None:
                    assign[li] = 1 if ln else 0
                    changed = True
        return True


def saturated_assignments(cx: ClosureIndex, o: Ontology,
                          pos: int = 0, negm: int = 0,
                          cap: Optional[int] = None) -> Iterator[int]:
    """All Boolean-saturated bitmasks matching the (pos, neg) constraint.

    Deterministic DFS order: lowest unassigned index first, 0 before 1.
    """
    prop = _Propagator(cx)
    n = len(cx)
    base: list = [None] * n
    for i in range(n):
        if pos >> i & 1:
            base[i] = 1
        if negm >> i & 1:
            if base[i] == 1:
                return
            base[i] = 0
    produced = 0
    nodes = 0
    stack = [base]
    while stack:
        assign = stack.pop()
        nodes += 1
        if cap is not None and nodes > 8 * cap:
            raise BudgetError(
                f"saturated-type search explored {nodes} branches over a "
                f"closure of size {n}")
        if not prop.propagate(assign):
            continue
        branch = None
        for i in range(n):
            if assign[i] is None:
                branch = i
                break
        if branch is None:
            bits = 0
            for i in range(n):
                if assign[i]:
                    bits |= 1 << i
            produced += 1
            if cap is not None and produced > cap:
                raise BudgetError(
                    f"saturated-type space exceeds cap {cap} for closure of size {n}")
            yield bits
            continue
        hi = list(assign)
        hi[branch] = 1
        lo = assign
        lo[branch] = 0
        stack.append(hi)   # popped after lo: 0-branch explored first
        stack.append(lo)
    return


def candidate_types(cx: ClosureIndex, o: Ontology,
                    cap: Optional[int] = None) -> list:
    """All Boolean-saturated bitmasks (quantifier consistency deferred)."""
    return list(saturated_assignments(cx, o, cap=cap))


# ---------------------------------------------------------------------------
# Successor requirements (role-hierarchy dialect)


def succ_members(cx: ClosureIndex, o: Ontology, bits: int, role: str) -> frozenset:
    """Concepts every `role`-successor of a `bits`-type must satisfy.

    Closes over the full role hierarchy: a cleared (some s E) bit with s
    above `role` contributes (not E).  Term ids, to be read conjunctively.
    """
    sup = o.super_roles(role) if o.dialect == ALCH else frozenset((role,))
    out = []
    for idx in cx.atleasts:
        n, s, (ci, cn) = cx.atl_info[idx]
        if s in sup and not bits >> idx & 1:
            # n == 1 in this dialect
            child = cx.terms[ci] if not cn else neg(cx.terms[ci])
            out.append(neg(child).id)
    return frozenset(out)


def succ_masks(cx: ClosureIndex, o: Ontology, bits: int, role: str) -> tuple:
    pos = negm = 0
    for tid in succ_members(cx, o, bits, role):
        p, n = cx.mask_of([term_by_id(tid)])
        pos |= p
        negm |= n
    return pos, negm


def existential_requirements(cx: ClosureIndex, bits: int) -> list:
    """Indices of (some r C) entries set in `bits` (n == 1 entries only)."""
    return [idx for idx in cx.atleasts
            if cx.atl_info[idx][0] == 1 and bits >> idx & 1]


# ---------------------------------------------------------------------------
# Witnessing functions (counting dialect)


def _counted_for_role(cx: ClosureIndex, role: str) -> list:
    return cx.counted_by_role.get(role, [])


def _nstar_add(a: int, b: int) -> int:
    if a == INFINITY or b == INFINITY:
        return INFINITY
    return a + b


def _nstar_geq(a: int, n: int) -> bool:
    return a == INFINITY or a >= n


def find_witnessing_function(cx: ClosureIndex, t_bits: int, role: str,
                             support: list, m_star: int) -> Optional[dict]:
    """Successor multiplicities over `support` matching every counting bit.

    Values live in {0..m_star} plus INFINITY.  Support types sharing a
    membership profile over the counted concepts are interchangeable, so
    the search runs per profile group and the total lands on the group's
    least member.  Returns {support_bits: value} or None.
    """
    counted = _counted_for_role(cx, role)
    if not counted:
        return {b: 0 for b in support}
    groups: dict[tuple, list] = {}
    for b in support:
        profile = tuple(cx.ref_holds(b, ref) for (_, ref, _) in counted)
        groups.setdefault(profile, []).append(b)
    profiles = sorted(groups)
    sol = next(iter_group_witness_solutions(cx, t_bits, role, profiles, m_star),
               None)
    if sol is None:
        return None
    out = {b: 0 for b in support}
    for k, p in enumerate(profiles):
        if sol[k]:
            out[min(groups[p])] = sol[k]
    return out


def iter_group_witness_solutions(cx: ClosureIndex, t_bits: int, role: str,
                                 profiles: list, m_star: int) -> Iterator[list]:
    """All weight vectors over profile groups meeting the counting bits.

    `profiles` are membership tuples over the counted concepts of `role`
    in canonical order; yields aligned value lists (INFINITY allowed).
    """
    counted = _counted_for_role(cx, role)
    lower, upper = [], []
    for j, (n, _ref, idx) in enumerate(counted):
        coords = [k for k, p in enumerate(profiles) if p[j]]
        if t_bits >> idx & 1:
            lower.append((n, coords))
        else:
            upper.append((n, coords))
    values = [0] * len(profiles)
    domain = list(range(m_star + 1)) + [INFINITY]
    # groups outside every counted concept cannot affect any constraint
    inert = [k for k, p in enumerate(profiles) if not any(p)]

    def ok_partial(k: int) -> bool:
        for n, coords in upper:
            s = 0
            for c in coords:
                if c < k:
                    s = _nstar_add(s, values[c])
            if _nstar_geq(s, n):
                return False
        for n, coords in lower:
            if coords and coords[-1] < k:
                s = 0
                for c in coords:
                    s = _nstar_add(s, values[c])
                if not _nstar_geq(s, n):
                    return False
            elif not coords:
                if n > 0:
                    return False
        return True

    def rec(k: int) -> Iterator[list]:
        if k == len(profiles):
            for n, coords in lower:
                s = 0
                for c in coords:
                    s = _nstar_add(s, values[c])
                if not _nstar_geq(s, n):
                    return
            yield list(values)
            return
        if k in inert:
            values[k] = 0
            yield from rec(k + 1)
            return
        for v in domain:
            values[k] = v
            if ok_partial(k + 1):
                yield from rec(k + 1)
        values[k] = 0

    if not ok_partial(0):
        return
    yield from rec(0)


def counted_profile(cx: ClosureIndex, bits: int, role: str) -> tuple:
    return tuple(cx.ref_holds(bits, ref)
                 for (_n, ref, _idx) in _counted_for_role(cx, role))


def witnessing_function_valid(cx: ClosureIndex, t_bits: int, role: str,
                              values: dict) -> bool:
    counted = _counted_for_role(cx, role)
    for n, ref, idx in counted:
        s = 0
        for b, v in values.items():
            if v and cx.ref_holds(b, ref):
                s = _nstar_add(s, v)
        if bool(t_bits >> idx & 1) != _nstar_geq(s, n):
            return False
    return True


def witness_from_model(i, d: str, role: str, cx: ClosureIndex, m_star: int) -> dict:
    """Read successor multiplicities off a model element, capping at m_star."""
    from .semantics import type_of

    counts: dict[int, int] = {}
    for e in i.successors(d, role):
        tp = type_of(i, e, cx)
        counts[tp] = counts.get(tp, 0) + 1
    return {tp: (c if c <= m_star else INFINITY) for tp, c in counts.items()}


# ---------------------------------------------------------------------------
# Realizable types


class TypeCatalog:
    """The realizable types of a closure, with stable ids."""

    def __init__(self, cx: ClosureIndex, o: Ontology, types: list):
        self.cx = cx
        self.o = o
        self.types = types                       # catalog id -> bits
        self.index = {b: i for i, b in enumerate(types)}
        self._succ_cache: dict[tuple, tuple] = {}

    def __len__(self) -> int:
        return len(self.types)

    def succ(self, tid: int, role: str) -> tuple:
        """(member term ids, pos mask, neg mask) for role-successors of type tid."""
        got = self._succ_cache.get((tid, role))
        if got is None:
            members = succ_members(self.cx, self.o, self.types[tid], role)
            pos = negm = 0
            for m in members:
                p, n = self.cx.mask_of([term_by_id(m)])
                pos |= p
                negm |= n
            got = (members, pos, negm)
            self._succ_cache[(tid, role)] = got
        return got

    def completions(self, pos: int, negm: int) -> list:
        """Catalog ids of types matching the (pos, neg) constraint."""
        return [i for i, b in enumerate(self.types)
                if b & pos == pos and b & negm == 0]

    def type_concept(self, tid: int) -> ConceptTerm:
        """The type read as the conjunction of all its (signed) members."""
        bits = self.types[tid]
        cx = self.cx
        parts = []
        for idx, t in enumerate(cx.terms):
            parts.append(t if bits >> idx & 1 else neg(t))
        return conj(parts)

    def separand_of_type(self, tid: int) -> frozenset:
        bits = self.types[tid]
        cx = self.cx
        return frozenset(
            (t if bits >> idx & 1 else neg(t)).id
            for idx, t in enumerate(cx.terms))


def realizable_types(cx: ClosureIndex, o: Ontology, dialect: str | None = None,
                     budgets: Budgets = DEFAULT_BUDGETS) -> TypeCatalog:
    """Greatest fixpoint: drop types whose quantifier bits cannot be witnessed."""
    dialect = dialect or o.dialect
    cands = candidate_types(cx, o, cap=budgets.sat_cand_cap)
    alive = list(cands)
    if dialect == ALCH:
        alive = _realizable_alch(cx, o, alive)
    else:
        alive = _realizable_alcq(cx, o, alive)
    return TypeCatalog(cx, o, alive)


def _realizable_alch(cx: ClosureIndex, o: Ontology, alive: list) -> list:
    reqs = {b: existential_requirements(cx, b) for b in alive}
    while True:
        keep = []
        dropped = False
        for b in alive:
            ok = True
            for idx in reqs[b]:
                _n, role, (ci, cn) = cx.atl_info[idx]
                child = cx.terms[ci] if not cn else neg(cx.terms[ci])
                pos, negm = succ_masks(cx, o, b, role)
                p2, n2 = cx.mask_of([child])
                pos |= p2
                negm |= n2
                if pos & negm or not any(
                        b2 & pos == pos and b2 & negm == 0 for b2 in alive):
                    ok = False
                    break
            if ok:
                keep.append(b)
            else:
                dropped = True
        alive = keep
        if not dropped:
            return alive


def _realizable_alcq(cx: ClosureIndex, o: Ontology, alive: list) -> list:
    """Witness existence is decided per profile group: only which counted
    membership patterns are still alive matters, so results memoize on the
    type's counting bits and the live profile set."""
    roles = sorted({cx.atl_info[idx][1] for idx in cx.atleasts})
    if not roles:
        return alive
    m_star = cx.m_star
    counted = {r: _counted_for_role(cx, r) for r in roles}
    profs = {r: {b: tuple(cx.ref_holds(b, ref) for (_n, ref, _i) in counted[r])
                 for b in alive} for r in roles}
    memo: dict[tuple, bool] = {}
    while True:
        keep = []
        dropped = False
        present = {r: tuple(sorted(set(profs[r][b] for b in alive)))
                   for r in roles}
        for b in alive:
            ok = True
            for r in roles:
                bits_vec = tuple(bool(b >> idx & 1)
                                 for (_n, _ref, idx) in counted[r])
                key = (r, bits_vec, present[r])
                got = memo.get(key)
                if got is None:
                    got = next(iter_group_witness_solutions(
                        cx, b, r, list(present[r]), m_star), None) is not None
                    memo[key] = got
                if not got:
                    ok = False
                    break
            if ok:
                keep.append(b)
            else:
                dropped = True
        if not dropped:
            return alive
        alive = keep


# ---------------------------------------------------------------------------
# Satisfiability and entailment


def sat(o: Ontology, c: ConceptTerm, budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    """Is `c` satisfiable under `o`?"""
    global _SAT_CALLS
    memo = o._sat_memo
    got = memo.get(c.id)
    if got is not None:
        return got
    _SAT_CALLS += 1
    if _SAT_CALLS > budgets.sat_call_cap:
        raise BudgetError(f"satisfiability call budget {budgets.sat_call_cap} exhausted")
    cx = closure(o, c, top())
    pos, negm = cx.mask_of([c])
    if o.dialect == ALCH:
        out = _sat_search_alch(cx, o, pos, negm, budgets)
    else:
        cat = realizable_types(cx, o, budgets=budgets)
        out = bool(cat.completions(pos, negm))
    memo[c.id] = out
    return out


def entails(o: Ontology, c: ConceptTerm, d: ConceptTerm,
            budgets: Budgets = DEFAULT_BUDGETS) -> bool:
    """O |= c below d, via unsatisfiability of c and not-d."""
    return not sat(o, conj([c, neg(d)]), budgets)


def _sat_search_alch(cx: ClosureIndex, o: Ontology, pos: int, negm: int,
                     budgets: Budgets) -> bool:
    """Goal-directed realizability: find a type matching (pos, neg).

    Depth-first over saturated assignments; each candidate's existential
    bits recurse into successor searches.  A successor requirement landing
    on a type currently on the stack counts as satisfied (greatest
    fixpoint), and failures are cached unconditionally since stack
    assumptions can only help.
    """
    bad: set = set()
    nodes = 0

    def good(bits: int, stack: set) -> bool:
        nonlocal nodes
        if bits in bad:
            return False
        if bits in stack:
            return True
        stack.add(bits)
        try:
            for idx in existential_requirements(cx, bits):
                _n, role, (ci, cn) = cx.atl_info[idx]
                child = cx.terms[ci] if not cn else neg(cx.terms[ci])
                spos, snegm = succ_masks(cx, o, bits, role)
                p2, n2 = cx.mask_of([child])
                spos |= p2
                snegm |= n2
                if spos & snegm or not _find(spos, snegm, stack):
                    bad.add(bits)
                    return False
            return True
        finally:
            stack.discard(bits)

    def _find(fpos: int, fnegm: int, stack: set) -> bool:
        nonlocal nodes
        for bits in saturated_assignments(cx, o, fpos, fnegm,
                                          cap=budgets.sat_cand_cap):
            nodes += 1
            if nodes > budgets.sat_cand_cap:
                raise BudgetError("satisfiability search budget exhausted")
            if good(bits, stack):
                return True
        return False

    if pos & negm:
        return False
    return _find(pos, negm, set())
