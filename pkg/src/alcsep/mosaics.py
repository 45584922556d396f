"""Mosaic universes, bad-mosaic elimination, and witness-model extraction.

A mosaic is a set of realizable types meant to live at mutually
signature-bisimilar points.  The decision procedure eliminates "bad"
mosaics (atomic inconsistency, or an existential requirement with no
surviving witness) to a greatest fixpoint; survival is closed under
nonempty subsets, so joint consistency of two concepts reduces to
survival of one of their two-type completions.

Two universe modes:

  * exhaustive - every nonempty subset of the realizable types (hard
    budget; this is the textbook procedure);
  * lazy (role-hierarchy dialect) - only mosaics reachable from the seed
    completions through minimal witness candidates.  For a requirement
    (t, some r.C) on T the candidates are built by picking one completion
    per maximal successor constraint; any surviving witness in the full
    powerset shrinks to such a candidate, so the fixpoint restricted to
    the reachable universe agrees with the full one.  Candidates are
    generated per shared signature-atom profile: picks with clashing
    profiles could never survive atomic consistency.

Within one elimination round, badness is evaluated against the
round-start snapshot, so the surviving set is independent of scan order.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .config import DEFAULT_BUDGETS, Budgets
from .errors import BudgetError, SoundnessError
from .reasoner import (
    INFINITY, TypeCatalog, _counted_for_role, counted_profile,
    iter_group_witness_solutions, realizable_types,
)
from .semantics import FiniteInterpretation
from .syntax import ALCH, ALCQ, ClosureIndex, ConceptTerm, Ontology, closure, neg, term_by_id


@dataclass(frozen=True)
class BaseAtomic:
    mosaic: int
    atom_index: int


@dataclass(frozen=True)
class StepALCH:
    mosaic: int
    type_id: int
    entry_index: int
    role: str


@dataclass(frozen=True)
class StepALCQ:
    mosaic: int
    role: str


class MosaicUniverse:
    def __init__(self, cat: TypeCatalog, sigma: frozenset, mode: str,
                 budgets: Budgets):
        self.cat = cat
        self.cx = cat.cx
        self.o = cat.o
        self.sigma = sigma
        self.mode = mode
        self.budgets = budgets
        self.mosaics: list[frozenset] = []
        self.ids: dict[frozenset, int] = {}
        self.surviving: set[int] = set()
        self.trace: list = []
        self.trace_index: dict[int, object] = {}
        self.seeds: list[int] = []
        self.rounds = 0
        self.sigma_atoms = [idx for idx, name in cat.cx.atoms if name in sigma]
        self._profile_cache: dict[int, int] = {}
        self._compl_cache: dict[frozenset, list] = {}
        self._reqs: dict[int, tuple] = {}
        self._kept: dict[tuple, tuple] = {}
        self._cands: dict[tuple, tuple] = {}
        self._certs: dict[tuple, object] = {}
        self.search_nodes = 0  # shared partition-search budget

    # -- plumbing ----------------------------------------------------------

    def intern(self, types: frozenset) -> int:
        mid = self.ids.get(types)
        if mid is None:
            if len(self.mosaics) >= self.budgets.mosaic_cap:
                raise BudgetError(
                    f"mosaic universe would exceed {self.budgets.mosaic_cap} mosaics "
                    f"({len(self.cat)} types)")
            mid = len(self.mosaics)
            self.mosaics.append(types)
            self.ids[types] = mid
            self.surviving.add(mid)
        return mid

    def profile(self, tid: int) -> int:
        """Signature-atom membership bits of a type."""
        got = self._profile_cache.get(tid)
        if got is None:
            bits = self.cat.types[tid]
            got = 0
            for k, idx in enumerate(self.sigma_atoms):
                if bits >> idx & 1:
                    got |= 1 << k
            self._profile_cache[tid] = got
        return got

    def atom_split(self, mid: int) -> Optional[int]:
        """Least signature atom on which two member types disagree."""
        members = sorted(self.mosaics[mid])
        for idx in self.sigma_atoms:
            vals = {bool(self.cat.types[t] >> idx & 1) for t in members}
            if len(vals) == 2:
                return idx
        return None

    def completions(self, separand: frozenset) -> list:
        """Catalog ids of realizable types containing every separand member."""
        got = self._compl_cache.get(separand)
        if got is None:
            pos, negm = self.cx.mask_of([term_by_id(i) for i in separand])
            got = self.cat.completions(pos, negm) if not pos & negm else []
            self._compl_cache[separand] = got
        return got

    # -- requirements and witness candidates (role-hierarchy dialect) ------

    def requirements(self, mid: int) -> tuple:
        got = self._reqs.get(mid)
        if got is None:
            cx = self.cx
            if self.o.dialect == ALCH:
                out = []
                for tid in sorted(self.mosaics[mid]):
                    bits = self.cat.types[tid]
                    for idx in cx.atleasts:
                        if bits >> idx & 1:
                            out.append((tid, idx))
                got = tuple(out)
            else:
                roles = sorted({cx.atl_info[i][1] for i in cx.atleasts})
                got = tuple(r for r in roles if r in self.sigma)
            self._reqs[mid] = got
        return got

    def kept_separands(self, mid: int, req: tuple) -> tuple:
        """Maximal successor constraints for a requirement, the witness slots."""
        got = self._kept.get((mid, req))
        if got is None:
            tid, eidx = req
            _n, role, (ci, cn) = self.cx.atl_info[eidx]
            child = self.cx.terms[ci] if not cn else neg(self.cx.terms[ci])
            s0_members, _, _ = self.cat.succ(tid, role)
            s0 = frozenset(s0_members | {child.id})
            slots = []
            sig_sups = sorted(s for s in self.o.super_roles(role) if s in self.sigma)
            for u in sorted(self.mosaics[mid]):
                for s in sig_sups:
                    members, _, _ = self.cat.succ(u, s)
                    slots.append(frozenset(members))
            all_members = list(dict.fromkeys([s0] + slots))
            kept = [m for m in all_members
                    if not any(m < other for other in all_members)]
            kept.sort(key=lambda m: sorted(m))
            got = tuple(kept)
            self._kept[(mid, req)] = got
        return got

    def candidates(self, mid: int, req: tuple) -> tuple:
        """Witness candidate mosaics for a requirement: one completion per
        kept slot, all picks sharing one signature-atom profile."""
        got = self._cands.get((mid, req))
        if got is None:
            kept = self.kept_separands(mid, req)
            by_profile = []
            for m in kept:
                groups: dict[int, list] = {}
                for tid in self.completions(m):
                    groups.setdefault(self.profile(tid), []).append(tid)
                by_profile.append(groups)
            common = set(by_profile[0])
            for g in by_profile[1:]:
                common &= set(g)
            out: dict[int, None] = {}
            count = 0
            for prof in sorted(common):
                pools = [g[prof] for g in by_profile]
                total = 1
                for p in pools:
                    total *= len(p)
                count += total
                if count > self.budgets.cand_cap:
                    raise BudgetError(
                        f"witness candidates for one requirement exceed "
                        f"{self.budgets.cand_cap}")
                for picks in itertools.product(*pools):
                    out[self.intern(frozenset(picks))] = None
            got = tuple(out)
            self._cands[(mid, req)] = got
        return got


# ---------------------------------------------------------------------------
# Universe construction


def enumerate_mosaics(cat: TypeCatalog, sigma: frozenset,
                      budgets: Budgets = DEFAULT_BUDGETS) -> MosaicUniverse:
    """Every nonempty subset of the realizable types."""
    n = len(cat)
    if n == 0:
        raise BudgetError("no realizable types, nothing to enumerate")
    if 1 << n > budgets.mosaic_cap:
        raise BudgetError(
            f"2^{n} - 1 mosaics over {n} types exceed the cap {budgets.mosaic_cap}")
    u = MosaicUniverse(cat, sigma, "exhaustive", budgets)
    ids = list(range(n))
    for mask in range(1, 1 << n):
        u.intern(frozenset(i for i in ids if mask >> i & 1))
    return u


def build_lazy_universe(cat: TypeCatalog, sigma: frozenset, seeds: Iterable[frozenset],
                        budgets: Budgets = DEFAULT_BUDGETS) -> MosaicUniverse:
    """Seeds plus the closure under witness-candidate generation."""
    u = MosaicUniverse(cat, sigma, "lazy", budgets)
    work = deque()
    for fs in seeds:
        mid = u.intern(fs)
        u.seeds.append(mid)
        work.append(mid)
    u.seeds = sorted(dict.fromkeys(u.seeds))
    expanded: set[int] = set()
    while work:
        mid = work.popleft()
        if mid in expanded:
            continue
        expanded.add(mid)
        if u.atom_split(mid) is not None:
            continue
        before = len(u.mosaics)
        for req in u.requirements(mid):
            u.candidates(mid, req)
        work.extend(range(before, len(u.mosaics)))
    return u


# ---------------------------------------------------------------------------
# Badness


def is_bad_alch(u: MosaicUniverse, mid: int, surviving: frozenset):
    """Badness record against `surviving`, or None."""
    a = u.atom_split(mid)
    if a is not None:
        return BaseAtomic(mid, a)
    for req in u.requirements(mid):
        if not any(c in surviving for c in u.candidates(mid, req)):
            if len(u.mosaics[mid]) == 1:
                raise SoundnessError(
                    "singleton mosaic of a realizable type became bad; "
                    "realizability fixpoint and mosaic step disagree")
            tid, eidx = req
            return StepALCH(mid, tid, eidx, u.cx.atl_info[eidx][1])
    return None


def is_bad_alcq(u: MosaicUniverse, mid: int, surviving: frozenset):
    a = u.atom_split(mid)
    if a is not None:
        return BaseAtomic(mid, a)
    for role in u.requirements(mid):
        if _partition_search(u, mid, role, surviving) is None:
            if len(u.mosaics[mid]) == 1:
                raise SoundnessError(
                    "singleton mosaic of a realizable type became bad in "
                    "the counting dialect")
            return StepALCQ(mid, role)
    return None


def _allowed_successors(u: MosaicUniverse, t_bits: int, role: str) -> set:
    """Types that may carry positive successor weight for a type: no cleared
    (>= 1 role.C) bit of the type may hold at them."""
    cx = u.cx
    hard = [(ref,) for n, ref, idx in _counted_for_role(cx, role)
            if n == 1 and not t_bits >> idx & 1]
    out = set()
    for tid, bits in enumerate(u.cat.types):
        if all(not cx.ref_holds(bits, ref) for (ref,) in hard):
            out.add(tid)
    return out


def _partition_search(u: MosaicUniverse, mid: int, role: str,
                      surviving: frozenset):
    """Find witnessing functions plus a mosaic partition over `surviving`.

    Partitions are searched by increasing size in canonical mosaic order.
    For a fixed partition the per-type feasibility is independent: the
    type needs some group-level witnessing solution whose weight can be
    placed on partition members so that every partition mosaic is covered
    through a positively weighted type.  Returns (S, wfam, assign) or
    None; raises BudgetError when the node budget runs out.
    """
    cat = u.cat
    cx = u.cx
    members = sorted(u.mosaics[mid])
    counted = _counted_for_role(cx, role)
    if not any(cat.types[t] >> idx & 1
               for t in members for (_n, _ref, idx) in counted):
        return ([], {t: {} for t in members}, {})

    allowed = {t: _allowed_successors(u, cat.types[t], role) for t in members}
    eligible = [m for m in sorted(surviving)
                if all(u.mosaics[m] & allowed[t] for t in members)]
    s_cap = min(len(eligible), max(2, cx.m_star * len(members)))

    def bump() -> None:
        u.search_nodes += 1
        if u.search_nodes > u.budgets.node_cap:
            raise BudgetError("partition search node budget exhausted "
                              f"({u.budgets.node_cap} nodes)")

    def per_type(t: int, s_list: list):
        """(weights, cover) for one type against a fixed partition, or None.

        Weight may only sit on partition types the type tolerates; the
        cover picks one positively weighted type per partition mosaic,
        with group totals respecting the chosen solution.
        """
        usable = sorted(set().union(*(u.mosaics[m] for m in s_list)) & allowed[t])
        by_profile: dict[tuple, list] = {}
        for x in usable:
            by_profile.setdefault(counted_profile(cx, cat.types[x], role), []).append(x)
        profiles = sorted(by_profile)
        for sol in iter_group_witness_solutions(cx, cat.types[t], role, profiles,
                                                cx.m_star):
            bump()
            budget = dict(zip(profiles, sol))
            loads: dict[int, int] = {}
            cover: dict[int, int] = {}

            def group_load(p: tuple) -> int:
                return sum(v for x, v in loads.items()
                           if counted_profile(cx, cat.types[x], role) == p)

            def rec(k: int) -> bool:
                if k == len(s_list):
                    return True
                m = s_list[k]
                for x in sorted(u.mosaics[m] & set(usable)):
                    p = counted_profile(cx, cat.types[x], role)
                    cap = budget[p]
                    if cap != INFINITY and group_load(p) >= cap:
                        continue
                    loads[x] = loads.get(x, 0) + 1
                    cover[m] = x
                    if rec(k + 1):
                        return True
                    loads[x] -= 1
                    if not loads[x]:
                        del loads[x]
                    del cover[m]
                return False

            if not rec(0):
                continue
            # distribute: covered types carry their loads, remainders land
            # on the least usable member of each positively weighted group
            weights: dict[int, int] = dict(loads)
            feasible = True
            for p, cap in budget.items():
                if cap == 0:
                    continue
                placed = group_load(p)
                if cap == INFINITY:
                    carrier = min(by_profile[p])
                    weights[carrier] = INFINITY
                elif placed < cap:
                    carrier = min(by_profile[p])
                    weights[carrier] = weights.get(carrier, 0) + (cap - placed)
                elif placed > cap:
                    feasible = False
                    break
            if feasible:
                return weights, cover
        return None

    def attempt(s_list: list):
        wfam: dict[int, dict] = {}
        covers: dict[int, dict] = {}
        for t in members:
            got = per_type(t, s_list)
            if got is None:
                return None
            wfam[t], covers[t] = got
        assign: dict[tuple, list] = {}
        for t in members:
            for m in s_list:
                x = covers[t][m]
                assign.setdefault((t, x), []).append(m)
            for x, v in wfam[t].items():
                if v and (t, x) not in assign:
                    holder = next(m for m in s_list if x in u.mosaics[m])
                    assign[(t, x)] = [holder]
        return s_list, wfam, assign

    for size in range(1, s_cap + 1):
        for combo in itertools.combinations(eligible, size):
            bump()
            got = attempt(list(combo))
            if got is not None:
                return got
    return None


def validate_partition(u: MosaicUniverse, mid: int, role: str,
                       s_members: list, wfam: dict, assign: dict) -> bool:
    """Direct check of the partition conditions (used by tests and verdicts)."""
    from .reasoner import witnessing_function_valid

    members = sorted(u.mosaics[mid])
    cat = u.cat
    pool = set().union(*(u.mosaics[m] for m in s_members)) if s_members else set()
    for t in members:
        values = {cat.types[x]: v for x, v in wfam[t].items()}
        for x in pool:
            values.setdefault(cat.types[x], 0)
        if not witnessing_function_valid(u.cx, cat.types[t], role, values):
            return False
        if any(x not in pool for x, v in wfam[t].items() if v):
            return False
    for (t, x), ms in assign.items():
        if not ms or any(x not in u.mosaics[m] for m in ms):
            return False
        w = wfam[t].get(x, 0)
        if w != INFINITY and len(ms) > w:
            return False
    for m in s_members:
        for t in members:
            if not any(m in ms for (t2, _x), ms in assign.items() if t2 == t):
                return False
    for t in members:
        for x, v in wfam[t].items():
            if v and not assign.get((t, x)):
                return False
    return True


# ---------------------------------------------------------------------------
# Elimination


def eliminate(u: MosaicUniverse, scan_key: Optional[Callable] = None) -> None:
    """Exhaustive elimination of bad mosaics, round-snapshot semantics."""
    is_bad = is_bad_alch if u.o.dialect == ALCH else is_bad_alcq
    u.search_nodes = 0
    while True:
        snapshot = frozenset(u.surviving)
        order = sorted(u.surviving, key=scan_key) if scan_key else sorted(u.surviving)
        found = []
        for mid in order:
            rec = is_bad(u, mid, snapshot)
            if rec is not None:
                found.append(rec)
        if not found:
            return
        u.rounds += 1
        for rec in found:
            u.surviving.discard(rec.mosaic)
            u.trace.append(rec)
            u.trace_index[rec.mosaic] = rec


def replay_trace(u: MosaicUniverse) -> bool:
    """Re-run every recorded badness check at its replay point."""
    u.search_nodes = 0
    surviving = set(u.ids.values())
    for rec in u.trace:
        ok = False
        if isinstance(rec, BaseAtomic):
            ok = u.atom_split(rec.mosaic) == rec.atom_index
        elif isinstance(rec, StepALCH):
            req = (rec.type_id, rec.entry_index)
            ok = (req in u.requirements(rec.mosaic)
                  and not any(c in surviving
                              for c in u.candidates(rec.mosaic, req)))
        elif isinstance(rec, StepALCQ):
            ok = _partition_search(u, rec.mosaic, rec.role,
                                   frozenset(surviving)) is None
        if not ok:
            return False
        surviving.discard(rec.mosaic)
    return surviving == u.surviving


def export_trace(u: MosaicUniverse) -> str:
    from .syntax import print_concept

    lines = []
    for rec in u.trace:
        body = "{" + ",".join(f"t{t}" for t in sorted(u.mosaics[rec.mosaic])) + "}"
        if isinstance(rec, BaseAtomic):
            lines.append(f"base m{rec.mosaic} {body} atom={u.cx.terms[rec.atom_index].name}")
        elif isinstance(rec, StepALCH):
            lines.append(
                f"step-alch m{rec.mosaic} {body} t=t{rec.type_id} "
                f"exists={print_concept(u.cx.terms[rec.entry_index])} role={rec.role}")
        else:
            lines.append(f"step-alcq m{rec.mosaic} {body} role={rec.role}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Decision


@dataclass
class Decision:
    consistent: bool
    universe: MosaicUniverse
    cx: ClosureIndex
    witness_mosaic: Optional[int] = None
    certificates: Optional[dict] = None   # counting dialect: role -> (S, wfam, assign)


def decide_joint_consistency(o: Ontology, c0: ConceptTerm, n0: ConceptTerm,
                             sigma: frozenset, mode: str = "auto",
                             budgets: Budgets = DEFAULT_BUDGETS,
                             scan_key: Optional[Callable] = None) -> Decision:
    """Are c0 and n0 satisfiable at signature-bisimilar points of models of o?"""
    cx = closure(o, c0, n0)
    cat = realizable_types(cx, o, budgets=budgets)
    c_compl = cat.completions(*cx.mask_of([c0]))
    n_compl = cat.completions(*cx.mask_of([n0]))
    seeds = []
    for t1 in c_compl:
        for t2 in n_compl:
            seeds.append(frozenset((t1, t2)))
    seeds = list(dict.fromkeys(seeds))

    if mode == "auto":
        mode = "lazy" if o.dialect == ALCH else "exhaustive"
    if mode == "lazy" and o.dialect != ALCH:
        raise BudgetError("lazy universes are implemented for the role-hierarchy "
                          "dialect; counting mode enumerates exhaustively")
    if mode == "exhaustive":
        u = enumerate_mosaics(cat, sigma, budgets)
        u.seeds = sorted(u.intern(fs) for fs in seeds)
    else:
        u = build_lazy_universe(cat, sigma, seeds, budgets)
    eliminate(u, scan_key)

    alive = [mid for mid in u.seeds if mid in u.surviving]
    if not alive:
        return Decision(False, u, cx)
    witness = alive[0]
    certs = None
    if o.dialect == ALCQ:
        certs = {}
        u.search_nodes = 0
        for role in u.requirements(witness):
            got = _partition_search(u, witness, role, frozenset(u.surviving))
            if got is None:
                raise SoundnessError("surviving mosaic lost its partition at fixpoint")
            s_members, wfam, assign = got
            certs[role] = (s_members, wfam, assign)
    return Decision(True, u, cx, witness, certs)


# ---------------------------------------------------------------------------
# Witness model (role-hierarchy dialect)


def extract_model(u: MosaicUniverse, o: Ontology, cx: ClosureIndex):
    """Witness model over surviving (type, mosaic) pairs, with the canonical
    within-mosaic bisimulation.

    The domain is the surviving seed mosaics closed under one chosen
    surviving witness per existential requirement (the full surviving set
    when no seeds are marked); this keeps the model small while every
    requirement still finds its successor inside the domain.  Role
    extensions are closed upward under the role hierarchy so the role
    inclusions hold.  Returns (interpretation, Z, element_of) where
    element_of maps (type id, mosaic id) to the element name.
    """
    if o.dialect != ALCH:
        raise SoundnessError("witness models are constructed in the "
                             "role-hierarchy dialect only")
    roots = [m for m in u.seeds if m in u.surviving] or sorted(u.surviving)
    if not roots:
        raise SoundnessError("cannot extract a model from an empty surviving set")
    alive = []
    queue = deque(roots)
    seen = set()
    while queue:
        mid = queue.popleft()
        if mid in seen:
            continue
        seen.add(mid)
        alive.append(mid)
        for req in u.requirements(mid):
            chosen = next((c for c in u.candidates(mid, req)
                           if c in u.surviving), None)
            if chosen is None:
                raise SoundnessError("surviving mosaic lost a witness")
            if chosen not in seen:
                queue.append(chosen)
    alive = sorted(alive)
    cat = u.cat
    element_of: dict[tuple, str] = {}
    domain = []
    for mid in alive:
        for tid in sorted(u.mosaics[mid]):
            name = f"e{len(domain)}"
            element_of[(tid, mid)] = name
            domain.append(name)

    atom_ext: dict[str, set] = {}
    for idx, aname in cx.atoms:
        ext = {element_of[(tid, mid)]
               for (tid, mid) in element_of
               if cat.types[tid] >> idx & 1}
        if ext:
            atom_ext[aname] = ext

    roles = sorted(set(cx.roles) | set(o.role_names()))
    sig_sups = {r: sorted(s for s in o.super_roles(r) if s in u.sigma) for r in roles}

    def mosaic_step(mid1: int, mid2: int, s: str) -> bool:
        for t in u.mosaics[mid1]:
            _, pos, negm = cat.succ(t, s)
            if not any(cat.types[t2] & pos == pos and cat.types[t2] & negm == 0
                       for t2 in u.mosaics[mid2]):
                return False
        return True

    step_cache: dict[tuple, bool] = {}

    def mosaic_ok(mid1: int, mid2: int, r: str) -> bool:
        for s in sig_sups[r]:
            key = (mid1, mid2, s)
            got = step_cache.get(key)
            if got is None:
                got = mosaic_step(mid1, mid2, s)
                step_cache[key] = got
            if not got:
                return False
        return True

    role_ext: dict[str, set] = {r: set() for r in roles}
    keys = sorted(element_of)
    for r in roles:
        for (t1, m1) in keys:
            _, pos, negm = cat.succ(t1, r)
            for (t2, m2) in keys:
                b2 = cat.types[t2]
                if b2 & pos == pos and b2 & negm == 0 and mosaic_ok(m1, m2, r):
                    role_ext[r].add((element_of[(t1, m1)], element_of[(t2, m2)]))
    # close upward under the hierarchy
    for r in roles:
        for s in o.super_roles(r):
            if s != r:
                role_ext.setdefault(s, set()).update(role_ext[r])
    role_ext = {r: v for r, v in role_ext.items() if v}

    i = FiniteInterpretation(domain, atom_ext, role_ext)
    z = frozenset(
        (element_of[(t1, mid)], element_of[(t2, mid)])
        for mid in alive
        for t1 in u.mosaics[mid]
        for t2 in u.mosaics[mid])
    return i, z, element_of
