"""Finite interpretations, model checking, and signature bisimulations.

All operations are pure functions of immutable inputs.  The exhaustive
model enumerator at the bottom is a test oracle only: it is doubly
exponential and kept to desk scale by its domain/alphabet caps.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator

from .errors import ParseError
from .syntax import (
    ALCH, AND, ATLEAST, ATOM, NOT, TOP,
    ClosureIndex, ConceptTerm, Ontology, _Parser, _expect_name, subterms,
)


class FiniteInterpretation:
    """A finite interpretation: named elements, atom and role extensions."""

    def __init__(self, domain: Iterable[str],
                 atom_ext: dict[str, frozenset] | None = None,
                 role_ext: dict[str, frozenset] | None = None):
        self.domain: tuple = tuple(domain)
        if not self.domain:
            raise ValueError("interpretation domain must be non-empty")
        dom = set(self.domain)
        self.atom_ext = {a: frozenset(v) for a, v in (atom_ext or {}).items()}
        self.role_ext = {r: frozenset(v) for r, v in (role_ext or {}).items()}
        for a, v in self.atom_ext.items():
            if not v <= dom:
                raise ValueError(f"atom {a} extension leaves the domain")
        for r, v in self.role_ext.items():
            for d, e in v:
                if d not in dom or e not in dom:
                    raise ValueError(f"role {r} extension leaves the domain")

    def atoms_of(self, name: str) -> frozenset:
        return self.atom_ext.get(name, frozenset())

    def edges_of(self, role: str) -> frozenset:
        return self.role_ext.get(role, frozenset())

    def successors(self, d: str, role: str) -> list:
        return [e for (x, e) in self.edges_of(role) if x == d]

    def __repr__(self) -> str:
        return f"FiniteInterpretation({len(self.domain)} elems)"


def parse_model(text: str) -> FiniteInterpretation:
    p = _Parser(text)
    opener = p.next("'('")
    if opener.kind != "(" :
        raise ParseError("expected '(model ...)'", opener.offset)
    kw = p.next("'model'")
    if kw.kind != "word" or kw.text != "model":
        raise ParseError(f"expected 'model', got {kw.text!r}", kw.offset)
    domain: list[str] = []
    atom_ext: dict[str, set] = {}
    role_ext: dict[str, set] = {}
    while p.peek() is not None and p.peek().kind == "(":
        sub = p.next("'('")
        head = p.next("a section keyword")
        if head.kind != "word":
            raise ParseError(f"expected a keyword, got {head.text!r}", head.offset)
        if head.text == "domain":
            while p.peek() is not None and p.peek().kind in ("word", "nat"):
                domain.append(p.next("an element").text)
            p.close(sub)
        elif head.text == "atom":
            name = _expect_name(p.next("a concept name"), "a concept name")
            elem = p.next("an element").text
            atom_ext.setdefault(name, set()).add(elem)
            p.close(sub)
        elif head.text == "edge":
            role = _expect_name(p.next("a role name"), "a role name")
            d = p.next("an element").text
            e = p.next("an element").text
            role_ext.setdefault(role, set()).add((d, e))
            p.close(sub)
        else:
            raise ParseError(f"unknown model section {head.text!r}", head.offset)
    p.close(opener)
    p.done()
    dom = set(domain)
    for name, v in atom_ext.items():
        for x in v:
            if x not in dom:
                raise ParseError(f"atom {name} uses undeclared element {x!r}", 0)
    for role, v in role_ext.items():
        for d, e in v:
            if d not in dom or e not in dom:
                raise ParseError(f"edge {role} uses undeclared element", 0)
    return FiniteInterpretation(domain, atom_ext, role_ext)


def emit_model(i: FiniteInterpretation) -> str:
    parts = ["(model (domain " + " ".join(i.domain) + ")"]
    for a in sorted(i.atom_ext):
        for d in sorted(i.atom_ext[a]):
            parts.append(f" (atom {a} {d})")
    for r in sorted(i.role_ext):
        for d, e in sorted(i.role_ext[r]):
            parts.append(f" (edge {r} {d} {e})")
    parts.append(")")
    return "".join(parts)


def eval_concept(i: FiniteInterpretation, t: ConceptTerm) -> frozenset:
    """Extension of `t` in `i`, standard semantics."""
    memo: dict[int, frozenset] = {}

    def ev(u: ConceptTerm) -> frozenset:
        got = memo.get(u.id)
        if got is not None:
            return got
        if u.kind == TOP:
            out = frozenset(i.domain)
        elif u.kind == ATOM:
            out = i.atoms_of(u.name)
        elif u.kind == NOT:
            out = frozenset(i.domain) - ev(u.child)
        elif u.kind == AND:
            out = frozenset(i.domain)
            for c in u.children:
                out &= ev(c)
        else:
            body = ev(u.child)
            out = frozenset(
                d for d in i.domain
                if sum(1 for e in i.successors(d, u.role) if e in body) >= u.num)
        memo[u.id] = out
        return out

    return ev(t)


def is_model(i: FiniteInterpretation, o: Ontology) -> bool:
    for lhs, rhs in o.cis:
        if not eval_concept(i, lhs) <= eval_concept(i, rhs):
            return False
    for r, s in o.ris:
        if not i.edges_of(r) <= i.edges_of(s):
            return False
    return True


# ---------------------------------------------------------------------------
# Signature bisimulations


def is_sigma_bisimulation(i: FiniteInterpretation, j: FiniteInterpretation,
                          pairs: frozenset, sigma: frozenset) -> bool:
    """Direct Atom/Back/Forth check of `pairs`."""
    roles = [r for r in set(i.role_ext) | set(j.role_ext) if r in sigma]
    atoms = [a for a in set(i.atom_ext) | set(j.atom_ext) if a in sigma]
    for d, e in pairs:
        for a in atoms:
            if (d in i.atoms_of(a)) != (e in j.atoms_of(a)):
                return False
        for r in roles:
            for d2 in i.successors(d, r):
                if not any((d2, e2) in pairs for e2 in j.successors(e, r)):
                    return False
            for e2 in j.successors(e, r):
                if not any((d2, e2) in pairs for d2 in i.successors(d, r)):
                    return False
    return True


def max_sigma_bisimulation(i: FiniteInterpretation, j: FiniteInterpretation,
                           sigma: frozenset) -> frozenset:
    """The greatest signature bisimulation between `i` and `j`.

    Greatest-fixpoint refinement by iterated pair elimination, starting
    from all Atom-compatible pairs.  May be empty.
    """
    atoms = [a for a in set(i.atom_ext) | set(j.atom_ext) if a in sigma]
    roles = [r for r in set(i.role_ext) | set(j.role_ext) if r in sigma]
    pairs = {
        (d, e)
        for d in i.domain for e in j.domain
        if all((d in i.atoms_of(a)) == (e in j.atoms_of(a)) for a in atoms)
    }
    changed = True
    while changed:
        changed = False
        for d, e in list(pairs):
            ok = True
            for r in roles:
                for d2 in i.successors(d, r):
                    if not any((d2, e2) in pairs for e2 in j.successors(e, r)):
                        ok = False
                        break
                if not ok:
                    break
                for e2 in j.successors(e, r):
                    if not any((d2, e2) in pairs for d2 in i.successors(d, r)):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                pairs.discard((d, e))
                changed = True
    return frozenset(pairs)


def check_joint_consistency_witness(o: Ontology, c0: ConceptTerm, d0: ConceptTerm,
                                    sigma: frozenset,
                                    i1: FiniteInterpretation, e1: str,
                                    i2: FiniteInterpretation, e2: str) -> bool:
    """Do (i1,e1) and (i2,e2) witness joint bisimilar satisfiability of c0, d0?"""
    if not (is_model(i1, o) and is_model(i2, o)):
        return False
    if e1 not in eval_concept(i1, c0) or e2 not in eval_concept(i2, d0):
        return False
    return (e1, e2) in max_sigma_bisimulation(i1, i2, sigma)


def type_of(i: FiniteInterpretation, d: str, cx: ClosureIndex) -> int:
    """Bitmask over the closure of the indexed concepts true at `d`."""
    return type_map(i, cx)[d]


def type_map(i: FiniteInterpretation, cx: ClosureIndex) -> dict:
    """Types of all elements at once; extensions are computed once per entry."""
    exts = [eval_concept(i, t) for t in cx.terms]
    out = {}
    for d in i.domain:
        bits = 0
        for idx, ext in enumerate(exts):
            if d in ext:
                bits |= 1 << idx
        out[d] = bits
    return out


# ---------------------------------------------------------------------------
# Exhaustive enumeration oracle (tests only)


def enumerate_interpretations(atoms: list, roles: list,
                              max_domain: int = 3) -> Iterator[FiniteInterpretation]:
    """All interpretations over the given alphabet up to `max_domain` elements.

    Deliberately brutal; callers keep len(atoms) + len(roles) tiny.
    """
    for n in range(1, max_domain + 1):
        domain = [f"d{k}" for k in range(n)]
        atom_choices = [list(map(frozenset, _subsets(domain))) for _ in atoms]
        pairs = [(d, e) for d in domain for e in domain]
        role_choices = [list(map(frozenset, _subsets(pairs))) for _ in roles]
        for aext in itertools.product(*atom_choices):
            for rext in itertools.product(*role_choices):
                yield FiniteInterpretation(
                    domain,
                    dict(zip(atoms, aext)),
                    dict(zip(roles, rext)))


def _subsets(xs: list) -> Iterator[tuple]:
    for mask in range(1 << len(xs)):
        yield tuple(x for k, x in enumerate(xs) if mask >> k & 1)


def sat_by_enumeration(o: Ontology, c: ConceptTerm,
                       atoms: list, roles: list, max_domain: int = 3) -> bool:
    """Satisfiability oracle by finite-model enumeration."""
    for i in enumerate_interpretations(atoms, roles, max_domain):
        if is_model(i, o) and eval_concept(i, c):
            return True
    return False


def names_of_problem(o: Ontology, *concepts: ConceptTerm) -> tuple:
    """(sorted atom names, sorted role names) occurring anywhere in the inputs."""
    atoms: set = set()
    roles: set = set()
    terms = [t for lhs_rhs in o.cis for t in lhs_rhs] + list(concepts)
    for t in terms:
        for u in subterms(t):
            if u.kind == ATOM:
                atoms.add(u.name)
            elif u.kind == ATLEAST:
                roles.add(u.role)
    for r, s in o.ris:
        roles.add(r)
        roles.add(s)
    return sorted(atoms), sorted(roles)
