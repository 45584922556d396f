"""Concept terms, s-expression parsing and printing, ontologies, closures.

Concepts are hash-consed into one process-wide DAG store: structurally
equal concepts always intern to the same node, so `a is b` and
`a.id == b.id` both mean structural equality.  Canonicalisation happens at
construction time:

  * double negation collapses,
  * conjunctions are n-ary, flattened, duplicate-free, sorted by node id,
    with top units dropped,
  * `(>= 0 r.C)` is the vacuous restriction and interns as top,
  * bottom is represented as (not top), never as a primitive.

The store has one logical writer at a time; interned terms are immutable
and can be read from any number of threads.
"""
from __future__ import annotations

import re
from typing import Iterable, Iterator, Optional

from .errors import DialectError, ParseError

ALCH = "alch"
ALCQ = "alcq"

TOP = "top"
ATOM = "atom"
NOT = "not"
AND = "and"
ATLEAST = "atleast"

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class ConceptTerm:
    """One interned node of the shared concept DAG."""

    __slots__ = ("id", "kind", "name", "num", "role", "child", "children", "alc", "height")

    def __init__(self, tid: int, kind: str, name: str | None, num: int,
                 role: str | None, child: "ConceptTerm | None",
                 children: tuple, alc: bool, height: int):
        self.id = tid
        self.kind = kind
        self.name = name
        self.num = num
        self.role = role
        self.child = child
        self.children = children
        self.alc = alc
        self.height = height

    def __repr__(self) -> str:
        return f"Term#{self.id}[{print_concept(self)}]"


_TERMS: list[ConceptTerm] = []
_INTERN: dict[tuple, int] = {}
_SIG_CACHE: dict[int, frozenset] = {}
_SIZE_CACHE: dict[int, int] = {}


def _intern(kind: str, name: str | None = None, num: int = 0,
            role: str | None = None, child: ConceptTerm | None = None,
            children: tuple = ()) -> ConceptTerm:
    key = (kind, name, num, role,
           child.id if child is not None else -1,
           tuple(c.id for c in children))
    tid = _INTERN.get(key)
    if tid is not None:
        return _TERMS[tid]
    if kind in (TOP, ATOM):
        alc, height = True, 0
    elif kind == NOT:
        alc, height = child.alc, child.height + 1
    elif kind == AND:
        alc = all(c.alc for c in children)
        height = 1 + max(c.height for c in children)
    else:  # ATLEAST
        alc = (num == 1) and child.alc
        height = 1 + child.height
    term = ConceptTerm(len(_TERMS), kind, name, num, role, child, children, alc, height)
    _TERMS.append(term)
    _INTERN[key] = term.id
    return term


def term_by_id(tid: int) -> ConceptTerm:
    return _TERMS[tid]


def top() -> ConceptTerm:
    return _intern(TOP)


def bot() -> ConceptTerm:
    return neg(top())


def atom(name: str) -> ConceptTerm:
    if not _NAME_RE.match(name):
        raise ValueError(f"invalid concept name {name!r}")
    return _intern(ATOM, name=name)


def neg(t: ConceptTerm) -> ConceptTerm:
    if t.kind == NOT:
        return t.child
    return _intern(NOT, child=t)


def conj(terms: Iterable[ConceptTerm]) -> ConceptTerm:
    flat: dict[int, ConceptTerm] = {}
    for t in terms:
        if t.kind == AND:
            for c in t.children:
                flat[c.id] = c
        elif t.kind != TOP:
            flat[t.id] = t
    if not flat:
        return top()
    if len(flat) == 1:
        return next(iter(flat.values()))
    children = tuple(flat[i] for i in sorted(flat))
    return _intern(AND, children=children)


def disj(terms: Iterable[ConceptTerm]) -> ConceptTerm:
    return neg(conj(neg(t) for t in terms))


def at_least(n: int, role: str, c: ConceptTerm) -> ConceptTerm:
    if n < 0:
        raise ValueError("counting restriction needs n >= 0")
    if not _NAME_RE.match(role):
        raise ValueError(f"invalid role name {role!r}")
    if n == 0:
        return top()
    return _intern(ATLEAST, num=n, role=role, child=c)


def some(role: str, c: ConceptTerm) -> ConceptTerm:
    return at_least(1, role, c)


def only(role: str, c: ConceptTerm) -> ConceptTerm:
    return neg(at_least(1, role, neg(c)))


def implies(c: ConceptTerm, d: ConceptTerm) -> ConceptTerm:
    return disj([neg(c), d])


def signature_names(t: ConceptTerm) -> frozenset:
    """All concept and role names occurring in `t`."""
    cached = _SIG_CACHE.get(t.id)
    if cached is not None:
        return cached
    if t.kind == TOP:
        out: frozenset = frozenset()
    elif t.kind == ATOM:
        out = frozenset((t.name,))
    elif t.kind == NOT:
        out = signature_names(t.child)
    elif t.kind == AND:
        out = frozenset().union(*(signature_names(c) for c in t.children))
    else:
        out = signature_names(t.child) | {t.role}
    _SIG_CACHE[t.id] = out
    return out


def dag_size(t: ConceptTerm) -> int:
    """Number of distinct DAG nodes reachable from `t`."""
    seen: set[int] = set()

    def walk(u: ConceptTerm) -> None:
        if u.id in seen:
            return
        seen.add(u.id)
        if u.kind == NOT or u.kind == ATLEAST:
            walk(u.child)
        elif u.kind == AND:
            for c in u.children:
                walk(c)

    walk(t)
    return len(seen)


def subterms(t: ConceptTerm) -> Iterator[ConceptTerm]:
    """All distinct subterms of `t`, parents before children."""
    seen: set[int] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if u.id in seen:
            continue
        seen.add(u.id)
        yield u
        if u.kind in (NOT, ATLEAST):
            stack.append(u.child)
        elif u.kind == AND:
            stack.extend(reversed(u.children))


# ---------------------------------------------------------------------------
# Parsing


class _Tok:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()":
            toks.append(_Tok(ch, ch, i))
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "()":
            j += 1
        word = text[i:j]
        if word.isdigit():
            toks.append(_Tok("nat", word, i))
        else:
            toks.append(_Tok("word", word, i))
        i = j
    return toks


def _expect_name(tok: _Tok, what: str) -> str:
    if tok.kind != "word" or not _NAME_RE.match(tok.text):
        raise ParseError(f"expected {what}, got {tok.text!r}", tok.offset)
    return tok.text


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {what}", len(self.text))
        self.pos += 1
        return tok

    def close(self, opener: _Tok) -> None:
        tok = self.next("')'")
        if tok.kind != ")":
            raise ParseError(f"expected ')' for form opened here, got {tok.text!r}",
                             tok.offset if tok else opener.offset)

    def concept(self) -> ConceptTerm:
        tok = self.next("a concept")
        if tok.kind == "word":
            if tok.text == "top":
                return top()
            if tok.text == "bot":
                return bot()
            return atom(_expect_name(tok, "a concept name"))
        if tok.kind != "(":
            raise ParseError(f"expected a concept, got {tok.text!r}", tok.offset)
        op = self.next("an operator")
        if op.kind != "word":
            raise ParseError(f"expected an operator, got {op.text!r}", op.offset)
        name = op.text
        if name == "not":
            c = self.concept()
            self.close(tok)
            return neg(c)
        if name in ("and", "or"):
            args = [self.concept(), self.concept()]
            while self.peek() is not None and self.peek().kind != ")":
                args.append(self.concept())
            self.close(tok)
            return conj(args) if name == "and" else disj(args)
        if name in ("some", "all"):
            role = _expect_name(self.next("a role name"), "a role name")
            c = self.concept()
            self.close(tok)
            return some(role, c) if name == "some" else only(role, c)
        if name in ("atleast", "atmost"):
            nat = self.next("a count")
            if nat.kind != "nat":
                raise ParseError(f"expected a count, got {nat.text!r}", nat.offset)
            n = int(nat.text)
            role = _expect_name(self.next("a role name"), "a role name")
            c = self.concept()
            self.close(tok)
            if name == "atleast":
                return at_least(n, role, c)
            return neg(at_least(n + 1, role, c))
        raise ParseError(f"unknown operator {name!r}", op.offset)

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok.text!r}", tok.offset)


def parse_concept(text: str) -> ConceptTerm:
    p = _Parser(text)
    c = p.concept()
    p.done()
    return c


# ---------------------------------------------------------------------------
# Printing


def print_concept(t: ConceptTerm, mode: str = "tree") -> str:
    if mode == "tree":
        return _fmt(t)
    if mode == "dag":
        return print_concept_dag(t)
    raise ValueError(f"unknown print mode {mode!r}")


def _fmt(t: ConceptTerm) -> str:
    if t.kind == TOP:
        return "top"
    if t.kind == ATOM:
        return t.name
    if t.kind == AND:
        return "(and " + " ".join(_fmt(c) for c in t.children) + ")"
    if t.kind == ATLEAST:
        if t.num == 1:
            return f"(some {t.role} {_fmt(t.child)})"
        return f"(atleast {t.num} {t.role} {_fmt(t.child)})"
    # negations, re-sugared
    c = t.child
    if c.kind == TOP:
        return "bot"
    if c.kind == ATLEAST:
        if c.num == 1:
            return f"(all {c.role} {_fmt(neg(c.child))})"
        return f"(atmost {c.num - 1} {c.role} {_fmt(c.child)})"
    if c.kind == AND:
        return "(or " + " ".join(_fmt(neg(x)) for x in c.children) + ")"
    return f"(not {_fmt(c)})"


def print_concept_dag(t: ConceptTerm) -> str:
    """Shared-definition form: one `nK := ...` line per node, then the root."""
    names: dict[int, str] = {}
    lines: list[str] = []

    def visit(u: ConceptTerm) -> str:
        got = names.get(u.id)
        if got is not None:
            return got
        if u.kind == TOP:
            shallow = "top"
        elif u.kind == ATOM:
            shallow = u.name
        elif u.kind == NOT:
            shallow = f"(not {visit(u.child)})"
        elif u.kind == AND:
            shallow = "(and " + " ".join(visit(c) for c in u.children) + ")"
        else:
            shallow = f"(atleast {u.num} {u.role} {visit(u.child)})"
        label = f"n{len(names)}"
        names[u.id] = label
        lines.append(f"{label} := {shallow}")
        return label

    root = visit(t)
    lines.append(f"root {root}")
    return "\n".join(lines)


def parse_concept_dag(text: str) -> ConceptTerm:
    env: dict[str, ConceptTerm] = {}
    root: ConceptTerm | None = None
    offset = 0
    for raw in text.splitlines():
        line = raw.strip()
        if line:
            if line.startswith("root "):
                label = line[5:].strip()
                if label not in env:
                    raise ParseError(f"undefined node {label!r}", offset)
                root = env[label]
            else:
                label, sep, body = line.partition(":=")
                if not sep:
                    raise ParseError("expected 'nK := ...' line", offset)
                env[label.strip()] = _parse_shallow(body.strip(), env, offset)
        offset += len(raw) + 1
    if root is None:
        raise ParseError("missing 'root' line", offset)
    return root


def _parse_shallow(body: str, env: dict, offset: int) -> ConceptTerm:
    words = body.replace("(", " ").replace(")", " ").split()
    if not words:
        raise ParseError("empty node definition", offset)

    def ref(w: str) -> ConceptTerm:
        if w not in env:
            raise ParseError(f"undefined node {w!r}", offset)
        return env[w]

    head = words[0]
    if head == "top":
        return top()
    if head == "not":
        return neg(ref(words[1]))
    if head == "and":
        return conj(ref(w) for w in words[1:])
    if head == "atleast":
        return at_least(int(words[1]), words[2], ref(words[3]))
    return atom(head)


# ---------------------------------------------------------------------------
# Signatures and ontologies


def parse_signature(text: str) -> frozenset:
    names = text.split()
    for n in names:
        if not _NAME_RE.match(n):
            raise ParseError(f"invalid name {n!r} in signature", text.find(n))
    return frozenset(names)


class Ontology:
    """Concept inclusions plus, in role-hierarchy mode, role inclusions.

    `role_order` is the reflexive-transitive closure of the role
    inclusions, computed eagerly at construction.
    """

    def __init__(self, dialect: str, cis: Iterable[tuple] = (), ris: Iterable[tuple] = ()):
        if dialect not in (ALCH, ALCQ):
            raise DialectError(f"unknown dialect {dialect!r}")
        self.dialect = dialect
        self.cis: tuple = tuple(cis)
        self.ris: tuple = tuple(ris)
        if dialect == ALCQ and self.ris:
            raise DialectError("role inclusions are not allowed in the counting dialect")
        if dialect == ALCH:
            for lhs, rhs in self.cis:
                if not (lhs.alc and rhs.alc):
                    raise DialectError(
                        "role-hierarchy mode restricts inclusions to existential-level concepts")
        self.role_order: dict[str, frozenset] = _transitive_role_order(self.ris)
        self._sat_memo: dict[int, bool] = {}

    def super_roles(self, r: str) -> frozenset:
        """All s with r below s in the hierarchy, including r itself."""
        return self.role_order.get(r, frozenset((r,)))

    def role_subsumes(self, r: str, s: str) -> bool:
        if self.dialect != ALCH:
            raise DialectError("role subsumption queries need the role-hierarchy dialect")
        return s in self.super_roles(r)

    def role_names(self) -> frozenset:
        out = set()
        for r, s in self.ris:
            out.add(r)
            out.add(s)
        for lhs, rhs in self.cis:
            out |= {t.role for t in subterms(lhs) if t.kind == ATLEAST}
            out |= {t.role for t in subterms(rhs) if t.kind == ATLEAST}
        return frozenset(out)

    def __repr__(self) -> str:
        return f"Ontology({self.dialect}, {len(self.cis)} CIs, {len(self.ris)} RIs)"


def _transitive_role_order(ris: tuple) -> dict[str, frozenset]:
    names: set[str] = set()
    for r, s in ris:
        names.add(r)
        names.add(s)
    order = {n: {n} for n in names}
    for r, s in ris:
        order[r].add(s)
    changed = True
    while changed:
        changed = False
        for r in names:
            expand = set()
            for s in order[r]:
                expand |= order[s]
            if not expand <= order[r]:
                order[r] |= expand
                changed = True
    return {n: frozenset(v) for n, v in order.items()}


def parse_ontology(text: str, dialect: str = ALCH) -> Ontology:
    p = _Parser(text)
    cis, ris = [], []
    while p.peek() is not None:
        opener = p.next("'('")
        if opener.kind != "(":
            raise ParseError(f"expected '(' starting an axiom, got {opener.text!r}",
                             opener.offset)
        op = p.next("an axiom keyword")
        if op.kind != "word" or op.text not in ("implies", "role-implies"):
            raise ParseError(f"expected 'implies' or 'role-implies', got {op.text!r}",
                             op.offset)
        if op.text == "implies":
            lhs = p.concept()
            rhs = p.concept()
            p.close(opener)
            cis.append((lhs, rhs))
        else:
            if dialect == ALCQ:
                raise ParseError("role inclusion in counting-dialect ontology", op.offset)
            r = _expect_name(p.next("a role name"), "a role name")
            s = _expect_name(p.next("a role name"), "a role name")
            p.close(opener)
            ris.append((r, s))
    return Ontology(dialect, cis, ris)


# ---------------------------------------------------------------------------
# Subconcept closure


class ClosureIndex:
    """Indexed non-negated subconcepts of (O, C0, D0), negation implicit.

    Entry 0 is always top.  A type over this index is a bitmask `bits`
    where bit i means entry i holds; (not E) holds iff E's bit is clear,
    so the index is closed under single negation by construction.
    """

    def __init__(self) -> None:
        self.terms: list[ConceptTerm] = []
        self.lookup: dict[int, int] = {}
        self.kinds: list[str] = []
        self.and_children: dict[int, tuple] = {}
        self.atl_info: dict[int, tuple] = {}       # idx -> (n, role, child_ref)
        self.ci_refs: list[tuple] = []             # [(lhs_ref, rhs_ref)]
        self.atoms: list[tuple] = []               # [(idx, name)]
        self.atleasts: list[int] = []
        self.free_positions: list[int] = []
        self.eval_order: list[int] = []            # AND entries, children first
        self.roles: list[str] = []
        self.m_star: int = 1

    def _add(self, t: ConceptTerm) -> None:
        stack = [t]
        while stack:
            u = stack.pop()
            if u.kind == NOT:
                stack.append(u.child)
                continue
            if u.id not in self.lookup:
                self.lookup[u.id] = len(self.terms)
                self.terms.append(u)
                if u.kind == AND:
                    stack.extend(reversed(u.children))
                elif u.kind == ATLEAST:
                    stack.append(u.child)

    def ref(self, t: ConceptTerm) -> tuple:
        """(index, negated) pair addressing `t` through the implicit negation."""
        negated = False
        while t.kind == NOT:
            t = t.child
            negated = not negated
        idx = self.lookup.get(t.id)
        if idx is None:
            raise KeyError(f"term not in closure: {t!r}")
        return idx, negated

    def holds(self, bits: int, t: ConceptTerm) -> bool:
        idx, negated = self.ref(t)
        val = bool(bits >> idx & 1)
        return val != negated

    def ref_holds(self, bits: int, ref: tuple) -> bool:
        idx, negated = ref
        return bool(bits >> idx & 1) != negated

    def mask_of(self, members: Iterable[ConceptTerm]) -> tuple:
        """(pos, neg) bitmasks a type must match to contain all `members`."""
        pos = neg = 0
        for m in members:
            idx, negated = self.ref(m)
            if negated:
                neg |= 1 << idx
            else:
                pos |= 1 << idx
        return pos, neg

    def _finalize(self, o: Ontology) -> None:
        for i, t in enumerate(self.terms):
            self.kinds.append(t.kind)
            if t.kind == ATOM:
                self.atoms.append((i, t.name))
                self.free_positions.append(i)
            elif t.kind == ATLEAST:
                self.atleasts.append(i)
                self.free_positions.append(i)
                self.atl_info[i] = (t.num, t.role, self.ref(t.child))
            elif t.kind == AND:
                self.and_children[i] = tuple(self.ref(c) for c in t.children)
        self.eval_order = sorted(self.and_children, key=lambda i: self.terms[i].height)
        self.ci_refs = [(self.ref(l), self.ref(r)) for l, r in o.cis]
        self.roles = sorted({self.terms[i].role for i in self.atleasts})
        self.m_star = max((self.terms[i].num for i in self.atleasts), default=1)
        self.counted_by_role: dict = {}
        for i in self.atleasts:
            n, role, cref = self.atl_info[i]
            self.counted_by_role.setdefault(role, []).append((n, cref, i))

    def __len__(self) -> int:
        return len(self.terms)


def closure(o: Ontology, c0: ConceptTerm, d0: ConceptTerm) -> ClosureIndex:
    """sub(O, C0, D0): all subconcepts, closed under single negation.

    The negation of D0 is included as well since the pipeline always
    reasons against it; with implicit negation this adds no entries beyond
    D0's own subconcepts.
    """
    cx = ClosureIndex()
    cx._add(top())
    for lhs, rhs in o.cis:
        cx._add(lhs)
        cx._add(rhs)
    cx._add(c0)
    cx._add(d0)
    cx._add(neg(d0))
    cx._finalize(o)
    return cx
