"""Problem-family generators and random instance corpora.

`alch_k(k)` is the layered role-hierarchy family: the left concept forces
an r-successor marked B that picks one of A1..Ak, the right side forbids
marked successors along the outer roles, and only the middle roles s1p..skp
(plus the markers) are in the signature.  The role chain runs
r below sip below si, so the canonical interpolant is the disjunction of
(some sip Ai).  The tower families are the entailment-property generators:
two parallel role inclusions with an unconstrained existential, and the
counting variant built on (atmost 1 r top).
"""
from __future__ import annotations

import random
from pathlib import Path

from .syntax import ALCH, ALCQ


def alch_k(k: int) -> dict:
    if k < 1:
        raise ValueError("k >= 1 required")
    onto = []
    for i in range(1, k + 1):
        onto.append(f"(role-implies r s{i}p)")
        onto.append(f"(role-implies s{i}p s{i})")
    marks = [f"A{i}" for i in range(1, k + 1)]
    if k == 1:
        picked = "(or (not B) A1)"
    else:
        picked = "(or (not B) " + " ".join(marks) + ")"
    c0 = f"(and (some r B) (all r {picked}))"
    d_parts = [f"(all s{i} (not A{i}))" for i in range(1, k + 1)]
    d = d_parts[0] if k == 1 else "(and " + " ".join(d_parts) + ")"
    sigma = " ".join([f"s{i}p" for i in range(1, k + 1)] + marks)
    return {
        "dialect": ALCH,
        "ontology.dl": "\n".join(onto) + "\n",
        "c0.dl": c0 + "\n",
        "d0.dl": f"(not {d})\n",
        "sigma.txt": sigma + "\n",
    }


def alch_k_canonical_interpolant(k: int) -> str:
    parts = [f"(some s{i}p A{i})" for i in range(1, k + 1)]
    return parts[0] if k == 1 else "(or " + " ".join(parts) + ")"


def alch_tower() -> dict:
    return {
        "dialect": ALCH,
        "ontology.dl": "(role-implies r s)\n(role-implies r sp)\n",
        "c0.dl": "(some r top)\n",
        "sigma.txt": "s sp\n",
    }


def alcq_tower() -> dict:
    return {
        "dialect": ALCQ,
        "ontology.dl": "",
        "c0.dl": "(atmost 1 r top)\n",
        "sigma.txt": "r s sp\n",
    }


FAMILIES = {"alch-k": alch_k, "alch-tower": alch_tower, "alcq-tower": alcq_tower}


def write_family(name: str, out_dir: str, k: int | None = None) -> list:
    if name == "alch-k":
        if k is None:
            raise ValueError("alch-k needs k")
        files = alch_k(k)
    elif name == "alch-tower":
        files = alch_tower()
    elif name == "alcq-tower":
        files = alcq_tower()
    else:
        raise ValueError(f"unknown family {name!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    (out / "dialect.txt").write_text(files["dialect"] + "\n")
    written.append(str(out / "dialect.txt"))
    for fname, text in files.items():
        if fname == "dialect":
            continue
        (out / fname).write_text(text)
        written.append(str(out / fname))
    return sorted(written)


# ---------------------------------------------------------------------------
# Random generation (test corpora)


def random_concept(rng: random.Random, atoms: list, roles: list, depth: int,
                   dialect: str = ALCH, max_n: int = 2) -> str:
    leaf_ops = ["top", "bot"] + atoms
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice(leaf_ops)
    ops = ["not", "and", "or"]
    if roles:
        ops += ["some", "all"]
        if dialect == ALCQ:
            ops += ["atleast", "atmost"]
    op = rng.choice(ops)
    if op == "not":
        return f"(not {random_concept(rng, atoms, roles, depth - 1, dialect, max_n)})"
    if op in ("and", "or"):
        a = random_concept(rng, atoms, roles, depth - 1, dialect, max_n)
        b = random_concept(rng, atoms, roles, depth - 1, dialect, max_n)
        return f"({op} {a} {b})"
    r = rng.choice(roles)
    body = random_concept(rng, atoms, roles, depth - 1, dialect, max_n)
    if op in ("some", "all"):
        return f"({op} {r} {body})"
    n = rng.randint(0 if op == "atmost" else 1, max_n)
    return f"({op} {n} {r} {body})"


def random_instance(rng: random.Random, dialect: str = ALCH,
                    atoms: list | None = None, roles: list | None = None,
                    depth: int = 2, n_cis: int = 1) -> dict:
    """One random interpolation problem as input texts."""
    atoms = atoms if atoms is not None else ["A", "B"]
    roles = roles if roles is not None else ["r", "s"]
    onto = []
    if dialect == ALCH and len(roles) >= 2 and rng.random() < 0.6:
        sub, sup = rng.sample(roles, 2)
        onto.append(f"(role-implies {sub} {sup})")
    for _ in range(rng.randint(0, n_cis)):
        lhs = random_concept(rng, atoms, roles, 1, dialect)
        rhs = random_concept(rng, atoms, roles, 1, dialect)
        onto.append(f"(implies {lhs} {rhs})")
    c0 = random_concept(rng, atoms, roles, depth, dialect)
    d0 = random_concept(rng, atoms, roles, depth, dialect)
    names = atoms + roles
    sigma = " ".join(sorted(rng.sample(names, rng.randint(0, len(names)))))
    return {
        "dialect": dialect,
        "ontology.dl": "\n".join(onto) + ("\n" if onto else ""),
        "c0.dl": c0 + "\n",
        "d0.dl": d0 + "\n",
        "sigma.txt": sigma + "\n",
    }
