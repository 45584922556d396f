"""ALC(Sigma) interpolant existence and construction for ALCH/ALCQ ontologies."""

from .syntax import (
    ALCH,
    ALCQ,
    ConceptTerm,
    Ontology,
    at_least,
    atom,
    bot,
    closure,
    conj,
    dag_size,
    disj,
    implies,
    neg,
    only,
    parse_concept,
    parse_concept_dag,
    parse_ontology,
    parse_signature,
    print_concept,
    signature_names,
    some,
    top,
)
from .interpolate import (
    InterpolationProblem,
    InterpolationResult,
    compute_interpolant,
    interpolant_exists,
    verify_interpolant,
)

__all__ = [
    "ALCH",
    "ALCQ",
    "ConceptTerm",
    "Ontology",
    "InterpolationProblem",
    "InterpolationResult",
    "at_least",
    "atom",
    "bot",
    "closure",
    "compute_interpolant",
    "conj",
    "dag_size",
    "disj",
    "implies",
    "interpolant_exists",
    "neg",
    "only",
    "parse_concept",
    "parse_concept_dag",
    "parse_ontology",
    "parse_signature",
    "print_concept",
    "signature_names",
    "some",
    "top",
    "verify_interpolant",
]
