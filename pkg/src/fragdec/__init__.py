"""Decision procedures for first-order fragments with modular predicates."""

__version__ = "0.1.0"

from .automata import Dfa, enrich, minimize, parse_language, parse_regex
from .category import derived_category, knast_equation
from .decide import EvidenceReport, analyze, decide
from .semigroup import SyntacticPresentation, check_identity, identity_set, syntactic_morphism
from .stability import StabilityRecord, stability_index

__all__ = [
    "Dfa", "EvidenceReport", "StabilityRecord", "SyntacticPresentation", "analyze",
    "check_identity", "decide", "derived_category", "enrich", "identity_set", "knast_equation",
    "minimize", "parse_language", "parse_regex", "stability_index", "syntactic_morphism",
]
