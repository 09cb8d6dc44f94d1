"""Knowledge-graph layer: triple store, Horn rules, queries and vocabulary."""

from importlib import resources

from .mapping import assessment_triples, observation_to_triples
from .query import dl_membership, execute_query, parse_dl_query, parse_query
from .rules import HornRule, materialize, parse_rules
from .schema import ontology_counts, parse_schema
from .store import TripleStore, load_store, parse_triples
from .terms import AQ, IRI, Literal, ParseError, Triple, Variable, aq


def fixture_text(name: str) -> str:
    """Text of a bundled fixture such as ``swrl_rules.txt`` or ``demo_kb.nt``."""
    return resources.files("it2aqi.data").joinpath(name).read_text(encoding="utf-8")


__all__ = [
    "AQ",
    "HornRule",
    "IRI",
    "Literal",
    "ParseError",
    "Triple",
    "TripleStore",
    "Variable",
    "aq",
    "assessment_triples",
    "dl_membership",
    "execute_query",
    "fixture_text",
    "load_store",
    "materialize",
    "observation_to_triples",
    "ontology_counts",
    "parse_dl_query",
    "parse_query",
    "parse_rules",
    "parse_schema",
    "parse_triples",
]
