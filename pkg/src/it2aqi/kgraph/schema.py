"""Declarative vocabulary (classes, properties, individuals) read from YAML.

::

    classes:            # name: parent class or null
      Observation: EnvironmentalObservationDomain
    object_properties: [hasStationId, hasAQICategory]
    data_properties: [hasAQIValue]
    individuals:        # name: class or null
      CH001: MonitoringStation
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import yaml

from .store import TripleStore
from .terms import RDF_TYPE, IRI, Triple, aq


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Schema:
    classes: dict[str, str | None] = field(default_factory=dict)
    object_properties: tuple[str, ...] = ()
    data_properties: tuple[str, ...] = ()
    individuals: dict[str, str | None] = field(default_factory=dict)

    def __post_init__(self):
        for name, parent in self.classes.items():
            if parent is not None and parent not in self.classes:
                raise SchemaError(f"class {name}: parent {parent} is not declared")
        for name, cls in self.individuals.items():
            if cls is not None and cls not in self.classes:
                raise SchemaError(f"individual {name}: class {cls} is not declared")
        for kind, names in (("object property", self.object_properties), ("data property", self.data_properties)):
            if len(set(names)) != len(names):
                raise SchemaError(f"duplicate {kind} declaration")
        both = set(self.object_properties) & set(self.data_properties)
        if both:
            raise SchemaError(f"declared as both object and data property: {', '.join(sorted(both))}")

    def class_assertions(self) -> list[Triple]:
        return [Triple(aq(i), RDF_TYPE, aq(c)) for i, c in self.individuals.items() if c is not None]


def parse_schema(text: str) -> Schema:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"invalid YAML: {exc}") from None
    if doc is None:
        return Schema()
    if not isinstance(doc, dict):
        raise SchemaError("schema must be a mapping")
    unknown = set(doc) - {"classes", "object_properties", "data_properties", "individuals"}
    if unknown:
        raise SchemaError(f"unknown schema sections: {', '.join(sorted(unknown))}")

    def mapping(key):
        v = doc.get(key) or {}
        if not isinstance(v, dict):
            raise SchemaError(f"{key} must be a mapping")
        return {str(k): (None if p is None else str(p)) for k, p in v.items()}

    def names(key):
        v = doc.get(key) or []
        if not isinstance(v, list):
            raise SchemaError(f"{key} must be a list")
        return tuple(str(x) for x in v)

    return Schema(mapping("classes"), names("object_properties"), names("data_properties"), mapping("individuals"))


def load_schema(path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        return parse_schema(fh.read())


def default_schema() -> Schema:
    return parse_schema(resources.files("it2aqi.data").joinpath("schema.yaml").read_text(encoding="utf-8"))


@dataclass(frozen=True)
class OntologyCounts:
    classes: int = 0
    object_properties: int = 0
    data_properties: int = 0
    individuals: int = 0
    subclass_axioms: int = 0
    logical_axioms: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


def ontology_counts(schema: Schema, store: TripleStore | None = None) -> OntologyCounts:
    """Entity and axiom counts for a schema plus the individuals in a store.

    Individuals are the declared ones plus every typed subject in the store.
    Logical axioms are subclass axioms, class assertions and property
    assertions (each distinct triple counted once).
    """
    store = store if store is not None else TripleStore()
    subclass = sum(p is not None for p in schema.classes.values())
    assertions = set(schema.class_assertions())
    individuals = {aq(i) for i in schema.individuals}
    for t in store:
        if t.p == RDF_TYPE:
            individuals.add(t.s)
        assertions.add(t)
    return OntologyCounts(
        classes=len(schema.classes),
        object_properties=len(schema.object_properties),
        data_properties=len(schema.data_properties),
        individuals=len(individuals),
        subclass_axioms=subclass,
        logical_axioms=subclass + len(assertions),
    )


def undeclared_terms(schema: Schema, store: TripleStore) -> list[IRI]:
    """Predicates and classes used in the store but missing from the schema."""
    known = {aq(n) for n in (*schema.object_properties, *schema.data_properties)} | {RDF_TYPE}
    classes = {aq(c) for c in schema.classes}
    missing = set()
    for t in store:
        if t.p not in known:
            missing.add(t.p)
        if t.p == RDF_TYPE and t.o not in classes:
            missing.add(t.o)
    return sorted(missing)


__all__ = [
    "OntologyCounts",
    "Schema",
    "SchemaError",
    "default_schema",
    "load_schema",
    "ontology_counts",
    "parse_schema",
    "undeclared_terms",
]
