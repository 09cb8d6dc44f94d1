"""A small SELECT query language and conjunctive class-membership queries.

Supported SELECT form::

    PREFIX aq: <http://example.org/airquality#>
    SELECT [DISTINCT] ?a ?b | *
    WHERE { ?a aq:p ?b . ?b aq:q "1.0"^^xsd:float . }
    ORDER BY ?a DESC(?b)

Membership queries use the ``Class and prop value Individual and ...`` form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .store import TripleStore, join
from .terms import (
    IRI,
    RDF_TYPE,
    AQ,
    Literal,
    ParseError,
    Term,
    TokenStream,
    Triple,
    Variable,
    term_sort_key,
    tokenize,
)


@dataclass(frozen=True)
class SelectQuery:
    variables: tuple[str, ...]
    patterns: tuple[Triple, ...]
    order_by: tuple[tuple[str, bool], ...] = ()  # (variable, descending)
    distinct: bool = False

    def __post_init__(self):
        bound = {x.name for t in self.patterns for x in t if isinstance(x, Variable)}
        for v in (*self.variables, *(name for name, _ in self.order_by)):
            if v not in bound:
                raise ParseError(f"variable ?{v} does not appear in the WHERE pattern")


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[tuple[Term, ...]]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def as_dicts(self) -> list[dict[str, Term]]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_text(self) -> str:
        """Tab-separated; ``aq:`` IRIs shown by local name, literals in full."""
        lines = ["\t".join(self.columns)]
        for row in self.rows:
            lines.append("\t".join(display(t) for t in row))
        return "\n".join(lines) + "\n"


def display(t: Term) -> str:
    if isinstance(t, IRI):
        return t.value[len(AQ):] if t.value.startswith(AQ) else t.n3()
    if isinstance(t, Literal) and t.datatype:
        return f'"{t.lexical}"^^<{t.datatype}>'
    return str(t)


def parse_query(text: str) -> SelectQuery:
    ts = TokenStream(tokenize(text))
    while ts.peek() is not None and ts.peek().text.upper() == "PREFIX":
        ts.next()
        pname = ts.next()
        if pname.kind != "pname" or not pname.text.endswith(":"):
            raise ts.error("expected 'prefix:' after PREFIX", pname)
        iri = ts.next()
        if iri.kind != "iri":
            raise ts.error("expected <namespace>", iri)
        ts.prefixes[pname.text[:-1]] = iri.text[1:-1]
    kw = ts.next()
    if kw.text.upper() != "SELECT":
        raise ts.error(f"expected SELECT, found {kw.text!r}", kw)
    distinct = False
    if ts.peek() is not None and ts.peek().text.upper() == "DISTINCT":
        ts.next()
        distinct = True
    variables: list[str] = []
    star = ts.accept("*")
    while not star and ts.peek() is not None and ts.peek().kind == "var":
        variables.append(ts.next().text[1:])
    if not star and not variables:
        raise ts.error("SELECT needs at least one variable or '*'")
    kw = ts.next()
    if kw.text.upper() != "WHERE":
        raise ts.error(f"expected WHERE, found {kw.text!r}", kw)
    ts.expect("{")
    patterns = []
    while not ts.accept("}"):
        s, p, o = ts.term(), ts.term(), ts.term()
        if isinstance(s, Literal) or isinstance(p, Literal):
            raise ts.error("literal in subject or predicate position")
        patterns.append(Triple(s, p, o))
        if ts.accept("}"):
            break
        ts.expect(".")
    order: list[tuple[str, bool]] = []
    if ts.peek() is not None and ts.peek().text.upper() == "ORDER":
        ts.next()
        by = ts.next()
        if by.text.upper() != "BY":
            raise ts.error("expected BY after ORDER", by)
        while ts.peek() is not None:
            tok = ts.next()
            if tok.kind == "var":
                order.append((tok.text[1:], False))
            elif tok.text.upper() in ("ASC", "DESC"):
                ts.expect("(")
                v = ts.next()
                if v.kind != "var":
                    raise ts.error("expected a variable", v)
                ts.expect(")")
                order.append((v.text[1:], tok.text.upper() == "DESC"))
            else:
                raise ts.error(f"unexpected {tok.text!r} in ORDER BY", tok)
        if not order:
            raise ts.error("ORDER BY needs at least one variable")
    if not ts.at_end():
        raise ts.error(f"unexpected trailing input {ts.peek().text!r}")
    if star:
        seen: dict[str, None] = {}
        for t in patterns:
            for x in t:
                if isinstance(x, Variable):
                    seen.setdefault(x.name)
        variables = list(seen)
    return SelectQuery(tuple(variables), tuple(patterns), tuple(order), distinct)


class _Desc:
    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key

    def __lt__(self, other):
        return other.key < self.key

    def __eq__(self, other):
        return self.key == other.key


def execute_query(store: TripleStore, q: SelectQuery | str) -> ResultTable:
    """Evaluate a query; rows follow ORDER BY, ties and unordered queries sort by all columns."""
    if isinstance(q, str):
        q = parse_query(q)

    def key(b):
        head = [term_sort_key(b[v]) for v, _ in q.order_by]
        head = [(_Desc(k) if desc else k) for k, (_, desc) in zip(head, q.order_by)]
        return (*head, *(term_sort_key(b[v]) for v in q.variables))

    bindings = sorted(join(store, list(q.patterns)), key=key)
    rows = [tuple(b[v] for v in q.variables) for b in bindings]
    if q.distinct:
        rows = list(dict.fromkeys(rows))
    return ResultTable(q.variables, rows)


# --- class-membership queries ------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    prop: IRI
    value: Term

    def as_pattern(self, var: Variable) -> Triple:
        return Triple(var, self.prop, self.value)


def parse_dl_query(text: str) -> list[Constraint]:
    """``Observation and hasStationId value CH001 and ...`` as a list of constraints.

    A bare class name is the constraint ``rdf:type Class``.
    """
    ts = TokenStream(tokenize(text))
    out: list[Constraint] = []
    if ts.at_end():
        raise ParseError("empty membership query")
    while True:
        tok = ts.next()
        if tok.kind not in ("name", "pname", "iri"):
            raise ts.error(f"expected a class or property, found {tok.text!r}", tok)
        nxt = ts.peek()
        if nxt is not None and nxt.text == "value":
            ts.next()
            out.append(Constraint(ts.resolve(tok), ts.term(allow_vars=False)))
        else:
            out.append(Constraint(RDF_TYPE, ts.resolve(tok)))
        if ts.at_end():
            return out
        conj = ts.next()
        if conj.text != "and":
            raise ts.error(f"expected 'and', found {conj.text!r}", conj)


def dl_membership(store: TripleStore, constraints: list[Constraint] | str) -> list[IRI]:
    """Individuals satisfying every constraint, sorted."""
    if isinstance(constraints, str):
        constraints = parse_dl_query(constraints)
    x = Variable("x")
    found = {b["x"] for b in join(store, [c.as_pattern(x) for c in constraints])}
    return sorted(found, key=term_sort_key)


__all__ = [
    "Constraint",
    "ResultTable",
    "SelectQuery",
    "display",
    "dl_membership",
    "execute_query",
    "parse_dl_query",
    "parse_query",
]
