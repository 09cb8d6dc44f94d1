"""SWRL-style Horn rules and naive forward chaining to a fixpoint.

Syntax::

    Observation(?o) ^ hasPM10Category(?o, PM10_Severe) -> hasAQICategory(?o, AQISevere)

Unary atoms are class memberships (``rdf:type``), binary atoms are property
triples, and ``swrlb:lessThan`` / ``swrlb:greaterThan`` (plus the
``OrEqual`` forms) compare numeric literals. Bare names live in the ``aq:``
namespace.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field

from .store import Binding, TripleStore, join
from .terms import RDF_TYPE, Literal, ParseError, Term, Token, TokenStream, Triple, Variable, tokenize

BUILTINS = {
    "lessThan": operator.lt,
    "greaterThan": operator.gt,
    "lessThanOrEqual": operator.le,
    "greaterThanOrEqual": operator.ge,
}


@dataclass(frozen=True)
class Builtin:
    name: str
    args: tuple[Term, Term]

    def holds(self, binding: Binding) -> bool:
        vals = []
        for a in self.args:
            v = binding.get(a.name) if isinstance(a, Variable) else a
            if not isinstance(v, Literal) or not v.is_numeric:
                return False
            vals.append(v.numeric)
        return BUILTINS[self.name](*vals)

    def __str__(self):
        return f"swrlb:{self.name}({self.args[0]}, {self.args[1]})"


@dataclass(frozen=True)
class HornRule:
    body: tuple[Triple, ...]
    head: tuple[Triple, ...]
    builtins: tuple[Builtin, ...] = ()
    name: str = ""
    line: int = 0

    def __post_init__(self):
        bound = _vars(self.body)
        unsafe = (_vars(self.head) | {v for b in self.builtins for v in _vars([b.args])}) - bound
        if unsafe:
            names = ", ".join("?" + v for v in sorted(unsafe))
            raise ParseError(f"rule {self.name or '?'}: variables {names} not bound in the body", self.line or None)
        if not self.head:
            raise ParseError(f"rule {self.name or '?'} has an empty head", self.line or None)

    def fire(self, store: TripleStore) -> list[Triple]:
        out = []
        for b in join(store, list(self.body)):
            if all(bi.holds(b) for bi in self.builtins):
                for h in self.head:
                    out.append(Triple(*(b[x.name] if isinstance(x, Variable) else x for x in h)))
        return out


def _vars(atoms) -> set[str]:
    return {x.name for a in atoms for x in a if isinstance(x, Variable)}


def _atom(ts: TokenStream) -> tuple[Token, Triple | Builtin]:
    tok = ts.next()
    if tok.kind not in ("name", "pname", "iri"):
        raise ts.error(f"expected an atom, found {tok.text!r}", tok)
    args: list[Term] = []
    ts.expect("(")
    while True:
        args.append(ts.term())
        if ts.accept(")"):
            break
        ts.expect(",")
    if tok.kind == "pname" and tok.text.startswith("swrlb:"):
        fn = tok.text.split(":", 1)[1]
        if fn not in BUILTINS:
            raise ts.error(f"unsupported builtin {tok.text}", tok)
        if len(args) != 2:
            raise ts.error(f"{tok.text} takes two arguments", tok)
        return tok, Builtin(fn, (args[0], args[1]))
    pred = ts.resolve(tok)
    if len(args) == 1:
        return tok, Triple(args[0], RDF_TYPE, pred)
    if len(args) == 2:
        return tok, Triple(args[0], pred, args[1])
    raise ts.error(f"atom {tok.text} must have one or two arguments", tok)


def parse_rules(text: str, prefix: str = "rule") -> list[HornRule]:
    """Parse a rule file; rules may span lines and need no separator."""
    ts = TokenStream(tokenize(text))
    rules = []
    while not ts.at_end():
        start = ts.peek()
        body: list[Triple] = []
        builtins: list[Builtin] = []
        while True:
            tok, atom = _atom(ts)
            if isinstance(atom, Builtin):
                builtins.append(atom)
            else:
                body.append(atom)
            if ts.accept("^"):
                continue
            if ts.accept("->"):
                break
            raise ts.error("expected '^' or '->'")
        head: list[Triple] = []
        while True:
            tok, atom = _atom(ts)
            if isinstance(atom, Builtin):
                raise ts.error("builtins are only allowed in the rule body", tok)
            head.append(atom)
            if not ts.accept("^"):
                break
        ts.accept(".")
        rules.append(
            HornRule(tuple(body), tuple(head), tuple(builtins), f"{prefix}{len(rules) + 1}", start.line)
        )
    return rules


@dataclass
class Materialization:
    store: TripleStore
    inferred: list[Triple] = field(default_factory=list)
    rounds: int = 0


def materialize(store: TripleStore, rules: list[HornRule], max_rounds: int = 100,
                in_place: bool = False) -> Materialization:
    """Apply every rule until nothing new is derived.

    Inferred triples are recorded in ``store.provenance`` with the rule name.
    """
    target = store if in_place else store.copy()
    result = Materialization(target)
    with target.exclusive():
        for rnd in range(1, max_rounds + 1):
            new = []
            for rule in rules:
                for t in rule.fire(target):
                    if t not in target:
                        new.append((t, rule.name))
            added = [t for t, name in new if target.add(t, name)]
            result.rounds = rnd
            if not added:
                return result
            result.inferred.extend(added)
    raise RuntimeError(f"no fixpoint after {max_rounds} rounds")
