"""In-memory triple store with pattern matching and a line-oriented text format."""

from __future__ import annotations

import threading
from collections import defaultdict
from contextlib import contextmanager
from typing import Iterable, Iterator

from .terms import IRI, Literal, ParseError, Term, TokenStream, Triple, Variable, is_ground, tokenize

Binding = dict[str, Term]


class TripleStore:
    """Set of ground triples indexed by subject, predicate and object.

    Inferred triples carry the name of the rule that produced them. Writers
    take ``store.exclusive()``; plain reads are safe when no writer runs.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: set[Triple] = set()
        self._sp: dict[tuple, set] = defaultdict(set)
        self._po: dict[tuple, set] = defaultdict(set)
        self._s: dict[Term, set] = defaultdict(set)
        self._p: dict[Term, set] = defaultdict(set)
        self._o: dict[Term, set] = defaultdict(set)
        self.provenance: dict[Triple, str] = {}
        self._lock = threading.RLock()
        for t in triples:
            self.add(t)

    def __len__(self):
        return len(self._triples)

    def __contains__(self, t):
        return Triple(*t) in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=_triple_key))

    @contextmanager
    def exclusive(self):
        with self._lock:
            yield self

    def add(self, t, rule: str | None = None) -> bool:
        t = Triple(*t)
        if not is_ground(t):
            raise ValueError(f"cannot store non-ground triple {t}")
        if not isinstance(t.s, IRI) or not isinstance(t.p, IRI):
            raise ValueError(f"subject and predicate must be IRIs: {t}")
        if t in self._triples:
            return False
        self._triples.add(t)
        s, p, o = t
        self._sp[(s, p)].add(o)
        self._po[(p, o)].add(s)
        self._s[s].add(t)
        self._p[p].add(t)
        self._o[o].add(t)
        if rule is not None:
            self.provenance[t] = rule
        return True

    def remove(self, t) -> None:
        t = Triple(*t)
        self._triples.discard(t)
        s, p, o = t
        self._sp[(s, p)].discard(o)
        self._po[(p, o)].discard(s)
        self._s[s].discard(t)
        self._p[p].discard(t)
        self._o[o].discard(t)
        self.provenance.pop(t, None)

    def is_inferred(self, t) -> bool:
        return Triple(*t) in self.provenance

    def copy(self) -> "TripleStore":
        new = TripleStore()
        for t in self._triples:
            new.add(t, self.provenance.get(t))
        return new

    def triples(self, s=None, p=None, o=None) -> Iterator[Triple]:
        """Triples matching the given positions; ``None`` matches anything."""
        if s is not None and p is not None:
            if o is not None:
                t = Triple(s, p, o)
                if t in self._triples:
                    yield t
                return
            for obj in self._sp.get((s, p), ()):
                yield Triple(s, p, obj)
            return
        if p is not None and o is not None:
            for subj in self._po.get((p, o), ()):
                yield Triple(subj, p, o)
            return
        if s is not None:
            cands = self._s.get(s, ())
        elif o is not None:
            cands = self._o.get(o, ())
        elif p is not None:
            cands = self._p.get(p, ())
        else:
            cands = self._triples
        for t in list(cands):
            if (p is None or t.p == p) and (o is None or t.o == o):
                yield t

    def match(self, pattern: Triple, binding: Binding) -> Iterator[Binding]:
        """Extend ``binding`` with every way ``pattern`` matches a stored triple."""
        pos = [_resolve(x, binding) for x in pattern]
        query = [None if isinstance(x, Variable) else x for x in pos]
        for t in self.triples(*query):
            new = binding
            ok = True
            for slot, value in zip(pos, t):
                if isinstance(slot, Variable):
                    bound = new.get(slot.name)
                    if bound is None:
                        if new is binding:
                            new = dict(binding)
                        new[slot.name] = value
                    elif bound != value:
                        ok = False
                        break
            if ok:
                yield new if new is not binding else dict(binding)

    def estimate(self, pattern: Triple, binding: Binding) -> int:
        pos = [_resolve(x, binding) for x in pattern]
        s, p, o = (None if isinstance(x, Variable) else x for x in pos)
        if s is not None and p is not None:
            return len(self._sp.get((s, p), ()))
        if p is not None and o is not None:
            return len(self._po.get((p, o), ()))
        if s is not None:
            return len(self._s.get(s, ()))
        if o is not None:
            return len(self._o.get(o, ()))
        if p is not None:
            return len(self._p.get(p, ()))
        return len(self._triples)

    def to_text(self, include_inferred: bool = True, mark_inferred: bool = True) -> str:
        lines = []
        for t in self:
            rule = self.provenance.get(t)
            if rule is not None and not include_inferred:
                continue
            line = t.n3()
            if rule is not None and mark_inferred:
                line += f"  # inferred by {rule}"
            lines.append(line)
        return "\n".join(lines) + ("\n" if lines else "")


def _resolve(x: Term, binding: Binding) -> Term:
    if isinstance(x, Variable) and x.name in binding:
        return binding[x.name]
    return x


def _triple_key(t: Triple):
    return tuple(_key(x) for x in t)


def _key(x: Term):
    if isinstance(x, IRI):
        return (0, x.value, "")
    if isinstance(x, Literal):
        return (1, x.lexical, x.datatype or "")
    return (2, str(x), "")


def join(store: TripleStore, patterns: list[Triple], binding: Binding | None = None) -> Iterator[Binding]:
    """All bindings satisfying every pattern; most selective pattern first."""
    binding = {} if binding is None else binding
    if not patterns:
        yield binding
        return
    best = min(range(len(patterns)), key=lambda i: store.estimate(patterns[i], binding))
    rest = patterns[:best] + patterns[best + 1:]
    for b in store.match(patterns[best], binding):
        yield from join(store, rest, b)


def parse_triples(text: str) -> list[Triple]:
    """Read ``subject predicate object .`` statements; ``@prefix`` lines are honoured."""
    ts = TokenStream(tokenize(text))
    out = []
    while not ts.at_end():
        tok = ts.peek()
        if tok.text == "@":
            ts.next()
            kw = ts.next()
            if kw.text != "prefix":
                raise ts.error(f"unknown directive @{kw.text}", kw)
            pname = ts.next()
            if pname.kind != "pname" or not pname.text.endswith(":"):
                raise ts.error("expected 'prefix:'", pname)
            iri = ts.next()
            if iri.kind != "iri":
                raise ts.error("expected <namespace>", iri)
            ts.prefixes[pname.text[:-1]] = iri.text[1:-1]
            ts.expect(".")
            continue
        s = ts.term(allow_vars=False)
        p = ts.term(allow_vars=False)
        o = ts.term(allow_vars=False)
        if not isinstance(s, IRI) or not isinstance(p, IRI):
            raise ts.error("subject and predicate must be IRIs", tok)
        ts.expect(".")
        out.append(Triple(s, p, o))
    return out


def load_store(text: str) -> TripleStore:
    return TripleStore(parse_triples(text))


__all__ = ["Binding", "ParseError", "TripleStore", "join", "load_store", "parse_triples"]
