"""RDF-style terms and the tokenizer shared by the triple, rule and query readers."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Union

AQ = "http://example.org/airquality#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD = "http://www.w3.org/2001/XMLSchema#"

PREFIXES = {"aq": AQ, "rdf": RDF, "xsd": XSD}

NUMERIC_TYPES = {XSD + t for t in ("float", "double", "decimal", "integer", "int", "long")}


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        loc = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(loc + message)


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __post_init__(self):
        if not self.value:
            raise ValueError("IRI must be non-empty")

    @property
    def local(self) -> str:
        for sep in ("#", "/"):
            if sep in self.value:
                return self.value.rsplit(sep, 1)[1]
        return self.value

    def n3(self) -> str:
        for prefix, ns in PREFIXES.items():
            if self.value.startswith(ns) and _LOCAL.fullmatch(self.value[len(ns):]):
                return f"{prefix}:{self.value[len(ns):]}"
        return f"<{self.value}>"

    def __str__(self):
        return self.n3()


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str | None = None

    @property
    def is_numeric(self) -> bool:
        return self.datatype in NUMERIC_TYPES

    @property
    def numeric(self) -> float:
        return float(self.lexical)

    def n3(self) -> str:
        text = '"' + self.lexical.replace("\\", "\\\\").replace('"', '\\"') + '"'
        if self.datatype is None:
            return text
        return text + "^^" + IRI(self.datatype).n3()

    def __str__(self):
        return self.n3()


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return "?" + self.name


Term = Union[IRI, Literal, Variable]


class Triple(NamedTuple):
    s: Term
    p: Term
    o: Term

    def n3(self) -> str:
        return f"{self.s.n3()} {self.p.n3()} {self.o.n3()} ."


def aq(local: str) -> IRI:
    return IRI(AQ + local)


def float_literal(value: float) -> Literal:
    return Literal(repr(float(value)), XSD + "float")


RDF_TYPE = IRI(RDF + "type")


def is_ground(t: Triple) -> bool:
    return not any(isinstance(x, Variable) for x in t)


def term_sort_key(t: Term):
    """Total order across kinds: numbers < IRIs < other literals."""
    if isinstance(t, Literal) and t.is_numeric:
        try:
            return (0, t.numeric, "")
        except ValueError:
            pass
    if isinstance(t, IRI):
        return (1, 0.0, t.value)
    if isinstance(t, Literal):
        return (2, 0.0, t.lexical + "\x00" + (t.datatype or ""))
    return (3, 0.0, str(t))


# --- tokenizer ---------------------------------------------------------------

_LOCAL = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*(?:\.[A-Za-z0-9_\-]+)*")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>"\s]*>)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<arrow>->)
  | (?P<dtype>\^\^)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<pname>[A-Za-z_][A-Za-z0-9_\-]*:(?:[A-Za-z_][A-Za-z0-9_\-]*(?:\.[A-Za-z0-9_\-]+)*)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_\-]*)
  | (?P<punct>[(){},.^*;@])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token], prefixes: dict[str, str] | None = None):
        self.tokens = tokens
        self.i = 0
        self.prefixes = dict(PREFIXES if prefixes is None else prefixes)

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise ParseError("unexpected end of input", last.line if last else 1, last.col if last else 1)
        self.i += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek() or (self.tokens[-1] if self.tokens else None)
        if tok is None:
            return ParseError(message)
        return ParseError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise self.error(f"expected {text!r}, found {tok.text!r}", tok)
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return True
        return False

    def resolve(self, tok: Token) -> IRI:
        if tok.kind == "iri":
            return IRI(tok.text[1:-1])
        if tok.kind == "pname":
            prefix, local = tok.text.split(":", 1)
            if prefix not in self.prefixes:
                raise self.error(f"unknown prefix {prefix!r}", tok)
            return IRI(self.prefixes[prefix] + local)
        if tok.kind == "name":
            return aq(tok.text)
        raise self.error(f"expected an IRI, found {tok.text!r}", tok)

    def term(self, allow_vars: bool = True) -> Term:
        tok = self.next()
        if tok.kind == "var":
            if not allow_vars:
                raise self.error("variables are not allowed here", tok)
            return Variable(tok.text[1:])
        if tok.kind == "string":
            lexical = re.sub(r"\\(.)", r"\1", tok.text[1:-1])
            if self.accept("^^"):
                dt = self.next()
                if dt.kind == "name":  # bare datatype names mean XSD types
                    return Literal(lexical, XSD + dt.text)
                return Literal(lexical, self.resolve(dt).value)
            if self.accept("@"):
                self.next()  # language tags are dropped
            return Literal(lexical)
        if tok.kind == "number":
            dtype = "decimal" if any(c in tok.text for c in ".eE") else "integer"
            return Literal(tok.text, XSD + dtype)
        if tok.kind == "name" and tok.text == "a":
            return RDF_TYPE
        return self.resolve(tok)
