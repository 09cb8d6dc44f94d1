"""IT2 fuzzy IF-THEN rules: a small text DSL and range-driven rule generation.

DSL, one rule per line, ``#`` starts a comment::

    IF PM2.5 is Good and PM10 is Poor and NO2 is Satisfactory and SO2 is Good
       and O3 is Satisfactory and CO is Good and NH3 is Good THEN AQI is Poor
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .it2core import POLLUTANTS, SEVERITY, TERMS, ParameterTable, term_name


class RuleSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" + (f", column {column}" if column else "") if line else ""
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class FuzzyRule:
    antecedent: Mapping[str, str]
    consequent: str
    weight: float = 1.0

    def __post_init__(self):
        ante = dict(self.antecedent)
        if set(ante) != set(POLLUTANTS):
            missing = sorted(set(POLLUTANTS) - set(ante))
            extra = sorted(set(ante) - set(POLLUTANTS))
            raise ValueError(f"rule needs all seven pollutants (missing {missing}, unknown {extra})")
        for p, t in ante.items():
            if t not in SEVERITY:
                raise ValueError(f"unknown term {t!r} for {p}")
        if self.consequent not in SEVERITY:
            raise ValueError(f"unknown consequent term {self.consequent!r}")
        if not (0.0 < self.weight <= 1.0):
            raise ValueError(f"rule weight must be in (0, 1], got {self.weight}")
        ordered = {p: ante[p] for p in POLLUTANTS}
        object.__setattr__(self, "antecedent", MappingProxyType(ordered))

    def key(self) -> tuple[str, ...]:
        return tuple(self.antecedent[p] for p in POLLUTANTS)

    def drivers(self) -> list[str]:
        """Pollutants whose antecedent term matches the consequent."""
        return [p for p in POLLUTANTS if self.antecedent[p] == self.consequent]

    def to_dsl(self) -> str:
        body = " and ".join(f"{p} is {self.antecedent[p]}" for p in POLLUTANTS)
        return f"IF {body} THEN AQI is {self.consequent}"

    def __hash__(self):
        return hash((self.key(), self.consequent, self.weight))

    def __eq__(self, other):
        if not isinstance(other, FuzzyRule):
            return NotImplemented
        return (self.key(), self.consequent, self.weight) == (
            other.key(),
            other.consequent,
            other.weight,
        )


@dataclass(frozen=True)
class RuleBase:
    rules: tuple[FuzzyRule, ...]
    provenance: str = "hand-authored"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        rules = tuple(self.rules)
        if not rules:
            raise ValueError("rule base is empty")
        seen = {}
        for i, r in enumerate(rules):
            if r.key() in seen:
                raise ValueError(f"duplicate antecedent in rules {seen[r.key()] + 1} and {i + 1}")
            seen[r.key()] = i
        object.__setattr__(self, "rules", rules)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    def to_dsl(self) -> str:
        lines = [f"# provenance: {self.provenance}"]
        lines += [r.to_dsl() for r in self.rules]
        return "\n".join(lines) + "\n"


def most_severe(terms) -> str:
    return max(terms, key=SEVERITY.__getitem__)


_ATOM = re.compile(r"\s*([A-Za-z0-9.]+)\s+is\s+([A-Za-z][A-Za-z ]*?)\s*$", re.IGNORECASE)
_RULE = re.compile(r"^\s*IF\s+(.*?)\s+THEN\s+(.*)$", re.IGNORECASE)
_AND = re.compile(r"\s+and\s+", re.IGNORECASE)


def _canonical_pollutant(name: str) -> str | None:
    key = name.replace("_", "").replace(".", "").upper()
    for p in POLLUTANTS:
        if p.replace(".", "").upper() == key:
            return p
    return None


def parse_rule(line: str, lineno: int = 1) -> FuzzyRule:
    m = _RULE.match(line)
    if not m:
        raise RuleSyntaxError("expected 'IF <atoms> THEN AQI is <term>'", lineno, 1)
    body, head = m.group(1), m.group(2).rstrip(" .")
    hm = _ATOM.match(head)
    if not hm or hm.group(1).upper() != "AQI":
        raise RuleSyntaxError(f"bad consequent {head!r}", lineno, m.start(2) + 1)
    try:
        consequent = term_name(hm.group(2))
    except KeyError as exc:
        raise RuleSyntaxError(str(exc.args[0]), lineno, m.start(2) + 1) from None

    antecedent: dict[str, str] = {}
    offset = m.start(1)
    for piece in _AND.split(body):
        col = line.find(piece, offset) + 1
        am = _ATOM.match(piece)
        if not am:
            raise RuleSyntaxError(f"bad atom {piece!r}", lineno, col)
        pollutant = _canonical_pollutant(am.group(1))
        if pollutant is None:
            raise RuleSyntaxError(f"unknown pollutant {am.group(1)!r}", lineno, col)
        if pollutant in antecedent:
            raise RuleSyntaxError(f"pollutant {pollutant} repeated", lineno, col)
        try:
            antecedent[pollutant] = term_name(am.group(2))
        except KeyError as exc:
            raise RuleSyntaxError(str(exc.args[0]), lineno, col) from None
        offset = col
    missing = [p for p in POLLUTANTS if p not in antecedent]
    if missing:
        raise RuleSyntaxError(f"rule lacks atoms for {', '.join(missing)}", lineno)
    return FuzzyRule(antecedent, consequent)


def parse_rules(text: str) -> RuleBase:
    rules = []
    seen: dict[tuple, int] = {}
    provenance = "hand-authored"
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.startswith("# provenance:"):
            provenance = stripped.split(":", 1)[1].strip() or provenance
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        rule = parse_rule(line, lineno)
        if rule.key() in seen:
            raise RuleSyntaxError(f"duplicate antecedent (first seen on line {seen[rule.key()]})", lineno)
        seen[rule.key()] = lineno
        rules.append(rule)
    if not rules:
        raise RuleSyntaxError("rule file contains no rules")
    return RuleBase(tuple(rules), provenance)


def _touches(umf, lo: float, hi: float, open_right: bool = False) -> bool:
    # Positive-membership support of the UMF, closed at shoulder ends.
    left_ok = umf.a <= hi if umf.a == umf.b else umf.a < hi
    right_ok = open_right or (umf.d >= lo if umf.c == umf.d else umf.d > lo)
    return left_ok and right_ok


def retained_terms(
    lo: float, hi: float, table: ParameterTable, variable: str, saturate: bool = False
) -> list[str]:
    top = table.top_term(variable)
    return [
        s.term
        for s in table.sets(variable)
        if _touches(s.umf, lo, hi, open_right=saturate and s.term == top)
    ]


def generate_rules(
    ranges: Mapping[str, tuple[float, float]],
    table: ParameterTable,
    saturate: bool = False,
) -> RuleBase:
    """Cartesian product of the terms each pollutant's observed range touches.

    Each rule's consequent is its most severe antecedent term. ``saturate``
    treats the top term as a right shoulder, so ranges past its plateau keep it.
    """
    per_pollutant = []
    for p in POLLUTANTS:
        if p not in ranges:
            raise ValueError(f"no observed range for {p}")
        lo, hi = ranges[p]
        if lo > hi:
            raise ValueError(f"{p}: min {lo} exceeds max {hi}")
        kept = retained_terms(lo, hi, table, p, saturate)
        if not kept:
            raise ValueError(f"{p}: range [{lo}, {hi}] lies outside every term's support")
        per_pollutant.append(kept)
    rules = tuple(
        FuzzyRule(dict(zip(POLLUTANTS, combo)), most_severe(combo))
        for combo in itertools.product(*per_pollutant)
    )
    return RuleBase(rules, "generated")


__all__ = [
    "FuzzyRule",
    "RuleBase",
    "RuleSyntaxError",
    "generate_rules",
    "most_severe",
    "parse_rule",
    "parse_rules",
    "retained_terms",
    "TERMS",
]
