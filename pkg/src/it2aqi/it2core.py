"""Interval Type-2 trapezoidal fuzzy sets and the membership parameter table.

A set is bounded by an upper trapezoid (height 1) and a lower trapezoid
(height <= 1) nested inside it. Evaluating a set at a crisp value gives a
membership interval ``[lower, upper]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

TERMS = ("Good", "Satisfactory", "Moderate", "Poor", "VeryPoor", "Severe")
SEVERITY = {term: rank for rank, term in enumerate(TERMS)}
POLLUTANTS = ("PM2.5", "PM10", "NO2", "SO2", "O3", "CO", "NH3")
VARIABLES = POLLUTANTS + ("AQI",)


class ParameterError(ValueError):
    """Raised for malformed or inconsistent membership parameters."""


def check_value(x: float, what: str = "value") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x!r}")
    if x < 0:
        raise ValueError(f"{what} must be non-negative, got {x!r}")
    return x


def term_name(label: str) -> str:
    """Normalise a category label ("Very Poor", "very_poor") to its canonical term."""
    key = "".join(ch for ch in label if ch.isalnum()).lower()
    for term in TERMS:
        if term.lower() == key:
            return term
    raise KeyError(f"unknown linguistic term {label!r}")


@dataclass(frozen=True)
class Trapezoid:
    a: float
    b: float
    c: float
    d: float
    h: float = 1.0

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"non-finite trapezoid parameter in {vals}")
        if not (self.a <= self.b <= self.c <= self.d):
            raise ParameterError(f"trapezoid requires a <= b <= c <= d, got {vals[:4]}")
        if not (0.0 < self.h <= 1.0):
            raise ParameterError(f"height must lie in (0, 1], got {self.h}")

    def __call__(self, x: float) -> float:
        return eval_trapezoid(self, x)

    def as_list(self) -> list[float]:
        return [self.a, self.b, self.c, self.d, self.h]


def eval_trapezoid(t: Trapezoid, x: float, right_shoulder: bool = False) -> float:
    """Piecewise ramp/plateau/ramp scaled by the height ``t.h``.

    The plateau is closed, ``[b, c]``. With ``right_shoulder`` the set keeps
    its height for every ``x >= c``.
    """
    if not math.isfinite(x):
        raise ValueError(f"cannot evaluate membership at non-finite x={x!r}")
    if t.b <= x <= t.c or (right_shoulder and x >= t.c):
        return t.h
    if x <= t.a or x >= t.d:
        return 0.0
    if x < t.b:
        return t.h * (x - t.a) / (t.b - t.a)
    return t.h * (t.d - x) / (t.d - t.c)


@dataclass(frozen=True)
class MembershipInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(f"invalid membership interval [{self.lo}, {self.hi}]")

    def __iter__(self):
        return iter((self.lo, self.hi))


@dataclass(frozen=True)
class IT2TrapezoidSet:
    term: str
    umf: Trapezoid
    lmf: Trapezoid

    def __post_init__(self):
        if self.term not in SEVERITY:
            raise ParameterError(f"unknown term {self.term!r}")
        u, l = self.umf, self.lmf
        if u.h != 1.0:
            raise ParameterError(f"{self.term}: UMF height must be 1, got {u.h}")
        if l.h > u.h:
            raise ParameterError(f"{self.term}: LMF height exceeds UMF height")
        if not (u.a <= l.a and l.d <= u.d):
            raise ParameterError(f"{self.term}: LMF support not inside UMF support")
        # Ramps are linear, so checking the LMF breakpoints is enough to prove LMF <= UMF.
        for x in (l.a, l.b, l.c, l.d):
            if eval_trapezoid(l, x) > eval_trapezoid(u, x) + 1e-12:
                raise ParameterError(f"{self.term}: LMF exceeds UMF at x={x}")

    @property
    def support(self) -> tuple[float, float]:
        return self.umf.a, self.umf.d

    def interval(self, x: float, right_shoulder: bool = False) -> MembershipInterval:
        return membership_interval(self, x, right_shoulder)


def membership_interval(
    s: IT2TrapezoidSet, x: float, right_shoulder: bool = False
) -> MembershipInterval:
    x = check_value(x, "concentration")
    lo = eval_trapezoid(s.lmf, x, right_shoulder)
    hi = eval_trapezoid(s.umf, x, right_shoulder)
    return MembershipInterval(lo, hi)


class ParameterTable(Mapping):
    """Immutable mapping ``(variable, term) -> IT2TrapezoidSet``."""

    def __init__(self, sets: Iterable[tuple[str, IT2TrapezoidSet]]):
        table: dict[tuple[str, str], IT2TrapezoidSet] = {}
        for variable, s in sets:
            if variable not in VARIABLES:
                raise ParameterError(f"unknown variable {variable!r}")
            key = (variable, s.term)
            if key in table:
                raise ParameterError(f"duplicate entry for {key}")
            table[key] = s
        for variable in VARIABLES:
            if not any(v == variable for v, _ in table):
                raise ParameterError(f"variable {variable} has no terms")
        missing = [t for t in TERMS if ("AQI", t) not in table]
        if missing:
            raise ParameterError(f"AQI variable lacks terms {missing}")
        self._sets = MappingProxyType(table)

    def __getitem__(self, key):
        return self._sets[key]

    def __iter__(self):
        return iter(self._sets)

    def __len__(self):
        return len(self._sets)

    def __eq__(self, other):
        if not isinstance(other, ParameterTable):
            return NotImplemented
        return dict(self._sets) == dict(other._sets)

    def __hash__(self):
        return hash(tuple(sorted(self._sets.items())))

    def terms(self, variable: str) -> list[str]:
        """Terms defined for ``variable`` in severity order."""
        found = [t for (v, t) in self._sets if v == variable]
        return sorted(found, key=SEVERITY.__getitem__)

    def sets(self, variable: str) -> list[IT2TrapezoidSet]:
        return [self._sets[(variable, t)] for t in self.terms(variable)]

    def top_term(self, variable: str) -> str:
        return self.terms(variable)[-1]

    def to_toml(self) -> str:
        return dump_parameter_table(self)


def _section_name(variable: str, term: str) -> str:
    var = f'"{variable}"' if "." in variable else variable
    return f"[{var}.{term}]"


def _fmt(v: float) -> str:
    return repr(float(v))


def dump_parameter_table(table: ParameterTable) -> str:
    lines = [
        "# Trapezoidal IT2 membership parameters, one table per (variable, term).",
        "# umf/lmf = [a, b, c, d, height]",
        "",
    ]
    for variable in VARIABLES:
        for s in table.sets(variable):
            lines.append(_section_name(variable, s.term))
            lines.append("umf = [" + ", ".join(map(_fmt, s.umf.as_list())) + "]")
            lines.append("lmf = [" + ", ".join(map(_fmt, s.lmf.as_list())) + "]")
            lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def _trapezoid(raw, where: str) -> Trapezoid:
    if not isinstance(raw, list) or len(raw) != 5:
        raise ParameterError(f"{where}: expected [a, b, c, d, h], got {raw!r}")
    try:
        return Trapezoid(*(float(v) for v in raw))
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{where}: {exc}") from None


def load_parameter_table(text: str) -> ParameterTable:
    """Parse a TOML parameter table.

    Syntax errors carry the TOML parser's line/column; invariant violations
    name the offending ``(variable, term)``.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParameterError(f"parse error: {exc}") from None
    entries = []
    for variable, terms in doc.items():
        if not isinstance(terms, dict):
            raise ParameterError(f"{variable}: expected a table of terms")
        for term, body in terms.items():
            where = f"({variable}, {term})"
            if not isinstance(body, dict) or set(body) != {"umf", "lmf"}:
                raise ParameterError(f"{where}: expected exactly the keys umf and lmf")
            try:
                s = IT2TrapezoidSet(
                    term_name(term),
                    _trapezoid(body["umf"], where + " umf"),
                    _trapezoid(body["lmf"], where + " lmf"),
                )
            except (ParameterError, KeyError) as exc:
                msg = str(exc) if where in str(exc) else f"{where}: {exc}"
                raise ParameterError(msg) from None
            entries.append((variable, s))
    return ParameterTable(entries)


_DEFAULT: ParameterTable | None = None


def default_table_text() -> str:
    return resources.files("it2aqi.data").joinpath("membership.toml").read_text("utf-8")


def default_table() -> ParameterTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_parameter_table(default_table_text())
    return _DEFAULT
