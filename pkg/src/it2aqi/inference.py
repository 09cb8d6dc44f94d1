"""Weighted IT2 Mamdani inference with Karnik-Mendel type reduction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fahp import WeightVector, pollutant_weights
from .it2core import (
    POLLUTANTS,
    SEVERITY,
    TERMS,
    IT2TrapezoidSet,
    MembershipInterval,
    ParameterTable,
    check_value,
    eval_trapezoid,
    membership_interval,
)
from .rulebase import FuzzyRule, RuleBase

WEIGHT_POLICIES = ("driver", "global-max")

# Consequent centroid grid over the AQI universe.
CENTROID_GRID = (0.0, 600.0, 2001)


class ZeroFiringError(ArithmeticError):
    """No rule fired for an input: it lies outside the modelled space."""

    def __init__(self, message: str, vector=None):
        self.vector = vector
        super().__init__(message if vector is None else f"{message}: {vector}")


@dataclass(frozen=True)
class PollutantVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(POLLUTANTS):
            raise ValueError(f"expected {len(POLLUTANTS)} concentrations")
        vals = tuple(check_value(v, p) for p, v in zip(POLLUTANTS, self.values))
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_mapping(cls, m: Mapping[str, float]) -> "PollutantVector":
        missing = [p for p in POLLUTANTS if p not in m]
        if missing:
            raise ValueError(f"missing concentrations for {missing}")
        return cls(tuple(float(m[p]) for p in POLLUTANTS))

    def __getitem__(self, pollutant: str) -> float:
        return self.values[POLLUTANTS.index(pollutant)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(POLLUTANTS, self.values))


@dataclass(frozen=True)
class FiringInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi):
            raise ValueError(f"invalid firing interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class ConsequentCentroid:
    cl: float
    cr: float

    def __post_init__(self):
        if self.cl > self.cr:
            raise ValueError(f"centroid interval reversed: [{self.cl}, {self.cr}]")


@dataclass(frozen=True)
class TypeReducedInterval:
    aqi_l: float
    aqi_r: float

    def __post_init__(self):
        if self.aqi_l > self.aqi_r:
            raise ValueError(f"type-reduced interval reversed: [{self.aqi_l}, {self.aqi_r}]")

    @property
    def aqi(self) -> float:
        return (self.aqi_l + self.aqi_r) / 2


def _as_vector(x) -> PollutantVector:
    return x if isinstance(x, PollutantVector) else PollutantVector.from_mapping(x)


def fuzzify(x, table: ParameterTable, saturate: bool = False) -> dict[str, dict[str, MembershipInterval]]:
    """Membership interval of every (pollutant, term) at the input concentrations.

    ``saturate`` lets each pollutant's top term act as a right shoulder.
    """
    x = _as_vector(x)
    return {p: fuzzify_one(v, table, p, saturate) for p, v in zip(POLLUTANTS, x.values)}


def firing_interval(rule: FuzzyRule, fuzzified: Mapping[str, Mapping[str, MembershipInterval]]) -> FiringInterval:
    lows, highs = [], []
    for p, term in rule.antecedent.items():
        mi = fuzzified[p][term]
        lows.append(mi.lo)
        highs.append(mi.hi)
    return FiringInterval(min(lows), min(highs))


def rule_weight(rule: FuzzyRule, w: WeightVector | Mapping[str, float], policy: str = "driver") -> float:
    """Weight applied to a rule's firing interval.

    ``driver``: largest weight among pollutants whose term equals the
    consequent, or the largest overall when no such pollutant exists.
    ``global-max``: the largest weight overall.
    """
    weights = pollutant_weights(w) if isinstance(w, WeightVector) else dict(w)
    if policy == "global-max":
        return max(weights.values())
    if policy != "driver":
        raise ValueError(f"unknown weight policy {policy!r}; choose from {WEIGHT_POLICIES}")
    drivers = rule.drivers()
    pool = drivers if drivers else list(POLLUTANTS)
    return max(weights[p] for p in pool)


def weighted_firing(rule: FuzzyRule, f: FiringInterval, w, policy: str = "driver") -> FiringInterval:
    wn = rule_weight(rule, w, policy)
    return FiringInterval(wn * f.lo, wn * f.hi)


def _grid_centroid(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> tuple[float, float]:
    """Exact discrete centroid interval by trying every switch point."""
    xu, xl = x * upper, x * lower
    # Prefix sums over the first k points, k = 0..N.
    pu = np.concatenate(([0.0], np.cumsum(upper)))
    pl = np.concatenate(([0.0], np.cumsum(lower)))
    pxu = np.concatenate(([0.0], np.cumsum(xu)))
    pxl = np.concatenate(([0.0], np.cumsum(xl)))
    tu, tl, txu, txl = pu[-1], pl[-1], pxu[-1], pxl[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        left = (pxu + (txl - pxl)) / (pu + (tl - pl))
        right = (pxl + (txu - pxu)) / (pl + (tu - pu))
    if np.all(np.isnan(left)) or np.all(np.isnan(right)):
        raise ValueError("set has empty support on the centroid grid")
    return float(np.nanmin(left)), float(np.nanmax(right))


def consequent_centroid(s: IT2TrapezoidSet, grid: tuple[float, float, int] = CENTROID_GRID) -> ConsequentCentroid:
    lo, hi, n = grid
    x = np.linspace(lo, hi, n)
    upper = np.array([eval_trapezoid(s.umf, v) for v in x])
    lower = np.array([eval_trapezoid(s.lmf, v) for v in x])
    if not upper.any():
        raise ValueError(f"{s.term}: empty support on the centroid grid")
    cl, cr = _grid_centroid(x, lower, upper)
    return ConsequentCentroid(cl, cr)


def _km(c: np.ndarray, lo: np.ndarray, hi: np.ndarray, left: bool) -> tuple[float, int]:
    """One KM endpoint. Returns (endpoint, number of switch-point updates)."""
    order = np.argsort(c, kind="stable")
    c, lo, hi = c[order], lo[order], hi[order]
    # Centroids equal to y do not move the mean, so ulp-level ties may go either way.
    tol = 1e-12 * max(1.0, float(np.abs(c).max()))
    y = float(np.dot(c, lo + hi) / np.sum(lo + hi))
    k = -1
    for it in range(len(c) + 2):
        if left:
            # At or left of y: upper firing, pulling the mean down.
            k_new = int(np.searchsorted(c, y + tol, side="right"))
        else:
            k_new = int(np.searchsorted(c, y - tol, side="left"))
        if k_new == k:
            return y, it
        k = k_new
        f = np.concatenate((hi[:k], lo[k:])) if left else np.concatenate((lo[:k], hi[k:]))
        y_new = float(np.dot(c, f) / f.sum())
        if abs(y_new - y) <= tol and it > 0:
            return y_new, it + 1
        y = y_new
    raise ArithmeticError("KM iteration did not converge")


def km_arrays(cl, cr, lo, hi) -> TypeReducedInterval:
    cl, cr, lo, hi = (np.asarray(a, dtype=float) for a in (cl, cr, lo, hi))
    fired = hi > 0
    if not fired.any():
        raise ZeroFiringError("every rule fired at zero")
    cl, cr, lo, hi = cl[fired], cr[fired], lo[fired], hi[fired]
    left, _ = _km(cl, lo, hi, left=True)
    right, _ = _km(cr, lo, hi, left=False)
    return TypeReducedInterval(left, max(right, left))


def km_type_reduce(rules: Iterable[tuple[FiringInterval, ConsequentCentroid]]) -> TypeReducedInterval:
    """Karnik-Mendel endpoints of the type-reduced set over fired rules."""
    pairs = list(rules)
    if not pairs:
        raise ZeroFiringError("no rules supplied")
    lo = [f.lo for f, _ in pairs]
    hi = [f.hi for f, _ in pairs]
    cl = [c.cl for _, c in pairs]
    cr = [c.cr for _, c in pairs]
    return km_arrays(cl, cr, lo, hi)


def categorize(aqi: float, table: ParameterTable, variable: str = "AQI") -> str:
    """Term with the largest UMF membership; ties go to the more severe term.

    Values past the top term's plateau fall in the top term.
    """
    aqi = check_value(aqi, variable)
    sets = table.sets(variable)
    top = sets[-1]
    if aqi >= top.umf.c:
        return top.term
    best, best_mu = sets[0].term, -1.0
    for s in sets:
        mu = eval_trapezoid(s.umf, aqi)
        if mu >= best_mu:
            best, best_mu = s.term, mu
    return best


@dataclass(frozen=True)
class Assessment:
    interval: TypeReducedInterval
    category: str
    pollutant_categories: Mapping[str, str]
    fired_rules: int

    @property
    def aqi(self) -> float:
        return self.interval.aqi


class Engine:
    """Precomputed rule tables for repeated assessment of many inputs."""

    def __init__(self, rules: RuleBase, weights, table: ParameterTable,
                 policy: str = "driver", saturate: bool = True):
        if policy not in WEIGHT_POLICIES:
            raise ValueError(f"unknown weight policy {policy!r}; choose from {WEIGHT_POLICIES}")
        self.rules = rules
        self.table = table
        self.policy = policy
        self.saturate = saturate
        self.weights = pollutant_weights(weights) if isinstance(weights, WeightVector) else dict(weights)
        self.terms = {p: table.terms(p) for p in POLLUTANTS}
        idx = np.empty((len(rules), len(POLLUTANTS)), dtype=np.intp)
        for r, rule in enumerate(rules):
            for j, p in enumerate(POLLUTANTS):
                try:
                    idx[r, j] = self.terms[p].index(rule.antecedent[p])
                except ValueError:
                    raise ValueError(f"rule {r + 1} uses term {rule.antecedent[p]} undefined for {p}") from None
        self.index = idx
        self._lookup = {tuple(int(v) for v in row): r for r, row in enumerate(idx)}
        self.rule_weights = np.array([rule_weight(rule, self.weights, policy) for rule in rules])
        self.consequents = np.array([SEVERITY[rule.consequent] for rule in rules], dtype=np.intp)
        cents = [consequent_centroid(table[("AQI", t)]) for t in TERMS]
        self.centroids = np.array([[c.cl, c.cr] for c in cents])

    def _memberships(self, x: PollutantVector) -> tuple[np.ndarray, np.ndarray]:
        width = max(len(t) for t in self.terms.values())
        lo = np.zeros((len(POLLUTANTS), width))
        hi = np.zeros_like(lo)
        for j, (p, value) in enumerate(zip(POLLUTANTS, x.values)):
            fz = fuzzify_one(value, self.table, p, self.saturate)
            for k, term in enumerate(self.terms[p]):
                lo[j, k], hi[j, k] = fz[term].lo, fz[term].hi
        return lo, hi

    def firing(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Weighted firing of the rules that can fire: (rule indices, lo, hi).

        Only combinations of terms with non-zero upper membership are looked
        up; every other rule fires at [0, 0].
        """
        x = _as_vector(x)
        lo, hi = self._memberships(x)
        active = [np.flatnonzero(hi[j]) for j in range(len(POLLUTANTS))]
        found = []
        for combo in itertools.product(*active):
            r = self._lookup.get(combo)
            if r is not None:
                found.append(r)
        rows = np.array(sorted(found), dtype=np.intp)
        if rows.size == 0:
            empty = np.zeros(0)
            return rows, empty, empty
        cols = np.arange(len(POLLUTANTS))
        sub = self.index[rows]
        f_lo = lo[cols, sub].min(axis=1) * self.rule_weights[rows]
        f_hi = hi[cols, sub].min(axis=1) * self.rule_weights[rows]
        keep = f_hi > 0
        return rows[keep], f_lo[keep], f_hi[keep]

    def assess(self, x) -> Assessment:
        x = _as_vector(x)
        rows, f_lo, f_hi = self.firing(x)
        fired = len(rows)
        if fired == 0:
            raise ZeroFiringError("no rule fires for input", x.as_dict())
        # Rules sharing a consequent share its centroid, so their firings add.
        n_terms = len(TERMS)
        cons = self.consequents[rows]
        g_lo = np.bincount(cons, weights=f_lo, minlength=n_terms)
        g_hi = np.bincount(cons, weights=f_hi, minlength=n_terms)
        interval = km_arrays(self.centroids[:, 0], self.centroids[:, 1], g_lo, g_hi)
        cats = {p: categorize(v, self.table, p) for p, v in zip(POLLUTANTS, x.values)}
        return Assessment(interval, categorize(interval.aqi, self.table), cats, fired)


def fuzzify_one(value: float, table: ParameterTable, variable: str, saturate: bool) -> dict[str, MembershipInterval]:
    top = table.top_term(variable)
    return {
        s.term: membership_interval(s, value, right_shoulder=saturate and s.term == top)
        for s in table.sets(variable)
    }


def assess(x, rb: RuleBase, w, table: ParameterTable, policy: str = "driver",
           saturate: bool = True) -> tuple[TypeReducedInterval, str]:
    result = Engine(rb, w, table, policy, saturate).assess(x)
    return result.interval, result.category


def assess_many(xs: Sequence, engine: Engine) -> list[Assessment]:
    return [engine.assess(x) for x in xs]


__all__ = [
    "Assessment",
    "ConsequentCentroid",
    "Engine",
    "FiringInterval",
    "PollutantVector",
    "TypeReducedInterval",
    "ZeroFiringError",
    "assess",
    "assess_many",
    "categorize",
    "consequent_centroid",
    "firing_interval",
    "fuzzify",
    "km_arrays",
    "km_type_reduce",
    "rule_weight",
    "weighted_firing",
]
