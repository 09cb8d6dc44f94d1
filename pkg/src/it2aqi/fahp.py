"""Pollutant weights from interval Type-2 fuzzy AHP.

Pipeline: linguistic pairwise matrix -> crisp matrix via DTraT -> consistency
ratio -> row fuzzy geometric means -> fuzzy weights -> DTraT -> normalisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .it2core import POLLUTANTS, Trapezoid

# Saaty random consistency index by matrix order.
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49}

DEFAULT_CR_THRESHOLD = 0.10

# The default matrix orders criteria by health-impact dominance.
DOMINANCE_ORDER = ("PM2.5", "PM10", "CO", "O3", "NO2", "SO2", "NH3")


class ConsistencyError(ValueError):
    def __init__(self, cr: float, threshold: float):
        self.cr = cr
        self.threshold = threshold
        super().__init__(f"pairwise matrix is inconsistent: CR={cr:.4f} > {threshold}")


class MatrixFormatError(ValueError):
    pass


@dataclass(frozen=True)
class IT2Judgment:
    """Trapezoidal IT2 fuzzy number on the 1..9 importance scale."""

    umf: Trapezoid
    lmf: Trapezoid

    def __post_init__(self):
        u, l = self.umf, self.lmf
        if u.a <= 0 or l.a <= 0:
            raise ValueError(f"judgment needs a positive support, got {u.as_list()} / {l.as_list()}")
        if l.h > u.h:
            raise ValueError("LMF height exceeds UMF height")
        tol = 1e-9 * max(1.0, u.d)
        if l.a < u.a - tol or l.d > u.d + tol:
            raise ValueError("LMF support must lie within UMF support")

    @classmethod
    def crisp(cls, k: float) -> "IT2Judgment":
        t = Trapezoid(k, k, k, k, 1.0)
        return cls(t, t)

    def is_identity(self) -> bool:
        return all(v == 1.0 for t in (self.umf, self.lmf) for v in (t.a, t.b, t.c, t.d))


def _flip(t: Trapezoid) -> Trapezoid:
    if min(t.a, t.b, t.c, t.d) <= 0:
        raise ZeroDivisionError(f"cannot take reciprocal of {t.as_list()}: zero in support")
    return Trapezoid(1 / t.d, 1 / t.c, 1 / t.b, 1 / t.a, t.h)


def reciprocal(j: IT2Judgment) -> IT2Judgment:
    return IT2Judgment(_flip(j.umf), _flip(j.lmf))


def _part(t: Trapezoid) -> float:
    return ((t.d - t.a) + (t.h * t.b - t.a) + (t.h * t.c - t.a)) / 4 + t.a


def dtrat(j: IT2Judgment) -> float:
    """DTraT defuzzification: mean of the UMF and LMF parts.

    Each part is ``((d - a) + (h*b - a) + (h*c - a)) / 4 + a``.
    """
    return (_part(j.umf) + _part(j.lmf)) / 2


def _lmf(a, b, c, d):
    return Trapezoid(a, b, c, d, 0.8)


# Linguistic importance scale.
SCALE: dict[str, IT2Judgment] = {
    "JE": IT2Judgment(Trapezoid(1, 1, 1, 1), _lmf(1, 1, 1, 1)),
    "WI": IT2Judgment(Trapezoid(1, 2, 3, 4), _lmf(1.4, 2.4, 2.6, 3.6)),
    "BWSI": IT2Judgment(Trapezoid(2, 3, 4, 5), _lmf(2.4, 3.4, 3.6, 4.6)),
    "SI": IT2Judgment(Trapezoid(3, 4, 5, 6), _lmf(3.4, 4.4, 4.6, 5.6)),
    "BSVI": IT2Judgment(Trapezoid(4, 5, 6, 7), _lmf(4.4, 5.4, 5.6, 6.6)),
    "VSI": IT2Judgment(Trapezoid(5, 6, 7, 8), _lmf(5.4, 6.4, 6.6, 7.6)),
    "BVAI": IT2Judgment(Trapezoid(6, 7, 8, 9), _lmf(6.4, 7.4, 7.6, 8.6)),
    "AI": IT2Judgment(Trapezoid(7, 8, 9, 9), _lmf(7.4, 8.4, 8.6, 9)),
}


def judgment(label: str) -> IT2Judgment:
    label = label.strip()
    if label.startswith("1/"):
        return reciprocal(judgment(label[2:]))
    try:
        return SCALE[label.upper()]
    except KeyError:
        raise MatrixFormatError(f"unknown linguistic judgment {label!r}") from None


class ComparisonMatrix:
    """Reciprocal IT2 pairwise matrix, built from its upper triangle."""

    def __init__(self, names: Sequence[str], upper: Mapping[tuple[int, int], IT2Judgment],
                 diagonal: IT2Judgment = SCALE["JE"]):
        self.names = tuple(names)
        n = self.n = len(self.names)
        if n < 1:
            raise ValueError("comparison matrix needs at least one criterion")
        if not diagonal.is_identity():
            raise ValueError("diagonal judgment must be the identity (all ones)")
        cells = [[diagonal] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                try:
                    cells[i][j] = upper[(i, j)]
                except KeyError:
                    raise ValueError(f"missing judgment for ({self.names[i]}, {self.names[j]})") from None
                cells[j][i] = reciprocal(cells[i][j])
        self.cells = tuple(tuple(row) for row in cells)
        self.lower_mismatches: list[tuple[str, str, str, str]] = []

    def __getitem__(self, ij):
        i, j = ij
        return self.cells[i][j]

    @classmethod
    def from_crisp(cls, values) -> "ComparisonMatrix":
        a = np.asarray(values, dtype=float)
        names = [f"c{i}" for i in range(a.shape[0])]
        upper = {(i, j): IT2Judgment.crisp(a[i, j])
                 for i in range(len(names)) for j in range(i + 1, len(names))}
        return cls(names, upper, IT2Judgment.crisp(1.0))

    def crisp(self) -> np.ndarray:
        """DTraT of every cell; the diagonal is held at exactly 1."""
        c = np.array([[dtrat(cell) for cell in row] for row in self.cells])
        np.fill_diagonal(c, 1.0)
        return c


def parse_matrix(text: str) -> ComparisonMatrix:
    """Parse a whitespace table of labels: header row of names, then one row each.

    Only the upper triangle is used. Diagonal cells must be ``JE``. Lower
    cells (``-``/``.`` to leave blank) are parsed but ignored; any that are not
    the reciprocal of their mirror are listed in ``matrix.lower_mismatches``.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise MatrixFormatError("empty matrix file")
    names = rows[0][1]
    body = rows[1:]
    n = len(names)
    if len(body) != n:
        raise MatrixFormatError(f"expected {n} rows after the header, got {len(body)}")
    labels = []
    for i, (lineno, cols) in enumerate(body):
        if len(cols) != n + 1 or cols[0] != names[i]:
            raise MatrixFormatError(f"line {lineno}: expected '{names[i]}' followed by {n} labels")
        labels.append(cols[1:])
    upper = {}
    mismatches = []
    for i in range(n):
        if labels[i][i].upper() != "JE":
            raise MatrixFormatError(f"diagonal cell ({names[i]}, {names[i]}) must be JE")
        for j in range(i + 1, n):
            upper[(i, j)] = judgment(labels[i][j])
            low = labels[j][i]
            if low in ("-", "."):
                continue
            if reciprocal(upper[(i, j)]) != judgment(low):
                mismatches.append((names[j], names[i], low, labels[i][j]))
    m = ComparisonMatrix(names, upper)
    m.lower_mismatches = mismatches
    return m


def default_matrix_text() -> str:
    return resources.files("it2aqi.data").joinpath("pairwise.txt").read_text("utf-8")


def default_matrix() -> ComparisonMatrix:
    return parse_matrix(default_matrix_text())


def principal_eigenvalue(a: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000) -> tuple[float, np.ndarray]:
    """Power iteration on a positive matrix; returns (lambda_max, eigenvector summing to 1)."""
    n = a.shape[0]
    v = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        w = a @ v
        lam = w.sum()  # v sums to 1
        w = w / lam
        if np.max(np.abs(w - v)) < tol:
            return float(lam), w
        v = w
    raise ArithmeticError(f"power iteration did not converge in {max_iter} iterations")


@dataclass(frozen=True)
class Consistency:
    lambda_max: float
    ci: float
    cr: float


def consistency(m: ComparisonMatrix) -> Consistency:
    n = m.n
    if n > 10:
        raise ValueError(f"no random index for matrices of order {n} (max 10)")
    lam, _ = principal_eigenvalue(m.crisp())
    ci = (lam - n) / (n - 1) if n > 2 else 0.0
    ri = RANDOM_INDEX[n]
    cr = ci / ri if ri > 0 else 0.0
    return Consistency(lam, ci, cr)


def _geo(ts: Sequence[Trapezoid]) -> Trapezoid:
    arr = np.array([[t.a, t.b, t.c, t.d] for t in ts])
    if np.any(arr <= 0):
        raise ValueError("geometric mean needs strictly positive components")
    g = np.exp(np.log(arr).mean(axis=0))
    return Trapezoid(*g, min(t.h for t in ts))


def fuzzy_geometric_mean(row: Sequence[IT2Judgment]) -> IT2Judgment:
    if not row:
        raise ValueError("empty row")
    return IT2Judgment(_geo([j.umf for j in row]), _geo([j.lmf for j in row]))


def _sum(ts: Sequence[Trapezoid]) -> Trapezoid:
    return Trapezoid(
        sum(t.a for t in ts), sum(t.b for t in ts), sum(t.c for t in ts), sum(t.d for t in ts),
        min(t.h for t in ts),
    )


def _mul(x: Trapezoid, y: Trapezoid) -> Trapezoid:
    return Trapezoid(x.a * y.a, x.b * y.b, x.c * y.c, x.d * y.d, min(x.h, y.h))


@dataclass(frozen=True)
class WeightVector:
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")
        if any(not (v > 0) for v in self.values):
            raise ValueError("weights must be positive")
        if abs(math.fsum(self.values) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {math.fsum(self.values)}")

    def __getitem__(self, name: str) -> float:
        return self.values[self.names.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))

    def ranking(self) -> list[str]:
        return [n for _, n in sorted(zip(self.values, self.names), key=lambda t: -t[0])]

    @classmethod
    def from_mapping(cls, weights: Mapping[str, float]) -> "WeightVector":
        names = tuple(weights)
        raw = np.array([float(weights[n]) for n in names])
        if np.any(raw <= 0):
            raise ValueError("weights must be positive")
        return cls(names, tuple(raw / raw.sum()))


@dataclass(frozen=True)
class FAHPResult:
    weights: WeightVector
    fuzzy_weights: tuple[IT2Judgment, ...]
    consistency: Consistency


def analyse(m: ComparisonMatrix, cr_threshold: float = DEFAULT_CR_THRESHOLD) -> FAHPResult:
    cons = consistency(m)
    if cons.cr > cr_threshold:
        raise ConsistencyError(cons.cr, cr_threshold)
    g = [fuzzy_geometric_mean(row) for row in m.cells]
    total_u = _sum([x.umf for x in g])
    total_l = _sum([x.lmf for x in g])
    inv_u, inv_l = _flip(total_u), _flip(total_l)
    fuzzy = tuple(IT2Judgment(_mul(x.umf, inv_u), _mul(x.lmf, inv_l)) for x in g)
    crisp = np.array([dtrat(w) for w in fuzzy])
    if not np.all(crisp > 0):
        raise ArithmeticError("degenerate fuzzy weights")
    norm = crisp / crisp.sum()
    return FAHPResult(WeightVector(m.names, tuple(float(v) for v in norm)), fuzzy, cons)


def compute_weights(m: ComparisonMatrix, cr_threshold: float = DEFAULT_CR_THRESHOLD) -> WeightVector:
    return analyse(m, cr_threshold).weights


def default_weights() -> WeightVector:
    return compute_weights(default_matrix())


def pollutant_weights(w: WeightVector) -> dict[str, float]:
    """Weights keyed by pollutant; every pollutant must be present."""
    d = w.as_dict()
    missing = [p for p in POLLUTANTS if p not in d]
    if missing:
        raise ValueError(f"weight vector lacks pollutants {missing}")
    return {p: d[p] for p in POLLUTANTS}
