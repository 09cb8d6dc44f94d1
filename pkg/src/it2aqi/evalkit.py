"""Classification and error metrics, and ontology quality scores.

Metrics are computed with exact fractions; a zero denominator yields
``None`` (reported as "undefined") rather than a made-up 0 or 1.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .it2core import SEVERITY, TERMS, term_name

DEFAULT_HEALTHY = frozenset({"Good", "Satisfactory"})


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary outcome counts; the positive class is unhealthy air."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_labels(cls, actual: Sequence[str], predicted: Sequence[str],
                    healthy: Iterable[str] = DEFAULT_HEALTHY) -> "ConfusionCounts":
        if len(actual) != len(predicted):
            raise ValueError(f"length mismatch: {len(actual)} actual vs {len(predicted)} predicted")
        healthy = _healthy_set(healthy)
        tp = fp = tn = fn = 0
        for a, p in zip(actual, predicted):
            a_bad = term_name(a) not in healthy
            p_bad = term_name(p) not in healthy
            if a_bad and p_bad:
                tp += 1
            elif p_bad:
                fp += 1
            elif a_bad:
                fn += 1
            else:
                tn += 1
        return cls(tp, fp, tn, fn)


def _healthy_set(healthy: Iterable[str]) -> frozenset[str]:
    out, unknown = set(), []
    for h in healthy:
        try:
            out.add(term_name(h))
        except KeyError:
            unknown.append(h)
    if unknown:
        raise ValueError(f"unknown categories in healthy set: {sorted(unknown)}")
    return frozenset(out)


def healthy_boundary(last_healthy: str) -> frozenset[str]:
    """Every category up to and including ``last_healthy``."""
    rank = SEVERITY[term_name(last_healthy)]
    return frozenset(t for t in TERMS if SEVERITY[t] <= rank)


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


@dataclass(frozen=True)
class ClassificationMetrics:
    precision: Fraction | None
    accuracy: Fraction | None
    recall: Fraction | None
    f1: Fraction | None

    def rounded(self, digits: int = 4) -> dict[str, float | str]:
        return {k: ("undefined" if v is None else round(float(v), digits)) for k, v in self.__dict__.items()}


def classification_metrics(c: ConfusionCounts) -> ClassificationMetrics:
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    accuracy = _ratio(c.tp + c.tn, c.total)
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = Fraction(0)
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassificationMetrics(precision, accuracy, recall, f1)


def encode(labels: Iterable[str]) -> list[int]:
    """Category labels as ordinal codes 0 (Good) .. 5 (Severe)."""
    return [SEVERITY[term_name(x)] for x in labels]


@dataclass(frozen=True)
class ErrorMetrics:
    mae: float
    rmse: float


def error_metrics(actual: Sequence[int], predicted: Sequence[int]) -> ErrorMetrics:
    """MAE and RMSE on ordinal category codes."""
    if len(actual) != len(predicted):
        raise ValueError(f"length mismatch: {len(actual)} actual vs {len(predicted)} predicted")
    if not actual:
        raise ValueError("error metrics need at least one observation")
    for code in (*actual, *predicted):
        if not 0 <= code < len(TERMS):
            raise ValueError(f"category code out of range: {code!r}")
    n = len(actual)
    abs_sum = sum(abs(a - p) for a, p in zip(actual, predicted))
    sq_sum = sum((a - p) ** 2 for a, p in zip(actual, predicted))
    return ErrorMetrics(abs_sum / n, math.sqrt(sq_sum / n))


def category_accuracy(actual: Sequence[str], predicted: Sequence[str]) -> float:
    if len(actual) != len(predicted) or not actual:
        raise ValueError("need two non-empty series of equal length")
    return sum(term_name(a) == term_name(p) for a, p in zip(actual, predicted)) / len(actual)


# --- ontology scores ---------------------------------------------------------


def score_om(classes: int, subclass: int, relations: int, properties: int) -> float:
    """Ontology model score from class, subclass-axiom, relation and property counts."""
    den = (subclass + relations) * classes
    if den == 0:
        raise ZeroDivisionError("score_om needs classes >= 1 and subclass + relations >= 1")
    return (relations * classes * 100 + (subclass + relations) * properties) / den


def score_kb(classes: int, individuals: int) -> float:
    """Knowledge-base score from class and individual counts."""
    if classes == 0:
        raise ZeroDivisionError("score_kb needs classes >= 1")
    return (classes * 100 + individuals) / classes


def ontology_scores(classes: int, subclass: int, relations: int, properties: int,
                    individuals: int) -> tuple[float, float]:
    """(score_om, score_kb), rounded to two decimals."""
    return (round(score_om(classes, subclass, relations, properties), 2),
            round(score_kb(classes, individuals), 2))


# --- reports -----------------------------------------------------------------


@dataclass
class Report:
    n: int
    healthy: tuple[str, ...]
    confusion: ConfusionCounts
    metrics: ClassificationMetrics
    errors: ErrorMetrics
    category_accuracy: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "healthy": list(self.healthy),
            "confusion": dict(self.confusion.__dict__),
            "metrics": self.metrics.rounded(4),
            "category_accuracy": round(self.category_accuracy, 4),
            "mae": round(self.errors.mae, 4),
            "rmse": round(self.errors.rmse, 4),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        m = self.metrics.rounded(4)
        c = self.confusion
        return "\n".join([
            f"samples:           {self.n}",
            f"healthy:           {', '.join(self.healthy)}",
            f"confusion:         tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn}",
            f"precision:         {m['precision']}",
            f"recall:            {m['recall']}",
            f"accuracy:          {m['accuracy']}",
            f"f1:                {m['f1']}",
            f"category accuracy: {self.category_accuracy:.4f}",
            f"MAE:               {self.errors.mae:.4f}",
            f"RMSE:              {self.errors.rmse:.4f}",
        ]) + "\n"


def evaluate(actual: Sequence[str], predicted: Sequence[str],
             healthy: Iterable[str] = DEFAULT_HEALTHY) -> Report:
    healthy = _healthy_set(healthy)
    conf = ConfusionCounts.from_labels(actual, predicted, healthy)
    return Report(
        n=len(actual),
        healthy=tuple(t for t in TERMS if t in healthy),
        confusion=conf,
        metrics=classification_metrics(conf),
        errors=error_metrics(encode(actual), encode(predicted)),
        category_accuracy=category_accuracy(actual, predicted),
    )


@dataclass
class SampledSummary:
    sample_size: int
    repeats: int
    seed: int
    mean_accuracy: float
    mean_mae: float
    mean_rmse: float
    reports: list[Report]

    def to_dict(self) -> dict:
        return {
            "sample_size": self.sample_size,
            "repeats": self.repeats,
            "seed": self.seed,
            "mean_category_accuracy": round(self.mean_accuracy, 4),
            "mean_mae": round(self.mean_mae, 4),
            "mean_rmse": round(self.mean_rmse, 4),
        }


def sampled_evaluation(actual: Sequence[str], predicted: Sequence[str], sample_size: int,
                       repeats: int, seed: int, healthy: Iterable[str] = DEFAULT_HEALTHY) -> SampledSummary:
    """Evaluate ``repeats`` random subsets of ``sample_size`` rows drawn with one seeded RNG."""
    if len(actual) != len(predicted):
        raise ValueError("length mismatch")
    if not 1 <= sample_size <= len(actual):
        raise ValueError(f"sample size must be in [1, {len(actual)}], got {sample_size}")
    rng = random.Random(seed)
    reports = []
    for _ in range(repeats):
        idx = sorted(rng.sample(range(len(actual)), sample_size))
        reports.append(evaluate([actual[i] for i in idx], [predicted[i] for i in idx], healthy))
    k = len(reports)
    return SampledSummary(
        sample_size, repeats, seed,
        sum(r.category_accuracy for r in reports) / k,
        sum(r.errors.mae for r in reports) / k,
        sum(r.errors.rmse for r in reports) / k,
        reports,
    )


__all__ = [
    "ClassificationMetrics",
    "ConfusionCounts",
    "DEFAULT_HEALTHY",
    "ErrorMetrics",
    "Report",
    "SampledSummary",
    "category_accuracy",
    "classification_metrics",
    "encode",
    "error_metrics",
    "evaluate",
    "healthy_boundary",
    "ontology_scores",
    "sampled_evaluation",
    "score_kb",
    "score_om",
]
