import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from it2aqi.evalkit import (
    DEFAULT_HEALTHY,
    ConfusionCounts,
    category_accuracy,
    classification_metrics,
    encode,
    error_metrics,
    evaluate,
    healthy_boundary,
    ontology_scores,
    sampled_evaluation,
    score_kb,
    score_om,
)
from it2aqi.it2core import TERMS

labels = st.sampled_from(TERMS)


class TestConfusion:
    def test_worked_example(self):
        m = classification_metrics(ConfusionCounts(tp=3, fp=1, tn=4, fn=2))
        assert m.precision == Fraction(3, 4)
        assert m.recall == Fraction(3, 5)
        assert m.accuracy == Fraction(7, 10)
        assert float(m.f1) == pytest.approx(2 / 3)

    def test_perfect(self):
        actual = ["Good", "Severe", "Poor", "Satisfactory"]
        m = classification_metrics(ConfusionCounts.from_labels(actual, actual))
        assert (m.precision, m.recall, m.accuracy, m.f1) == (1, 1, 1, 1)

    def test_zero_denominators(self):
        m = classification_metrics(ConfusionCounts(0, 0, 5, 0))
        r = m.rounded()
        assert r["precision"] == r["recall"] == r["f1"] == "undefined"
        assert r["accuracy"] == 1.0

    def test_both_zero_gives_zero_f1(self):
        m = classification_metrics(ConfusionCounts(0, 2, 1, 3))
        assert m.precision == 0 and m.recall == 0 and m.f1 == 0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ConfusionCounts(-1, 0, 0, 0)

    def test_brute_force_counts(self):
        rng = random.Random(11)
        for _ in range(1000):
            n = rng.randint(1, 30)
            a = [rng.choice(TERMS) for _ in range(n)]
            p = [rng.choice(TERMS) for _ in range(n)]
            c = ConfusionCounts.from_labels(a, p)
            bad = [x not in ("Good", "Satisfactory") for x in a]
            pbad = [x not in ("Good", "Satisfactory") for x in p]
            assert c.tp == sum(x and y for x, y in zip(bad, pbad))
            assert c.fp == sum(not x and y for x, y in zip(bad, pbad))
            assert c.fn == sum(x and not y for x, y in zip(bad, pbad))
            assert c.total == n

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            ConfusionCounts.from_labels(["Good"], [])

    def test_healthy_threshold_changes_counts(self):
        a, p = ["Moderate", "Good"], ["Moderate", "Moderate"]
        strict = ConfusionCounts.from_labels(a, p)
        loose = ConfusionCounts.from_labels(a, p, healthy_boundary("Moderate"))
        assert (strict.tp, strict.fp) == (1, 1)
        assert (loose.tp, loose.fp, loose.tn) == (0, 0, 2)

    def test_boundary(self):
        assert healthy_boundary("Satisfactory") == DEFAULT_HEALTHY
        with pytest.raises(KeyError):
            healthy_boundary("Bad")

    def test_unknown_healthy(self):
        with pytest.raises(ValueError, match="unknown"):
            ConfusionCounts.from_labels(["Good"], ["Good"], {"Fine"})


class TestIdentities:
    @given(st.lists(st.tuples(labels, labels), min_size=1, max_size=40))
    @settings(max_examples=200, deadline=None)
    def test_metric_bounds(self, pairs):
        a, p = [x for x, _ in pairs], [y for _, y in pairs]
        m = classification_metrics(ConfusionCounts.from_labels(a, p))
        for v in (m.precision, m.recall, m.accuracy, m.f1):
            assert v is None or 0 <= v <= 1
        if m.f1 is not None:
            assert m.f1 <= min(2 * m.precision, 2 * m.recall)
            assert m.f1 <= max(m.precision, m.recall)
        e = error_metrics(encode(a), encode(p))
        assert e.rmse >= e.mae - 1e-12
        assert e.rmse <= math.sqrt(e.mae * (len(TERMS) - 1)) + 1e-12

    def test_small_example(self):
        e = error_metrics([2, 2], [2, 3])
        assert e.mae == 0.5
        assert e.rmse == pytest.approx(math.sqrt(0.5))

    def test_code_range(self):
        with pytest.raises(ValueError, match="range"):
            error_metrics([0], [6])

    def test_empty(self):
        with pytest.raises(ValueError):
            error_metrics([], [])

    def test_encode(self):
        assert encode(TERMS) == list(range(6))

    def test_category_accuracy(self):
        assert category_accuracy(["Good", "Poor"], ["Good", "Severe"]) == 0.5


class TestOntologyScores:
    def test_knowledge_base_score(self):
        assert round(score_kb(254, 247), 2) == 100.97
        assert score_kb(1, 0) == 100

    def test_model_score(self):
        # (78*254*100 + 325*38) / (325*254)
        assert score_om(254, 247, 78, 38) == pytest.approx((78 * 254 * 100 + 325 * 38) / (325 * 254))
        assert ontology_scores(254, 247, 78, 38, 247) == (24.15, 100.97)

    def test_zero_denominators(self):
        with pytest.raises(ZeroDivisionError):
            score_kb(0, 5)
        with pytest.raises(ZeroDivisionError):
            score_om(0, 1, 1, 1)
        with pytest.raises(ZeroDivisionError):
            score_om(3, 0, 0, 1)


class TestReports:
    @pytest.fixture
    def series(self):
        rng = random.Random(5)
        a = [rng.choice(TERMS) for _ in range(200)]
        p = [x if rng.random() < 0.7 else rng.choice(TERMS) for x in a]
        return a, p

    def test_evaluate_fields(self, series):
        r = evaluate(*series)
        d = r.to_dict()
        assert d["n"] == 200
        assert d["healthy"] == ["Good", "Satisfactory"]
        assert sum(d["confusion"].values()) == 200
        assert "RMSE" in r.to_text()

    def test_sampled_deterministic(self, series):
        one = sampled_evaluation(*series, sample_size=58, repeats=20, seed=7)
        two = sampled_evaluation(*series, sample_size=58, repeats=20, seed=7)
        assert one.to_dict() == two.to_dict()
        assert len(one.reports) == 20 and all(r.n == 58 for r in one.reports)
        other = sampled_evaluation(*series, sample_size=58, repeats=20, seed=8)
        assert other.to_dict() != one.to_dict()

    def test_sample_size_bounds(self, series):
        with pytest.raises(ValueError):
            sampled_evaluation(*series, sample_size=201, repeats=1, seed=0)
