import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from it2aqi.it2core import POLLUTANTS, TERMS, Trapezoid, IT2TrapezoidSet
from it2aqi.inference import (
    ConsequentCentroid,
    Engine,
    FiringInterval,
    PollutantVector,
    TypeReducedInterval,
    ZeroFiringError,
    assess,
    categorize,
    consequent_centroid,
    firing_interval,
    fuzzify,
    km_arrays,
    km_type_reduce,
    rule_weight,
    weighted_firing,
)
from it2aqi.rulebase import FuzzyRule, RuleBase, generate_rules


def km_oracle(cl, cr, lo, hi):
    """Try every switch point over the sorted centroids."""
    n = len(cl)
    best_l, best_r = np.inf, -np.inf
    order_l, order_r = np.argsort(cl), np.argsort(cr)
    for k in range(n + 1):
        f = np.array([hi[i] if pos < k else lo[i] for pos, i in enumerate(order_l)])
        c = np.array([cl[i] for i in order_l])
        if f.sum() > 0:
            best_l = min(best_l, float(c @ f / f.sum()))
        f = np.array([lo[i] if pos < k else hi[i] for pos, i in enumerate(order_r)])
        c = np.array([cr[i] for i in order_r])
        if f.sum() > 0:
            best_r = max(best_r, float(c @ f / f.sum()))
    return best_l, best_r


def centroid_oracle(x, lower, upper):
    n = len(x)
    left, right = np.inf, -np.inf
    for k in range(n + 1):
        fl = np.concatenate((upper[:k], lower[k:]))
        fr = np.concatenate((lower[:k], upper[k:]))
        if fl.sum() > 0:
            left = min(left, float(x @ fl / fl.sum()))
        if fr.sum() > 0:
            right = max(right, float(x @ fr / fr.sum()))
    return left, right


def random_system(rng, n):
    cl = rng.uniform(0, 500, n)
    cr = cl + rng.uniform(0, 30, n)
    hi = rng.uniform(0.01, 1, n)
    lo = hi * rng.uniform(0, 1, n)
    return cl, cr, lo, hi


class TestKM:
    def test_random_systems_match_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            cl, cr, lo, hi = random_system(rng, int(rng.integers(2, 13)))
            got = km_arrays(cl, cr, lo, hi)
            ref = km_oracle(cl, cr, lo, hi)
            assert got.aqi_l == pytest.approx(ref[0], abs=1e-9)
            assert got.aqi_r == pytest.approx(ref[1], abs=1e-9)

    def test_single_rule(self):
        got = km_type_reduce([(FiringInterval(0.2, 0.7), ConsequentCentroid(100.0, 130.0))])
        assert (got.aqi_l, got.aqi_r) == (100.0, 130.0)

    def test_crisp_firing_closed_form(self):
        cl = np.array([10.0, 200.0, 350.0])
        cr = cl + 20
        f = np.array([0.3, 0.5, 0.2])
        got = km_arrays(cl, cr, f, f)
        assert got.aqi_l == pytest.approx(cl @ f / f.sum(), abs=1e-12)
        assert got.aqi_r == pytest.approx(cr @ f / f.sum(), abs=1e-12)

    def test_zero_firing(self):
        with pytest.raises(ZeroFiringError):
            km_arrays([1.0], [2.0], [0.0], [0.0])

    def test_ties_converge(self):
        c = np.array([5.0, 5.0, 5.0])
        got = km_arrays(c, c, np.array([0.1, 0.2, 0.3]), np.array([0.5, 0.5, 0.5]))
        assert got.aqi_l == pytest.approx(5.0) and got.aqi_r == pytest.approx(5.0)

    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_bounds(self, n, seed):
        cl, cr, lo, hi = random_system(np.random.default_rng(seed), n)
        got = km_arrays(cl, cr, lo, hi)
        assert cl.min() - 1e-9 <= got.aqi_l <= got.aqi_r <= cr.max() + 1e-9

    def test_reversed_interval_rejected(self):
        with pytest.raises(ValueError):
            TypeReducedInterval(5.0, 4.0)


class TestCentroid:
    def test_matches_switch_oracle(self):
        s = IT2TrapezoidSet("Good", Trapezoid(0, 10, 20, 40), Trapezoid(2, 12, 18, 30, 0.6))
        grid = (0.0, 50.0, 101)
        got = consequent_centroid(s, grid)
        x = np.linspace(*grid)
        upper = np.array([s.umf(v) for v in x])
        lower = np.array([s.lmf(v) for v in x])
        ref = centroid_oracle(x, lower, upper)
        assert got.cl == pytest.approx(ref[0], abs=1e-9)
        assert got.cr == pytest.approx(ref[1], abs=1e-9)

    def test_symmetric_set_symmetric_interval(self, table):
        c = consequent_centroid(table[("AQI", "Moderate")])
        # 200 is not a grid node, so symmetry holds to grid resolution only.
        assert (c.cl + c.cr) / 2 == pytest.approx(200.0, abs=1e-4)
        assert c.cl < 200 < c.cr

    def test_aqi_centroids_increase(self, table):
        cs = [consequent_centroid(table[("AQI", t)]) for t in TERMS]
        mids = [(c.cl + c.cr) / 2 for c in cs]
        assert mids == sorted(mids)


class TestFuzzify:
    def test_literal_far_right_is_zero(self, table):
        x = dict.fromkeys(POLLUTANTS, 1.0)
        x["PM2.5"] = 1000.0
        fz = fuzzify(x, table)
        assert tuple(fz["PM2.5"]["Severe"]) == (0.0, 0.0)
        assert tuple(fuzzify(x, table, saturate=True)["PM2.5"]["Severe"]) == (0.8, 1.0)

    def test_vector_validation(self):
        with pytest.raises(ValueError):
            PollutantVector((1.0,) * 6)
        with pytest.raises(ValueError):
            PollutantVector((-1.0,) + (1.0,) * 6)
        with pytest.raises(ValueError):
            PollutantVector.from_mapping({"PM2.5": 1.0})

    def test_firing_uses_min(self, table):
        x = dict(zip(POLLUTANTS, (22.5, 10, 10, 10, 10, 0.2, 10)))
        rule = FuzzyRule(dict.fromkeys(POLLUTANTS, "Good"), "Good")
        f = firing_interval(rule, fuzzify(x, table))
        assert f.lo == pytest.approx(0.24) and f.hi == pytest.approx(0.5)


class TestWeights:
    W = {"PM2.5": 0.35, "PM10": 0.30, "NO2": 0.05, "SO2": 0.03, "O3": 0.10, "CO": 0.15, "NH3": 0.02}

    def test_driver_policy(self):
        ante = dict.fromkeys(POLLUTANTS, "Good")
        ante["CO"] = "Poor"
        ante["SO2"] = "Poor"
        assert rule_weight(FuzzyRule(ante, "Poor"), self.W) == 0.15

    def test_no_driver_falls_back_to_max(self):
        rule = FuzzyRule(dict.fromkeys(POLLUTANTS, "Good"), "Severe")
        assert rule_weight(rule, self.W) == 0.35

    def test_global_max(self):
        ante = dict.fromkeys(POLLUTANTS, "Good")
        ante["NH3"] = "Poor"
        assert rule_weight(FuzzyRule(ante, "Poor"), self.W, "global-max") == 0.35

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            rule_weight(FuzzyRule(dict.fromkeys(POLLUTANTS, "Good"), "Good"), self.W, "median")

    def test_weighted_firing_scales(self):
        rule = FuzzyRule(dict.fromkeys(POLLUTANTS, "Good"), "Good")
        wf = weighted_firing(rule, FiringInterval(0.5, 1.0), self.W)
        assert (wf.lo, wf.hi) == (pytest.approx(0.175), pytest.approx(0.35))


class TestCategorize:
    def test_boundary_tie_goes_severe(self, table):
        # Good and Satisfactory UMFs cross at 75 with equal membership.
        assert categorize(75.0, table) == "Satisfactory"

    def test_plateau_and_beyond(self, table):
        assert categorize(10.0, table) == "Good"
        assert categorize(200.0, table) == "Moderate"
        assert categorize(5000.0, table) == "Severe"

    def test_rejects_negative(self, table):
        with pytest.raises(ValueError):
            categorize(-1.0, table)


def naive_assess(x, rb, w, table, policy="driver"):
    fz = fuzzify(x, table, saturate=True)
    cents = {t: consequent_centroid(table[("AQI", t)]) for t in TERMS}
    pairs = []
    for rule in rb:
        f = weighted_firing(rule, firing_interval(rule, fz), w, policy)
        if f.hi > 0:
            pairs.append((f, cents[rule.consequent]))
    return km_type_reduce(pairs)


@pytest.fixture(scope="module")
def small(table, weights):
    ranges = {p: (0.0, 60.0) for p in POLLUTANTS}
    ranges["PM10"] = (0.0, 200.0)
    rb = generate_rules(ranges, table, saturate=True)
    return rb, Engine(rb, weights, table)


class TestEngine:
    @given(st.lists(st.floats(0, 60), min_size=7, max_size=7))
    @settings(max_examples=40, deadline=None)
    def test_engine_equals_naive(self, table, weights, small, xs):
        rb, engine = small
        x = dict(zip(POLLUTANTS, xs))
        x["CO"] = min(x["CO"], 10.0)
        try:
            ref = naive_assess(x, rb, weights, table)
        except ZeroFiringError:
            with pytest.raises(ZeroFiringError):
                engine.assess(x)
            return
        got = engine.assess(x).interval
        assert got.aqi_l == pytest.approx(ref.aqi_l, abs=1e-9)
        assert got.aqi_r == pytest.approx(ref.aqi_r, abs=1e-9)

    def test_policies_differ_only_in_weights(self, table, weights, small):
        rb, _ = small
        x = dict(zip(POLLUTANTS, (40, 120, 10, 10, 10, 0.4, 10)))
        a = Engine(rb, weights, table, "driver").assess(x)
        b = Engine(rb, weights, table, "global-max").assess(x)
        assert a.fired_rules == b.fired_rules

    def test_zero_firing_outside_rules(self, table, weights):
        rule = FuzzyRule(dict.fromkeys(POLLUTANTS, "Good"), "Good")
        engine = Engine(RuleBase((rule,)), weights, table)
        x = dict.fromkeys(POLLUTANTS, 0.0)
        x["PM2.5"] = 400.0
        with pytest.raises(ZeroFiringError):
            engine.assess(x)

    def test_severe_pm10_case(self, table, weights):
        x = dict(zip(POLLUTANTS, (60, 480, 10, 5, 12, 0.3, 20)))
        ranges = {p: (v, v) for p, v in x.items()}
        rb = generate_rules(ranges, table, saturate=True)
        interval, category = assess(x, rb, weights, table)
        assert category == "Severe"
        assert interval.aqi_l <= interval.aqi_r

    def test_unknown_policy(self, table, weights, small):
        rb, _ = small
        with pytest.raises(ValueError):
            Engine(rb, weights, table, policy="mean")
