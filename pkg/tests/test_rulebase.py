import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from it2aqi.it2core import POLLUTANTS, SEVERITY, TERMS, eval_trapezoid
from it2aqi.rulebase import (
    FuzzyRule,
    RuleBase,
    RuleSyntaxError,
    generate_rules,
    most_severe,
    parse_rule,
    parse_rules,
    retained_terms,
)

ALL_GOOD = " and ".join(f"{p} is Good" for p in POLLUTANTS)


def rule_text(consequent="Good", **over):
    atoms = {p: "Good" for p in POLLUTANTS}
    atoms.update({k.replace("PM25", "PM2.5"): v for k, v in over.items()})
    return "IF " + " and ".join(f"{p} is {t}" for p, t in atoms.items()) + f" THEN AQI is {consequent}"


def positive_somewhere(umf, lo, hi):
    # A trapezoid's maximum over [lo, hi] sits at an end or a clipped plateau corner.
    probes = {lo, hi, min(max(umf.b, lo), hi), min(max(umf.c, lo), hi)}
    return any(eval_trapezoid(umf, x) > 0 for x in probes)


class TestParse:
    def test_single_rule(self):
        r = parse_rule(rule_text("Severe", PM10="Severe", PM25="Moderate"))
        assert r.consequent == "Severe"
        assert r.antecedent["PM10"] == "Severe"
        assert r.antecedent["PM2.5"] == "Moderate"
        assert r.drivers() == ["PM10"]

    def test_accepts_spaced_term(self):
        r = parse_rule(rule_text("Very Poor", NO2="Very Poor"))
        assert r.consequent == "VeryPoor"

    def test_atom_order_irrelevant(self):
        atoms = [f"{p} is Good" for p in reversed(POLLUTANTS)]
        r = parse_rule("IF " + " and ".join(atoms) + " THEN AQI is Good")
        assert list(r.antecedent) == list(POLLUTANTS)

    def test_missing_then(self):
        with pytest.raises(RuleSyntaxError) as info:
            parse_rules("# header\n" + ALL_GOOD + "\n")
        assert info.value.line == 2

    def test_unknown_pollutant_column(self):
        line = rule_text().replace("NH3 is Good", "XY9 is Good")
        with pytest.raises(RuleSyntaxError) as info:
            parse_rule(line, 4)
        assert info.value.line == 4
        assert info.value.column == line.index("XY9") + 1

    def test_missing_pollutant(self):
        line = rule_text().replace(" and NH3 is Good", "")
        with pytest.raises(RuleSyntaxError, match="NH3"):
            parse_rule(line)

    def test_repeated_pollutant(self):
        line = rule_text().replace("NH3 is Good", "CO is Poor")
        with pytest.raises(RuleSyntaxError, match="repeated"):
            parse_rule(line)

    def test_unknown_term(self):
        with pytest.raises(RuleSyntaxError):
            parse_rule(rule_text().replace("CO is Good", "CO is Awful"))

    def test_duplicate_antecedent(self):
        text = rule_text("Good") + "\n" + rule_text("Poor") + "\n"
        with pytest.raises(RuleSyntaxError, match="duplicate") as info:
            parse_rules(text)
        assert info.value.line == 2

    def test_empty_file(self):
        with pytest.raises(RuleSyntaxError):
            parse_rules("# only a comment\n")

    def test_round_trip_with_provenance(self):
        rb = RuleBase((parse_rule(rule_text()), parse_rule(rule_text("Poor", SO2="Poor"))), "expert")
        again = parse_rules(rb.to_dsl())
        assert again.provenance == "expert"
        assert list(again) == list(rb)


class TestRuleTypes:
    def test_weight_bounds(self):
        with pytest.raises(ValueError):
            FuzzyRule({p: "Good" for p in POLLUTANTS}, "Good", weight=0.0)

    def test_missing_pollutant(self):
        with pytest.raises(ValueError):
            FuzzyRule({"PM10": "Good"}, "Good")

    def test_empty_base(self):
        with pytest.raises(ValueError):
            RuleBase(())

    def test_most_severe(self):
        assert most_severe(["Good", "Poor", "Moderate"]) == "Poor"


class TestRetention:
    def test_whole_range_keeps_all(self, table):
        for p in POLLUTANTS:
            top = table[(p, table.top_term(p))].umf.d
            assert retained_terms(0.0, top, table, p) == list(TERMS)

    def test_narrow_range(self, table):
        assert retained_terms(0.0, 10.0, table, "PM2.5") == ["Good"]

    def test_saturation_keeps_top_term(self, table):
        assert retained_terms(900.0, 1000.0, table, "PM2.5") == []
        assert retained_terms(900.0, 1000.0, table, "PM2.5", saturate=True) == ["Severe"]

    @given(st.sampled_from(POLLUTANTS), st.floats(0, 3000), st.floats(0, 3000))
    @settings(max_examples=300, deadline=None)
    def test_matches_oracle(self, table, p, x, y):
        lo, hi = min(x, y), max(x, y)
        expected = [s.term for s in table.sets(p) if positive_somewhere(s.umf, lo, hi)]
        assert retained_terms(lo, hi, table, p) == expected


class TestGenerate:
    def test_size_is_product(self, table):
        ranges = {p: (0.0, 10.0) for p in POLLUTANTS}
        ranges["PM2.5"] = (20.0, 70.0)
        ranges["PM10"] = (0.0, 480.0)
        rb = generate_rules(ranges, table)
        sizes = [len(retained_terms(*ranges[p], table, p)) for p in POLLUTANTS]
        assert len(rb) == math.prod(sizes)
        assert rb.provenance == "generated"

    def test_consequent_is_max_severity(self, table):
        ranges = {p: (0.0, 70.0) for p in POLLUTANTS}
        rb = generate_rules(ranges, table)
        for r in rb:
            assert SEVERITY[r.consequent] == max(SEVERITY[t] for t in r.antecedent.values())

    def test_lexicographic_order(self, table):
        ranges = {p: (0.0, 40.0) for p in POLLUTANTS}
        rb = generate_rules(ranges, table)
        keys = [tuple(SEVERITY[t] for t in r.key()) for r in rb]
        assert keys == sorted(keys)

    def test_full_product_distinct(self, table):
        ranges = {p: (0.0, 40.0) for p in POLLUTANTS}
        rb = generate_rules(ranges, table)
        assert len({r.key() for r in rb}) == len(rb)

    def test_range_outside_support(self, table):
        ranges = {p: (0.0, 10.0) for p in POLLUTANTS}
        ranges["CO"] = (900.0, 1000.0)
        with pytest.raises(ValueError, match="CO"):
            generate_rules(ranges, table)

    def test_reversed_range(self, table):
        ranges = {p: (0.0, 10.0) for p in POLLUTANTS}
        ranges["O3"] = (5.0, 1.0)
        with pytest.raises(ValueError):
            generate_rules(ranges, table)

    def test_small_enumeration_equals_itertools(self, table):
        ranges = {p: (0.0, 10.0) for p in POLLUTANTS}
        ranges["NO2"] = (10.0, 70.0)
        rb = generate_rules(ranges, table)
        expect = list(itertools.product(*[retained_terms(*ranges[p], table, p) for p in POLLUTANTS]))
        assert [r.key() for r in rb] == expect
