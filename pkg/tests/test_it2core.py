import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from it2aqi.it2core import (
    POLLUTANTS,
    TERMS,
    VARIABLES,
    IT2TrapezoidSet,
    ParameterError,
    Trapezoid,
    default_table_text,
    eval_trapezoid,
    load_parameter_table,
    membership_interval,
    term_name,
)


def oracle_trapezoid(a, b, c, d, h, x):
    # Independent piecewise form: min of rising edge, plateau, falling edge.
    if x < a or x > d:
        return 0.0
    rise = 1.0 if b == a else (x - a) / (b - a)
    fall = 1.0 if d == c else (d - x) / (d - c)
    return h * max(0.0, min(rise, 1.0, fall))


class TestTrapezoid:
    def test_rejects_unordered(self):
        with pytest.raises(ParameterError):
            Trapezoid(1, 0, 2, 3)

    def test_rejects_bad_height(self):
        with pytest.raises(ParameterError):
            Trapezoid(0, 1, 2, 3, 1.5)
        with pytest.raises(ParameterError):
            Trapezoid(0, 1, 2, 3, 0.0)

    def test_rejects_nan(self):
        with pytest.raises(ParameterError):
            Trapezoid(0, 1, float("nan"), 3)

    def test_plateau_and_edges(self):
        t = Trapezoid(0, 10, 20, 30)
        assert t(15) == 1.0
        assert t(5) == 0.5
        assert t(25) == 0.5
        assert t(-1) == 0.0 and t(31) == 0.0

    def test_shoulder_keeps_height_past_d(self):
        t = Trapezoid(390, 470, 500, 500)
        assert eval_trapezoid(t, 1000) == 0.0
        assert eval_trapezoid(t, 1000, right_shoulder=True) == 1.0

    def test_nonfinite_input(self):
        with pytest.raises(ValueError):
            Trapezoid(0, 1, 2, 3)(math.inf)

    @given(
        st.lists(st.floats(0, 1000), min_size=4, max_size=4),
        st.floats(0.05, 1.0),
        st.floats(-50, 1100),
    )
    def test_matches_oracle(self, pts, h, x):
        a, b, c, d = sorted(pts)
        got = Trapezoid(a, b, c, d, h)(x)
        assert got == pytest.approx(oracle_trapezoid(a, b, c, d, h, x), abs=1e-12)


class TestIT2Set:
    def test_lmf_above_umf_rejected(self):
        with pytest.raises(ParameterError):
            IT2TrapezoidSet("Good", Trapezoid(0, 0, 15, 30), Trapezoid(0, 0, 20, 35, 0.8))

    def test_umf_height_must_be_one(self):
        with pytest.raises(ParameterError):
            IT2TrapezoidSet("Good", Trapezoid(0, 0, 15, 30, 0.9), Trapezoid(0, 0, 12, 27, 0.8))

    def test_interval_ordering(self, table):
        s = table[("PM2.5", "Good")]
        for x in np.linspace(0, 40, 81):
            lo, hi = membership_interval(s, x)
            assert 0.0 <= lo <= hi <= 1.0


class TestDefaultTable:
    def test_all_cells_present(self, table):
        assert len(table) == len(VARIABLES) * len(TERMS)
        for v in VARIABLES:
            assert table.terms(v) == list(TERMS)

    def test_spot_values(self, table):
        good = table[("PM2.5", "Good")]
        lo, hi = membership_interval(good, 22.5)
        assert lo == pytest.approx(0.24, abs=1e-12)
        assert hi == pytest.approx(0.5, abs=1e-12)
        lo, hi = membership_interval(good, 10)
        assert (lo, hi) == (pytest.approx(0.8, abs=1e-12), pytest.approx(1.0, abs=1e-12))

    def test_far_outside_is_zero_without_shoulder(self, table):
        top = table[("PM2.5", "Severe")]
        assert tuple(membership_interval(top, 1000)) == (0.0, 0.0)

    @pytest.mark.parametrize("variable", VARIABLES)
    def test_fou_containment(self, table, variable):
        for s in table.sets(variable):
            xs = np.linspace(max(0.0, s.umf.a - 1), s.umf.d + 1, 2001)
            for x in xs:
                lo, hi = s.interval(x)
                assert lo <= hi + 1e-15

    def test_round_trip(self, table):
        again = load_parameter_table(table.to_toml())
        assert again == table
        assert again.to_toml() == table.to_toml()

    def test_default_text_parses(self, table):
        assert load_parameter_table(default_table_text()) == table


class TestTableErrors:
    def test_error_names_cell(self):
        text = default_table_text().replace("lmf = [0.0, 0.0, 12.0, 27.0, 0.8]", "lmf = [0.0, 0.0, 40.0, 50.0, 0.8]", 1)
        with pytest.raises(ParameterError, match="PM2.5.*Good|Good.*PM2.5"):
            load_parameter_table(text)

    def test_missing_key(self):
        with pytest.raises(ParameterError):
            load_parameter_table('["PM2.5".Good]\numf = [0, 0, 15, 30, 1.0]\n')

    def test_garbage(self):
        with pytest.raises(ParameterError):
            load_parameter_table("this is = = not toml")


class TestTermNames:
    @pytest.mark.parametrize("raw,expected", [("Very Poor", "VeryPoor"), ("good", "Good"), ("SEVERE", "Severe")])
    def test_normalises(self, raw, expected):
        assert term_name(raw) == expected

    def test_unknown(self):
        with pytest.raises(KeyError):
            term_name("Hazardous")


def test_pollutant_order_is_fixed():
    assert POLLUTANTS == ("PM2.5", "PM10", "NO2", "SO2", "O3", "CO", "NH3")
