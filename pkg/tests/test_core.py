import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yieldsim.core import (
    DAYS_PER_YEAR,
    Amount,
    Clock,
    ClockExhausted,
    Rate,
    UnitMismatchError,
    accrue,
    daily_factor,
)


class TestRate:
    def test_annual_value(self):
        assert Rate(0.03).annual == 0.03

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Rate(-0.01)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Rate(float("inf"))
        with pytest.raises(ValueError):
            Rate(float("nan"))


class TestAmount:
    def test_add_same_unit(self):
        total = Amount(1.5, "DAI") + Amount(0.5, "DAI")
        assert total.value == 2.0
        assert total.unit == "DAI"

    def test_sub_same_unit(self):
        assert (Amount(2.0, "DAI") - Amount(0.5, "DAI")).value == 1.5

    def test_unit_mismatch(self):
        with pytest.raises(UnitMismatchError):
            Amount(1.0, "DAI") + Amount(1.0, "ETH")
        with pytest.raises(UnitMismatchError):
            Amount(1.0, "DAI") - Amount(1.0, "GOV")

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Amount(-0.1, "DAI")

    def test_sub_below_zero_rejected(self):
        with pytest.raises(ValueError):
            Amount(1.0, "DAI") - Amount(2.0, "DAI")

    def test_scalar_multiplication(self):
        assert (Amount(2.0, "ETH") * 3.0).value == 6.0
        assert (0.5 * Amount(2.0, "ETH")).value == 1.0

    @given(
        a=st.floats(min_value=0.0, max_value=1e9),
        b=st.floats(min_value=0.0, max_value=1e9),
    )
    def test_addition_commutes(self, a, b):
        left = Amount(a, "DAI") + Amount(b, "DAI")
        right = Amount(b, "DAI") + Amount(a, "DAI")
        assert left.value == right.value


class TestDailyFactor:
    def test_zero_rate_is_exactly_one(self):
        assert daily_factor(Rate(0.0)) == 1.0

    def test_ten_percent(self):
        # high-precision reference: (1.10)^(1/365)
        assert math.isclose(
            daily_factor(Rate(0.10)), 1.0002611578760678, rel_tol=1e-12
        )

    def test_hundred_percent(self):
        # high-precision reference: 2^(1/365)
        assert math.isclose(
            daily_factor(Rate(1.00)), 1.0019008376772348, rel_tol=1e-12
        )

    def test_accepts_plain_float(self):
        assert daily_factor(0.10) == daily_factor(Rate(0.10))

    def test_full_year_reproduces_apy(self):
        assert math.isclose(daily_factor(Rate(0.03)) ** DAYS_PER_YEAR, 1.03, rel_tol=1e-12)

    @given(
        low=st.floats(min_value=0.0, max_value=10.0),
        high=st.floats(min_value=0.0, max_value=10.0),
    )
    def test_monotone_in_rate(self, low, high):
        if low > high:
            low, high = high, low
        assert daily_factor(Rate(low)) <= daily_factor(Rate(high))


class TestAccrue:
    def test_one_year_at_three_percent(self):
        grown = accrue(Amount(1.0, "DAI"), Rate(0.03), DAYS_PER_YEAR)
        assert math.isclose(grown.value, 1.03, rel_tol=1e-12)

    def test_two_years_at_ten_percent(self):
        grown = accrue(Amount(1.0, "DAI"), Rate(0.10), 730)
        assert math.isclose(grown.value, 1.21, rel_tol=1e-12)

    def test_zero_days_identity(self):
        start = Amount(123.456, "DAI")
        assert accrue(start, Rate(0.10), 0).value == start.value

    def test_preserves_unit(self):
        assert accrue(Amount(1.0, "ETH"), Rate(0.05), 7).unit == "ETH"

    def test_rejects_negative_days(self):
        with pytest.raises(ValueError):
            accrue(Amount(1.0, "DAI"), Rate(0.03), -1)

    @given(
        value=st.floats(min_value=1e-6, max_value=1e9),
        rate=st.floats(min_value=0.0, max_value=2.0),
        first=st.integers(min_value=0, max_value=400),
        second=st.integers(min_value=0, max_value=400),
    )
    def test_accrual_composes(self, value, rate, first, second):
        # growing d1 then d2 days equals growing d1 + d2 days in one step
        split = accrue(accrue(Amount(value, "DAI"), Rate(rate), first), Rate(rate), second)
        joined = accrue(Amount(value, "DAI"), Rate(rate), first + second)
        assert math.isclose(split.value, joined.value, rel_tol=1e-12)


class TestClock:
    def test_advances_by_one_day(self):
        clock = Clock(day=0, horizon_days=10)
        clock.advance()
        assert clock.day == 1

    def test_exhausts_at_horizon(self):
        clock = Clock(day=0, horizon_days=2)
        clock.advance()
        clock.advance()
        with pytest.raises(ClockExhausted):
            clock.advance()

    def test_rejects_bad_horizon(self):
        with pytest.raises(ValueError):
            Clock(day=0, horizon_days=0)

    def test_rejects_day_past_horizon(self):
        with pytest.raises(ValueError):
            Clock(day=5, horizon_days=4)
