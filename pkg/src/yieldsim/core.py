"""Shared numeric and temporal primitives: rates, amounts, daily compounding, clock.

All rates are annual percentage yields compounded daily over a 365-day year,
so accruing a rate for exactly one year reproduces the stated APY.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DAYS_PER_YEAR = 365

# Multiplicative growth applied per simulated day.
GrowthFactor = float


class UnitMismatchError(ValueError):
    """Arithmetic attempted between amounts of different units."""


class ClockExhausted(RuntimeError):
    """The clock was advanced past its horizon."""


@dataclass(frozen=True)
class Rate:
    """Annual percentage yield, e.g. Rate(0.10) for 10% APY."""

    annual: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.annual):
            raise ValueError(f"rate must be finite, got {self.annual}")
        if self.annual < 0:
            raise ValueError(f"rate must be non-negative, got {self.annual}")


@dataclass(frozen=True)
class Amount:
    """A non-negative quantity of a single token unit (DAI, ETH, GOV, ...)."""

    value: float
    unit: str

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"amount must be finite, got {self.value}")
        if self.value < 0:
            raise ValueError(f"amount must be non-negative, got {self.value} {self.unit}")

    def _check_unit(self, other: "Amount") -> None:
        if not isinstance(other, Amount):
            raise TypeError(f"expected Amount, got {type(other).__name__}")
        if other.unit != self.unit:
            raise UnitMismatchError(f"cannot combine {self.unit} with {other.unit}")

    def __add__(self, other: "Amount") -> "Amount":
        self._check_unit(other)
        return Amount(self.value + other.value, self.unit)

    def __sub__(self, other: "Amount") -> "Amount":
        self._check_unit(other)
        return Amount(self.value - other.value, self.unit)

    def __mul__(self, scalar: float) -> "Amount":
        return Amount(self.value * scalar, self.unit)

    __rmul__ = __mul__


@dataclass
class Clock:
    """Simulation day counter bounded by a fixed horizon."""

    day: int = 0
    horizon_days: int = DAYS_PER_YEAR

    def __post_init__(self) -> None:
        if self.horizon_days <= 0:
            raise ValueError(f"horizon_days must be positive, got {self.horizon_days}")
        if not 0 <= self.day <= self.horizon_days:
            raise ValueError(f"day {self.day} outside [0, {self.horizon_days}]")

    def advance(self) -> int:
        if self.day >= self.horizon_days:
            raise ClockExhausted(f"cannot advance past horizon day {self.horizon_days}")
        self.day += 1
        return self.day


def daily_factor(apy: Rate | float) -> GrowthFactor:
    """Per-day compounding factor (1 + APY)^(1/365)."""
    annual = apy.annual if isinstance(apy, Rate) else Rate(apy).annual
    return (1.0 + annual) ** (1.0 / DAYS_PER_YEAR)


def accrue(amount: Amount, apy: Rate | float, days: int) -> Amount:
    """Compound an amount at a daily factor for a whole number of days."""
    if days < 0:
        raise ValueError(f"days must be non-negative, got {days}")
    return Amount(amount.value * daily_factor(apy) ** days, amount.unit)
