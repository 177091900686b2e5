"""Aggregator vault share accounting and fee engines.

A vault mints shares against deposited value and reprices them through a
single number, price per share (pps), which starts at 1.0. Yield flows in
through ``harvest`` where performance and buyback fees are carved off;
withdrawal fees stay in the vault and accrue to the remaining holders;
management fees move underlying value into the treasury over time.

Fee schedules of well-known aggregators ship as named presets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import DAYS_PER_YEAR

_SLACK = 1e-12


class VaultError(Exception):
    """Base class for vault operation failures."""


class InsufficientShares(VaultError):
    """A withdrawal exceeds the outstanding share supply."""


class ExcessiveLoss(VaultError):
    """A harvested loss exceeds the vault's underlying value."""


@dataclass(frozen=True)
class FeeConfig:
    """Fee schedule; all fractions are taken from gross positive yield except
    the withdrawal fee (charged on redemptions) and the management fee
    (charged on assets over time)."""

    performance_fee: float = 0.0
    withdrawal_fee: float = 0.0
    management_fee_annual: float = 0.0
    buyback_fraction: float = 0.0
    performance_split_treasury: float = 1.0

    def __post_init__(self) -> None:
        for name in (
            "performance_fee",
            "withdrawal_fee",
            "management_fee_annual",
            "buyback_fraction",
            "performance_split_treasury",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.performance_fee + self.buyback_fraction > 1.0:
            raise ValueError("performance_fee plus buyback_fraction cannot exceed 1")


FEE_PRESETS: dict[str, FeeConfig] = {
    "idle": FeeConfig(performance_fee=0.10),
    "pickle": FeeConfig(performance_fee=0.20),
    "harvest": FeeConfig(buyback_fraction=0.30),
    "yearn-v1": FeeConfig(performance_fee=0.20, withdrawal_fee=0.005),
    "yearn-v2": FeeConfig(
        performance_fee=0.20,
        management_fee_annual=0.02,
        performance_split_treasury=0.5,
    ),
}


def fee_preset(name: str) -> FeeConfig:
    """Look up a fee schedule by preset name."""
    try:
        return FEE_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(FEE_PRESETS))
        raise ValueError(f"unknown fee preset {name!r}; known presets: {known}") from None


@dataclass
class Vault:
    """Share-accounted wrapper around a DAI-valued position."""

    fee_config: FeeConfig = field(default_factory=FeeConfig)
    total_shares: float = 0.0
    total_underlying: float = 0.0
    treasury_accrued: float = 0.0
    strategist_accrued: float = 0.0
    buyback_accrued: float = 0.0

    @property
    def price_per_share(self) -> float:
        if self.total_shares <= 0:
            return 1.0
        return self.total_underlying / self.total_shares

    def deposit(self, amount: float) -> float:
        """Mint shares at the current pps; returns shares minted."""
        if amount < 0:
            raise ValueError(f"deposit amount must be non-negative, got {amount}")
        shares = amount / self.price_per_share
        self.total_shares += shares
        self.total_underlying += amount
        return shares

    def withdraw(self, shares: float) -> float:
        """Redeem shares at pps, net of the withdrawal fee; returns DAI paid.

        The fee portion stays in the vault, lifting pps for remaining holders.
        """
        if shares < 0:
            raise ValueError(f"shares must be non-negative, got {shares}")
        if shares - self.total_shares > _SLACK * max(1.0, self.total_shares):
            raise InsufficientShares(
                f"withdraw of {shares} shares exceeds supply {self.total_shares}"
            )
        # Full redemption pays out the exact underlying, avoiding pps rounding.
        gross = (
            self.total_underlying
            if shares == self.total_shares
            else shares * self.price_per_share
        )
        paid = gross * (1.0 - self.fee_config.withdrawal_fee)
        self.total_shares = max(0.0, self.total_shares - shares)
        self.total_underlying = max(0.0, self.total_underlying - paid)
        return paid

    def harvest(self, gross_yield: float) -> float:
        """Book one harvest of strategy yield; returns the net amount added.

        Positive yield is taxed by the performance fee (split between
        treasury and strategist) and the buyback fraction; losses pass
        through untaxed.
        """
        if gross_yield <= 0:
            if -gross_yield - self.total_underlying > _SLACK * max(1.0, self.total_underlying):
                raise ExcessiveLoss(
                    f"loss of {-gross_yield} exceeds underlying {self.total_underlying}"
                )
            self.total_underlying = max(0.0, self.total_underlying + gross_yield)
            return gross_yield
        performance = gross_yield * self.fee_config.performance_fee
        buyback = gross_yield * self.fee_config.buyback_fraction
        net = gross_yield - performance - buyback
        self.treasury_accrued += performance * self.fee_config.performance_split_treasury
        self.strategist_accrued += performance * (1.0 - self.fee_config.performance_split_treasury)
        self.buyback_accrued += buyback
        self.total_underlying += net
        return net

    def accrue_management_fee(self, days: int = 1) -> float:
        """Move the management fee for ``days`` of holding into the treasury."""
        if days < 0:
            raise ValueError(f"days must be non-negative, got {days}")
        rate = self.fee_config.management_fee_annual
        if days == 0 or rate == 0.0 or self.total_underlying <= 0:
            return 0.0
        fee = self.total_underlying * (1.0 - (1.0 - rate) ** (days / DAYS_PER_YEAR))
        self.total_underlying -= fee
        self.treasury_accrued += fee
        return fee
