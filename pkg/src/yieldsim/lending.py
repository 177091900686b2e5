"""Pooled lending platform with interest indices and governance emissions.

The pool tracks aggregate deposits and borrows through cToken-style growth
indices: every account stores an indexed principal, and its current value is
principal times the index. Interest accrual is then O(1) per day regardless
of the number of accounts.

Each day the pool also emits a fixed quantity of governance tokens, half to
lenders pro rata by deposit value and half to borrowers pro rata by debt
value. Non-aggregator market participants are folded into a single
``background`` account whose net flows stay at zero, so pro-rata shares come
out against realistic platform totals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .core import Rate, daily_factor

# Account id holding the bootstrap (non-aggregator) balances.
BACKGROUND = "background"

# Relative slack absorbing float rounding in bound checks; far below any
# economically meaningful epsilon.
_SLACK = 1e-12


class LendingError(Exception):
    """Base class for lending-pool operation failures."""


class InsufficientCollateral(LendingError):
    """A borrow would exceed the account's collateral capacity."""


class InsufficientLiquidity(LendingError):
    """The pool's free liquidity cannot fund a borrow or withdrawal."""


class OverRepay(LendingError):
    """A repayment exceeds the account's outstanding debt."""


class CollateralLocked(LendingError):
    """A withdrawal would undercollateralize the account's own debt."""


class InsufficientDeposit(LendingError):
    """A withdrawal exceeds the account's deposit value."""


class EmptyPool(LendingError):
    """Utilization is undefined for a pool with zero deposits."""


class PositionStatus(enum.Enum):
    HEALTHY = "healthy"
    LIQUIDATABLE = "liquidatable"


def _exceeds(amount: float, bound: float) -> bool:
    # True when amount is over bound by more than float rounding noise.
    return amount - bound > _SLACK * max(1.0, abs(bound))


@dataclass
class LendingAccount:
    """Per-account indexed principals plus accumulated governance tokens."""

    deposit_principal: float = 0.0  # value = deposit_principal * supply_index
    debt_principal: float = 0.0  # value = debt_principal * borrow_index
    gov_balance: float = 0.0


@dataclass
class LendingPool:
    """Single-asset lending market quoted in DAI."""

    borrow_apy: Rate
    supply_apy: Rate
    collateral_factor: float
    liquidation_threshold: float
    emission_per_day: float = 0.0
    supply_index: float = 1.0
    borrow_index: float = 1.0
    total_deposit_principal: float = 0.0
    total_borrow_principal: float = 0.0
    accounts: dict[str, LendingAccount] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.collateral_factor <= 1.0:
            raise ValueError(f"collateral_factor must be in (0, 1], got {self.collateral_factor}")
        if self.liquidation_threshold < self.collateral_factor:
            raise ValueError("liquidation_threshold must be >= collateral_factor")
        if self.emission_per_day < 0:
            raise ValueError("emission_per_day must be non-negative")

    @classmethod
    def bootstrap(
        cls,
        total_deposits: float,
        utilization: float,
        borrow_apy: float,
        supply_apy: float,
        collateral_factor: float,
        emission_per_day: float = 0.0,
        liquidation_threshold: float | None = None,
    ) -> "LendingPool":
        """Create a pool whose stated totals are held by the background account.

        ``utilization`` of the initial deposits is already lent out, so the
        pool starts with ``total_deposits - utilization * total_deposits``
        of free liquidity.
        """
        if total_deposits <= 0:
            raise ValueError(f"total_deposits must be positive, got {total_deposits}")
        if not 0.0 <= utilization <= 1.0:
            raise ValueError(f"utilization must be in [0, 1], got {utilization}")
        borrowed = utilization * total_deposits
        pool = cls(
            borrow_apy=Rate(borrow_apy),
            supply_apy=Rate(supply_apy),
            collateral_factor=collateral_factor,
            liquidation_threshold=(
                collateral_factor if liquidation_threshold is None else liquidation_threshold
            ),
            emission_per_day=emission_per_day,
            total_deposit_principal=total_deposits,
            total_borrow_principal=borrowed,
        )
        pool.accounts[BACKGROUND] = LendingAccount(
            deposit_principal=total_deposits, debt_principal=borrowed
        )
        return pool

    # -- valuations ---------------------------------------------------------

    @property
    def total_deposits(self) -> float:
        return self.total_deposit_principal * self.supply_index

    @property
    def total_borrows(self) -> float:
        return self.total_borrow_principal * self.borrow_index

    @property
    def free_liquidity(self) -> float:
        return self.total_deposits - self.total_borrows

    @property
    def utilization(self) -> float:
        if self.total_deposits <= 0.0:
            raise EmptyPool("utilization is undefined for an empty pool")
        return self.total_borrows / self.total_deposits

    def account(self, account_id: str) -> LendingAccount:
        return self.accounts.setdefault(account_id, LendingAccount())

    def deposit_value(self, account_id: str) -> float:
        return self.account(account_id).deposit_principal * self.supply_index

    def debt_value(self, account_id: str) -> float:
        return self.account(account_id).debt_principal * self.borrow_index

    def gov_balance(self, account_id: str) -> float:
        return self.account(account_id).gov_balance

    # -- operations ---------------------------------------------------------

    def deposit(self, account_id: str, amount: float) -> None:
        """Credit ``amount`` DAI of deposit value to the account."""
        if amount < 0:
            raise ValueError(f"deposit amount must be non-negative, got {amount}")
        principal = amount / self.supply_index
        self.account(account_id).deposit_principal += principal
        self.total_deposit_principal += principal

    def borrow(self, account_id: str, amount: float) -> None:
        """Take out ``amount`` DAI against the account's deposit collateral."""
        if amount < 0:
            raise ValueError(f"borrow amount must be non-negative, got {amount}")
        capacity = self.collateral_factor * self.deposit_value(account_id) - self.debt_value(
            account_id
        )
        if _exceeds(amount, capacity):
            raise InsufficientCollateral(
                f"borrow of {amount} exceeds collateral capacity {capacity}"
            )
        if _exceeds(amount, self.free_liquidity):
            raise InsufficientLiquidity(
                f"borrow of {amount} exceeds free liquidity {self.free_liquidity}"
            )
        principal = amount / self.borrow_index
        self.account(account_id).debt_principal += principal
        self.total_borrow_principal += principal

    def repay(self, account_id: str, amount: float) -> None:
        """Pay down ``amount`` DAI of the account's debt value."""
        if amount < 0:
            raise ValueError(f"repay amount must be non-negative, got {amount}")
        debt = self.debt_value(account_id)
        if _exceeds(amount, debt):
            raise OverRepay(f"repay of {amount} exceeds outstanding debt {debt}")
        principal = amount / self.borrow_index
        acct = self.account(account_id)
        acct.debt_principal = max(0.0, acct.debt_principal - principal)
        self.total_borrow_principal = max(0.0, self.total_borrow_principal - principal)

    def withdraw(self, account_id: str, amount: float) -> None:
        """Redeem ``amount`` DAI of deposit value back to the account holder."""
        if amount < 0:
            raise ValueError(f"withdraw amount must be non-negative, got {amount}")
        value = self.deposit_value(account_id)
        if _exceeds(amount, value):
            raise InsufficientDeposit(f"withdraw of {amount} exceeds deposit value {value}")
        if _exceeds(amount, self.free_liquidity):
            raise InsufficientLiquidity(
                f"withdraw of {amount} exceeds free liquidity {self.free_liquidity}"
            )
        debt = self.debt_value(account_id)
        if _exceeds(debt, self.collateral_factor * (value - amount)):
            raise CollateralLocked(
                f"withdraw of {amount} would undercollateralize debt of {debt}"
            )
        principal = amount / self.supply_index
        acct = self.account(account_id)
        acct.deposit_principal = max(0.0, acct.deposit_principal - principal)
        self.total_deposit_principal = max(0.0, self.total_deposit_principal - principal)

    def accrue_day(self) -> None:
        """Advance interest indices by one day and distribute the day's emission.

        Half the emission goes to lenders and half to borrowers, each side
        pro rata by value. A side with no participants forfeits its half.
        """
        self.supply_index *= daily_factor(self.supply_apy)
        self.borrow_index *= daily_factor(self.borrow_apy)
        if self.emission_per_day <= 0:
            return
        half = self.emission_per_day / 2.0
        # Principal ratios equal value ratios because the index is shared.
        if self.total_deposit_principal > 0:
            for acct in self.accounts.values():
                if acct.deposit_principal > 0:
                    acct.gov_balance += half * acct.deposit_principal / self.total_deposit_principal
        if self.total_borrow_principal > 0:
            for acct in self.accounts.values():
                if acct.debt_principal > 0:
                    acct.gov_balance += half * acct.debt_principal / self.total_borrow_principal

    def check_liquidation(
        self, account_id: str, collateral_price: float = 1.0, debt_price: float = 1.0
    ) -> PositionStatus:
        """Advisory solvency check; no collateral is seized either way."""
        if collateral_price <= 0 or debt_price <= 0:
            raise ValueError("prices must be positive")
        debt = self.debt_value(account_id) * debt_price
        if debt == 0.0:
            return PositionStatus.HEALTHY
        collateral = self.deposit_value(account_id) * collateral_price
        if collateral == 0.0 or debt / collateral > self.liquidation_threshold:
            return PositionStatus.LIQUIDATABLE
        return PositionStatus.HEALTHY
