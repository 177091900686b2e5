"""Yield-farming strategies as day-steppable state machines.

Three strategies are modeled, each deploying a fixed starting capital in DAI:

- simple lending: deposit everything into the lending pool;
- leveraged borrow: deposit, then run deposit-borrow-redeposit spirals at a
  fixed loan-to-value per spiral;
- liquidity provision: split the capital 50/50 at spot and supply it to the
  constant-product pool.

All yields land in a per-day ``WealthBreakdown`` whose total is the
aggregator wealth W_t: deposits minus debt, plus LP position, plus
governance tokens marked at a constant price, plus any idle cash.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .amm import CpPool, trade_dai_volumes
from .core import Clock
from .lending import LendingPool

# Account id used for the strategy's positions in the underlying pools.
AGGREGATOR = "aggregator"

# Deleverage loops shrink debt geometrically; this bound is never near.
_MAX_UNWIND_ROUNDS = 10_000

_DUST = 1e-15


class StrategyKind(enum.Enum):
    SIMPLE_LENDING = "simple_lending"
    LEVERAGED_BORROW = "leveraged_borrow"
    LIQUIDITY_PROVISION = "liquidity_provision"


@dataclass(frozen=True)
class WealthBreakdown:
    """Decomposition of aggregator wealth on one day, all values in DAI."""

    day: int
    deposit_value: float = 0.0
    debt_value: float = 0.0
    lp_value: float = 0.0
    gov_value: float = 0.0
    cash: float = 0.0

    @property
    def total(self) -> float:
        return self.deposit_value - self.debt_value + self.lp_value + self.gov_value + self.cash


@dataclass
class StrategyState:
    """Identity and parameters of a deployed strategy."""

    kind: StrategyKind
    account: str = AGGREGATOR
    gov_price: float = 0.0
    spirals: int = 0
    ltv_per_spiral: float = 0.7
    auto_compound: bool = False
    cash: float = 0.0
    # Entry basket of the LP strategy, kept for divergence diagnostics.
    entry_dai: float = 0.0
    entry_eth: float = 0.0


@dataclass
class Markets:
    """The market state a strategy steps through, sharing one clock."""

    clock: Clock
    lending: LendingPool | None = None
    amm: CpPool | None = None


def init_simple_lending(
    pool: LendingPool,
    capital: float,
    *,
    gov_price: float = 0.0,
    auto_compound: bool = False,
    account: str = AGGREGATOR,
) -> StrategyState:
    """Deposit the full capital into the lending pool."""
    if capital < 0:
        raise ValueError(f"capital must be non-negative, got {capital}")
    pool.deposit(account, capital)
    return StrategyState(
        kind=StrategyKind.SIMPLE_LENDING,
        account=account,
        gov_price=gov_price,
        auto_compound=auto_compound,
    )


def init_leveraged(
    pool: LendingPool,
    capital: float,
    spirals: int,
    *,
    ltv_per_spiral: float = 0.7,
    gov_price: float = 0.0,
    auto_compound: bool = False,
    account: str = AGGREGATOR,
) -> StrategyState:
    """Deposit capital, then borrow-and-redeposit ``spirals`` times.

    Each spiral borrows ``ltv_per_spiral`` of the previous deposit, so after
    n spirals the account has deposited capital * sum(ltv^k, k=0..n) and
    borrowed capital * sum(ltv^k, k=1..n). Net value is unchanged: the
    spiral only amplifies both sides of the balance sheet.
    """
    if capital < 0:
        raise ValueError(f"capital must be non-negative, got {capital}")
    if spirals < 0:
        raise ValueError(f"spirals must be non-negative, got {spirals}")
    if ltv_per_spiral > pool.collateral_factor:
        raise ValueError(
            f"ltv_per_spiral {ltv_per_spiral} exceeds collateral factor {pool.collateral_factor}"
        )
    pool.deposit(account, capital)
    layer = capital
    for _ in range(spirals):
        layer *= ltv_per_spiral
        pool.borrow(account, layer)
        pool.deposit(account, layer)
    return StrategyState(
        kind=StrategyKind.LEVERAGED_BORROW,
        account=account,
        gov_price=gov_price,
        spirals=spirals,
        ltv_per_spiral=ltv_per_spiral,
        auto_compound=auto_compound,
    )


def init_liquidity_provision(
    amm_pool: CpPool,
    capital: float,
    *,
    gov_price: float = 0.0,
    auto_compound: bool = False,
    account: str = AGGREGATOR,
) -> StrategyState:
    """Split the capital 50/50 by value at spot and supply both sides."""
    if capital < 0:
        raise ValueError(f"capital must be non-negative, got {capital}")
    half = capital / 2.0
    entry_eth = half / amm_pool.spot_price if capital > 0 else 0.0
    amm_pool.add_liquidity(account, capital)
    return StrategyState(
        kind=StrategyKind.LIQUIDITY_PROVISION,
        account=account,
        gov_price=gov_price,
        auto_compound=auto_compound,
        entry_dai=half,
        entry_eth=entry_eth,
    )


def measure(state: StrategyState, markets: Markets) -> WealthBreakdown:
    """Mark the strategy's positions to market for the clock's current day."""
    day = markets.clock.day
    if state.kind is StrategyKind.LIQUIDITY_PROVISION:
        pool = _require_amm(markets)
        acct = pool.lp_account(state.account)
        return WealthBreakdown(
            day=day,
            lp_value=pool.lp_share(state.account) * pool.pool_value_dai,
            gov_value=acct.gov_balance * state.gov_price,
            cash=state.cash,
        )
    pool = _require_lending(markets)
    return WealthBreakdown(
        day=day,
        deposit_value=pool.deposit_value(state.account),
        debt_value=pool.debt_value(state.account),
        gov_value=pool.gov_balance(state.account) * state.gov_price,
        cash=state.cash,
    )


def step_day(
    state: StrategyState,
    markets: Markets,
    buy_dai: float = 0.0,
    sell_dai: float = 0.0,
) -> WealthBreakdown:
    """Advance the simulation by one day and return the day's breakdown.

    Order within the day: scheduled AMM trades, then interest and emission
    accrual, then the optional reward-compounding step.
    """
    markets.clock.advance()
    if buy_dai > 0 or sell_dai > 0:
        trade_dai_volumes(_require_amm(markets), buy_dai, sell_dai)
    if markets.lending is not None:
        markets.lending.accrue_day()
    if markets.amm is not None:
        markets.amm.accrue_day()
    if state.auto_compound:
        _compound_rewards(state, markets)
    return measure(state, markets)


def unwind(state: StrategyState, markets: Markets) -> float:
    """Exit all positions and realize the strategy's value in DAI.

    Leveraged positions deleverage by repeatedly withdrawing the collateral
    headroom and repaying debt with it, which retires the innermost spiral
    layers first and never trips the pool's collateral check. Governance
    tokens are valued at the constant gov_price; the ETH leg of an LP
    position is valued at spot.
    """
    realized = state.cash
    state.cash = 0.0
    if state.kind is StrategyKind.LIQUIDITY_PROVISION:
        pool = _require_amm(markets)
        acct = pool.lp_account(state.account)
        spot = pool.spot_price if acct.lp_balance > 0 else 0.0
        dai_out, eth_out = pool.remove_liquidity(state.account, acct.lp_balance)
        realized += dai_out + eth_out * spot
        realized += acct.gov_balance * state.gov_price
        acct.gov_balance = 0.0
        return realized

    pool = _require_lending(markets)
    rounds = 0
    while pool.debt_value(state.account) > _DUST:
        debt = pool.debt_value(state.account)
        headroom = pool.deposit_value(state.account) - debt / pool.collateral_factor
        step = min(debt, headroom)
        pool.withdraw(state.account, step)
        pool.repay(state.account, step)
        rounds += 1
        if rounds > _MAX_UNWIND_ROUNDS:
            raise RuntimeError("deleveraging failed to converge")
    remaining = pool.deposit_value(state.account)
    pool.withdraw(state.account, remaining)
    realized += remaining
    acct = pool.account(state.account)
    realized += acct.gov_balance * state.gov_price
    acct.gov_balance = 0.0
    return realized


def _compound_rewards(state: StrategyState, markets: Markets) -> None:
    # Phase-3 reinvestment: sell accrued GOV at the constant price and
    # redeploy the proceeds into the strategy's own market.
    if state.kind is StrategyKind.LIQUIDITY_PROVISION:
        pool = _require_amm(markets)
        acct = pool.lp_account(state.account)
        proceeds = acct.gov_balance * state.gov_price
        acct.gov_balance = 0.0
        if proceeds > 0:
            pool.add_liquidity(state.account, proceeds)
        return
    lending_pool = _require_lending(markets)
    lending_acct = lending_pool.account(state.account)
    proceeds = lending_acct.gov_balance * state.gov_price
    lending_acct.gov_balance = 0.0
    if proceeds <= 0:
        return
    if state.kind is StrategyKind.LEVERAGED_BORROW:
        # Pay down debt first; any remainder adds to the collateral.
        repay = min(proceeds, lending_pool.debt_value(state.account))
        if repay > 0:
            lending_pool.repay(state.account, repay)
        proceeds -= repay
    if proceeds > 0:
        lending_pool.deposit(state.account, proceeds)


def _require_lending(markets: Markets) -> LendingPool:
    if markets.lending is None:
        raise ValueError("strategy requires a lending pool")
    return markets.lending


def _require_amm(markets: Markets) -> CpPool:
    if markets.amm is None:
        raise ValueError("strategy requires an AMM pool")
    return markets.amm
