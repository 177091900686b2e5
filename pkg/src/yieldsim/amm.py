"""Constant-product DAI/ETH pool with a retained-output fee.

The swap fee is charged by keeping back a fraction of the theoretical
fee-free purchase quantity inside the pool, so fees accrue to LP share value
rather than to a separate fee balance. With a positive fee every trade
strictly grows the product of the reserves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Account id holding the bootstrap liquidity.
BACKGROUND = "background"

_SLACK = 1e-12


class AmmError(Exception):
    """Base class for AMM operation failures."""


class InsufficientShares(AmmError):
    """A liquidity removal exceeds the account's LP balance."""


class EmptyPool(AmmError):
    """Price or liquidity requested from a pool without reserves."""


@dataclass
class LpAccount:
    lp_balance: float = 0.0
    gov_balance: float = 0.0


@dataclass
class CpPool:
    """Constant-product pool; reserve_dai / reserve_eth is the ETH spot price."""

    reserve_dai: float
    reserve_eth: float
    fee_rate: float = 0.05
    emission_per_day: float = 0.0
    lp_supply: float = 0.0
    lp_accounts: dict[str, LpAccount] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.fee_rate < 1.0:
            raise ValueError(f"fee_rate must be in [0, 1), got {self.fee_rate}")

    @classmethod
    def bootstrap(
        cls,
        pool_value_dai: float,
        initial_eth_price: float = 1.0,
        fee_rate: float = 0.05,
        emission_per_day: float = 0.0,
    ) -> "CpPool":
        """Seed a pool of the given total DAI value, split evenly across assets."""
        if pool_value_dai <= 0:
            raise ValueError(f"pool_value_dai must be positive, got {pool_value_dai}")
        if initial_eth_price <= 0:
            raise ValueError(f"initial_eth_price must be positive, got {initial_eth_price}")
        reserve_dai = pool_value_dai / 2.0
        pool = cls(
            reserve_dai=reserve_dai,
            reserve_eth=reserve_dai / initial_eth_price,
            fee_rate=fee_rate,
            emission_per_day=emission_per_day,
            lp_supply=1.0,
        )
        pool.lp_accounts[BACKGROUND] = LpAccount(lp_balance=1.0)
        return pool

    @property
    def spot_price(self) -> float:
        """Marginal DAI price of ETH."""
        if self.reserve_dai <= 0 or self.reserve_eth <= 0:
            raise EmptyPool("spot price is undefined without reserves")
        return self.reserve_dai / self.reserve_eth

    @property
    def pool_value_dai(self) -> float:
        # Both sides hold equal value at spot, so the pool is worth twice
        # its DAI reserve.
        return 2.0 * self.reserve_dai

    @property
    def k(self) -> float:
        return self.reserve_dai * self.reserve_eth

    def lp_account(self, account_id: str) -> LpAccount:
        return self.lp_accounts.setdefault(account_id, LpAccount())

    def lp_share(self, account_id: str) -> float:
        if self.lp_supply <= 0:
            return 0.0
        return self.lp_account(account_id).lp_balance / self.lp_supply

    # -- liquidity ----------------------------------------------------------

    def add_liquidity(self, account_id: str, value_dai: float) -> float:
        """Supply both assets at the current ratio; returns LP shares minted."""
        if value_dai < 0:
            raise ValueError(f"value_dai must be non-negative, got {value_dai}")
        if self.lp_supply <= 0:
            raise EmptyPool("cannot add liquidity to an unseeded pool")
        fraction = value_dai / self.pool_value_dai
        minted = self.lp_supply * fraction
        self.reserve_dai *= 1.0 + fraction
        self.reserve_eth *= 1.0 + fraction
        self.lp_supply += minted
        self.lp_account(account_id).lp_balance += minted
        return minted

    def remove_liquidity(self, account_id: str, lp_shares: float) -> tuple[float, float]:
        """Burn shares for the pro-rata cut of both reserves; returns (dai, eth)."""
        if lp_shares < 0:
            raise ValueError(f"lp_shares must be non-negative, got {lp_shares}")
        acct = self.lp_account(account_id)
        if lp_shares - acct.lp_balance > _SLACK * max(1.0, acct.lp_balance):
            raise InsufficientShares(
                f"remove of {lp_shares} exceeds balance {acct.lp_balance}"
            )
        fraction = lp_shares / self.lp_supply
        dai_out = fraction * self.reserve_dai
        eth_out = fraction * self.reserve_eth
        self.reserve_dai -= dai_out
        self.reserve_eth -= eth_out
        self.lp_supply = max(0.0, self.lp_supply - lp_shares)
        acct.lp_balance = max(0.0, acct.lp_balance - lp_shares)
        return dai_out, eth_out

    # -- swaps ---------------------------------------------------------------

    def swap_dai_for_eth(self, dai_in: float) -> float:
        """Buy ETH with DAI; the fee is retained from the ETH output."""
        if dai_in < 0:
            raise ValueError(f"dai_in must be non-negative, got {dai_in}")
        if dai_in == 0:
            return 0.0
        fee_free = self.reserve_eth * dai_in / (self.reserve_dai + dai_in)
        eth_out = (1.0 - self.fee_rate) * fee_free
        self.reserve_dai += dai_in
        self.reserve_eth -= eth_out
        return eth_out

    def swap_eth_for_dai(self, eth_in: float) -> float:
        """Sell ETH for DAI; the fee is retained from the DAI output."""
        if eth_in < 0:
            raise ValueError(f"eth_in must be non-negative, got {eth_in}")
        if eth_in == 0:
            return 0.0
        fee_free = self.reserve_dai * eth_in / (self.reserve_eth + eth_in)
        dai_out = (1.0 - self.fee_rate) * fee_free
        self.reserve_eth += eth_in
        self.reserve_dai -= dai_out
        return dai_out

    # -- valuation and emissions ----------------------------------------------

    def divergence_loss(
        self, initial_dai: float, initial_eth: float, lp_share_fraction: float
    ) -> float:
        """Pool-position value minus hold value of the entry basket, at spot.

        Negative means the LP would have been better off holding the
        contributed assets outside the pool.
        """
        if not 0.0 <= lp_share_fraction <= 1.0:
            raise ValueError(f"lp_share_fraction must be in [0, 1], got {lp_share_fraction}")
        position = lp_share_fraction * self.pool_value_dai
        hold = initial_dai + initial_eth * self.spot_price
        return position - hold

    def accrue_day(self) -> None:
        """Distribute the day's governance emission pro rata to LP holders."""
        if self.emission_per_day <= 0 or self.lp_supply <= 0:
            return
        for acct in self.lp_accounts.values():
            if acct.lp_balance > 0:
                acct.gov_balance += self.emission_per_day * acct.lp_balance / self.lp_supply


def trade_dai_volumes(pool: CpPool, buy_dai: float, sell_dai: float) -> None:
    """Execute one day's DAI-denominated trade pair: ETH buy leg, then sell leg.

    The sell leg supplies the ETH quantity worth ``sell_dai`` at the spot
    price prevailing when the leg executes, keeping both legs denominated in
    DAI. Under this convention the DAI-reserve trajectory does not depend on
    the initial ETH price.
    """
    if buy_dai < 0 or sell_dai < 0:
        raise ValueError("trade volumes must be non-negative")
    if buy_dai > 0:
        pool.swap_dai_for_eth(buy_dai)
    if sell_dai > 0:
        eth_in = sell_dai * pool.reserve_eth / pool.reserve_dai
        pool.swap_eth_for_dai(eth_in)
