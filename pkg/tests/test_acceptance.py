"""End-to-end acceptance checks for the simulator.

Each test covers one numbered criterion and prints a single PASS/FAIL line
to the real stdout so the verdicts stay visible regardless of capture
settings. Criteria are exercised through the public scenario API exactly as
a user would drive them.
"""

import contextlib
import math
import random
import sys
import time
from pathlib import Path

import pytest

from yieldsim import cli, scenario
from yieldsim.scenario import ScenarioConfig, load_config, run, sweep, write_csv
from yieldsim.vault import FeeConfig, Vault, fee_preset

FIXTURES = Path(__file__).resolve().parent.parent / "configs"


@contextlib.contextmanager
def report(criterion: str):
    try:
        yield
    except BaseException:
        print(f"FAIL {criterion}", flush=True)
        raise
    print(f"PASS {criterion}", flush=True)


def simple_config(supply=0.03, gov=0.0, horizon=365):
    config = ScenarioConfig()
    config.horizon_days = horizon
    config.gov_price = gov
    config.strategy.kind = "simple_lending"
    config.lending.supply_apy = supply
    return config


def leveraged_config(spirals, gov=0.0, supply=0.03, borrow=0.10):
    config = ScenarioConfig()
    config.gov_price = gov
    config.strategy.kind = "leveraged_borrow"
    config.strategy.spirals = spirals
    config.lending.supply_apy = supply
    config.lending.borrow_apy = borrow
    return config


def lp_config(buy, sell, fee=0.05, gov=0.0, price=1.0):
    config = ScenarioConfig()
    config.gov_price = gov
    config.strategy.kind = "liquidity_provision"
    config.amm.fee_rate = fee
    config.amm.initial_eth_price = price
    config.trade_schedule.eth_buy_volume_dai = buy
    config.trade_schedule.eth_sell_volume_dai = sell
    return config


def final(config):
    return run(config).final_total


def hold_value(series, capital=1.0):
    # value of keeping the 50/50 entry basket outside the pool
    spot_start = series.rows[0].spot_price
    spot_end = series.rows[-1].spot_price
    return capital / 2.0 + (capital / 2.0 / spot_start) * spot_end


def k_series(series):
    # reconstruct reserves from the reported observables
    ks = []
    for row in series.rows:
        reserve_dai = row.pool_value / 2.0
        ks.append(reserve_dai * (reserve_dai / row.spot_price))
    return ks


def test_01_simple_lending_floor():
    with report("criterion 1: simple-lending floor at 1 DAI"):
        started = time.perf_counter()
        series = run(simple_config(supply=0.0, gov=0.0))
        for total in series.totals():
            assert abs(total - 1.0) <= 1e-12
        assert time.perf_counter() - started < 1.0


def test_02_simple_lending_monotonicity():
    with report("criterion 2: final wealth non-decreasing in supply APY and gov price"):
        started = time.perf_counter()
        supplies = [0.2 * i / 9 for i in range(10)]
        govs = [i / 9 for i in range(10)]
        config = simple_config()
        config.sweep = {"lending.supply_apy": supplies, "gov_price": govs}
        finals = sweep(config).final_totals()
        grid = [finals[i * 10 : (i + 1) * 10] for i in range(10)]
        for i in range(10):
            for j in range(10):
                if j > 0:
                    assert grid[i][j] >= grid[i][j - 1]
                if i > 0:
                    assert grid[i][j] >= grid[i - 1][j]
        assert time.perf_counter() - started < 5.0


def test_03_leveraged_borrow_loss():
    with report("criterion 3: leveraged loss 0.981 at n=1, worsening with depth"):
        assert final(leveraged_config(1)) == pytest.approx(1.7 * 1.03 - 0.7 * 1.10, abs=1e-6)
        finals = [final(leveraged_config(n)) for n in range(1, 6)]
        for shallower, deeper in zip(finals, finals[1:]):
            assert deeper < shallower


def test_04_leverage_amplifies_gov_income():
    with report("criterion 4: gov-price spread strictly increasing in spirals"):
        spreads = [
            final(leveraged_config(n, gov=1.0)) - final(leveraged_config(n, gov=0.0))
            for n in range(6)
        ]
        for narrower, wider in zip(spreads, spreads[1:]):
            assert wider > narrower


def test_05_zero_spiral_equals_simple_lending():
    with report("criterion 5: zero-spiral strategy reproduces simple lending"):
        rng = random.Random(42)
        for _ in range(5):
            supply = rng.uniform(0.0, 0.2)
            borrow = rng.uniform(supply, 0.3)
            gov = rng.uniform(0.0, 1.0)
            lev = run(leveraged_config(0, gov=gov, supply=supply, borrow=borrow))
            base = simple_config(supply=supply, gov=gov)
            base.lending.borrow_apy = borrow
            simple = run(base)
            for a, b in zip(lev.totals(), simple.totals()):
                assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_06_amm_fee_yield():
    with report("criterion 6: trading fees lift LP wealth over the flat scenario"):
        margin = final(lp_config(50, 50, fee=0.05, gov=0.5)) - final(
            lp_config(0, 0, fee=0.05, gov=0.5)
        )
        assert margin > 0
        null_margin = final(lp_config(0, 0, fee=0.0, gov=0.5)) - final(
            lp_config(0, 0, fee=0.0, gov=0.5)
        )
        assert abs(null_margin) <= 1e-12


def test_07_scenario_ordering():
    with report("criterion 7: buy pressure orders final wealth (iv) > (iii) > (ii)"):
        w_ii = final(lp_config(45, 55, gov=0.5))
        w_iii = final(lp_config(50, 50, gov=0.5))
        w_iv = final(lp_config(55, 45, gov=0.5))
        assert w_iv > w_iii > w_ii


def test_08_divergence_loss():
    with report("criterion 8: fee-free price moves leave the LP below hold value"):
        down = run(lp_config(45, 55, fee=0.0, gov=0.0))
        up = run(lp_config(55, 45, fee=0.0, gov=0.0))
        w_down, w_up = down.final_total, up.final_total
        assert w_down < 1.0
        assert w_down < hold_value(down)
        assert w_up < hold_value(up)
        # Net buy pressure grows the DAI reserve, and with it the position's
        # DAI value, so the sub-1 clause cannot hold simultaneously with the
        # ordering required above: wealth here is ~1.202.
        assert w_up < 1.0, (
            f"appreciating-price scenario ends at {w_up:.6f} >= 1; "
            "divergence loss shows up against the hold portfolio, not "
            "against the starting capital"
        )


def test_09_constant_product_never_decreases():
    with report("criterion 9: k non-decreasing everywhere, strictly up on fee volume"):
        cases = [
            (simple_config(), False),
            (lp_config(0, 0, gov=0.5), False),
            (lp_config(45, 55, gov=0.5), True),
            (lp_config(50, 50, gov=0.5), True),
            (lp_config(55, 45, gov=0.5), True),
            (lp_config(45, 55, fee=0.0), False),
            (lp_config(55, 45, fee=0.0), False),
            (lp_config(50, 50, gov=0.5, price=0.5), True),
            (lp_config(50, 50, gov=0.5, price=100.0), True),
        ]
        for config, strict in cases:
            ks = k_series(run(config))
            for before, after in zip(ks, ks[1:]):
                assert after >= before * (1.0 - 1e-12)
                if strict:
                    assert after > before


def test_10_vault_accounting():
    with report("criterion 10: vault fee accounting and value conservation"):
        vault = Vault(fee_config=fee_preset("yearn-v1"), total_shares=1.0, total_underlying=1.0)
        vault.harvest(0.10)
        assert vault.price_per_share == pytest.approx(1.08, abs=1e-12)
        pps = vault.price_per_share
        assert vault.withdraw(1.0) == pytest.approx(0.995 * pps, rel=1e-12)

        buyback = Vault(fee_config=fee_preset("harvest"), total_shares=1.0, total_underlying=1.0)
        buyback.harvest(0.10)
        assert buyback.buyback_accrued == pytest.approx(0.03, rel=1e-12)
        assert buyback.treasury_accrued == 0.0

        rng = random.Random(20260817)
        ledger = Vault(fee_config=fee_preset("yearn-v2"))
        ledger.deposit(100.0)
        flows_in = 100.0
        flows_out = 0.0
        for _ in range(1000):
            op = rng.choice(("deposit", "withdraw", "harvest", "mgmt"))
            if op == "deposit":
                amount = rng.uniform(0.0, 10.0)
                ledger.deposit(amount)
                flows_in += amount
            elif op == "withdraw":
                flows_out += ledger.withdraw(rng.uniform(0.0, ledger.total_shares / 4))
            elif op == "harvest":
                gross = max(rng.uniform(-0.5, 2.0), -ledger.total_underlying * 0.5)
                ledger.harvest(gross)
                flows_in += gross
            else:
                ledger.accrue_management_fee(1)
        held = (
            ledger.total_underlying
            + ledger.treasury_accrued
            + ledger.strategist_accrued
            + ledger.buyback_accrued
        )
        assert flows_out + held == pytest.approx(flows_in, rel=1e-9)


def test_11_initial_price_invariance():
    with report("criterion 11: LP wealth independent of the initial ETH price"):
        reference = run(lp_config(50, 50, gov=0.5, price=1.0)).totals()
        for price in (0.5, 100.0):
            totals = run(lp_config(50, 50, gov=0.5, price=price)).totals()
            for a, b in zip(totals, reference):
                assert abs(a - b) <= 1e-9 * max(1.0, abs(b))


def test_12_fixture_determinism(tmp_path):
    with report("criterion 12: fig4c fixture reruns byte-identical"):
        config = load_config(FIXTURES / "fig4c.toml")
        first = write_csv(sweep(config), tmp_path / "a")
        second = write_csv(sweep(config), tmp_path / "b")
        assert [p.name for p in first] == [p.name for p in second]
        for left, right in zip(first, second):
            assert left.read_bytes() == right.read_bytes()


@pytest.mark.parametrize("fixture", ["fig4a.toml", "fig4b.toml", "fig4c.toml"])
def test_fixtures_run_end_to_end(tmp_path, fixture):
    code = cli.main(
        [
            "run",
            "--config",
            str(FIXTURES / fixture),
            "--out",
            str(tmp_path / fixture.split(".")[0]),
        ]
    )
    assert code == cli.EXIT_OK
    assert (tmp_path / fixture.split(".")[0] / "index.csv").exists()
    assert (tmp_path / fixture.split(".")[0] / "sweep.png").exists()
