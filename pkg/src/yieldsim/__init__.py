"""yieldsim: a deterministic day-stepped simulator of DeFi yield strategies.

Markets are minimal but faithful models: a pooled lending market with
cToken-style interest indices, a constant-product AMM with swap fees, and a
share-based vault with configurable fee schedules. Strategies (plain
lending, leveraged borrow spirals, liquidity provision) are deployed into
those markets and measured daily as a wealth breakdown.
"""

from .amm import CpPool
from .core import Amount, Clock, Rate, accrue, daily_factor
from .lending import LendingPool
from .scenario import (
    ConfigError,
    ScenarioConfig,
    SimulationError,
    SweepResult,
    TimeSeries,
    load_config,
    run,
    sweep,
    write_csv,
)
from .strategies import Markets, StrategyKind, StrategyState, WealthBreakdown
from .vault import FEE_PRESETS, FeeConfig, Vault, fee_preset

__version__ = "0.1.0"

__all__ = [
    "Amount",
    "Clock",
    "ConfigError",
    "CpPool",
    "FEE_PRESETS",
    "FeeConfig",
    "LendingPool",
    "Markets",
    "Rate",
    "ScenarioConfig",
    "SimulationError",
    "StrategyKind",
    "StrategyState",
    "SweepResult",
    "TimeSeries",
    "Vault",
    "WealthBreakdown",
    "__version__",
    "accrue",
    "daily_factor",
    "fee_preset",
    "load_config",
    "run",
    "sweep",
    "write_csv",
]
