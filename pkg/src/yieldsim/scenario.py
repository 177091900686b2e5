"""Declarative scenario configuration and the deterministic day-stepping runner.

A scenario bootstraps one lending pool and one AMM pool, deploys a strategy
with its starting capital, and steps day by day: the day's slice of the
configured trade volume hits the AMM first, then interest and emissions
accrue. Every day is recorded as a wealth breakdown plus market observables,
and the whole run can be swept over up to two config parameters.

Configs load from TOML files that mirror ``ScenarioConfig`` field names
exactly; unknown keys are rejected rather than ignored, and ``--set`` style
overrides go through the same fail-closed schema check.
"""

from __future__ import annotations

import copy
import dataclasses
import itertools
import types
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]

from .amm import AmmError, CpPool, trade_dai_volumes
from .core import Clock, ClockExhausted
from .lending import LendingError, LendingPool
from .strategies import (
    Markets,
    StrategyKind,
    StrategyState,
    WealthBreakdown,
    init_leveraged,
    init_liquidity_provision,
    init_simple_lending,
    measure,
    step_day,
)
from .vault import FeeConfig, Vault, VaultError, fee_preset

CSV_COLUMNS = (
    "day",
    "total",
    "deposit_value",
    "debt_value",
    "lp_value",
    "gov_value",
    "cash",
    "utilization",
    "spot_price",
    "pool_value",
    "pps",
)


class ConfigError(ValueError):
    """A scenario configuration is malformed or violates an invariant."""


class SimulationError(RuntimeError):
    """A market operation failed while stepping a scenario."""

    def __init__(self, day: int, message: str):
        super().__init__(f"day {day}: {message}")
        self.day = day


# -- configuration schema -----------------------------------------------------


@dataclass
class LendingParams:
    total_deposits: float = 99.0
    utilization: float = 0.7
    borrow_apy: float = 0.10
    supply_apy: float = 0.03
    collateral_factor: float = 0.8
    emission_per_day: float = 0.01


@dataclass
class AmmParams:
    pool_value: float = 99.0
    initial_eth_price: float = 1.0
    fee_rate: float = 0.05
    emission_per_day: float = 0.01


@dataclass
class StrategyParams:
    kind: str = "simple_lending"
    capital: float = 1.0
    spirals: int = 0
    ltv_per_spiral: float = 0.7
    auto_compound: bool = False


@dataclass
class TradeSchedule:
    eth_buy_volume_dai: float = 0.0
    eth_sell_volume_dai: float = 0.0


@dataclass
class FeeParams:
    """Either a named preset or an explicit fee schedule, never both."""

    preset: str | None = None
    performance_fee: float = 0.0
    withdrawal_fee: float = 0.0
    management_fee_annual: float = 0.0
    buyback_fraction: float = 0.0
    performance_split_treasury: float = 1.0


@dataclass
class ScenarioConfig:
    horizon_days: int = 365
    gov_price: float = 0.0
    lending: LendingParams = field(default_factory=LendingParams)
    amm: AmmParams = field(default_factory=AmmParams)
    strategy: StrategyParams = field(default_factory=StrategyParams)
    trade_schedule: TradeSchedule = field(default_factory=TradeSchedule)
    fees: FeeParams = field(default_factory=FeeParams)
    # Axis name (dotted config path) -> list of values, at most two axes.
    sweep: dict[str, list] = field(default_factory=dict)


def read_config_file(path: str | Path) -> dict:
    """Parse a TOML scenario file into a raw mapping."""
    path = Path(path)
    with open(path, "rb") as handle:
        try:
            return tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def apply_overrides(raw: dict, overrides: typing.Sequence[str]) -> dict:
    """Apply ``key=value`` overrides onto a raw config mapping, last one wins."""
    for item in overrides:
        key, sep, text = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"cannot override {key!r}: {part!r} is not a table")
            node = child
        node[parts[-1]] = _parse_override_value(text)
    return raw


def load_config(path: str | Path, overrides: typing.Sequence[str] = ()) -> ScenarioConfig:
    """Load, override, and schema-check a scenario file."""
    raw = read_config_file(path)
    apply_overrides(raw, overrides)
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a mapping, rejecting unknown keys."""
    return _build_section(ScenarioConfig, raw, prefix="")


def _parse_override_value(text: str):
    text = text.strip()
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text  # bare string such as simple_lending


def _build_section(cls, mapping, prefix: str):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'} must be a table")
    if cls is FeeParams and "preset" in mapping and len(mapping) > 1:
        raise ConfigError("fees.preset cannot be combined with explicit fee fields")
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in mapping.items():
        path = f"{prefix}{key}"
        if key not in known:
            raise ConfigError(f"unknown config key {path!r}")
        if key == "sweep":
            kwargs[key] = _flatten_sweep(value, prefix="")
        elif dataclasses.is_dataclass(hints[key]):
            kwargs[key] = _build_section(hints[key], value, prefix=path + ".")
        else:
            kwargs[key] = _coerce_scalar(value, hints[key], path)
    return cls(**kwargs)


def _flatten_sweep(value, prefix: str) -> dict[str, list]:
    # TOML dotted keys arrive as nested tables; flatten them back to the
    # dotted axis names the sweep machinery uses.
    if not isinstance(value, dict):
        raise ConfigError("sweep must be a table of axis = [values]")
    axes: dict[str, list] = {}
    for key, node in value.items():
        path = f"{prefix}{key}"
        if isinstance(node, dict):
            axes.update(_flatten_sweep(node, prefix=path + "."))
        elif isinstance(node, list):
            axes[path] = list(node)
        else:
            raise ConfigError(f"sweep axis {path!r} must be a list of values")
    return axes


def _coerce_scalar(value, ftype, path: str):
    origin = typing.get_origin(ftype)
    if origin in (typing.Union, types.UnionType):
        args = set(typing.get_args(ftype))
        if args == {str, type(None)}:
            if value is None or isinstance(value, str):
                return value
            raise ConfigError(f"expected string for {path!r}, got {type(value).__name__}")
        raise ConfigError(f"unsupported config field type for {path!r}")
    if ftype is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected number for {path!r}, got {value!r}")
        return float(value)
    if ftype is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected integer for {path!r}, got {value!r}")
        return value
    if ftype is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected boolean for {path!r}, got {value!r}")
        return value
    if ftype is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected string for {path!r}, got {value!r}")
        return value
    raise ConfigError(f"unsupported config field type for {path!r}")


def _leaf_type(owner, name: str):
    hints = typing.get_type_hints(type(owner))
    return hints[name]


def set_config_path(config: ScenarioConfig, dotted: str, value) -> None:
    """Assign a value to a dotted config path, with the same checks as loading."""
    parts = dotted.split(".")
    obj = config
    for part in parts[:-1]:
        if not hasattr(obj, part) or not dataclasses.is_dataclass(getattr(obj, part)):
            raise ConfigError(f"unknown config parameter {dotted!r}")
        obj = getattr(obj, part)
    leaf = parts[-1]
    if not dataclasses.is_dataclass(obj) or leaf not in {
        f.name for f in dataclasses.fields(obj)
    }:
        raise ConfigError(f"unknown config parameter {dotted!r}")
    if leaf == "sweep" or dataclasses.is_dataclass(getattr(obj, leaf)):
        raise ConfigError(f"config parameter {dotted!r} is not a scalar field")
    setattr(obj, leaf, _coerce_scalar(value, _leaf_type(obj, leaf), dotted))


def resolve_fees(fees: FeeParams) -> FeeConfig:
    """Turn the fees section into a vault FeeConfig."""
    try:
        if fees.preset is not None:
            explicit = FeeParams(preset=fees.preset)
            if fees != explicit:
                raise ConfigError("fees.preset cannot be combined with explicit fee fields")
            return fee_preset(fees.preset)
        return FeeConfig(
            performance_fee=fees.performance_fee,
            withdrawal_fee=fees.withdrawal_fee,
            management_fee_annual=fees.management_fee_annual,
            buyback_fraction=fees.buyback_fraction,
            performance_split_treasury=fees.performance_split_treasury,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_STRATEGY_KINDS = {kind.value for kind in StrategyKind}


def validate_config(config: ScenarioConfig) -> None:
    """Check every semantic invariant; raises ConfigError on the first violation."""
    def require(condition: bool, message: str) -> None:
        if not condition:
            raise ConfigError(message)

    require(config.horizon_days > 0, f"horizon_days must be positive, got {config.horizon_days}")
    require(config.gov_price >= 0, f"gov_price must be non-negative, got {config.gov_price}")

    lending = config.lending
    require(lending.total_deposits > 0, "lending.total_deposits must be positive")
    require(0.0 <= lending.utilization <= 1.0,
            f"lending.utilization must be in [0, 1], got {lending.utilization}")
    require(lending.borrow_apy >= 0, "lending.borrow_apy must be non-negative")
    require(lending.supply_apy >= 0, "lending.supply_apy must be non-negative")
    require(0.0 < lending.collateral_factor <= 1.0,
            f"lending.collateral_factor must be in (0, 1], got {lending.collateral_factor}")
    require(lending.emission_per_day >= 0, "lending.emission_per_day must be non-negative")

    amm = config.amm
    require(amm.pool_value > 0, f"amm.pool_value must be positive, got {amm.pool_value}")
    require(amm.initial_eth_price > 0, "amm.initial_eth_price must be positive")
    require(0.0 <= amm.fee_rate < 1.0, f"amm.fee_rate must be in [0, 1), got {amm.fee_rate}")
    require(amm.emission_per_day >= 0, "amm.emission_per_day must be non-negative")

    strategy = config.strategy
    require(strategy.kind in _STRATEGY_KINDS,
            f"strategy.kind must be one of {sorted(_STRATEGY_KINDS)}, got {strategy.kind!r}")
    require(strategy.capital >= 0, f"strategy.capital must be non-negative, got {strategy.capital}")
    require(strategy.spirals >= 0, f"strategy.spirals must be non-negative, got {strategy.spirals}")
    require(0.0 < strategy.ltv_per_spiral <= 1.0,
            f"strategy.ltv_per_spiral must be in (0, 1], got {strategy.ltv_per_spiral}")
    if strategy.kind == StrategyKind.LEVERAGED_BORROW.value:
        require(strategy.ltv_per_spiral <= lending.collateral_factor,
                "strategy.ltv_per_spiral cannot exceed lending.collateral_factor")

    schedule = config.trade_schedule
    require(schedule.eth_buy_volume_dai >= 0,
            "trade_schedule.eth_buy_volume_dai must be non-negative")
    require(schedule.eth_sell_volume_dai >= 0,
            "trade_schedule.eth_sell_volume_dai must be non-negative")

    resolve_fees(config.fees)

    require(len(config.sweep) <= 2, f"at most two sweep axes, got {len(config.sweep)}")
    probe = copy.deepcopy(config)
    for name, values in config.sweep.items():
        require(isinstance(values, list) and len(values) > 0,
                f"sweep axis {name!r} must be a non-empty list")
        for value in values:
            set_config_path(probe, name, value)


# -- runner --------------------------------------------------------------------


@dataclass(frozen=True)
class DayRow:
    """One day of a run: the wealth breakdown plus market observables."""

    breakdown: WealthBreakdown
    utilization: float
    spot_price: float
    pool_value: float
    pps: float


@dataclass
class TimeSeries:
    rows: list[DayRow]

    @property
    def final_total(self) -> float:
        return self.rows[-1].breakdown.total

    def totals(self) -> list[float]:
        return [row.breakdown.total for row in self.rows]


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple


@dataclass
class SweepResult:
    axes: list[SweepAxis]
    points: list[tuple]
    runs: list[TimeSeries]

    def final_totals(self) -> list[float]:
        return [run.final_total for run in self.runs]


def daily_trade_slice(config: ScenarioConfig, day: int) -> tuple[float, float]:
    """The (buy, sell) DAI volumes traded on one day: totals spread evenly."""
    if not 0 <= day < config.horizon_days:
        raise ValueError(f"day {day} outside [0, {config.horizon_days})")
    schedule = config.trade_schedule
    return (
        schedule.eth_buy_volume_dai / config.horizon_days,
        schedule.eth_sell_volume_dai / config.horizon_days,
    )


def apply_trades(pool: CpPool, buy_dai: float, sell_dai: float) -> None:
    """Run one day's trade pair against the AMM: buy leg, then sell leg."""
    trade_dai_volumes(pool, buy_dai, sell_dai)


def _build_markets(config: ScenarioConfig) -> Markets:
    lending = LendingPool.bootstrap(
        total_deposits=config.lending.total_deposits,
        utilization=config.lending.utilization,
        borrow_apy=config.lending.borrow_apy,
        supply_apy=config.lending.supply_apy,
        collateral_factor=config.lending.collateral_factor,
        emission_per_day=config.lending.emission_per_day,
    )
    amm = CpPool.bootstrap(
        pool_value_dai=config.amm.pool_value,
        initial_eth_price=config.amm.initial_eth_price,
        fee_rate=config.amm.fee_rate,
        emission_per_day=config.amm.emission_per_day,
    )
    clock = Clock(day=0, horizon_days=config.horizon_days)
    return Markets(clock=clock, lending=lending, amm=amm)


def _init_strategy(config: ScenarioConfig, markets: Markets) -> StrategyState:
    params = config.strategy
    kind = StrategyKind(params.kind)
    if kind is StrategyKind.SIMPLE_LENDING:
        return init_simple_lending(
            markets.lending,
            params.capital,
            gov_price=config.gov_price,
            auto_compound=params.auto_compound,
        )
    if kind is StrategyKind.LEVERAGED_BORROW:
        return init_leveraged(
            markets.lending,
            params.capital,
            params.spirals,
            ltv_per_spiral=params.ltv_per_spiral,
            gov_price=config.gov_price,
            auto_compound=params.auto_compound,
        )
    return init_liquidity_provision(
        markets.amm,
        params.capital,
        gov_price=config.gov_price,
        auto_compound=params.auto_compound,
    )


def _snapshot(breakdown: WealthBreakdown, markets: Markets, vault: Vault) -> DayRow:
    return DayRow(
        breakdown=breakdown,
        utilization=markets.lending.utilization,
        spot_price=markets.amm.spot_price,
        pool_value=markets.amm.pool_value_dai,
        pps=vault.price_per_share,
    )


def run(config: ScenarioConfig) -> TimeSeries:
    """Simulate one scenario, returning horizon_days + 1 rows (day 0 included).

    The vault wraps the strategy's wealth: each day's change in W_t passes
    through ``harvest`` so the configured fee schedule shapes the pps
    column, while W_t itself stays gross of fees.
    """
    validate_config(config)
    try:
        markets = _build_markets(config)
        state = _init_strategy(config, markets)
        vault = Vault(fee_config=resolve_fees(config.fees))
        vault.deposit(config.strategy.capital)
    except (LendingError, AmmError, VaultError, ValueError) as exc:
        raise SimulationError(0, str(exc)) from exc
    rows = [_snapshot(measure(state, markets), markets, vault)]
    previous_total = rows[0].breakdown.total
    for day in range(1, config.horizon_days + 1):
        buy_dai, sell_dai = daily_trade_slice(config, day - 1)
        try:
            breakdown = step_day(state, markets, buy_dai=buy_dai, sell_dai=sell_dai)
            vault.harvest(breakdown.total - previous_total)
            vault.accrue_management_fee(1)
        except (LendingError, AmmError, VaultError, ClockExhausted) as exc:
            raise SimulationError(day, str(exc)) from exc
        previous_total = breakdown.total
        rows.append(_snapshot(breakdown, markets, vault))
    return TimeSeries(rows=rows)


def sweep(config: ScenarioConfig, jobs: int = 1) -> SweepResult:
    """Run the cartesian product of the config's sweep axes in row-major order.

    Points are independent simulations; with ``jobs`` > 1 they execute in a
    process pool, and results are assembled in grid order either way.
    """
    validate_config(config)
    axes = [SweepAxis(name, tuple(values)) for name, values in config.sweep.items()]
    points = list(itertools.product(*(axis.values for axis in axes)))
    configs = []
    for combo in points:
        point = copy.deepcopy(config)
        point.sweep = {}
        for axis, value in zip(axes, combo):
            set_config_path(point, axis.name, value)
        configs.append(point)
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            runs = list(executor.map(run, configs))
    else:
        runs = [run(point) for point in configs]
    return SweepResult(axes=axes, points=points, runs=runs)


# -- output ----------------------------------------------------------------------


def _fmt(value: float) -> str:
    return format(value, ".12g")


def _series_lines(series: TimeSeries) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in series.rows:
        b = row.breakdown
        lines.append(
            ",".join(
                (
                    str(b.day),
                    _fmt(b.total),
                    _fmt(b.deposit_value),
                    _fmt(b.debt_value),
                    _fmt(b.lp_value),
                    _fmt(b.gov_value),
                    _fmt(b.cash),
                    _fmt(row.utilization),
                    _fmt(row.spot_price),
                    _fmt(row.pool_value),
                    _fmt(row.pps),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(result: TimeSeries | SweepResult, destination: str | Path) -> list[Path]:
    """Write a run or a sweep as CSV file(s); returns the paths written.

    A TimeSeries goes to a single file (or ``timeseries.csv`` inside an
    existing directory). A SweepResult goes to a directory as one file per
    point plus an ``index.csv`` mapping grid coordinates to filenames.
    """
    destination = Path(destination)
    if isinstance(result, TimeSeries):
        path = destination / "timeseries.csv" if destination.is_dir() else destination
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(_series_lines(result), encoding="utf-8", newline="\n")
        return [path]

    destination.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(max(len(result.runs) - 1, 0))))
    written = []
    index_lines = [",".join(("run", *(axis.name for axis in result.axes), "file"))]
    for i, (combo, series) in enumerate(zip(result.points, result.runs)):
        name = f"run_{i:0{width}d}.csv"
        path = destination / name
        path.write_text(_series_lines(series), encoding="utf-8", newline="\n")
        written.append(path)
        values = (_fmt(v) if isinstance(v, (int, float)) else str(v) for v in combo)
        index_lines.append(",".join((str(i), *values, name)))
    index_path = destination / "index.csv"
    index_path.write_text("\n".join(index_lines) + "\n", encoding="utf-8", newline="\n")
    written.append(index_path)
    return written


def flatten_config(config: ScenarioConfig) -> list[tuple[str, object]]:
    """Flatten a config to (dotted key, value) pairs for reporting."""
    items: list[tuple[str, object]] = []

    def walk(obj, prefix: str) -> None:
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            path = f"{prefix}{f.name}"
            if dataclasses.is_dataclass(value):
                walk(value, path + ".")
            elif f.name == "sweep":
                for axis, values in value.items():
                    items.append((f'sweep."{axis}"', values))
            else:
                items.append((path, value))

    walk(config, "")
    return items
