"""Command-line frontend: run scenarios, sweep parameters, inspect configs.

Exit codes: 0 success, 1 configuration error, 2 simulation error, 3 I/O error.
Output on stdout is machine-parseable ``key=value`` lines; figures and CSVs
land in the directory given by ``--out``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import scenario
from .vault import FEE_PRESETS

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SIMULATION = 2
EXIT_IO = 3


@dataclass(frozen=True)
class Invocation:
    """A fully parsed command line."""

    command: str
    config_path: Path | None
    out_dir: Path
    overrides: tuple[str, ...]
    jobs: int
    plot: bool


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yieldsim",
        description="Deterministic day-stepped simulator of DeFi yield strategies.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", type=Path, required=True, help="TOML scenario file")
        sub.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config value (repeatable, applied in order)",
        )

    run_cmd = commands.add_parser("run", help="simulate one scenario")
    common(run_cmd)
    run_cmd.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    run_cmd.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    sweep_cmd = commands.add_parser("sweep", help="simulate a grid of scenarios")
    common(sweep_cmd)
    sweep_cmd.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    sweep_cmd.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    sweep_cmd.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    commands.add_parser("presets", help="list the built-in vault fee presets")

    validate_cmd = commands.add_parser("validate", help="check a config and echo it back")
    common(validate_cmd)

    return parser


def _invocation(args: argparse.Namespace) -> Invocation:
    return Invocation(
        command=args.command,
        config_path=getattr(args, "config", None),
        out_dir=getattr(args, "out", Path("out")),
        overrides=tuple(getattr(args, "overrides", ())),
        jobs=getattr(args, "jobs", 1),
        plot=not getattr(args, "no_plot", False),
    )


def _load(invocation: Invocation) -> scenario.ScenarioConfig:
    config = scenario.load_config(invocation.config_path, invocation.overrides)
    scenario.validate_config(config)
    return config


def _cmd_run(invocation: Invocation) -> int:
    config = _load(invocation)
    if config.sweep:
        # A config that declares sweep axes is a grid even under `run`.
        return _run_sweep(config, invocation)
    series = scenario.run(config)
    invocation.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = scenario.write_csv(series, invocation.out_dir / "timeseries.csv")[0]
    print(f"csv={csv_path}")
    if invocation.plot:
        from . import plots

        figure = plots.plot_run(series, invocation.out_dir / "wealth.png")
        print(f"figure={figure}")
    print(f"rows={len(series.rows)}")
    print(f"final_total={format(series.final_total, '.12g')}")
    return EXIT_OK


def _cmd_sweep(invocation: Invocation) -> int:
    return _run_sweep(_load(invocation), invocation)


def _run_sweep(config: scenario.ScenarioConfig, invocation: Invocation) -> int:
    result = scenario.sweep(config, jobs=invocation.jobs)
    written = scenario.write_csv(result, invocation.out_dir)
    print(f"points={len(result.runs)}")
    print(f"index={written[-1]}")
    if invocation.plot:
        from . import plots

        figure = plots.plot_sweep(result, invocation.out_dir / "sweep.png")
        print(f"figure={figure}")
    return EXIT_OK


def _cmd_presets(invocation: Invocation) -> int:
    fields = (
        "performance_fee",
        "withdrawal_fee",
        "management_fee_annual",
        "buyback_fraction",
        "performance_split_treasury",
    )
    print(",".join(("name", *fields)))
    for name in sorted(FEE_PRESETS):
        preset = FEE_PRESETS[name]
        print(",".join((name, *(format(getattr(preset, f), "g") for f in fields))))
    return EXIT_OK


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return repr(value)


def _cmd_validate(invocation: Invocation) -> int:
    config = _load(invocation)
    for key, value in scenario.flatten_config(config):
        if value is None:
            continue
        print(f"{key} = {_toml_value(value)}")
    print("ok=true")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "presets": _cmd_presets,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help; map usage errors onto the config code.
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    invocation = _invocation(args)
    try:
        return _COMMANDS[invocation.command](invocation)
    except scenario.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except scenario.SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
