"""Command-line front end for running paired-trajectory experiments.

Configuration sources merge in fixed order of increasing precedence:
built-in defaults, --preset, --config file, explicit command-line flags.
Exit codes: 0 success, 1 configuration error, 2 numerical abort
(window exhaustion or fast/direct consistency failure).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .core import BasisWindow, DimensionlessParams
from .propagators import ConsistencyError, WindowExhaustionError
from .runner import (
    ConfigError,
    ExperimentConfig,
    run_experiment,
    write_csv,
    write_sidecar,
)

# the headline reproduction configuration; also the built-in defaults
PAPER_PRESET: dict[str, str] = {
    "gamma": "2e-7",
    "kappa": "1e-7",
    "tau": "1e6",
    "sigma0": "0.8",
    "theta0": repr(math.pi),
    "nbar": "48",
    "kicks": "509",
    "snapshots": "52,509",
    "grid": "4096",
    "method": "fast",
    "include_approx": "false",
    "window": "0:96",
    "tail": "1e-12",
    "mean_convention": "interval",
}

PRESETS = {"paper": PAPER_PRESET}

_KEYS = tuple(PAPER_PRESET) + ("out",)


class _Parser(argparse.ArgumentParser):
    # usage text and exit code 1 on any argument error (argparse default is 2)
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="relrotor",
        description="Evolve a kicked electron on a ring under the "
                    "non-relativistic and relativistic maps and record when "
                    "their predictions diverge.",
    )
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", metavar="FILE", help="key = value file; flags override it")
    p.add_argument("--gamma", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--sigma0", type=float)
    p.add_argument("--theta0", type=float)
    p.add_argument("--nbar", type=int)
    p.add_argument("--kicks", type=int)
    p.add_argument("--snapshots", metavar="K1,K2,...", help="kicks at which to dump densities")
    p.add_argument("--grid", type=int, help="density grid size (power of two >= 256)")
    p.add_argument("--method", choices=["direct", "fast"])
    p.add_argument("--include-approx", dest="include_approx",
                   action="store_const", const="true",
                   help="also evolve the approximate relativistic map")
    p.add_argument("--window", metavar="QMIN:QMAX", help="basis window override")
    p.add_argument("--tail", type=float, help="boundary tail-mass threshold")
    p.add_argument("--mean-convention", dest="mean_convention",
                   choices=["interval", "circular"])
    p.add_argument("--out", metavar="DIR", help="output directory (required)")
    return p


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_snapshots(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as err:
        raise ConfigError(f"bad snapshot list {text!r}") from err


def _parse_window(text: str) -> BasisWindow:
    try:
        lo, hi = text.split(":")
        return BasisWindow(int(lo), int(hi))
    except (ValueError, TypeError) as err:
        raise ConfigError(f"bad window {text!r}, expected QMIN:QMAX") from err


def _build_config(values: dict[str, str]) -> ExperimentConfig:
    try:
        params = DimensionlessParams(
            gamma=float(values["gamma"]),
            kappa=float(values["kappa"]),
            tau=float(values["tau"]),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
    window = _parse_window(values["window"]) if values.get("window") else None
    out = values.get("out")
    try:
        cfg = ExperimentConfig(
            params=params,
            sigma0=float(values["sigma0"]),
            theta0=float(values["theta0"]),
            nbar=int(values["nbar"]),
            kicks=int(values["kicks"]),
            snapshot_kicks=_parse_snapshots(values["snapshots"]),
            grid_size=int(values["grid"]),
            method=values["method"],
            include_approx=_parse_bool(values["include_approx"]),
            window_override=window,
            tail_threshold=float(values["tail"]),
            output_dir=Path(out) if out else None,
            mean_convention=values["mean_convention"],
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
    cfg.validate()
    return cfg


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, preset, config file and flags into a validated config."""
    values = dict(PAPER_PRESET)
    if args.preset:
        values.update(PRESETS[args.preset])
    if args.config:
        values.update(_parse_config_file(args.config))
    for key in _KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = str(flag)
    if not values.get("out"):
        raise ConfigError("an output directory is required (--out DIR)")
    return _build_config(values)


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = resolve_config(args)
    except ConfigError as err:
        print(f"relrotor: configuration error: {err}", file=sys.stderr)
        return 1

    try:
        result = run_experiment(config)
    except (WindowExhaustionError, ConsistencyError) as err:
        print(f"relrotor: numerical abort: {err}", file=sys.stderr)
        return 2

    out_dir = config.output_dir
    assert out_dir is not None
    out_dir.mkdir(parents=True, exist_ok=True)
    series = out_dir / "series.csv"
    write_csv(result, series)
    write_sidecar(result, config, out_dir / "run.json")

    diag = result.diagnostics
    print(f"wrote {len(result.records)} records to {series}")
    print(f"window [{diag.window_used.q_min}, {diag.window_used.q_max}], "
          f"max norm drift {diag.max_norm_drift:.3e}, "
          f"max boundary tail {diag.max_boundary_tail_mass:.3e}, "
          f"{diag.wall_seconds:.2f} s")
    return 0


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
