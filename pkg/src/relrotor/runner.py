"""Paired-trajectory experiment orchestration and CSV/JSON emission.

A run evolves the non-relativistic and relativistic states (optionally
the approximate-relativistic one) from a shared Gaussian initial state,
records observables at every kick index n (record n = state after n map
applications; record 0 = initial state) and dumps density snapshots at
requested kicks.  Everything is deterministic: two runs of the same
configuration produce byte-identical CSV files.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .core import BasisWindow, DimensionlessParams, build_kernel, build_weights
from .observables import (
    INTERVAL,
    CIRCULAR,
    AngularDensity,
    ObservableRecord,
    density_nr,
    density_rel,
    mean_angle,
    overlap,
    rel_diff_pct,
    std_angle,
)
from .propagators import (
    NR,
    REL,
    REL_APPROX,
    SpectralState,
    WindowExhaustionError,
    auto_window,
    initial_state,
    make_plan,
    step,
    with_theory,
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


BASE_COLUMNS = (
    "kick", "mean_nr", "mean_rel", "std_nr", "std_rel",
    "rel_diff_mean_pct", "rel_diff_std_pct", "norm_nr", "norm_rel", "overlap",
)
APPROX_COLUMNS = ("mean_approx", "std_approx", "rel_diff_approx_vs_rel_pct")


@dataclass(frozen=True)
class ExperimentConfig:
    params: DimensionlessParams
    sigma0: float = 0.8
    theta0: float = math.pi
    nbar: int = 48
    kicks: int = 509
    snapshot_kicks: tuple[int, ...] = ()
    grid_size: int = 4096
    method: str = "fast"
    include_approx: bool = False
    window_override: BasisWindow | None = None
    tail_threshold: float = 1e-12
    output_dir: Path | None = None
    mean_convention: str = INTERVAL

    def validate(self) -> None:
        if self.kicks < 0:
            raise ConfigError(f"kicks must be >= 0, got {self.kicks}")
        for k in self.snapshot_kicks:
            if not 0 <= k <= self.kicks:
                raise ConfigError(f"snapshot kick {k} outside [0, {self.kicks}]")
        g = self.grid_size
        if g < 256 or g & (g - 1) != 0:
            raise ConfigError(f"grid_size must be a power of two >= 256, got {g}")
        if self.method not in ("fast", "direct"):
            raise ConfigError(f"method must be 'fast' or 'direct', got {self.method!r}")
        if self.mean_convention not in (INTERVAL, CIRCULAR):
            raise ConfigError(f"unknown mean convention {self.mean_convention!r}")
        if not 0.0 < self.tail_threshold < 1.0:
            raise ConfigError("tail_threshold must be in (0, 1)")
        if not self.sigma0 > 0.0:
            raise ConfigError(f"sigma0 must be > 0, got {self.sigma0}")
        if not 0.0 <= self.theta0 < 2.0 * math.pi:
            raise ConfigError(f"theta0 must lie in [0, 2 pi), got {self.theta0}")


@dataclass
class RunDiagnostics:
    window_used: BasisWindow
    boundary_tail: dict[str, list[float]] = field(default_factory=dict)
    norms: dict[str, list[float]] = field(default_factory=dict)
    wall_seconds: float = 0.0
    snapshot_states: dict[int, dict[str, SpectralState]] = field(default_factory=dict)

    @property
    def max_boundary_tail_mass(self) -> float:
        return max((max(v) for v in self.boundary_tail.values() if v), default=0.0)

    @property
    def max_norm_drift(self) -> float:
        return max(
            (max(abs(x - 1.0) for x in v) for v in self.norms.values() if v),
            default=0.0,
        )


@dataclass
class RunResult:
    records: list[ObservableRecord]
    snapshots: dict[int, tuple[AngularDensity, AngularDensity]]
    diagnostics: RunDiagnostics


def _make_record(n: int, states: dict[str, SpectralState], weights_win,
                 config: ExperimentConfig) -> tuple[ObservableRecord, AngularDensity, AngularDensity]:
    conv = config.mean_convention
    d_nr = density_nr(states[NR], config.grid_size)
    d_rel = density_rel(states[REL], weights_win, config.grid_size)
    m_nr = mean_angle(d_nr, conv)
    m_rel = mean_angle(d_rel, conv)
    s_nr = std_angle(d_nr, conv)
    s_rel = std_angle(d_rel, conv)
    extra: dict[str, float] = {}
    if REL_APPROX in states:
        d_ap = density_nr(states[REL_APPROX], config.grid_size)
        m_ap = mean_angle(d_ap, conv)
        extra = {
            "mean_approx": m_ap,
            "std_approx": std_angle(d_ap, conv),
            "rel_diff_approx_vs_rel_pct": rel_diff_pct(m_rel, m_ap),
        }
    rec = ObservableRecord(
        kick=n,
        mean_nr=m_nr,
        mean_rel=m_rel,
        std_nr=s_nr,
        std_rel=s_rel,
        rel_diff_mean_pct=rel_diff_pct(m_rel, m_nr),
        rel_diff_std_pct=rel_diff_pct(s_rel, s_nr),
        norm_nr=states[NR].norm(),
        norm_rel=states[REL].norm(),
        overlap=overlap(states[NR], states[REL]),
        **extra,
    )
    return rec, d_nr, d_rel


def _run_once(config: ExperimentConfig, window: BasisWindow) -> RunResult:
    t0 = time.perf_counter()
    plan = make_plan(
        config.params,
        window,
        method=config.method,
        boundary_tail_threshold=config.tail_threshold,
    )
    weights_win = build_weights(window, config.params.gamma)
    base = initial_state(config.sigma0, config.theta0, config.nbar, window, NR)
    states = {NR: base, REL: with_theory(base, REL)}
    if config.include_approx:
        states[REL_APPROX] = with_theory(base, REL_APPROX)

    diag = RunDiagnostics(window_used=window)
    diag.boundary_tail = {t: [] for t in states}
    diag.norms = {t: [] for t in states}
    snapshot_at = set(config.snapshot_kicks)

    records: list[ObservableRecord] = []
    snapshots: dict[int, tuple[AngularDensity, AngularDensity]] = {}
    for n in range(config.kicks + 1):
        if n > 0:
            states = {t: step(s, plan) for t, s in states.items()}
        rec, d_nr, d_rel = _make_record(n, states, weights_win, config)
        records.append(rec)
        for t, s in states.items():
            diag.norms[t].append(s.norm())
            if n > 0:
                diag.boundary_tail[t].append(s.boundary_tail_mass)
        if n in snapshot_at:
            snapshots[n] = (d_nr, d_rel)
            diag.snapshot_states[n] = dict(states)

    diag.wall_seconds = time.perf_counter() - t0
    return RunResult(records=records, snapshots=snapshots, diagnostics=diag)


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Run the paired NR/REL experiment described by the configuration.

    With an automatically chosen window, a window-exhaustion abort widens
    the window and reruns (the run is deterministic, so a rerun is exact);
    an explicitly overridden window is never second-guessed.
    """
    config.validate()
    if config.window_override is not None:
        return _run_once(config, config.window_override)
    window = auto_window(
        config.params, config.sigma0, config.nbar, config.kicks,
        config.tail_threshold,
    )
    bandwidth = build_kernel(config.params.kappa).bandwidth
    attempts = 0
    while True:
        try:
            return _run_once(config, window)
        except WindowExhaustionError:
            attempts += 1
            if attempts > 3:
                raise
            window = window.padded(max(16, 4 * bandwidth) * 2**attempts)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _fmt(x: float | None) -> str:
    if x is None or math.isnan(x):
        return ""
    return format(x, ".17g")


def write_csv(result: RunResult, path: str | Path) -> None:
    """Write the per-kick series plus snapshot density files next to it."""
    path = Path(path)
    include_approx = result.records and result.records[0].mean_approx is not None
    columns = BASE_COLUMNS + APPROX_COLUMNS if include_approx else BASE_COLUMNS
    lines = [",".join(columns)]
    for r in result.records:
        row = [str(r.kick)] + [_fmt(getattr(r, c)) for c in columns[1:]]
        lines.append(",".join(row))
    try:
        path.write_text("\n".join(lines) + "\n")
        for kick, (d_nr, d_rel) in sorted(result.snapshots.items()):
            for theory, dens in (("nr", d_nr), ("rel", d_rel)):
                snap = path.parent / f"density_{theory}_kick{kick}.csv"
                rows = ["angle,density"] + [
                    f"{_fmt(a)},{_fmt(v)}" for a, v in zip(dens.angles, dens.values)
                ]
                snap.write_text("\n".join(rows) + "\n")
    except OSError as err:
        raise OSError(f"writing results under {path}: {err}") from err


def read_csv(path: str | Path) -> list[ObservableRecord]:
    """Parse a series CSV back into records (inverse of write_csv)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        if list(names[:len(BASE_COLUMNS)]) != list(BASE_COLUMNS):
            raise ValueError(f"unexpected columns in {path}: {names}")
        has_approx = list(names) == list(BASE_COLUMNS + APPROX_COLUMNS)
        records = []
        for row in reader:
            kw = {"kick": int(row["kick"])}
            for c in BASE_COLUMNS[1:]:
                kw[c] = float(row[c]) if row[c] else math.nan
            if has_approx:
                for c in APPROX_COLUMNS:
                    kw[c] = float(row[c]) if row[c] else math.nan
            records.append(ObservableRecord(**kw))
    return records


def _config_payload(config: ExperimentConfig) -> dict:
    w = config.window_override
    return {
        "gamma": config.params.gamma,
        "kappa": config.params.kappa,
        "tau": config.params.tau,
        "sigma0": config.sigma0,
        "theta0": config.theta0,
        "nbar": config.nbar,
        "kicks": config.kicks,
        "snapshots": list(config.snapshot_kicks),
        "grid": config.grid_size,
        "method": config.method,
        "include_approx": config.include_approx,
        "window": None if w is None else [w.q_min, w.q_max],
        "tail": config.tail_threshold,
        "mean_convention": config.mean_convention,
        "out": None if config.output_dir is None else str(config.output_dir),
    }


def write_sidecar(result: RunResult, config: ExperimentConfig,
                  path: str | Path) -> None:
    """JSON sidecar: config echo plus run diagnostics."""
    diag = result.diagnostics
    payload = {
        "config": _config_payload(config),
        "windowUsed": [diag.window_used.q_min, diag.window_used.q_max],
        "maxBoundaryTailMass": diag.max_boundary_tail_mass,
        "maxNormDrift": diag.max_norm_drift,
        "wallClockSeconds": diag.wall_seconds,
        "version": __version__,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
