"""Parsing and validation of the simulator's CSV outputs.

The pipeline consumes only files: the per-kick series CSV and the
two-column density snapshot files (``density_<theory>_kick<k>.csv``).
Everything is validated against the published schema before any figure
work starts; a missing column is reported by name.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SERIES_COLUMNS = (
    "kick", "mean_nr", "mean_rel", "std_nr", "std_rel",
    "rel_diff_mean_pct", "rel_diff_std_pct", "norm_nr", "norm_rel", "overlap",
)

_DENSITY_NAME = re.compile(r"density_(nr|rel)_kick(\d+)\.csv$")


class SchemaError(ValueError):
    """Input file does not match the expected CSV schema."""


@dataclass(frozen=True)
class Series:
    kicks: np.ndarray
    rel_diff_mean_pct: np.ndarray  # NaN where the reference value was zero
    rel_diff_std_pct: np.ndarray


@dataclass(frozen=True)
class DensitySnapshot:
    theory: str  # "nr" | "rel"
    kick: int
    angles: np.ndarray
    values: np.ndarray


def _float_or_nan(text: str) -> float:
    return float(text) if text else math.nan


def load_series(path: str | Path) -> Series:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames
        if names is None:
            raise SchemaError(f"{path}: empty file, expected a series CSV header")
        for col in SERIES_COLUMNS:
            if col not in names:
                raise SchemaError(f"{path}: missing column {col!r}")
        kicks, dmean, dstd = [], [], []
        for row in reader:
            kicks.append(int(row["kick"]))
            dmean.append(_float_or_nan(row["rel_diff_mean_pct"]))
            dstd.append(_float_or_nan(row["rel_diff_std_pct"]))
    if not kicks:
        raise SchemaError(f"{path}: series has a header but no data rows")
    return Series(np.array(kicks), np.array(dmean), np.array(dstd))


def load_density(path: str | Path) -> DensitySnapshot:
    path = Path(path)
    match = _DENSITY_NAME.search(path.name)
    if match is None:
        raise SchemaError(
            f"{path}: density files must be named density_<theory>_kick<k>.csv"
        )
    theory, kick = match.group(1), int(match.group(2))
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected 'angle,density'")
        if [h.strip() for h in header] != ["angle", "density"]:
            raise SchemaError(f"{path}: expected header 'angle,density', got {header}")
        angles, values = [], []
        for row in reader:
            if len(row) != 2:
                raise SchemaError(f"{path}: expected two columns, got {row}")
            angles.append(float(row[0]))
            values.append(float(row[1]))
    if not angles:
        raise SchemaError(f"{path}: density file has no data rows")
    return DensitySnapshot(theory, kick, np.array(angles), np.array(values))


def pair_snapshots(paths: tuple[Path, Path]) -> tuple[DensitySnapshot, DensitySnapshot]:
    """Load one snapshot pair and return it as (relativistic, non-relativistic)."""
    a, b = (load_density(p) for p in paths)
    if a.kick != b.kick:
        raise SchemaError(
            f"snapshot pair mixes kicks {a.kick} and {b.kick}"
        )
    by_theory = {s.theory: s for s in (a, b)}
    if set(by_theory) != {"nr", "rel"}:
        raise SchemaError(
            f"snapshot pair needs one 'nr' and one 'rel' file, got "
            f"{sorted(s.theory for s in (a, b))}"
        )
    return by_theory["rel"], by_theory["nr"]
