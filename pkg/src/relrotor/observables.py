"""Angular densities and their summary statistics.

Densities are reconstructed on a uniform angle grid by inverse transform
of the (zero-padded) coefficient array.  Because every density here is a
trigonometric polynomial of bounded degree, its interval moments on
[0, 2 pi) are computed exactly from its Fourier coefficients instead of
by a Riemann sum; the results are then independent of the grid size once
the grid resolves the polynomial.

The mean/std convention is plain interval moments by default.  A circular
convention (first trigonometric moment, circular standard deviation) is
available behind a flag for sensitivity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BasisWindow, RelativisticWeights
from .propagators import NR, REL, REL_APPROX, SpectralState

TWO_PI = 2.0 * math.pi

INTERVAL = "interval"
CIRCULAR = "circular"


class ClipCounter:
    """Counts negative-variance clips caused by rounding."""

    def __init__(self) -> None:
        self.count = 0

    def bump(self) -> None:
        self.count += 1


negative_variance_clips = ClipCounter()


@dataclass(frozen=True)
class AngularDensity:
    """Probability density per radian on the uniform grid phi_j = 2 pi j / M."""

    grid_size: int
    angles: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        """Riemann sum (2 pi / M) sum rho_j; equals the source-state norm."""
        return float(np.sum(self.values)) * TWO_PI / self.grid_size


def _synthesize(coeffs: np.ndarray, window: BasisWindow, grid_size: int) -> np.ndarray:
    """Field values sum_q a_q e^{i q phi_j} on the grid."""
    if grid_size < 2 * window.size:
        raise ValueError(
            f"grid size {grid_size} would alias a {window.size}-mode window; "
            f"need at least {2 * window.size}"
        )
    padded = np.zeros(grid_size, dtype=np.complex128)
    padded[window.qs() % grid_size] = coeffs
    return grid_size * np.fft.ifft(padded)


def _grid(grid_size: int) -> np.ndarray:
    return TWO_PI * np.arange(grid_size) / grid_size


def density_nr(state: SpectralState, grid_size: int = 4096) -> AngularDensity:
    """Angular density of a scalar (NR or REL_APPROX) state."""
    if state.theory not in (NR, REL_APPROX):
        raise ValueError(f"density_nr expects an NR-type state, got {state.theory}")
    f = _synthesize(state.coeffs, state.window, grid_size)
    values = (f.real**2 + f.imag**2) / TWO_PI
    values.flags.writeable = False
    return AngularDensity(grid_size, _grid(grid_size), values)


def density_rel(state: SpectralState, weights: RelativisticWeights,
                grid_size: int = 4096) -> AngularDensity:
    """Angular density of a relativistic state: both spinor components."""
    if state.theory != REL:
        raise ValueError(f"density_rel expects a REL state, got {state.theory}")
    if weights.window != state.window:
        raise ValueError("weights window does not match state window")
    f_up = _synthesize(state.coeffs * weights.c, state.window, grid_size)
    f_dn = _synthesize(state.coeffs * weights.s, state.window, grid_size)
    values = (f_up.real**2 + f_up.imag**2 + f_dn.real**2 + f_dn.imag**2) / TWO_PI
    values.flags.writeable = False
    return AngularDensity(grid_size, _grid(grid_size), values)


def _interval_moments(d: AngularDensity) -> tuple[float, float, float]:
    """(mass, <phi>, <phi^2>) as exact integrals of the trig-poly density.

    Uses int_0^{2 pi} phi e^{i k phi} dphi = -2 pi i / k and
    int_0^{2 pi} phi^2 e^{i k phi} dphi = -4 pi^2 i / k + 4 pi / k^2
    for k != 0, folding conjugate pairs into real sums.
    """
    m = d.grid_size
    spec = np.fft.rfft(d.values) / m
    mass = TWO_PI * spec[0].real
    k = np.arange(1, (m + 1) // 2)  # Nyquist bin excluded (zero for resolved grids)
    re = spec[1:len(k) + 1].real
    im = spec[1:len(k) + 1].imag
    first = 2.0 * math.pi**2 * spec[0].real + 4.0 * math.pi * np.sum(im / k)
    second = (8.0 * math.pi**3 / 3.0) * spec[0].real + np.sum(
        8.0 * math.pi**2 * im / k + 8.0 * math.pi * re / k**2
    )
    return mass, first / mass, second / mass


def mean_angle(d: AngularDensity, convention: str = INTERVAL) -> float:
    """Mean angle of a density normalized to ~1."""
    if convention == INTERVAL:
        return _interval_moments(d)[1]
    if convention == CIRCULAR:
        z = np.sum(d.values * np.exp(1j * d.angles)) * TWO_PI / d.grid_size
        return float(np.angle(z)) % TWO_PI
    raise ValueError(f"unknown convention {convention!r}")


def std_angle(d: AngularDensity, convention: str = INTERVAL) -> float:
    """Angular standard deviation under the chosen convention."""
    if convention == INTERVAL:
        mass, mean, second = _interval_moments(d)
        var = second - mean * mean
        if var < 0.0:
            negative_variance_clips.bump()
            var = 0.0
        return math.sqrt(var)
    if convention == CIRCULAR:
        mass = d.integral()
        z = np.sum(d.values * np.exp(1j * d.angles)) * TWO_PI / d.grid_size
        r_bar = min(abs(z) / mass, 1.0)
        if r_bar <= 0.0:
            return math.inf
        return math.sqrt(-2.0 * math.log(r_bar))
    raise ValueError(f"unknown convention {convention!r}")


def rel_diff_pct(rel_value: float, nr_value: float) -> float:
    """Percent difference with respect to the relativistic value.

    Undefined at rel_value = 0; reported as NaN (serialized as an empty
    CSV field) rather than inventing another denominator.
    """
    if rel_value == 0.0:
        return math.nan
    return 100.0 * abs(rel_value - nr_value) / abs(rel_value)


def overlap(a: SpectralState, b: SpectralState) -> float:
    """|<a|b>| between same-window coefficient vectors."""
    if a.window != b.window:
        raise ValueError("overlap requires identical windows")
    return float(abs(np.vdot(a.coeffs, b.coeffs)))


@dataclass(frozen=True)
class ObservableRecord:
    """Per-kick summary row; kick n is the state after n map applications."""

    kick: int
    mean_nr: float
    mean_rel: float
    std_nr: float
    std_rel: float
    rel_diff_mean_pct: float
    rel_diff_std_pct: float
    norm_nr: float
    norm_rel: float
    overlap: float
    mean_approx: float | None = None
    std_approx: float | None = None
    rel_diff_approx_vs_rel_pct: float | None = None
