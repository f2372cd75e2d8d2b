"""State construction and the kick-to-kick maps.

Three stroboscopic maps act on spectral states sampled just before each
kick: the non-relativistic map, the relativistic map (extra spinor-overlap
factor inside the sum, relativistic free phase outside), and the
approximate relativistic map (non-relativistic map times the leading
phase correction).

The relativistic kick sum is O(N^2) written literally.  Because the
overlap factor separates as Omega_{r,q} = c_r c_q + s_r s_q, it reduces
exactly to two banded convolutions; the literal double sum is kept behind
method="direct" as a permanent oracle for the fast path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    BasisWindow,
    DimensionlessParams,
    KickKernel,
    PhaseTable,
    RelativisticWeights,
    build_kernel,
    build_phases,
    build_weights,
    norm_constant,
)

NR = "NR"
REL = "REL"
REL_APPROX = "REL_APPROX"
_THEORIES = (NR, REL, REL_APPROX)

# banded convolution is cheaper than transforms up to this half width
_FFT_BANDWIDTH_THRESHOLD = 64


class WindowExhaustionError(RuntimeError):
    """Amplitude reached the window edge; caller must widen and rerun."""

    def __init__(self, window: BasisWindow, kick_index: int, tail_mass: float,
                 threshold: float):
        self.window = window
        self.kick_index = kick_index
        self.tail_mass = tail_mass
        self.threshold = threshold
        super().__init__(
            f"boundary tail mass {tail_mass:.3e} exceeds threshold {threshold:.3e} "
            f"at kick {kick_index} on window [{window.q_min}, {window.q_max}]; "
            f"widen the window and rerun"
        )


class ConsistencyError(RuntimeError):
    """Fast and direct propagation paths disagree beyond tolerance."""


@dataclass(frozen=True)
class SpectralState:
    """Expansion coefficients over a finite angular-momentum window."""

    window: BasisWindow
    coeffs: np.ndarray  # complex128, index i <-> q = q_min + i
    kick_count: int
    theory: str
    boundary_tail_mass: float = 0.0  # mass dropped outside the window by the last kick

    def __post_init__(self) -> None:
        if self.theory not in _THEORIES:
            raise ValueError(f"unknown theory tag {self.theory!r}")
        if self.kick_count < 0:
            raise ValueError("kick_count must be >= 0")
        if len(self.coeffs) != self.window.size:
            raise ValueError(
                f"coefficient array length {len(self.coeffs)} does not match "
                f"window size {self.window.size}"
            )
        if not np.all(np.isfinite(self.coeffs.view(np.float64))):
            raise ValueError("non-finite coefficient")

    def norm(self) -> float:
        """Sum of squared magnitudes."""
        return float(np.sum(self.coeffs.real**2 + self.coeffs.imag**2))


@dataclass(frozen=True)
class StepPlan:
    """Precomputed tables shared by every kick on a fixed window."""

    params: DimensionlessParams
    window: BasisWindow
    kernel: KickKernel
    phases: PhaseTable
    weights: RelativisticWeights  # on the window padded by the kernel bandwidth
    method: str  # "fast" | "direct"
    boundary_tail_threshold: float
    self_check: bool = False
    nr_matrix: np.ndarray | None = field(default=None, repr=False)
    rel_matrix: np.ndarray | None = field(default=None, repr=False)


def _banded_matrix(kernel: KickKernel, window: BasisWindow) -> np.ndarray:
    """Dense K_{r-q} with r over the padded window and q over the window."""
    m = kernel.bandwidth
    r = window.padded(m).qs()
    q = window.qs()
    d = r[:, None] - q[None, :]
    mat = np.zeros(d.shape, dtype=np.complex128)
    mask = np.abs(d) <= m
    mat[mask] = kernel.entries[d[mask] + m]
    return mat


def _omega_matrix_literal(window: BasisWindow, gamma: float,
                          bandwidth: int) -> np.ndarray:
    # independent route: evaluates the overlap from the normalization
    # constants directly, not through the separable (c, s) arrays
    rs = window.padded(bandwidth).qs()
    qs = window.qs()
    n_r = np.array([norm_constant(int(r), gamma) for r in rs])
    n_q = np.array([norm_constant(int(q), gamma) for q in qs])
    two_pi = 2.0 * math.pi
    p_r = 1.0 - two_pi * n_r**2
    p_q = 1.0 - two_pi * n_q**2
    return two_pi * np.outer(n_r, n_q) + np.sqrt(
        np.outer(np.clip(p_r, 0.0, None), np.clip(p_q, 0.0, None))
    )


def make_plan(
    params: DimensionlessParams,
    window: BasisWindow,
    method: str = "fast",
    boundary_tail_threshold: float = 1e-12,
    kernel_tol: float = 1e-16,
    self_check: bool = False,
) -> StepPlan:
    """Build kernel, phases and weights for repeated stepping on one window."""
    if method not in ("fast", "direct"):
        raise ValueError(f"method must be 'fast' or 'direct', got {method!r}")
    if not 0.0 < boundary_tail_threshold < 1.0:
        raise ValueError("boundary_tail_threshold must be in (0, 1)")
    kernel = build_kernel(params.kappa, kernel_tol)
    phases = build_phases(params, window)
    weights = build_weights(window.padded(kernel.bandwidth), params.gamma)
    nr_matrix = rel_matrix = None
    if method == "direct" or self_check:
        nr_matrix = _banded_matrix(kernel, window)
        rel_matrix = nr_matrix * _omega_matrix_literal(
            window, params.gamma, kernel.bandwidth
        )
    return StepPlan(
        params=params,
        window=window,
        kernel=kernel,
        phases=phases,
        weights=weights,
        method=method,
        boundary_tail_threshold=boundary_tail_threshold,
        self_check=self_check,
        nr_matrix=nr_matrix,
        rel_matrix=rel_matrix,
    )


# ---------------------------------------------------------------------------
# Initial state
# ---------------------------------------------------------------------------

def initial_state(
    sigma0: float,
    theta0: float,
    nbar: int,
    window: BasisWindow,
    theory: str = NR,
) -> SpectralState:
    """Gaussian initial coefficients, renormalized to exact unit norm.

    The resulting angular density is approximately Gaussian with mean
    theta0 and standard deviation sigma0 (for sigma0 < 1).
    """
    if not sigma0 > 0.0:
        raise ValueError(f"sigma0 must be > 0, got {sigma0!r}")
    if not 0.0 <= theta0 < 2.0 * math.pi:
        raise ValueError(f"theta0 must lie in [0, 2 pi), got {theta0!r}")
    half = math.ceil(8.0 / sigma0)
    if window.q_min > nbar - half or window.q_max < nbar + half:
        raise ValueError(
            f"window [{window.q_min}, {window.q_max}] too narrow for the "
            f"initial packet: need at least [{nbar - half}, {nbar + half}]"
        )
    n = window.qs()
    mag = (2.0 * sigma0**2 / math.pi) ** 0.25 * np.exp(-(sigma0**2) * (n - nbar) ** 2.0)
    coeffs = mag * np.exp(-1j * theta0 * n)
    coeffs /= math.sqrt(float(np.sum(mag**2)))
    coeffs.flags.writeable = False
    return SpectralState(window=window, coeffs=coeffs, kick_count=0, theory=theory)


def with_theory(state: SpectralState, theory: str) -> SpectralState:
    """Same coefficients under a different theory tag."""
    return replace(state, theory=theory)


# ---------------------------------------------------------------------------
# Kick maps
# ---------------------------------------------------------------------------

def _linear_convolve(coeffs: np.ndarray, kernel: KickKernel) -> np.ndarray:
    """Full linear convolution, output length N + 2M (never circular)."""
    if kernel.bandwidth <= _FFT_BANDWIDTH_THRESHOLD:
        return np.convolve(coeffs, kernel.entries)
    n_out = len(coeffs) + 2 * kernel.bandwidth
    n_fft = 1 << (n_out - 1).bit_length()  # zero-pads past n_out: no wraparound
    fa = np.fft.fft(coeffs, n_fft)
    fk = np.fft.fft(kernel.entries, n_fft)
    return np.fft.ifft(fa * fk)[:n_out]


def _fast_output(coeffs: np.ndarray, plan: StepPlan, weighted: bool) -> np.ndarray:
    if not weighted:
        return _linear_convolve(coeffs, plan.kernel)
    m = plan.kernel.bandwidth
    n = plan.window.size
    c_pad = plan.weights.c
    s_pad = plan.weights.s
    c_in = c_pad[m:m + n]
    s_in = s_pad[m:m + n]
    conv_c = _linear_convolve(coeffs * c_in, plan.kernel)
    conv_s = _linear_convolve(coeffs * s_in, plan.kernel)
    return c_pad * conv_c + s_pad * conv_s


def _direct_output(coeffs: np.ndarray, plan: StepPlan, weighted: bool) -> np.ndarray:
    mat = plan.rel_matrix if weighted else plan.nr_matrix
    return mat @ coeffs


def _kick(state: SpectralState, plan: StepPlan, phase_factors: np.ndarray,
          weighted: bool) -> SpectralState:
    if plan.window != state.window:
        raise ValueError("plan and state windows differ")
    if plan.self_check or plan.method == "direct":
        full = _direct_output(state.coeffs, plan, weighted)
        if plan.self_check:
            fast = _fast_output(state.coeffs, plan, weighted)
            worst = float(np.max(np.abs(fast - full)))
            if worst > 1e-12:
                raise ConsistencyError(
                    f"fast/direct disagreement {worst:.3e} at kick "
                    f"{state.kick_count + 1}"
                )
            if plan.method == "fast":
                full = fast
    else:
        full = _fast_output(state.coeffs, plan, weighted)

    m = plan.kernel.bandwidth
    n = state.window.size
    tail = full[:m], full[m + n:]
    tail_mass = float(sum(np.sum(t.real**2 + t.imag**2) for t in tail))
    if tail_mass > plan.boundary_tail_threshold:
        raise WindowExhaustionError(
            state.window, state.kick_count + 1, tail_mass,
            plan.boundary_tail_threshold,
        )
    new_coeffs = full[m:m + n] * phase_factors
    new_coeffs.flags.writeable = False
    return SpectralState(
        window=state.window,
        coeffs=new_coeffs,
        kick_count=state.kick_count + 1,
        theory=state.theory,
        boundary_tail_mass=tail_mass,
    )


def step_nr(state: SpectralState, plan: StepPlan) -> SpectralState:
    """One non-relativistic kick followed by the free phase."""
    if state.theory != NR:
        raise ValueError(f"step_nr requires an NR state, got {state.theory}")
    return _kick(state, plan, plan.phases.nr_factor, weighted=False)


def step_rel(state: SpectralState, plan: StepPlan) -> SpectralState:
    """One relativistic kick (overlap-weighted) followed by the free phase."""
    if state.theory != REL:
        raise ValueError(f"step_rel requires a REL state, got {state.theory}")
    return _kick(state, plan, plan.phases.rel_factor, weighted=True)


def step_rel_approx(state: SpectralState, plan: StepPlan) -> SpectralState:
    """Non-relativistic kick with the leading relativistic phase correction."""
    if state.theory != REL_APPROX:
        raise ValueError(
            f"step_rel_approx requires a REL_APPROX state, got {state.theory}"
        )
    return _kick(state, plan, plan.phases.approx_factor, weighted=False)


_STEPPERS = {NR: step_nr, REL: step_rel, REL_APPROX: step_rel_approx}


def step(state: SpectralState, plan: StepPlan) -> SpectralState:
    """Dispatch on the state's theory tag."""
    return _STEPPERS[state.theory](state, plan)


# ---------------------------------------------------------------------------
# Window sizing
# ---------------------------------------------------------------------------

def auto_window(
    params: DimensionlessParams,
    sigma0: float,
    nbar: int,
    max_kicks: int,
    tail_threshold: float,
) -> BasisWindow:
    """Pick a window holding the initial packet plus kick-spread headroom.

    The boundary monitor still runs every kick; this only has to be a good
    first guess.  The half width always covers the initial-state builder's
    own support requirement, whatever the tail threshold.
    """
    if not 0.0 < tail_threshold < 1.0:
        raise ValueError("tail_threshold must be in (0, 1)")
    if not sigma0 > 0.0:
        raise ValueError(f"sigma0 must be > 0, got {sigma0!r}")
    if max_kicks < 0:
        raise ValueError("max_kicks must be >= 0")

    # smallest half width with relative Gaussian tail mass below threshold
    d_max = int(28.0 / sigma0) + 2  # exp(-2 sigma0^2 d^2) underflows beyond
    w = np.exp(-2.0 * sigma0**2 * np.arange(0, d_max, dtype=float) ** 2)
    total = w[0] + 2.0 * np.sum(w[1:])
    tail = 2.0 * np.cumsum(w[::-1])[::-1]
    half = d_max - 1
    for h in range(0, d_max - 1):
        if tail[h + 1] / total < tail_threshold:
            half = h
            break
    half = max(half, math.ceil(8.0 / sigma0))

    bandwidth = build_kernel(params.kappa).bandwidth
    margin = bandwidth * max(4, math.isqrt(max(max_kicks, 1) - 1) + 1) + 4
    return BasisWindow(nbar - half - margin, nbar + half + margin)
