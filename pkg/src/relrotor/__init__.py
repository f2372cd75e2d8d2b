"""Spectral simulator for a periodically kicked electron on a ring.

Evolves the same initial state under the non-relativistic and the
relativistic one-kick maps and quantifies when and how fast the two
theories' predictions diverge.
"""

__version__ = "0.1.0"

from .core import (
    BasisWindow,
    DimensionlessParams,
    KickKernel,
    PhaseTable,
    RelativisticWeights,
    bessel_j,
    build_kernel,
    build_phases,
    build_weights,
    norm_constant,
    omega,
)
from .observables import (
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
    ConsistencyError,
    SpectralState,
    StepPlan,
    WindowExhaustionError,
    auto_window,
    initial_state,
    make_plan,
    step,
    step_nr,
    step_rel,
    step_rel_approx,
    with_theory,
)
from .runner import (
    ConfigError,
    ExperimentConfig,
    RunResult,
    read_csv,
    run_experiment,
    write_csv,
    write_sidecar,
)

__all__ = [
    "__version__",
    "BasisWindow", "DimensionlessParams", "KickKernel", "PhaseTable",
    "RelativisticWeights", "bessel_j", "build_kernel", "build_phases",
    "build_weights", "norm_constant", "omega",
    "AngularDensity", "ObservableRecord", "density_nr", "density_rel",
    "mean_angle", "overlap", "rel_diff_pct", "std_angle",
    "NR", "REL", "REL_APPROX", "ConsistencyError", "SpectralState",
    "StepPlan", "WindowExhaustionError", "auto_window", "initial_state",
    "make_plan", "step", "step_nr", "step_rel", "step_rel_approx",
    "with_theory",
    "ConfigError", "ExperimentConfig", "RunResult", "read_csv",
    "run_experiment", "write_csv", "write_sidecar",
]
