import numpy as np
import pytest

from relrotor import BasisWindow, DimensionlessParams, ExperimentConfig, run_experiment

PAPER_PARAMS = DimensionlessParams(gamma=2e-7, kappa=1e-7, tau=1e6)
PAPER_WINDOW = BasisWindow(0, 96)


def paper_config(**overrides) -> ExperimentConfig:
    base = dict(
        params=PAPER_PARAMS,
        sigma0=0.8,
        theta0=np.pi,
        nbar=48,
        kicks=509,
        snapshot_kicks=(52, 509),
        grid_size=4096,
        method="fast",
        include_approx=False,
        window_override=PAPER_WINDOW,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture(scope="session")
def paper_run():
    """The headline 509-kick run, with the approximate map alongside."""
    return run_experiment(paper_config(include_approx=True))


@pytest.fixture(scope="session")
def paper_run_direct():
    return run_experiment(paper_config(method="direct"))
