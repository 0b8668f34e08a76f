"""
Shared fixtures: small MCMC settings, simulated trials and draw builders.
"""
from typing import Sequence

import numpy as np
import pytest

from hurdlecea.core.data import TrialData
from hurdlecea.posterior import PosteriorDraws
from hurdlecea.schemas import (
    ArmTruth,
    CostFamily,
    EconSection,
    EffectFamily,
    McmcConfig,
    ModelSection,
    ReportSection,
    RunConfig,
    SensitivitySection,
    TruthParams,
    WtpGrid,
)
from hurdlecea.synth import case_study_truth, simulate_dataset


@pytest.fixture
def fast_cfg() -> McmcConfig:
    """Short chains: 200 retained draws per chain."""
    return McmcConfig(n_iter=1500, n_burnin=500, thin=5, n_chains=2, seed=11)


@pytest.fixture
def tiny_cfg() -> McmcConfig:
    return McmcConfig(n_iter=300, n_burnin=100, thin=2, n_chains=2, seed=5)


@pytest.fixture
def trial() -> TrialData:
    return simulate_dataset(case_study_truth(), (119, 136), seed=3)


@pytest.fixture
def zero_rich_truth() -> TruthParams:
    """Both arms have plenty of null costs."""
    return TruthParams(
        arms=(
            ArmTruth(p=0.3, psi0=220.0, zeta0=120.0, xi=0.9, gamma=0.0, tau=20.0),
            ArmTruth(p=0.25, psi0=380.0, zeta0=150.0, xi=1.0, gamma=0.0, tau=20.0),
        ),
        cost_family=CostFamily.GAMMA,
        effect_family=EffectFamily.BETA,
    )


@pytest.fixture
def zero_rich_trial(zero_rich_truth) -> TrialData:
    return simulate_dataset(zero_rich_truth, 120, seed=17)


@pytest.fixture
def small_run_config(tiny_cfg) -> RunConfig:
    return RunConfig(
        mcmc=tiny_cfg,
        econ=EconSection(wtp=WtpGrid(start=0, stop=20000, step=1000)),
        sensitivity=SensitivitySection(W_grid=[100.0, 1000.0]),
        report=ReportSection(svg=True, dic=True),
        model=ModelSection(),
    )


@pytest.fixture
def trial_csv(tmp_path, trial):
    from hurdlecea.utils.csv_io import write_dataset

    return write_dataset(trial, tmp_path / "trial.csv")


def make_econ_draws(mu_e: Sequence[Sequence[float]], mu_c: Sequence[Sequence[float]]) -> PosteriorDraws:
    """Single-chain draws carrying only per-arm mean effects and costs; rows are draws."""
    mu_e = np.asarray(mu_e, dtype=float).reshape(-1, 2)
    mu_c = np.asarray(mu_c, dtype=float).reshape(-1, 2)
    values = np.column_stack([mu_e[:, 0], mu_e[:, 1], mu_c[:, 0], mu_c[:, 1]])[None, :, :]
    return PosteriorDraws(values=values, columns=["mu_e_0", "mu_e_1", "mu_c_0", "mu_c_1"])
