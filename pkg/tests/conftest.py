import numpy as np
import pytest

from src.models import ChannelSet, SystemConfig, TrialRecord
from src.solver.problem import SolverOptions
from src.system.channels import generate_channels


@pytest.fixture
def small_config() -> SystemConfig:
    """(4x4, 2, 1)^3: proper, solves in milliseconds"""
    return SystemConfig(K=3, N_t=4, N_r=4, N_re=2, d=1)


@pytest.fixture
def small_channels(small_config: SystemConfig) -> ChannelSet:
    return generate_channels(small_config, seed=11)


@pytest.fixture
def system_18x12() -> SystemConfig:
    return SystemConfig(K=3, N_t=18, N_r=12, N_re=9, d=3, P_t=1000.0)


@pytest.fixture
def system_15x15() -> SystemConfig:
    return SystemConfig(K=3, N_t=15, N_r=15, N_re=9, d=3, P_t=1000.0)


@pytest.fixture
def fast_solver() -> SolverOptions:
    return SolverOptions(tolerance=1e-7, max_iterations=8000, penalty=1.0)


def isolated_channels(config: SystemConfig, seed: int = 3) -> ChannelSet:
    """Direct links random, every cross and eavesdropper link zero"""
    channels = generate_channels(config, seed)
    legitimate = np.zeros_like(channels.legitimate)
    for k in range(config.K):
        legitimate[k, k] = channels.legitimate[k, k]
    return ChannelSet(
        legitimate=legitimate, eavesdropper=np.zeros_like(channels.eavesdropper), seed=seed
    )


def make_record(algorithm: str, trial: int, snr_db: float, ssr: float = 1.0, users: int = 3):
    return TrialRecord(
        algorithm=algorithm,
        trial=trial,
        snr_db=snr_db,
        ssr=ssr,
        rates=[ssr / users + 0.5] * users,
        leakages=[0.5] * users,
        interference_power=1e-3 * (trial + 1),
        wiretap_power=0.25,
        interference_rank=0,
        wiretap_rank=0,
        min_sigma_desired=0.1,
        initial_objective=10.0,
        final_objective=1e-4,
        iterations=3,
    )
