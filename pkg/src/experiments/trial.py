"""
One Monte-Carlo trial: a channel realization, every algorithm, every SNR point
"""

import time
from typing import List, Union

import numpy as np
from loguru import logger
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from ..algorithms import nn, rnn
from ..algorithms.baseline import run_min_leakage_ia
from ..config import Config
from ..exceptions import DegenerateIterateError, SecureIaError
from ..metrics import secrecy_sum_rate
from ..models import (
    AlgorithmName,
    ChannelSet,
    ExperimentSpec,
    IaResult,
    SystemConfig,
    TrialFailure,
    TrialRecord,
)
from ..system.alignment import build_state, leakage_powers, rank_profile
from ..system.channels import derive_seed, generate_channels

TrialOutcome = Union[TrialRecord, TrialFailure]


def optimise(
    algorithm: AlgorithmName,
    channels: ChannelSet,
    system: SystemConfig,
    spec: ExperimentSpec,
    seed: int,
) -> IaResult:
    """Run one design at the power stored in ``system``"""
    if algorithm == AlgorithmName.NN:
        return nn.run(channels, system, spec.nn.model_copy(update={"seed": seed}))
    if algorithm == AlgorithmName.RNN:
        return rnn.run(channels, system, spec.rnn.model_copy(update={"seed": seed}))
    # the conventional design only ever sees the legitimate links
    return run_min_leakage_ia(channels.legitimate, system, spec.baseline.iterations, seed)


def optimise_with_retries(
    algorithm: AlgorithmName,
    channels: ChannelSet,
    system: SystemConfig,
    spec: ExperimentSpec,
    trial: int,
) -> IaResult:
    """
    Optimise, redrawing the initial precoders after a degenerate iterate

    Each attempt uses its own seed stream, so retries stay reproducible.
    """
    purpose = f"precoders:{algorithm.value}"
    for attempt in Retrying(
        stop=stop_after_attempt(Config.TRIAL_RETRIES),
        retry=retry_if_exception_type(DegenerateIterateError),
        reraise=True,
    ):
        with attempt:
            number = attempt.retry_state.attempt_number - 1
            if number:
                logger.warning(
                    f"Trial {trial} {algorithm.value}: retrying with fresh initial precoders "
                    f"(attempt {number + 1})"
                )
            seed = derive_seed(spec.master_seed, trial, purpose, attempt=number)
            return optimise(algorithm, channels, system, spec, seed)
    raise AssertionError("unreachable")


def evaluate(
    algorithm: AlgorithmName,
    trial: int,
    snr_db: float,
    channels: ChannelSet,
    system: SystemConfig,
    result: IaResult,
    wall_ms: float,
) -> TrialRecord:
    """Rates and alignment diagnostics of a design at the power stored in ``system``"""
    report = secrecy_sum_rate(channels, result.precoders, system.sigma2, system.eavesdropper_noise)
    state = build_state(channels, result.precoders, result.receivers)
    interference, wiretap = leakage_powers(state)
    interference_rank, wiretap_rank, sigma_min = rank_profile(state)
    return TrialRecord(
        algorithm=algorithm,
        trial=trial,
        snr_db=snr_db,
        ssr=report.ssr,
        rates=report.per_user_rate,
        leakages=report.per_user_leakage,
        interference_power=interference,
        wiretap_power=wiretap,
        interference_rank=interference_rank,
        wiretap_rank=wiretap_rank,
        min_sigma_desired=sigma_min,
        initial_objective=result.initial_objective,
        final_objective=result.final_objective,
        iterations=result.iterations,
        wall_ms=wall_ms,
    )


def _rescaled(result: IaResult, factor: float) -> IaResult:
    return result.model_copy(update={"precoders": result.precoders.scaled(factor)})


def _run_algorithm(
    spec: ExperimentSpec, trial: int, algorithm: AlgorithmName, channels: ChannelSet
) -> List[TrialRecord]:
    records: List[TrialRecord] = []
    reference = spec.system.at_snr_db(spec.reference_snr_db)

    if spec.reoptimize_per_snr:
        for snr_db in spec.snr_db:
            system = reference.at_snr_db(snr_db)
            start = time.perf_counter()
            result = optimise_with_retries(algorithm, channels, system, spec, trial)
            wall_ms = (time.perf_counter() - start) * 1e3 if spec.record_wall_time else 0.0
            records.append(evaluate(algorithm, trial, snr_db, channels, system, result, wall_ms))
        return records

    start = time.perf_counter()
    result = optimise_with_retries(algorithm, channels, reference, spec, trial)
    wall_ms = (time.perf_counter() - start) * 1e3 if spec.record_wall_time else 0.0
    for snr_db in spec.snr_db:
        system = reference.at_snr_db(snr_db)
        # F scales with sqrt(P_t) so the Gram convention holds at every SNR point
        factor = float(np.sqrt(system.P_t / reference.P_t))
        records.append(
            evaluate(
                algorithm, trial, snr_db, channels, system, _rescaled(result, factor), wall_ms
            )
        )
    return records


def run_trial(spec: ExperimentSpec, trial: int) -> List[TrialOutcome]:
    """
    Run every configured algorithm on one channel realization

    A failing algorithm yields one TrialFailure and does not affect the
    others. Channels depend only on (master_seed, trial).
    """
    channels = generate_channels(spec.system, derive_seed(spec.master_seed, trial, "channels"))
    outcomes: List[TrialOutcome] = []
    for algorithm in spec.algorithms:
        try:
            outcomes.extend(_run_algorithm(spec, trial, algorithm, channels))
        except (SecureIaError, np.linalg.LinAlgError) as e:
            logger.error(f"Trial {trial} {algorithm.value} failed: {type(e).__name__}: {e}")
            outcomes.append(
                TrialFailure(
                    algorithm=algorithm,
                    trial=trial,
                    error_type=type(e).__name__,
                    message=str(e),
                )
            )
    logger.info(f"Trial {trial} finished ({len(outcomes)} outcomes)")
    return outcomes
