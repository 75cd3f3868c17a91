"""
System model: random channels, initial filters, properness conditions
"""

import zlib

import numpy as np
import scipy.linalg
from loguru import logger

from ..exceptions import DegenerateIterateError
from ..models import ChannelSet, PrecoderSet, PropernessReport, ReceiverSet, SystemConfig

RANK_FLOOR = 1e-12


def derive_seed(master_seed: int, trial: int, purpose: str, attempt: int = 0) -> int:
    """
    Independent integer seed for one (trial, purpose) stream

    Streams are keyed by name, so adding an algorithm never changes the
    seeds handed to existing purposes.
    """
    key = zlib.crc32(purpose.encode("utf-8"))
    sequence = np.random.SeedSequence([master_seed, trial, key, attempt])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def complex_gaussian(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    """CN(0, 1) entries: real and imaginary parts i.i.d. N(0, 1/2)"""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_channels(config: SystemConfig, seed: int) -> ChannelSet:
    """
    Draw every link H[k][l] i.i.d. CN(0, 1)

    Args:
        config: System dimensions
        seed: RNG seed; the same seed reproduces identical matrices

    Returns:
        Legitimate links (K, K, N_r, N_t) and eavesdropper links (K, N_re, N_t)
    """
    rng = np.random.default_rng(seed)
    legitimate = complex_gaussian(rng, (config.K, config.K, config.N_r, config.N_t))
    eavesdropper = complex_gaussian(rng, (config.K, config.N_re, config.N_t))
    return ChannelSet(legitimate=legitimate, eavesdropper=eavesdropper, seed=seed)


def check_properness(config: SystemConfig) -> PropernessReport:
    """
    Evaluate the properness conditions with integer arithmetic only

    (a) N_t − d ≥ N_re, (b) N_r ≥ K·d, (c) N_re·(K−1) ≤ K(N_t+N_r) − (K²+1)d,
    the last one being vacuous for K = 1.
    """
    K, d = config.K, config.d
    transmit = config.N_t - d >= config.N_re
    receive = config.N_r >= K * d
    if K == 1:
        eavesdropper = True
    else:
        eavesdropper = config.N_re * (K - 1) <= K * (config.N_t + config.N_r) - (K * K + 1) * d
    return PropernessReport(
        system=config.label,
        transmit_condition=transmit,
        receive_condition=receive,
        eavesdropper_condition=eavesdropper,
    )


def orthonormalize(matrix: np.ndarray, column_scale: float = 1.0) -> np.ndarray:
    """
    Thin-QR orthonormal basis of the column span, scaled by sqrt(column_scale)

    The phases are fixed so that R has a positive real diagonal; an input
    with orthonormal columns is therefore returned unchanged.

    Raises:
        DegenerateIterateError: σ_min < 1e−12·σ_max
    """
    singular = np.linalg.svd(matrix, compute_uv=False)
    sigma_max = float(singular[0]) if singular.size else 0.0
    sigma_min = float(singular[-1]) if singular.size else 0.0
    if sigma_max == 0.0 or sigma_min < RANK_FLOOR * sigma_max:
        raise DegenerateIterateError(
            f"cannot orthonormalize {matrix.shape[0]}x{matrix.shape[1]} matrix: "
            f"sigma_min={sigma_min:.3e}, sigma_max={sigma_max:.3e}",
            sigma_min=sigma_min,
            sigma_max=sigma_max,
        )
    Q, R = scipy.linalg.qr(matrix, mode="economic")
    diagonal = np.diag(R)
    phases = diagonal / np.abs(diagonal)
    return (Q * phases) * np.sqrt(column_scale)


def orthonormalize_precoders(F: np.ndarray, config: SystemConfig) -> PrecoderSet:
    """Re-impose F_k^H F_k = (P_t/d)·I on every user"""
    return PrecoderSet(F=np.stack([orthonormalize(F_k, config.stream_power) for F_k in F]))


def orthonormalize_receivers(W: np.ndarray) -> ReceiverSet:
    """Re-impose W_k^H W_k = I on every user"""
    return ReceiverSet(W=np.stack([orthonormalize(W_k, 1.0) for W_k in W]))


def random_precoders(config: SystemConfig, seed: int) -> PrecoderSet:
    """Random F_k with F_k^H F_k = (P_t/d)·I_d"""
    rng = np.random.default_rng(seed)
    draws = complex_gaussian(rng, (config.K, config.N_t, config.d))
    logger.debug(f"Drawing initial precoders for {config.label} (seed {seed})")
    return orthonormalize_precoders(draws, config)


def random_receivers(config: SystemConfig, seed: int) -> ReceiverSet:
    """Random W_k with W_k^H W_k = I_d"""
    rng = np.random.default_rng(seed)
    draws = complex_gaussian(rng, (config.K, config.N_r, config.d))
    return orthonormalize_receivers(draws)
