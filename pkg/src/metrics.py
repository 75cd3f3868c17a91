"""
Achievable rates, eavesdropper leakage rates and the secrecy sum rate
"""

from typing import List, Optional

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, RateComputationError
from .models import ChannelSet, PrecoderSet, RateReport


def log2det(matrix: np.ndarray) -> float:
    """
    log2 det of a Hermitian positive-definite matrix via Cholesky

    Raises:
        RateComputationError: Non-finite entries or not positive definite
    """
    herm = 0.5 * (matrix + matrix.conj().T)
    if not np.all(np.isfinite(herm)):
        raise RateComputationError("covariance has non-finite entries", float("inf"))
    try:
        factor, _ = scipy.linalg.cho_factor(herm, lower=True)
    except np.linalg.LinAlgError as e:
        raise RateComputationError(
            f"covariance is not positive definite: {e}", float(np.linalg.cond(herm))
        ) from e
    value = 2.0 * float(np.sum(np.log2(np.real(np.diag(factor)))))
    if not np.isfinite(value):
        raise RateComputationError("log-det is not finite", float(np.linalg.cond(herm)))
    return value


def _rate(signal: np.ndarray, interferers: List[np.ndarray], noise: float) -> float:
    """log2 det(I + s s^H R^{-1}) = log2 det(R + s s^H) − log2 det(R)"""
    size = signal.shape[0]
    R = noise * np.eye(size, dtype=np.complex128)
    for term in interferers:
        R += term @ term.conj().T
    total = R + signal @ signal.conj().T
    return max(log2det(total) - log2det(R), 0.0)


def _check_user(channels: ChannelSet, k: int) -> None:
    if not 0 <= k < channels.K:
        raise DimensionError(f"user index {k} outside 0..{channels.K - 1}")


def user_rate(channels: ChannelSet, precoders: PrecoderSet, k: int, sigma2: float) -> float:
    """
    R_k = log2 det(I + H_kk F_k F_k^H H_kk^H R_k^{-1})

    R_k is the interference-plus-noise covariance at receiver k. The receive
    subspace does not enter.
    """
    _check_user(channels, k)
    F = precoders.F
    interferers = [channels.link(k, l) @ F[l] for l in range(channels.K) if l != k]
    return _rate(channels.link(k, k) @ F[k], interferers, sigma2)


def leakage_rate(channels: ChannelSet, precoders: PrecoderSet, k: int, sigma2: float) -> float:
    """Rate at which user k's message reaches the eavesdropper"""
    _check_user(channels, k)
    K = channels.K
    F = precoders.F
    interferers = [channels.link(K, l) @ F[l] for l in range(K) if l != k]
    return _rate(channels.link(K, k) @ F[k], interferers, sigma2)


def secrecy_sum_rate(
    channels: ChannelSet,
    precoders: PrecoderSet,
    sigma2: float,
    sigma2_e: Optional[float] = None,
) -> RateReport:
    """
    Per-user rates, leakage rates and R_S = Σ_k [R_k − R_k^(e)]⁺

    Args:
        channels: Legitimate and eavesdropper links
        precoders: Transmit precoders at the evaluated power
        sigma2: Noise variance at the legitimate receivers
        sigma2_e: Noise variance at the eavesdropper (defaults to sigma2)
    """
    noise_e = sigma2 if sigma2_e is None else sigma2_e
    rates = [user_rate(channels, precoders, k, sigma2) for k in range(channels.K)]
    leakages = [leakage_rate(channels, precoders, k, noise_e) for k in range(channels.K)]
    secrecy = [max(r - e, 0.0) for r, e in zip(rates, leakages)]
    return RateReport(
        per_user_rate=rates,
        per_user_leakage=leakages,
        per_user_secrecy=secrecy,
        ssr=float(sum(secrecy)),
    )
