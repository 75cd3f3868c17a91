"""
Conventional interference alignment by minimum interference leakage

Alternates between receive subspaces and precoders; both updates pick the
least-dominant eigenvectors of an interference covariance, the precoder one
through the reciprocal network. Eavesdropper channels are never consulted.
"""

from typing import List

import numpy as np
import scipy.linalg
from loguru import logger

from ..exceptions import DegenerateIterateError, DimensionError
from ..models import IaResult, PrecoderSet, ReceiverSet, SystemConfig
from ..system.channels import random_precoders


def least_eigenvectors(Q: np.ndarray, count: int) -> np.ndarray:
    """Eigenvectors of the ``count`` smallest eigenvalues of Hermitian Q"""
    try:
        _, vectors = scipy.linalg.eigh(Q, subset_by_index=[0, count - 1])
    except (np.linalg.LinAlgError, ValueError) as e:
        raise DegenerateIterateError(
            f"eigendecomposition of {Q.shape[0]}x{Q.shape[1]} covariance failed: {e}",
            sigma_min=0.0,
            sigma_max=float(np.linalg.norm(Q)) if np.all(np.isfinite(Q)) else float("inf"),
        ) from e
    return vectors


class MinLeakageIa:
    """Minimum-leakage alternating minimisation over the legitimate links only"""

    def __init__(self, links: np.ndarray, config: SystemConfig):
        expected = (config.K, config.K, config.N_r, config.N_t)
        if links.shape != expected:
            raise DimensionError(f"legitimate links must have shape {expected}, got {links.shape}")
        self.links = links
        self.config = config

    @property
    def K(self) -> int:
        return self.config.K

    def calc_q(self, k: int, F: np.ndarray) -> np.ndarray:
        """Interference covariance at receiver k: Σ_{l≠k} H_kl F_l F_l^H H_kl^H"""
        Q = np.zeros((self.config.N_r, self.config.N_r), dtype=np.complex128)
        for l in range(self.K):
            if l != k:
                HF = self.links[k, l] @ F[l]
                Q += HF @ HF.conj().T
        return Q

    def calc_q_rev(self, l: int, W: np.ndarray) -> np.ndarray:
        """Reciprocal-network covariance at transmitter l: Σ_{k≠l} H_kl^H W_k W_k^H H_kl"""
        Q = np.zeros((self.config.N_t, self.config.N_t), dtype=np.complex128)
        for k in range(self.K):
            if k != l:
                HW = self.links[k, l].conj().T @ W[k]
                Q += HW @ HW.conj().T
        return Q

    def leakage(self, F: np.ndarray, W: np.ndarray) -> float:
        """Σ_k tr(W_k^H Q_k W_k) = Σ_k ||J_k||_F²"""
        total = 0.0
        for k in range(self.K):
            total += float(np.real(np.trace(W[k].conj().T @ self.calc_q(k, F) @ W[k])))
        return max(total, 0.0)

    def update_receivers(self, F: np.ndarray) -> np.ndarray:
        d = self.config.d
        return np.stack([least_eigenvectors(self.calc_q(k, F), d) for k in range(self.K)])

    def update_precoders(self, W: np.ndarray) -> np.ndarray:
        scale = np.sqrt(self.config.stream_power)
        d = self.config.d
        return np.stack(
            [scale * least_eigenvectors(self.calc_q_rev(l, W), d) for l in range(self.K)]
        )

    def run(self, iterations: int, seed: int) -> IaResult:
        F = random_precoders(self.config, seed).F
        W = self.update_receivers(F)
        initial = self.leakage(F, W)
        history: List[float] = []
        for _ in range(iterations):
            F = self.update_precoders(W)
            W = self.update_receivers(F)
            history.append(self.leakage(F, W))
        logger.debug(
            f"Min-leakage IA on {self.config.label}: leakage {initial:.4e} -> "
            f"{history[-1] if history else initial:.4e} in {iterations} iterations"
        )
        return IaResult(
            precoders=PrecoderSet(F=F),
            receivers=ReceiverSet(W=W),
            history=history,
            initial_objective=initial,
            iterations=iterations,
            converged=True,
        )


def run_min_leakage_ia(
    links: np.ndarray, config: SystemConfig, iterations: int, seed: int
) -> IaResult:
    """
    Run the conventional design

    Args:
        links: Legitimate links only, shape (K, K, N_r, N_t)
        config: System dimensions and transmit power
        iterations: Number of alternating updates
        seed: Seed of the random initial precoders

    Returns:
        Result whose history is the interference leakage Σ_k ||J_k||_F²
    """
    return MinLeakageIa(links, config).run(iterations, seed)
