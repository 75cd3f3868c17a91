"""
Desired-signal, interference and wiretapped-signal matrices
"""

from typing import Sequence, Tuple

import numpy as np

from ..exceptions import DimensionError
from ..models import AlignmentState, ChannelSet, PrecoderSet, ReceiverSet
from ..solver.admm import nuclear_norm

DEFAULT_RANK_TOLERANCE = 1e-6


def _check_product(W: np.ndarray, H: np.ndarray, F: np.ndarray) -> None:
    if W.ndim != 2 or H.ndim != 2 or F.ndim != 2:
        raise DimensionError("W, H and F must be matrices")
    if W.shape[0] != H.shape[0] or H.shape[1] != F.shape[0]:
        raise DimensionError(
            f"W^H·H·F does not conform: W {W.shape}, H {H.shape}, F {F.shape}"
        )


def desired_signal_matrix(W_k: np.ndarray, H_kk: np.ndarray, F_k: np.ndarray) -> np.ndarray:
    """S_k = W_k^H H_kk F_k"""
    _check_product(W_k, H_kk, F_k)
    return W_k.conj().T @ H_kk @ F_k


def interference_matrix(
    W_k: np.ndarray, cross_links: Sequence[Tuple[np.ndarray, np.ndarray]]
) -> np.ndarray:
    """
    J_k = W_k^H [H_kl F_l]_{l≠k}

    Args:
        W_k: Receive subspace (N_r, d)
        cross_links: (H_kl, F_l) pairs in ascending l, skipping l = k

    Returns:
        (d, (K−1)d) matrix; (d, 0) when there are no interferers
    """
    if not cross_links:
        return np.zeros((W_k.shape[1], 0), dtype=np.complex128)
    blocks = []
    for H_kl, F_l in cross_links:
        _check_product(W_k, H_kl, F_l)
        blocks.append(W_k.conj().T @ H_kl @ F_l)
    return np.hstack(blocks)


def wiretap_matrix(eavesdropper_links: Sequence[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """S_e = [H_{K+1,l} F_l]_{l=1..K} in ascending l"""
    if not eavesdropper_links:
        raise DimensionError("wiretap matrix needs at least one transmitter")
    blocks = []
    rows = eavesdropper_links[0][0].shape[0]
    for H_el, F_l in eavesdropper_links:
        if H_el.ndim != 2 or F_l.ndim != 2 or H_el.shape[1] != F_l.shape[0]:
            raise DimensionError(f"H·F does not conform: H {H_el.shape}, F {F_l.shape}")
        if H_el.shape[0] != rows:
            raise DimensionError("eavesdropper links disagree on N_re")
        blocks.append(H_el @ F_l)
    return np.hstack(blocks)


def build_state(
    channels: ChannelSet, precoders: PrecoderSet, receivers: ReceiverSet
) -> AlignmentState:
    K = channels.K
    F, W = precoders.F, receivers.W
    S = np.stack([desired_signal_matrix(W[k], channels.link(k, k), F[k]) for k in range(K)])
    J = np.stack(
        [
            interference_matrix(W[k], [(channels.link(k, l), F[l]) for l in range(K) if l != k])
            for k in range(K)
        ]
    )
    S_e = wiretap_matrix([(channels.link(K, l), F[l]) for l in range(K)])
    return AlignmentState(S=S, J=J, S_e=S_e)


def numerical_rank(matrix: np.ndarray, rel_tol: float = DEFAULT_RANK_TOLERANCE) -> int:
    """Number of singular values above rel_tol·σ_1; the zero matrix has rank 0"""
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    if matrix.size == 0:
        return 0
    singular = np.linalg.svd(matrix, compute_uv=False)
    if singular[0] == 0.0:
        return 0
    return int(np.sum(singular > rel_tol * singular[0]))


def leakage_powers(state: AlignmentState) -> Tuple[float, float]:
    """(Σ_k ||J_k||_F², ||S_e||_F²)"""
    interference = float(np.sum(np.abs(state.J) ** 2))
    wiretap = float(np.sum(np.abs(state.S_e) ** 2))
    return interference, wiretap


def nuclear_objective(state: AlignmentState) -> float:
    """Σ_k ||J_k||_* + ||S_e||_*"""
    return sum(nuclear_norm(J_k) for J_k in state.J) + nuclear_norm(state.S_e)


def rank_profile(
    state: AlignmentState, rel_tol: float = DEFAULT_RANK_TOLERANCE
) -> Tuple[int, int, float]:
    """
    Rank diagnostics of an alignment state

    Returns:
        (Σ_k rank(J_k), rank(S_e), min_k σ_min(S_k))

    Ranks are counted against rel_tol times the largest desired-signal
    singular value.
    """
    scale = max(float(np.max(np.linalg.svd(S_k, compute_uv=False))) for S_k in state.S)
    threshold = rel_tol * scale

    def rank_against(matrix: np.ndarray) -> int:
        if matrix.size == 0:
            return 0
        return int(np.sum(np.linalg.svd(matrix, compute_uv=False) > threshold))

    interference = sum(rank_against(J_k) for J_k in state.J)
    wiretap = rank_against(state.S_e)
    sigma_min = min(float(np.linalg.svd(S_k, compute_uv=False)[-1]) for S_k in state.S)
    return interference, wiretap, sigma_min
