"""
Secure RNN IA

Majorisation-minimisation over the log-det surrogate Ω: each outer pass
linearises Ω at the current iterate, which turns it into a weighted sum of
nuclear norms, and minimises that by coordinate descent.
"""

from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from ..models import (
    AlignmentState,
    ChannelSet,
    IaResult,
    PrecoderSet,
    ReceiverSet,
    RnnIaOptions,
    RnnWeights,
    SystemConfig,
    WeightSide,
)
from ..solver.admm import nuclear_norm
from ..solver.problem import SolverOptions
from ..system.alignment import build_state
from .base import CoordinateDescentIa, objective_rose, relative_change
from .nn import initial_point

# Ω is allowed to rise by this relative amount before an outer step is rejected
ASCENT_TOLERANCE = 1e-9


def _padded_singular_values(matrix: np.ndarray, count: int) -> np.ndarray:
    values = np.zeros(count)
    if matrix.size:
        singular = np.linalg.svd(matrix, compute_uv=False)[:count]
        values[: singular.size] = singular
    return values


def surrogate_objective(state: AlignmentState, gamma: float, zeta: float) -> float:
    """
    Ω = Σ_k Σ_{i≤d} log(σ_i(J_k) + γ) + Σ_{i≤d_e} log(σ_i(S_e) + ζ)

    Missing singular values count as zero.
    """
    d = state.S.shape[1]
    d_e = min(state.S_e.shape)
    total = 0.0
    for J_k in state.J:
        total += float(np.sum(np.log(_padded_singular_values(J_k, d) + gamma)))
    total += float(np.sum(np.log(_padded_singular_values(state.S_e, d_e) + zeta)))
    return total


def _reweight(vectors: np.ndarray, singular: np.ndarray, smoothing: float) -> np.ndarray:
    """Ψ·diag(1/(σ + smoothing))·Ψ^H"""
    return (vectors * (1.0 / (singular + smoothing))) @ vectors.conj().T


def compute_weights(
    J_snapshot: np.ndarray, Se_snapshot: np.ndarray, gamma: float, zeta: float
) -> RnnWeights:
    """
    Weights of the linearised surrogate at the given snapshot

    Args:
        J_snapshot: (K, d, (K−1)d) interference matrices
        Se_snapshot: (N_re, K·d) wiretapped-signal matrix
        gamma: Smoothing constant for the J_k terms
        zeta: Smoothing constant for the S_e term

    Returns:
        Ξ_k from the left singular vectors of J_k; Φ_e from the left singular
        vectors of S_e when N_re < K·d and from the right ones otherwise
    """
    Xi: List[np.ndarray] = []
    for J_k in J_snapshot:
        d = J_k.shape[0]
        if J_k.size == 0:
            Xi.append(np.eye(d, dtype=np.complex128) / gamma)
            continue
        U, _, _ = np.linalg.svd(J_k, full_matrices=True)
        Xi.append(_reweight(U, _padded_singular_values(J_k, d), gamma))

    rows, cols = Se_snapshot.shape
    d_e = min(rows, cols)
    U, _, Vh = np.linalg.svd(Se_snapshot, full_matrices=True)
    singular = _padded_singular_values(Se_snapshot, d_e)
    if rows < cols:
        side = WeightSide.LEFT
        Phi = _reweight(U, singular, zeta)
    else:
        side = WeightSide.RIGHT
        Phi = _reweight(Vh.conj().T, singular, zeta)
    return RnnWeights(Xi=np.stack(Xi), Phi=Phi, side=side)


def weighted_objective(state: AlignmentState, weights: RnnWeights) -> float:
    """Σ_k ||Ξ_k J_k||_* + ||Φ_e S_e||_* (left) or ||S_e Φ_e||_* (right)"""
    total = sum(nuclear_norm(Xi_k @ J_k) for Xi_k, J_k in zip(weights.Xi, state.J))
    if weights.side == WeightSide.LEFT:
        total += nuclear_norm(weights.Phi @ state.S_e)
    else:
        total += nuclear_norm(state.S_e @ weights.Phi)
    return float(total)


class RnnIa(CoordinateDescentIa):
    """
    Reweighted nuclear-norm design

    γ and ζ are compared with singular values at unit per-stream power:
    the design runs with F_k^H F_k = I and the returned precoders are scaled
    to (P_t/d)·I afterwards. ``history`` and ``initial_objective`` hold Ω at
    unit power.
    """

    def __init__(self, channels: ChannelSet, config: SystemConfig, options: RnnIaOptions):
        unit = config.model_copy(update={"P_t": float(config.d)})
        super().__init__(channels, unit, options.epsilon, options.solver)
        self.options = options
        self.power_scale = float(np.sqrt(config.stream_power))
        self.inner_history: List[List[float]] = []

    def inner_loop(
        self, weights: RnnWeights, precoders: PrecoderSet
    ) -> Tuple[PrecoderSet, ReceiverSet]:
        """
        Coordinate descent on the weighted objective with fixed weights

        Precoders are at unit per-stream power on the way in and out. A pass
        that raises the weighted objective is discarded and ends the loop.
        """
        history: List[float] = []
        accepted: Optional[ReceiverSet] = None
        previous: Optional[float] = None
        for _ in range(self.options.m_max):
            receivers = self.update_receivers(precoders, weights)
            candidate = self.update_precoders(receivers, weights)
            value = weighted_objective(build_state(self.channels, candidate, receivers), weights)
            if objective_rose(previous, value):
                logger.debug(
                    f"RNN inner pass raised the weighted objective from {previous:.6f} to "
                    f"{value:.6f}, keeping the previous pass"
                )
                break
            precoders, accepted = candidate, receivers
            history.append(value)
            if previous is not None and relative_change(previous, value) < self.options.tolerance:
                break
            previous = value
        self.inner_history.append(history)
        assert accepted is not None
        return precoders, accepted

    def run(self) -> IaResult:
        opts = self.options
        precoders, receivers = initial_point(self.config, opts.seed)
        initial = surrogate_objective(
            build_state(self.channels, precoders, receivers), opts.gamma, opts.zeta
        )
        logger.debug(f"RNN IA on {self.config.label}: initial Ω {initial:.4f}")

        weights = RnnWeights.identity(self.config)
        history: List[float] = []
        converged = False
        previous: Optional[float] = None
        for iteration in range(1, opts.kappa_max + 1):
            candidate_F, candidate_W = self.inner_loop(weights, precoders)
            state = build_state(self.channels, candidate_F, candidate_W)
            omega = surrogate_objective(state, opts.gamma, opts.zeta)

            if objective_rose(previous, omega, ASCENT_TOLERANCE):
                logger.warning(
                    f"RNN IA iteration {iteration}: Ω rose from {previous:.6f} to {omega:.6f}, "
                    "stopping at the previous iterate"
                )
                break

            precoders, receivers = candidate_F, candidate_W
            history.append(omega)
            logger.debug(f"RNN IA iteration {iteration}: Ω {omega:.6f}")
            if previous is not None and relative_change(previous, omega) < opts.tolerance:
                converged = True
                break
            previous = omega
            weights = compute_weights(state.J, state.S_e, opts.gamma, opts.zeta)

        return IaResult(
            precoders=precoders.scaled(self.power_scale),
            receivers=receivers,
            history=history,
            initial_objective=initial,
            iterations=len(history),
            converged=converged,
            subproblem_margins=self.margins,
        )


def inner_coordinate_descent(
    channels: ChannelSet,
    config: SystemConfig,
    weights: RnnWeights,
    precoders: PrecoderSet,
    epsilon: float,
    m_max: int,
    tolerance: float = 1e-4,
    solver: Optional[SolverOptions] = None,
) -> Tuple[PrecoderSet, ReceiverSet]:
    """
    Inner loop of the RNN design on its own

    ``precoders`` and the returned precoders are at the configured power;
    ``weights`` refer to unit per-stream power.

    Raises:
        InfeasibleProblemError: A subproblem could not meet its floors
    """
    options = RnnIaOptions(
        m_max=m_max, epsilon=epsilon, tolerance=tolerance, solver=solver or SolverOptions()
    )
    algorithm = RnnIa(channels, config, options)
    F, W = algorithm.inner_loop(weights, precoders.scaled(1.0 / algorithm.power_scale))
    return F.scaled(algorithm.power_scale), W


def run(channels: ChannelSet, config: SystemConfig, options: RnnIaOptions) -> IaResult:
    return RnnIa(channels, config, options).run()
