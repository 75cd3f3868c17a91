"""
Shared coordinate-descent machinery for the rank-minimisation IA designs

The precoder half-step optimises {F_k} with {W_k} fixed; the receiver
half-step optimises V_k = W_k^H per user with {F_k} fixed, which keeps every
map complex-linear in the decision variable.
"""

from abc import ABC
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from ..models import (
    ChannelSet,
    PrecoderSet,
    ReceiverSet,
    RnnWeights,
    SystemConfig,
    WeightSide,
)
from ..solver.admm import solve
from ..solver.problem import (
    AffineMatrixMap,
    FloorConstraint,
    NuclearNormProblem,
    ObjectiveTerm,
    SolverOptions,
    VariableBlock,
)
from ..system.channels import orthonormalize_precoders, orthonormalize_receivers
from ..utils.arrays import ComplexArray

# relative rise of a coordinate-descent objective that ends the loop
RISE_TOLERANCE = 1e-6


def precoder_block(k: int) -> str:
    return f"F{k}"


def receiver_block(k: int) -> str:
    return f"V{k}"


def _selector(position: int, d: int, blocks: int) -> np.ndarray:
    """d × (blocks·d) matrix placing a d-column block at ``position``"""
    selector = np.zeros((d, blocks * d), dtype=np.complex128)
    selector[:, position * d : (position + 1) * d] = np.eye(d)
    return selector


def build_precoder_problem(
    channels: ChannelSet,
    receivers: ReceiverSet,
    epsilon: float,
    weights: Optional[RnnWeights] = None,
) -> NuclearNormProblem:
    """
    min Σ_k ||Ξ_k J_k||_* + ||Φ_e S_e||_* (or ||S_e Φ_e||_*) over {F_k}

    Without weights this is the plain nuclear-norm precoder problem.
    """
    K = channels.K
    W = receivers.W
    N_t = channels.legitimate.shape[3]
    d = W.shape[2]
    N_re = channels.eavesdropper.shape[1]

    terms: List[ObjectiveTerm] = []
    if K > 1:
        for k in range(K):
            others = [l for l in range(K) if l != k]
            J_k = AffineMatrixMap.linear(
                (d, (K - 1) * d),
                [
                    (
                        precoder_block(l),
                        W[k].conj().T @ channels.link(k, l),
                        _selector(position, d, K - 1),
                    )
                    for position, l in enumerate(others)
                ],
            )
            terms.append(
                ObjectiveTerm(map=J_k, left_weight=None if weights is None else weights.Xi[k])
            )

    S_e = AffineMatrixMap.linear(
        (N_re, K * d),
        [(precoder_block(l), channels.link(K, l), _selector(l, d, K)) for l in range(K)],
    )
    if weights is None:
        terms.append(ObjectiveTerm(map=S_e))
    elif weights.side == WeightSide.LEFT:
        terms.append(ObjectiveTerm(map=S_e, left_weight=weights.Phi))
    else:
        terms.append(ObjectiveTerm(map=S_e, right_weight=weights.Phi))

    floors = [
        FloorConstraint(
            map=AffineMatrixMap.linear(
                (d, d), [(precoder_block(k), W[k].conj().T @ channels.link(k, k), np.eye(d))]
            ),
            epsilon=epsilon,
        )
        for k in range(K)
    ]
    return NuclearNormProblem(
        objective_terms=terms,
        floor_constraints=floors,
        variable_blocks=[VariableBlock(name=precoder_block(k), rows=N_t, cols=d) for k in range(K)],
    )


def _receiver_terms(
    channels: ChannelSet,
    precoders: PrecoderSet,
    k: int,
    epsilon: float,
    Xi_k: Optional[np.ndarray],
) -> Tuple[List[ObjectiveTerm], FloorConstraint]:
    K = channels.K
    F = precoders.F
    d = F.shape[2]
    block = receiver_block(k)
    terms: List[ObjectiveTerm] = []
    if K > 1:
        G_k = np.hstack([channels.link(k, l) @ F[l] for l in range(K) if l != k])
        J_k = AffineMatrixMap.linear((d, (K - 1) * d), [(block, np.eye(d), G_k)])
        terms.append(ObjectiveTerm(map=J_k, left_weight=Xi_k))
    floor = FloorConstraint(
        map=AffineMatrixMap.linear((d, d), [(block, np.eye(d), channels.link(k, k) @ F[k])]),
        epsilon=epsilon,
    )
    return terms, floor


def build_receiver_problem(
    channels: ChannelSet,
    precoders: PrecoderSet,
    k: int,
    epsilon: float,
    weights: Optional[RnnWeights] = None,
) -> NuclearNormProblem:
    """
    Per-user receiver problem: min ||Ξ_k V_k [H_kl F_l]_{l≠k}||_* over V_k = W_k^H

    S_e does not depend on the receivers and is left out.
    """
    N_r = channels.legitimate.shape[2]
    d = precoders.F.shape[2]
    terms, floor = _receiver_terms(
        channels, precoders, k, epsilon, None if weights is None else weights.Xi[k]
    )
    return NuclearNormProblem(
        objective_terms=terms,
        floor_constraints=[floor],
        variable_blocks=[VariableBlock(name=receiver_block(k), rows=d, cols=N_r)],
    )


def build_joint_receiver_problem(
    channels: ChannelSet,
    precoders: PrecoderSet,
    epsilon: float,
    weights: Optional[RnnWeights] = None,
) -> NuclearNormProblem:
    """All K receiver problems stacked into one (they decouple)"""
    N_r = channels.legitimate.shape[2]
    d = precoders.F.shape[2]
    terms: List[ObjectiveTerm] = []
    floors: List[FloorConstraint] = []
    for k in range(channels.K):
        user_terms, floor = _receiver_terms(
            channels, precoders, k, epsilon, None if weights is None else weights.Xi[k]
        )
        terms.extend(user_terms)
        floors.append(floor)
    return NuclearNormProblem(
        objective_terms=terms,
        floor_constraints=floors,
        variable_blocks=[
            VariableBlock(name=receiver_block(k), rows=d, cols=N_r) for k in range(channels.K)
        ],
    )


class HalfStep(BaseModel):
    """Raw solver output of one coordinate-descent half-step"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    filters: ComplexArray
    objective: float
    min_margin: float
    converged: bool


def solve_precoder_half_step(
    channels: ChannelSet,
    receivers: ReceiverSet,
    epsilon: float,
    weights: Optional[RnnWeights] = None,
    options: Optional[SolverOptions] = None,
) -> HalfStep:
    problem = build_precoder_problem(channels, receivers, epsilon, weights)
    result = solve(problem, options)
    F = np.stack([result.blocks[precoder_block(k)] for k in range(channels.K)])
    return HalfStep(
        filters=F,
        objective=result.objective,
        min_margin=_min_margin(channels, F, receivers.W, epsilon),
        converged=result.converged,
    )


def solve_receiver_half_step(
    channels: ChannelSet,
    precoders: PrecoderSet,
    epsilon: float,
    weights: Optional[RnnWeights] = None,
    options: Optional[SolverOptions] = None,
) -> HalfStep:
    V: List[np.ndarray] = []
    objective = 0.0
    converged = True
    for k in range(channels.K):
        result = solve(build_receiver_problem(channels, precoders, k, epsilon, weights), options)
        V.append(result.blocks[receiver_block(k)])
        objective += result.objective
        converged = converged and result.converged
    W = np.stack([V_k.conj().T for V_k in V])
    return HalfStep(
        filters=W,
        objective=objective,
        min_margin=_min_margin(channels, precoders.F, W, epsilon),
        converged=converged,
    )


def _min_margin(channels: ChannelSet, F: np.ndarray, W: np.ndarray, epsilon: float) -> float:
    """min_k λ_min(Herm(W_k^H H_kk F_k)) − ε"""
    margins = []
    for k in range(channels.K):
        S_k = W[k].conj().T @ channels.link(k, k) @ F[k]
        margins.append(float(np.linalg.eigvalsh(0.5 * (S_k + S_k.conj().T))[0]) - epsilon)
    return min(margins)


class CoordinateDescentIa(ABC):
    """
    Base class for the alternating precoder / receiver designs

    Subclasses drive the outer loop; this class owns the half-steps, the
    re-orthogonalisation and the bookkeeping of floor margins.
    """

    def __init__(
        self,
        channels: ChannelSet,
        config: SystemConfig,
        epsilon: float,
        solver_options: Optional[SolverOptions] = None,
    ):
        self.channels = channels
        self.config = config
        self.epsilon = epsilon
        self.solver_options = solver_options or SolverOptions()
        self.margins: List[float] = []
        self.solves = 0

    def update_receivers(
        self, precoders: PrecoderSet, weights: Optional[RnnWeights] = None
    ) -> ReceiverSet:
        """Solve the receiver subproblem and orthonormalize (scale 1)"""
        step = solve_receiver_half_step(
            self.channels, precoders, self.epsilon, weights, self.solver_options
        )
        self._record(step, "receiver")
        return orthonormalize_receivers(step.filters)

    def update_precoders(
        self, receivers: ReceiverSet, weights: Optional[RnnWeights] = None
    ) -> PrecoderSet:
        """Solve the precoder subproblem and orthonormalize to (P_t/d)·I"""
        step = solve_precoder_half_step(
            self.channels, receivers, self.epsilon, weights, self.solver_options
        )
        self._record(step, "precoder")
        return orthonormalize_precoders(step.filters, self.config)

    def _record(self, step: HalfStep, kind: str) -> None:
        self.solves += 1
        self.margins.append(step.min_margin)
        if not step.converged:
            logger.warning(f"{kind} subproblem #{self.solves} did not converge")
        logger.debug(
            f"{kind} subproblem #{self.solves}: objective {step.objective:.4e}, "
            f"floor margin {step.min_margin:.3e}"
        )


def relative_change(previous: float, current: float) -> float:
    scale = max(abs(previous), 1e-12)
    return abs(current - previous) / scale


def objective_rose(
    previous: Optional[float], current: float, tolerance: float = RISE_TOLERANCE
) -> bool:
    """True when ``current`` exceeds ``previous`` by more than the relative tolerance"""
    if previous is None:
        return False
    return current > previous + tolerance * max(1.0, abs(previous))
