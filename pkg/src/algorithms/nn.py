"""
Secure NN IA: coordinate descent on Σ_k ||J_k||_* + ||S_e||_*
"""

from typing import Optional

from loguru import logger

from ..models import ChannelSet, IaResult, NnIaOptions, PrecoderSet, ReceiverSet, SystemConfig
from ..solver.problem import SolverOptions
from ..system.alignment import build_state, nuclear_objective
from ..system.channels import derive_seed, random_precoders, random_receivers
from .base import (
    CoordinateDescentIa,
    objective_rose,
    relative_change,
    solve_precoder_half_step,
    solve_receiver_half_step,
)


def solve_precoder_subproblem(
    channels: ChannelSet,
    receivers: ReceiverSet,
    epsilon: float,
    options: Optional[SolverOptions] = None,
) -> PrecoderSet:
    """
    Precoders minimising Σ_k ||J_k||_* + ||S_e||_* with {W_k} fixed

    The result is the raw solver output, before re-orthogonalisation.

    Raises:
        InfeasibleProblemError: The floors cannot be met with these receivers
    """
    step = solve_precoder_half_step(channels, receivers, epsilon, None, options)
    return PrecoderSet(F=step.filters)


def solve_receiver_subproblem(
    channels: ChannelSet,
    precoders: PrecoderSet,
    epsilon: float,
    options: Optional[SolverOptions] = None,
) -> ReceiverSet:
    """Receive subspaces minimising Σ_k ||J_k||_*, solved per user"""
    step = solve_receiver_half_step(channels, precoders, epsilon, None, options)
    return ReceiverSet(W=step.filters)


def initial_point(config: SystemConfig, seed: int) -> tuple:
    """
    Random starting filters shared by the coordinate-descent designs

    The precoders come from ``seed``; the receivers, used only to measure
    the starting objective, come from a stream derived from it.
    """
    precoders = random_precoders(config, seed)
    receivers = random_receivers(config, derive_seed(seed, 0, "initial-receivers"))
    return precoders, receivers


class NnIa(CoordinateDescentIa):
    """Alternating nuclear-norm minimisation"""

    def __init__(self, channels: ChannelSet, config: SystemConfig, options: NnIaOptions):
        super().__init__(channels, config, options.epsilon, options.solver)
        self.options = options

    def run(self) -> IaResult:
        precoders, receivers = initial_point(self.config, self.options.seed)
        initial = nuclear_objective(build_state(self.channels, precoders, receivers))
        logger.debug(f"NN IA on {self.config.label}: initial objective {initial:.4e}")

        history = []
        converged = False
        previous: Optional[float] = None
        for iteration in range(1, self.options.kappa_max + 1):
            candidate_W = self.update_receivers(precoders)
            candidate_F = self.update_precoders(candidate_W)
            objective = nuclear_objective(build_state(self.channels, candidate_F, candidate_W))
            if objective_rose(previous, objective):
                logger.warning(
                    f"NN IA iteration {iteration}: objective rose from {previous:.6e} to "
                    f"{objective:.6e}, stopping at the previous iterate"
                )
                break
            precoders, receivers = candidate_F, candidate_W
            history.append(objective)
            logger.debug(f"NN IA iteration {iteration}: objective {objective:.6e}")
            converged = previous is not None and (
                relative_change(previous, objective) < self.options.tolerance
            )
            if converged:
                break
            previous = objective

        return IaResult(
            precoders=precoders,
            receivers=receivers,
            history=history,
            initial_objective=initial,
            iterations=len(history),
            converged=converged,
            subproblem_margins=self.margins,
        )


def run(channels: ChannelSet, config: SystemConfig, options: NnIaOptions) -> IaResult:
    """
    Run the NN design from a random start

    Raises:
        DegenerateIterateError: An iterate lost rank before orthonormalization
        InfeasibleProblemError: A subproblem could not meet its floors
    """
    return NnIa(channels, config, options).run()
