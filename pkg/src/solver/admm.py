"""
Operator-splitting solver for sums of nuclear norms with spectral floors

Every objective term gets an auxiliary matrix Z_t = L_t·A_t(X)·R_t whose
update is singular-value soft-thresholding; every floor constraint gets an
auxiliary Y_c = B_c(X) whose update clamps the eigenvalues of its Hermitian
part at ε. The variable blocks are coupled through one least-squares step
over the stacked linear operator (scaled-form ADMM).
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from loguru import logger

from ..exceptions import DimensionError, InfeasibleProblemError
from .problem import NuclearNormProblem, SolverOptions, SolverResult, unvec, vec

FLOOR_SLACK = 1e-9
PENALTY_RANGE = (1e-6, 1e6)
PENALTY_INTERVAL = 10
MAX_RESCALE = 1.05
FEASIBLE_VIOLATION = 1e-6
CANDIDATE_STRIDE = 10


def nuclear_norm(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(matrix, compute_uv=False)))


def singular_value_threshold(matrix: np.ndarray, level: float) -> np.ndarray:
    """argmin_Z level·||Z||_* + ½||Z − matrix||_F²"""
    if matrix.size == 0:
        return matrix.copy()
    U, s, Vh = np.linalg.svd(matrix, full_matrices=False)
    shrunk = np.maximum(s - level, 0.0)
    return (U * shrunk) @ Vh


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def project_floor(matrix: np.ndarray, epsilon: float) -> np.ndarray:
    """
    Closest matrix (Frobenius) whose Hermitian part has λ_min ≥ epsilon

    The Hermitian and skew-Hermitian parts are orthogonal, so only the
    Hermitian part is clamped.
    """
    herm = hermitian_part(matrix)
    skew = matrix - herm
    eigenvalues, vectors = np.linalg.eigh(herm)
    clamped = np.maximum(eigenvalues, epsilon)
    return (vectors * clamped) @ vectors.conj().T + skew


def floor_margin(matrix: np.ndarray, epsilon: float) -> float:
    """λ_min((M + M^H)/2) − epsilon"""
    return float(np.linalg.eigvalsh(hermitian_part(matrix))[0]) - epsilon


def check_floor(map_value: np.ndarray, epsilon: float) -> Tuple[bool, float]:
    """
    Check the spectral floor on one square matrix

    Args:
        map_value: Square complex matrix
        epsilon: Floor ε

    Returns:
        (satisfied, margin) with margin = λ_min(Hermitian part) − ε
    """
    if map_value.ndim != 2 or map_value.shape[0] != map_value.shape[1]:
        raise DimensionError(f"floor check needs a square matrix, got {map_value.shape}")
    margin = floor_margin(map_value, epsilon)
    return margin >= -FLOOR_SLACK, margin


def evaluate_objective(problem: NuclearNormProblem, blocks: Dict[str, np.ndarray]) -> float:
    """Σ over terms of ||left_weight·map(blocks)·right_weight||_*"""
    total = 0.0
    for term in problem.objective_terms:
        total += nuclear_norm(term.weighted(term.map.evaluate(blocks)))
    return total


def constraint_violation(problem: NuclearNormProblem, blocks: Dict[str, np.ndarray]) -> float:
    """max over constraints of [ε − λ_min(Hermitian part)]⁺"""
    violation = 0.0
    for constraint in problem.floor_constraints:
        margin = floor_margin(constraint.map.evaluate(blocks), constraint.epsilon)
        violation = max(violation, -margin)
    return violation


class _Segment:
    """Slice of the stacked auxiliary vector owned by one term or constraint"""

    def __init__(self, start: int, shape: Tuple[int, int], epsilon: Optional[float]):
        self.start = start
        self.shape = shape
        self.stop = start + shape[0] * shape[1]
        self.epsilon = epsilon

    def prox(self, value: np.ndarray, level: float) -> np.ndarray:
        matrix = unvec(value, *self.shape)
        if self.epsilon is None:
            return vec(singular_value_threshold(matrix, level))
        return vec(project_floor(matrix, self.epsilon))


def _stack(problem: NuclearNormProblem) -> Tuple[np.ndarray, np.ndarray, List[_Segment]]:
    layout = problem.layout()
    operators: List[np.ndarray] = []
    constants: List[np.ndarray] = []
    segments: List[_Segment] = []
    offset = 0
    for term in problem.objective_terms:
        matrix, constant, shape = term.operator(layout)
        segments.append(_Segment(offset, shape, None))
        operators.append(matrix)
        constants.append(constant)
        offset = segments[-1].stop
    for constraint in problem.floor_constraints:
        matrix, constant = constraint.map.operator(layout)
        segments.append(_Segment(offset, constraint.map.shape, constraint.epsilon))
        operators.append(matrix)
        constants.append(constant)
        offset = segments[-1].stop
    if not segments:
        return np.zeros((0, layout.size), dtype=np.complex128), np.zeros(0), segments
    return np.vstack(operators), np.concatenate(constants), segments


def rescale_onto_floors(
    problem: NuclearNormProblem, x: np.ndarray, max_factor: float = MAX_RESCALE
) -> np.ndarray:
    """
    Scale x up just enough to meet every floor when all floor maps are homogeneous

    Only near-feasible points are moved: when the required factor exceeds
    ``max_factor`` (or some Hermitian part is not positive definite), x is
    returned unchanged.
    """
    if not problem.floor_constraints:
        return x
    if not all(c.map.is_homogeneous for c in problem.floor_constraints):
        return x
    blocks = problem.layout().split(x)
    factor = 1.0
    for constraint in problem.floor_constraints:
        value = constraint.map.evaluate(blocks)
        smallest = constraint.epsilon + floor_margin(value, constraint.epsilon)
        if smallest <= 0.0:
            return x
        factor = max(factor, constraint.epsilon / smallest)
    if factor > max_factor:
        return x
    return x * factor


class _Candidate:
    """Lowest-objective feasible iterate seen so far"""

    def __init__(self, problem: NuclearNormProblem):
        self.problem = problem
        self.layout = problem.layout()
        self.x: Optional[np.ndarray] = None
        self.objective = np.inf

    def offer(self, x: np.ndarray) -> None:
        polished = rescale_onto_floors(self.problem, x)
        blocks = self.layout.split(polished)
        if constraint_violation(self.problem, blocks) > FEASIBLE_VIOLATION:
            return
        objective = evaluate_objective(self.problem, blocks)
        if objective < self.objective:
            self.objective = objective
            self.x = polished


def solve(problem: NuclearNormProblem, options: Optional[SolverOptions] = None) -> SolverResult:
    """
    Minimise the weighted nuclear-norm objective under the spectral floors

    Args:
        problem: Problem description
        options: Tolerance, iteration budget and penalty parameter

    Returns:
        Solver result; when the budget runs out ``converged`` is False and
        the blocks are the lowest-objective feasible iterate (the last
        iterate if none was feasible)

    Raises:
        InfeasibleProblemError: The coupling residual stagnated with the
            floor constraints still violated
    """
    options = options or SolverOptions()
    layout = problem.layout()
    A, b, segments = _stack(problem)

    if not segments:
        blocks = problem.zero_blocks()
        return SolverResult(
            blocks=blocks,
            objective=0.0,
            constraint_violation=0.0,
            iterations=0,
            converged=True,
            penalty=options.penalty,
        )

    m, n = A.shape
    A_pinv = scipy.linalg.pinv(A)
    A_adj = A.conj().T
    tol = options.tolerance
    rho = options.penalty

    def prox_all(value: np.ndarray) -> np.ndarray:
        out = np.empty_like(value)
        for segment in segments:
            out[segment.start : segment.stop] = segment.prox(
                value[segment.start : segment.stop], 1.0 / rho
            )
        return out

    x = np.zeros(n, dtype=np.complex128)
    z = prox_all(b.astype(np.complex128))
    u = np.zeros(m, dtype=np.complex128)

    candidate = _Candidate(problem)
    primal_history: List[float] = []
    r_norm = s_norm = np.inf
    converged = False
    iteration = 0

    for iteration in range(1, options.max_iterations + 1):
        x = A_pinv @ (z - u - b)
        Ax = A @ x + b
        z_old = z
        z = prox_all(Ax + u)
        u = u + Ax - z

        r_norm = float(np.linalg.norm(Ax - z))
        s_norm = float(rho * np.linalg.norm(A_adj @ (z - z_old)))
        eps_pri = np.sqrt(m) * tol + tol * max(np.linalg.norm(Ax), np.linalg.norm(z))
        eps_dual = np.sqrt(n) * tol + tol * rho * np.linalg.norm(A_adj @ u)
        primal_history.append(r_norm)

        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break

        if iteration % CANDIDATE_STRIDE == 0:
            candidate.offer(x)

        # ρ stays fixed after the warm-up
        if (
            options.adaptive_penalty
            and iteration <= options.penalty_warmup
            and iteration % PENALTY_INTERVAL == 0
        ):
            if r_norm > 10.0 * s_norm and rho < PENALTY_RANGE[1]:
                rho *= 2.0
                u = u / 2.0
            elif s_norm > 10.0 * r_norm and rho > PENALTY_RANGE[0]:
                rho /= 2.0
                u = u * 2.0

    if converged:
        x = rescale_onto_floors(problem, x)
    else:
        candidate.offer(x)
        if candidate.x is not None:
            x = candidate.x
    blocks = layout.split(x)
    violation = constraint_violation(problem, blocks)

    if not converged:
        quarter = max(1, len(primal_history) // 4)
        recent = min(primal_history[-quarter:])
        earlier = min(primal_history[:-quarter]) if len(primal_history) > quarter else np.inf
        if violation > options.infeasibility_threshold and recent >= 0.99 * earlier:
            raise InfeasibleProblemError(
                f"floor constraints unreachable: violation {violation:.3e} after "
                f"{iteration} iterations (primal residual {recent:.3e})",
                violation=violation,
                iterations=iteration,
            )
        logger.warning(
            f"Spectral solver stopped at {iteration} iterations without converging "
            f"(primal {r_norm:.2e}, dual {s_norm:.2e}, violation {violation:.2e})"
        )

    objective = evaluate_objective(problem, blocks)
    logger.debug(
        f"Spectral solve: {iteration} iterations, objective {objective:.6e}, "
        f"violation {violation:.2e}, rho {rho:.3g}"
    )
    return SolverResult(
        blocks=blocks,
        objective=objective,
        constraint_violation=violation,
        iterations=iteration,
        converged=converged,
        primal_residual=r_norm,
        dual_residual=s_norm,
        penalty=rho,
    )
