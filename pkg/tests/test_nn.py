import numpy as np
import pytest

from src.algorithms.base import (
    build_joint_receiver_problem,
    build_precoder_problem,
    build_receiver_problem,
    objective_rose,
    precoder_block,
    receiver_block,
    relative_change,
    solve_precoder_half_step,
    solve_receiver_half_step,
)
from src.algorithms.nn import (
    NnIa,
    initial_point,
    run,
    solve_precoder_subproblem,
    solve_receiver_subproblem,
)
from src.exceptions import InfeasibleProblemError
from src.models import ChannelSet, NnIaOptions, ReceiverSet, SystemConfig
from src.solver.admm import check_floor, constraint_violation, evaluate_objective, solve
from src.solver.problem import SolverOptions
from src.system.alignment import build_state, nuclear_objective
from src.system.channels import generate_channels, random_receivers

from .conftest import isolated_channels


@pytest.fixture
def options(fast_solver) -> NnIaOptions:
    return NnIaOptions(kappa_max=3, epsilon=0.1, seed=7, solver=fast_solver)


class TestSubproblems:
    def test_precoder_problem_layout(self, small_config, small_channels):
        _, receivers = initial_point(small_config, 1)
        problem = build_precoder_problem(small_channels, receivers, 0.1)
        assert [b.name for b in problem.variable_blocks] == ["F0", "F1", "F2"]
        # K interference terms plus the wiretap term
        assert len(problem.objective_terms) == 4
        assert len(problem.floor_constraints) == 3
        assert problem.objective_terms[-1].map.shape == (2, 3)

    def test_single_user_has_no_interference_terms(self):
        config = SystemConfig(K=1, N_t=3, N_r=3, N_re=2, d=1)
        channels = generate_channels(config, 0)
        problem = build_precoder_problem(channels, random_receivers(config, 0), 0.1)
        assert len(problem.objective_terms) == 1

    def test_precoder_subproblem_meets_floors(self, small_config, small_channels, fast_solver):
        _, receivers = initial_point(small_config, 2)
        precoders = solve_precoder_subproblem(small_channels, receivers, 0.1, fast_solver)
        assert precoders.F.shape == (3, 4, 1)
        for k in range(3):
            S_k = receivers.W[k].conj().T @ small_channels.link(k, k) @ precoders.F[k]
            assert check_floor(S_k, 0.1 - 1e-6)[0]

    def test_receiver_subproblem_meets_floors(self, small_config, small_channels, fast_solver):
        precoders, _ = initial_point(small_config, 3)
        receivers = solve_receiver_subproblem(small_channels, precoders, 0.1, fast_solver)
        assert receivers.W.shape == (3, 4, 1)
        for k in range(3):
            S_k = receivers.W[k].conj().T @ small_channels.link(k, k) @ precoders.F[k]
            assert check_floor(S_k, 0.1 - 1e-6)[0]

    def test_receiver_problem_decouples(self, small_config, small_channels, fast_solver):
        precoders, _ = initial_point(small_config, 4)
        joint = solve(build_joint_receiver_problem(small_channels, precoders, 0.1), fast_solver)
        separate = sum(
            solve(build_receiver_problem(small_channels, precoders, k, 0.1), fast_solver).objective
            for k in range(3)
        )
        assert joint.objective == pytest.approx(separate, rel=1e-3)


class TestNnIa:
    def test_isolated_links_reach_zero_objective(self, small_config, options):
        result = run(isolated_channels(small_config), small_config, options)
        assert result.initial_objective == pytest.approx(0.0, abs=1e-12)
        assert all(value == pytest.approx(0.0, abs=1e-9) for value in result.history)
        assert result.converged
        assert result.iterations == 2

    def test_objective_decreases(self, small_config, small_channels, options):
        result = run(small_channels, small_config, options)
        assert result.final_objective < result.initial_objective

    def test_history_matches_final_filters(self, small_config, small_channels, options):
        result = run(small_channels, small_config, options)
        state = build_state(small_channels, result.precoders, result.receivers)
        assert nuclear_objective(state) == pytest.approx(result.history[-1], rel=1e-10)

    def test_iteration_budget(self, small_config, small_channels, fast_solver):
        options = NnIaOptions(kappa_max=2, epsilon=0.1, seed=1, tolerance=1e-12, solver=fast_solver)
        result = run(small_channels, small_config, options)
        assert result.iterations == len(result.history) == 2
        assert not result.converged

    def test_filters_are_orthonormalized(self, small_config, small_channels, options):
        result = run(small_channels, small_config, options)
        assert result.precoders.gram_error(small_config.stream_power) < 1e-8
        assert result.receivers.gram_error() < 1e-8

    def test_subproblems_stay_feasible(self, small_config, small_channels, options):
        algorithm = NnIa(small_channels, small_config, options)
        result = algorithm.run()
        # a rejected final pass still costs its two solves
        assert 2 * result.iterations <= algorithm.solves <= 2 * (result.iterations + 1)
        assert len(result.subproblem_margins) == algorithm.solves
        assert min(result.subproblem_margins) >= -1e-6

    def test_deterministic(self, small_config, small_channels, options):
        a = run(small_channels, small_config, options)
        b = run(small_channels, small_config, options)
        assert np.array_equal(a.precoders.F, b.precoders.F)
        assert a.history == b.history

    def test_missing_direct_links_are_infeasible(self, small_config, small_channels):
        legitimate = np.array(small_channels.legitimate)
        for k in range(small_config.K):
            legitimate[k, k] = 0.0
        channels = ChannelSet(legitimate=legitimate, eavesdropper=small_channels.eavesdropper)
        options = NnIaOptions(kappa_max=1, solver=SolverOptions(max_iterations=400))
        with pytest.raises(InfeasibleProblemError):
            run(channels, small_config, options)


class TestHalfSteps:
    def test_receiver_half_step_beats_zero_forcing_point(
        self, small_config, small_channels, fast_solver
    ):
        precoders, _ = initial_point(small_config, 5)
        problem = build_joint_receiver_problem(small_channels, precoders, 0.1)
        # V_k = (H_kk F_k)^+ gives S_k = I
        candidate = {
            receiver_block(k): np.linalg.pinv(small_channels.link(k, k) @ precoders.F[k])
            for k in range(small_config.K)
        }
        assert constraint_violation(problem, candidate) == 0.0
        step = solve_receiver_half_step(small_channels, precoders, 0.1, None, fast_solver)
        assert step.objective <= evaluate_objective(problem, candidate) * (1 + 1e-4) + 1e-6

    def test_precoder_half_step_beats_zero_forcing_point(
        self, small_config, small_channels, fast_solver
    ):
        _, receivers = initial_point(small_config, 6)
        problem = build_precoder_problem(small_channels, receivers, 0.1)
        candidate = {
            precoder_block(k): np.linalg.pinv(
                receivers.W[k].conj().T @ small_channels.link(k, k)
            )
            for k in range(small_config.K)
        }
        assert constraint_violation(problem, candidate) == 0.0
        step = solve_precoder_half_step(small_channels, receivers, 0.1, None, fast_solver)
        assert step.objective <= evaluate_objective(problem, candidate) * (1 + 1e-4) + 1e-6

    def test_precoder_half_step_keeps_the_incoming_point_as_upper_bound(
        self, small_config, small_channels, fast_solver
    ):
        precoders, _ = initial_point(small_config, 7)
        raw = solve_receiver_half_step(small_channels, precoders, 0.1, None, fast_solver)
        receivers = ReceiverSet(W=raw.filters)
        problem = build_precoder_problem(small_channels, receivers, 0.1)
        incoming = {precoder_block(k): precoders.F[k] for k in range(small_config.K)}
        assert constraint_violation(problem, incoming) <= 1e-6
        step = solve_precoder_half_step(small_channels, receivers, 0.1, None, fast_solver)
        assert step.objective <= evaluate_objective(problem, incoming) * (1 + 1e-4) + 1e-6


class TestRiseGuard:
    def test_objective_rose(self):
        assert not objective_rose(None, 5.0)
        assert not objective_rose(2.0, 2.0 + 1e-7)
        assert objective_rose(2.0, 2.01)
        assert not objective_rose(2.0, 2.01, tolerance=0.1)

    def test_rising_pass_is_discarded(self, small_config, small_channels, options, monkeypatch):
        single = run(small_channels, small_config, options.model_copy(update={"kappa_max": 1}))
        values = iter([10.0, 5.0, 6.0])
        monkeypatch.setattr("src.algorithms.nn.nuclear_objective", lambda state: next(values))
        result = run(small_channels, small_config, options)
        assert result.history == [5.0]
        assert result.iterations == 1
        assert not result.converged
        assert np.array_equal(result.precoders.F, single.precoders.F)
        assert np.array_equal(result.receivers.W, single.receivers.W)


class TestInitialPoint:
    def test_deterministic_and_independent_streams(self, small_config):
        F1, W1 = initial_point(small_config, 5)
        F2, W2 = initial_point(small_config, 5)
        assert np.array_equal(F1.F, F2.F)
        assert np.array_equal(W1.W, W2.W)
        assert not np.allclose(F1.F, W1.W)


def test_relative_change():
    assert relative_change(2.0, 1.0) == pytest.approx(0.5)
    assert relative_change(0.0, 0.0) == 0.0
