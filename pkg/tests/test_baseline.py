import numpy as np
import pytest

from src.algorithms.baseline import MinLeakageIa, least_eigenvectors, run_min_leakage_ia
from src.exceptions import DegenerateIterateError, DimensionError
from src.models import PrecoderSet, ReceiverSet
from src.system.alignment import build_state, leakage_powers
from src.system.channels import generate_channels, random_precoders

from .conftest import isolated_channels


class TestLeastEigenvectors:
    def test_picks_smallest_eigenvalues(self):
        Q = np.diag([3.0, 0.5, 2.0, 0.1]).astype(complex)
        vectors = least_eigenvectors(Q, 2)
        assert vectors.shape == (4, 2)
        assert np.allclose(np.abs(vectors[:, 0]), [0, 0, 0, 1])
        assert np.allclose(np.abs(vectors[:, 1]), [0, 1, 0, 0])

    def test_non_finite_covariance(self):
        Q = np.eye(3, dtype=complex)
        Q[0, 0] = np.nan
        with pytest.raises(DegenerateIterateError):
            least_eigenvectors(Q, 1)


class TestMinLeakageIa:
    def test_isolated_links_leak_nothing(self, small_config):
        channels = isolated_channels(small_config)
        result = run_min_leakage_ia(channels.legitimate, small_config, iterations=1, seed=0)
        assert result.history[0] == pytest.approx(0.0, abs=1e-20)

    def test_leakage_never_increases(self, small_config, small_channels):
        result = run_min_leakage_ia(small_channels.legitimate, small_config, 30, seed=2)
        assert result.iterations == 30
        assert result.history[0] <= result.initial_objective * (1 + 1e-9) + 1e-12
        for before, after in zip(result.history, result.history[1:]):
            assert after <= before * (1 + 1e-9) + 1e-12

    def test_gram_convention(self, small_config, small_channels):
        result = run_min_leakage_ia(small_channels.legitimate, small_config, 5, seed=1)
        assert result.precoders.gram_error(small_config.stream_power) < 1e-10
        assert result.receivers.gram_error() < 1e-10

    def test_rejects_wrong_link_shape(self, small_config, small_channels):
        with pytest.raises(DimensionError):
            MinLeakageIa(small_channels.legitimate[:, :, :3], small_config)

    def test_leakage_matches_interference_power(self, small_config, small_channels):
        algorithm = MinLeakageIa(small_channels.legitimate, small_config)
        F = random_precoders(small_config, 0).F
        W = algorithm.update_receivers(F)
        state = build_state(small_channels, PrecoderSet(F=F), ReceiverSet(W=W))
        assert algorithm.leakage(F, W) == pytest.approx(leakage_powers(state)[0], rel=1e-10)

    def test_proper_system_aligns_and_ignores_eavesdropper(self, system_18x12):
        channels = generate_channels(system_18x12, seed=21)
        result = run_min_leakage_ia(channels.legitimate, system_18x12, 100, seed=4)
        state = build_state(channels, result.precoders, result.receivers)
        desired = float(np.sum(np.abs(state.S) ** 2))
        interference, wiretap = leakage_powers(state)
        assert interference <= 1e-4 * desired

        initial_F = random_precoders(system_18x12, 4)
        initial_wiretap = sum(
            np.linalg.norm(channels.link(3, l) @ initial_F.F[l]) ** 2 for l in range(3)
        )
        assert 0.5 * initial_wiretap <= wiretap <= 2.0 * initial_wiretap
