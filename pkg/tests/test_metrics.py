import numpy as np
import pytest

from src.exceptions import DimensionError, RateComputationError
from src.metrics import leakage_rate, log2det, secrecy_sum_rate, user_rate
from src.models import ChannelSet, PrecoderSet, RateReport, SystemConfig
from src.system.channels import generate_channels, random_precoders


def _eigen_rate(signal, interferers, noise):
    """log2 det via eigenvalues, independent of the Cholesky path"""
    R = noise * np.eye(signal.shape[0], dtype=complex)
    for term in interferers:
        R = R + term @ term.conj().T
    with_signal = R + signal @ signal.conj().T
    return float(
        np.sum(np.log2(np.linalg.eigvalsh(with_signal))) - np.sum(np.log2(np.linalg.eigvalsh(R)))
    )


@pytest.fixture
def two_user_instance():
    config = SystemConfig(K=2, N_t=4, N_r=4, N_re=3, d=2, P_t=10.0)
    return config, generate_channels(config, seed=8), random_precoders(config, seed=9)


class TestUserRate:
    def test_identity_channel_closed_form(self):
        d = 2
        channels = ChannelSet(
            legitimate=np.eye(d, dtype=complex)[None, None],
            eavesdropper=np.zeros((1, 1, d), dtype=complex),
        )
        # P_t = d·σ² so that F^H F = σ²·I
        precoders = PrecoderSet(F=np.eye(d, dtype=complex)[None])
        assert user_rate(channels, precoders, 0, sigma2=1.0) == pytest.approx(d, abs=1e-9)

    def test_silent_transmitter(self, two_user_instance):
        config, channels, precoders = two_user_instance
        F = np.array(precoders.F)
        F[0] = 0.0
        assert user_rate(channels, PrecoderSet(F=F), 0, 1.0) == 0.0

    def test_matches_eigenvalue_oracle(self, two_user_instance):
        _, channels, precoders = two_user_instance
        F = precoders.F
        for k, l in ((0, 1), (1, 0)):
            expected = _eigen_rate(
                channels.link(k, k) @ F[k], [channels.link(k, l) @ F[l]], 1.0
            )
            assert user_rate(channels, precoders, k, 1.0) == pytest.approx(expected, abs=1e-9)

    def test_user_index_checked(self, two_user_instance):
        _, channels, precoders = two_user_instance
        with pytest.raises(DimensionError):
            user_rate(channels, precoders, 2, 1.0)


class TestLeakageRate:
    def test_matches_eigenvalue_oracle(self, two_user_instance):
        _, channels, precoders = two_user_instance
        F = precoders.F
        expected = _eigen_rate(channels.link(2, 1) @ F[1], [channels.link(2, 0) @ F[0]], 0.5)
        assert leakage_rate(channels, precoders, 1, 0.5) == pytest.approx(expected, abs=1e-9)

    def test_blind_eavesdropper(self, two_user_instance):
        _, channels, precoders = two_user_instance
        blind = ChannelSet(
            legitimate=channels.legitimate, eavesdropper=np.zeros_like(channels.eavesdropper)
        )
        assert leakage_rate(blind, precoders, 0, 1.0) == 0.0
        assert leakage_rate(blind, precoders, 1, 1.0) == 0.0


class TestSecrecySumRate:
    def test_blind_eavesdropper_keeps_every_rate(self, two_user_instance):
        _, channels, precoders = two_user_instance
        blind = ChannelSet(
            legitimate=channels.legitimate, eavesdropper=np.zeros_like(channels.eavesdropper)
        )
        report = secrecy_sum_rate(blind, precoders, 1.0)
        assert report.ssr == pytest.approx(sum(report.per_user_rate))

    def test_strong_eavesdropper_is_clamped(self, two_user_instance):
        _, channels, precoders = two_user_instance
        loud = ChannelSet(
            legitimate=0.01 * channels.legitimate, eavesdropper=100.0 * channels.eavesdropper
        )
        report = secrecy_sum_rate(loud, precoders, 1.0)
        assert report.per_user_secrecy == [0.0, 0.0]
        assert report.ssr == 0.0

    def test_recomposition(self, two_user_instance):
        _, channels, precoders = two_user_instance
        report = secrecy_sum_rate(channels, precoders, 1.0, sigma2_e=2.0)
        for k in range(2):
            rate = user_rate(channels, precoders, k, 1.0)
            leak = leakage_rate(channels, precoders, k, 2.0)
            assert report.per_user_secrecy[k] == pytest.approx(max(rate - leak, 0.0))
        assert report.ssr == pytest.approx(sum(report.per_user_secrecy))

    def test_common_phase_is_irrelevant(self, two_user_instance):
        _, channels, precoders = two_user_instance
        a = secrecy_sum_rate(channels, precoders, 1.0)
        b = secrecy_sum_rate(channels, precoders.scaled(np.exp(0.7j)), 1.0)
        assert b.per_user_rate == pytest.approx(a.per_user_rate, abs=1e-10)
        assert b.per_user_leakage == pytest.approx(a.per_user_leakage, abs=1e-10)

    def test_report_rejects_inconsistent_sum(self):
        with pytest.raises(ValueError):
            RateReport(
                per_user_rate=[1.0], per_user_leakage=[0.0], per_user_secrecy=[1.0], ssr=2.0
            )


class TestLogDet:
    def test_non_finite(self):
        with pytest.raises(RateComputationError):
            log2det(np.array([[np.nan, 0], [0, 1]], dtype=complex))

    def test_not_positive_definite(self):
        with pytest.raises(RateComputationError) as info:
            log2det(np.diag([1.0, -1.0]).astype(complex))
        assert info.value.condition_number == pytest.approx(1.0)

    def test_identity(self):
        assert log2det(4.0 * np.eye(3, dtype=complex)) == pytest.approx(6.0)
