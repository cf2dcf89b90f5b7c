"""Link-synthesis tests: beams, channel models, received frames."""

import math

import numpy as np
import pytest

from dseqsync.channel import (
    ChannelRealization,
    RicianConfig,
    channel_transfer,
    rician_channel,
    single_path_channel,
    steering_beam,
    tdl_channel,
    transmit_receive,
    ula_response,
)
from dseqsync.sequences import AuxParams, aux_pair


class TestBeam:
    def test_boresight_elements(self):
        f = steering_beam(16, 0.0)
        np.testing.assert_allclose(f, np.full(16, 0.25))

    def test_power_constraint(self):
        for angle in (-60, -17.3, 0, 42.0, 60):
            f = steering_beam(16, angle)
            assert np.sum(np.abs(f) ** 2) == pytest.approx(1.0)
            assert np.max(np.abs(np.abs(f) - 0.25)) < 1e-12

    def test_steering_phases(self):
        f = steering_beam(16, 30.0)
        # phase of element a is -pi*a*sin(30 deg) up to a global rotation
        expected = np.exp(-1j * math.pi * np.arange(16) * 0.5)
        np.testing.assert_allclose(f * 4 / (f[0] * 4), expected / expected[0], atol=1e-12)

    def test_sector_limit(self):
        with pytest.raises(ValueError):
            steering_beam(16, 61.0)


class TestChannels:
    def test_rician_pure_los_is_rank_one(self):
        cfg = RicianConfig(k_factor_db=300.0, n_nlos=5, n_tot=16, m_tot=8)
        ch = rician_channel(cfg, np.random.default_rng(0))
        sv = np.linalg.svd(ch.taps[0], compute_uv=False)
        assert sv[1] / sv[0] < 1e-6

    def test_rician_energy_normalization(self):
        cfg = RicianConfig(k_factor_db=13.2, n_nlos=5, n_tot=16, m_tot=8)
        rng = np.random.default_rng(1)
        acc = 0.0
        draws = 10**4
        for _ in range(draws):
            ch = rician_channel(cfg, rng)
            acc += np.sum(np.abs(ch.taps) ** 2)
        assert acc / draws / (16 * 8) == pytest.approx(1.0, abs=0.05)

    def test_rician_deterministic_from_seed(self):
        cfg = RicianConfig(k_factor_db=13.2, n_nlos=5, n_tot=16, m_tot=8)
        a = rician_channel(cfg, np.random.default_rng(7)).taps
        b = rician_channel(cfg, np.random.default_rng(7)).taps
        np.testing.assert_array_equal(a, b)

    def test_rician_config_validation(self):
        with pytest.raises(ValueError):
            RicianConfig(k_factor_db=13.2, n_nlos=0, n_tot=16, m_tot=8)
        with pytest.raises(ValueError):
            RicianConfig(k_factor_db=math.inf, n_nlos=5, n_tot=16, m_tot=8)

    def test_tdl_single_tap_degenerates(self):
        ch = tdl_channel([(0, 0.0)], np.random.default_rng(2), 16, 8, cp_len=8)
        assert ch.n_taps == 1

    def test_tdl_shape_from_profile(self):
        profile = [(0, 0.0), (2, -3.0), (5, -10.0)]
        ch = tdl_channel(profile, np.random.default_rng(3), 16, 8, cp_len=8)
        assert ch.n_taps == 6
        assert np.all(ch.taps[1] == 0) and np.all(ch.taps[3] == 0)

    def test_tdl_equal_power_split(self):
        rng = np.random.default_rng(4)
        acc = np.zeros(2)
        draws = 10**4
        for _ in range(draws):
            ch = tdl_channel([(0, 0.0), (1, 0.0)], rng, 4, 2, cp_len=4)
            acc += [np.sum(np.abs(ch.taps[0]) ** 2), np.sum(np.abs(ch.taps[1]) ** 2)]
        share = acc / acc.sum()
        assert share[0] == pytest.approx(0.5, abs=0.05)

    def test_tdl_delay_beyond_cp_rejected(self):
        with pytest.raises(ValueError):
            tdl_channel([(0, 0.0), (8, -3.0)], np.random.default_rng(5), 4, 2, cp_len=8)

    def test_tdl_duplicate_delay_rejected(self):
        with pytest.raises(ValueError):
            tdl_channel([(1, 0.0), (1, -3.0)], np.random.default_rng(5), 4, 2, cp_len=8)


class TestTransfer:
    def test_single_tap_frequency_flat(self):
        ch = single_path_channel(16, 8, np.random.default_rng(6))
        f = steering_beam(16, 0.0)
        t0 = channel_transfer(ch, f, 0.0)
        t1 = channel_transfer(ch, f, 1.234)
        np.testing.assert_allclose(t0, t1)

    def test_two_taps_at_zero_frequency(self):
        rng = np.random.default_rng(7)
        ch = tdl_channel([(0, 0.0), (1, -3.0)], rng, 4, 2, cp_len=4)
        f = steering_beam(4, 0.0)
        expected = (ch.taps[0] + ch.taps[1]) @ f
        np.testing.assert_allclose(channel_transfer(ch, f, 0.0), expected)

    def test_matches_brute_force_sum(self):
        rng = np.random.default_rng(8)
        ch = tdl_channel([(0, 0.0), (1, -2.0), (3, -6.0)], rng, 8, 4, cp_len=8)
        f = steering_beam(8, 15.0)
        omega = 0.7
        brute = sum(ch.taps[l] @ f * np.exp(1j * l * omega) for l in range(ch.n_taps))
        np.testing.assert_allclose(channel_transfer(ch, f, omega), brute, atol=1e-12)

    def test_linear_in_beam(self):
        rng = np.random.default_rng(9)
        ch = tdl_channel([(0, 0.0), (2, -4.0)], rng, 8, 4, cp_len=8)
        f1 = steering_beam(8, 10.0)
        f2 = steering_beam(8, -25.0)
        lhs = channel_transfer(ch, 0.3 * f1 + 0.7j * f2, 0.4)
        rhs = 0.3 * channel_transfer(ch, f1, 0.4) + 0.7j * channel_transfer(ch, f2, 0.4)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestTransmitReceive:
    def setup_method(self):
        n = 64
        self.params = AuxParams.from_k_prime(0.0, 2, n)
        self.d, _ = aux_pair(self.params)
        self.f = steering_beam(16, 0.0)

    def test_flat_noiseless(self):
        ch = single_path_channel(16, 8, np.random.default_rng(10))
        frame = transmit_receive(self.d, ch, self.f, mu=0.0)
        gains = ch.taps[0] @ self.f
        np.testing.assert_allclose(frame, np.outer(gains, self.d), atol=1e-12)

    def test_pure_rotation(self):
        ch = single_path_channel(16, 8, np.random.default_rng(11))
        mu = 2 * math.pi * 0.6 / 64
        frame = transmit_receive(self.d, ch, self.f, mu=mu)
        base = transmit_receive(self.d, ch, self.f, mu=0.0)
        ratio = frame / base
        expected = np.exp(1j * mu * np.arange(64))
        np.testing.assert_allclose(ratio, np.broadcast_to(expected, ratio.shape), atol=1e-10)

    def test_multipath_matches_brute_convolution(self):
        rng = np.random.default_rng(12)
        ch = tdl_channel([(0, 0.0), (1, -3.0), (2, -6.0)], rng, 16, 4, cp_len=8)
        mu = 0.05
        frame = transmit_receive(self.d, ch, self.f, mu=mu)
        n = self.d.size
        brute = np.zeros((4, n), dtype=complex)
        for b in range(4):
            for t in range(n):
                acc = 0
                for l in range(ch.n_taps):
                    acc += (ch.taps[l][b] @ self.f) * self.d[(t - l) % n]
                brute[b, t] = np.exp(1j * mu * t) * acc
        np.testing.assert_allclose(frame, brute, atol=1e-10)

    def test_noise_requires_rng(self):
        ch = single_path_channel(16, 8, np.random.default_rng(13)).with_noise_var(0.1)
        with pytest.raises(ValueError):
            transmit_receive(self.d, ch, self.f, mu=0.0)

    def test_noise_statistics(self):
        ch = single_path_channel(16, 1, np.random.default_rng(14)).with_noise_var(0.25)
        rng = np.random.default_rng(15)
        clean = transmit_receive(self.d, ch.with_noise_var(0.0), self.f, mu=0.0)
        acc = []
        for _ in range(200):
            noisy = transmit_receive(self.d, ch, self.f, mu=0.0, rng=rng)
            acc.append(np.mean(np.abs(noisy - clean) ** 2))
        assert np.mean(acc) == pytest.approx(0.25, rel=0.05)
