"""Estimator tests: metrics, inversions, and recovery properties."""

import math

import numpy as np
import pytest

from dseqsync import estimators as est
from dseqsync.sequences import (
    AuxParams,
    SumDiffParams,
    aux_pair,
    sumdiff_pair,
    zc_time_symbol,
)


def rotate(seq, mu):
    return seq * np.exp(1j * mu * np.arange(len(seq)))


class TestAntennaSelection:
    def test_strongest_row_wins(self):
        frame = np.ones((4, 8), dtype=complex)
        frame[2] *= 10
        assert est.select_antenna(frame) == 2

    def test_single_antenna(self):
        assert est.select_antenna(np.ones((1, 8))) == 0

    def test_tie_breaks_low(self):
        frame = np.ones((3, 8), dtype=complex)
        assert est.select_antenna(frame) == 0


class TestZcEstimator:
    def setup_method(self):
        self.n = 64
        self.d = zc_time_symbol(63, 25, self.n)

    def test_no_offset(self):
        rep = est.estimate_zc(self.d, self.d)
        assert rep.epsilon_hat == pytest.approx(0.0, abs=1e-12)

    def test_fractional_offset_oracle_value(self):
        # The half-symbol comparison carries a small deterministic bias from
        # the symbol's non-constant envelope; the value below was computed
        # with this synthesis oracle and is frozen as a regression constant.
        q = rotate(self.d, 2 * math.pi * 0.3 / self.n) * (0.7 - 1.3j)
        rep = est.estimate_zc_frame(q, self.d)
        assert rep.epsilon_hat == pytest.approx(0.297240200531, abs=1e-9)
        assert abs(rep.epsilon_hat - 0.3) < 0.01

    def test_integer_offset_wraps(self):
        q = rotate(self.d, 2 * math.pi * 1.4 / self.n)
        rep = est.estimate_zc_frame(q, self.d)
        # 1.4 aliases to -0.6 (plus the envelope bias)
        assert rep.epsilon_hat == pytest.approx(-0.597618295395, abs=1e-9)
        assert abs(rep.epsilon_hat + 0.6) < 0.01

    def test_degenerate_input(self):
        with pytest.raises(est.DegenerateEstimateError):
            est.estimate_zc(np.zeros(8), np.zeros(8))

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            est.estimate_zc(np.ones(7), np.ones(7))


class TestAuxPipeline:
    def setup_method(self):
        self.n = 64
        self.params = AuxParams.from_k_prime(0.05, 3, self.n)
        self.d0, self.d1 = aux_pair(self.params)

    def test_channel_powers(self):
        ch = est.aux_channels(np.ones(16), np.zeros(16))
        assert ch.p0 == pytest.approx(256.0)
        assert ch.p1 == 0.0

    def test_full_period_tone_sums_to_zero(self):
        tone = np.exp(2j * math.pi * np.arange(16) / 16)
        ch = est.aux_channels(tone, tone)
        assert ch.p0 < 1e-18

    def test_slot_power_closed_form(self):
        # Dirichlet-kernel identity for the coherent slot power
        h = 0.8 - 0.2j
        for mu in (0.11, -0.2, 0.31):
            q0 = rotate(self.d0, mu) * h
            p0 = est.aux_channels(q0, q0).p0
            x = mu - self.params.theta + self.params.delta
            expected = abs(h) ** 2 * math.sin(self.n * x / 2) ** 2 / math.sin(x / 2) ** 2
            assert p0 == pytest.approx(expected, rel=1e-9)

    def test_ratio_endpoints(self):
        assert est.aux_ratio(est.AuxChannels(3.0, 3.0)) == 0.0
        assert est.aux_ratio(est.AuxChannels(3.0, 0.0)) == 1.0
        with pytest.raises(est.DegenerateEstimateError):
            est.aux_ratio(est.AuxChannels(0.0, 0.0))

    def test_ratio_matches_closed_form(self):
        # Off the integer-subcarrier nulls of sin(N(mu-theta)/2) the slot-power
        # ratio equals the closed form. (Half-spacing offsets with even k' sit
        # exactly on a null and are indeterminate 0/0 there.)
        p = AuxParams.from_k_prime(0.0, 4, self.n)
        d0, d1 = aux_pair(p)
        for frac in (0.12, 0.45, 0.81, -0.3):
            mu = frac * p.delta
            alpha = est.aux_ratio(est.aux_channels(rotate(d0, mu), rotate(d1, mu)))
            assert alpha == pytest.approx(est.aux_ratio_closed_form(mu, p), abs=1e-9)

    def test_ratio_scale_invariance(self):
        mu = 0.1
        q0, q1 = rotate(self.d0, mu), rotate(self.d1, mu)
        a1 = est.aux_ratio(est.aux_channels(q0, q1))
        a2 = est.aux_ratio(est.aux_channels(q0 * (3 - 4j), q1 * (3 - 4j)))
        assert a1 == pytest.approx(a2, abs=1e-12)

    def test_closed_form_strictly_decreasing(self):
        mus = self.params.theta + np.linspace(-0.999, 0.999, 1000) * self.params.delta
        alphas = [est.aux_ratio_closed_form(m, self.params) for m in mus]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))

    def test_invert_center_and_edges(self):
        rep = est.aux_invert(0.0, self.params)
        assert rep.mu_hat == pytest.approx(self.params.theta)
        rep = est.aux_invert(-1.0, self.params)
        assert rep.mu_hat == pytest.approx(self.params.theta + self.params.delta)
        rep = est.aux_invert(1.0, self.params)
        assert rep.mu_hat == pytest.approx(self.params.theta - self.params.delta)

    def test_invert_clamps_and_flags(self):
        rep = est.aux_invert(1.2, self.params)
        assert rep.intermediate["clamped"]
        assert rep.mu_hat == pytest.approx(self.params.theta - self.params.delta)

    def test_round_trip_against_bisection_oracle(self):
        # independent inverse: bisection on the monotone closed form
        def bisect_invert(alpha, p):
            lo, hi = p.theta - p.delta, p.theta + p.delta
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if est.aux_ratio_closed_form(mid, p) > alpha:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        for frac in np.linspace(-0.9, 0.9, 50):
            mu = self.params.theta + frac * self.params.delta
            alpha = est.aux_ratio_closed_form(mu, self.params)
            rep = est.aux_invert(alpha, self.params)
            assert abs(rep.mu_hat - mu) < 1e-9
            assert abs(bisect_invert(alpha, self.params) - mu) < 1e-9

    def test_exact_recovery_through_frames(self):
        # even point count keeps the grid off the mu = theta null
        h = -1.1 + 0.4j
        for frac in np.linspace(-0.9, 0.9, 20):
            mu = self.params.theta + frac * self.params.delta
            rep = est.estimate_aux_frames(
                rotate(self.d0, mu) * h, rotate(self.d1, mu) * h, self.params
            )
            assert abs(rep.mu_hat - mu) < 1e-9
            assert rep.epsilon_hat == pytest.approx(self.n * rep.mu_hat / (2 * math.pi))


class TestSumDiffPipeline:
    def setup_method(self):
        self.n = 64
        self.params = SumDiffParams(eta=-2 * math.pi / self.n, n=self.n)
        self.ds, self.dd = sumdiff_pair(self.params)

    def test_channel_sums(self):
        ch = est.sumdiff_channels(np.ones(8), np.ones(8))
        assert ch.p_sum == pytest.approx(8.0)

    def test_difference_null_at_reference(self):
        q_s = rotate(self.ds, self.params.eta)
        q_d = rotate(self.dd, self.params.eta)
        ch = est.sumdiff_channels(q_s, q_d)
        assert abs(ch.p_diff) < 1e-9

    def test_slot_sums_closed_form(self):
        h = 0.5 + 0.9j
        for mu in (self.params.eta + 0.03, self.params.eta + 0.11):
            ch = est.sumdiff_channels(rotate(self.ds, mu) * h, rotate(self.dd, mu) * h)
            x = mu - self.params.eta
            core = (
                h
                * np.exp(1j * (self.n / 2 - 1) / 2 * x)
                * math.sin(self.n * x / 4)
                / math.sin(x / 2)
            )
            p_sum = core * (1 + np.exp(1j * self.n * x / 2))
            p_diff = core * (1 - np.exp(1j * self.n * x / 2))
            assert ch.p_sum == pytest.approx(p_sum, rel=1e-9)
            assert ch.p_diff == pytest.approx(p_diff, rel=1e-9)

    def test_ratio_values(self):
        p = SumDiffParams(eta=0.0, n=self.n)
        ds, dd = sumdiff_pair(p)
        # mu - eta = 2 pi / N: the cot argument is pi/2, ratio 0
        mu = 2 * math.pi / self.n
        beta = est.sumdiff_ratio(est.sumdiff_channels(rotate(ds, mu), rotate(dd, mu)))
        assert beta == pytest.approx(0.0, abs=1e-9)
        # mu - eta = pi / N: cot(pi/4) = 1
        mu = math.pi / self.n
        beta = est.sumdiff_ratio(est.sumdiff_channels(rotate(ds, mu), rotate(dd, mu)))
        assert beta == pytest.approx(1.0, abs=1e-9)

    def test_on_null_error(self):
        with pytest.raises(est.DegenerateEstimateError):
            est.sumdiff_ratio(est.SumDiffChannels(1.0, 0.0))

    def test_invert_at_zero(self):
        p = SumDiffParams(eta=0.0, n=16)
        rep = est.sumdiff_invert(0.0, p)
        assert rep.mu_hat == pytest.approx(math.pi / 8)

    def test_invert_large_beta_approaches_branch_edge(self):
        p = SumDiffParams(eta=0.0, n=16)
        rep = est.sumdiff_invert(1e12, p)
        assert rep.mu_hat == pytest.approx(0.0, abs=1e-6)

    def test_round_trip(self):
        branch = 4 * math.pi / self.n
        for frac in np.linspace(0.05, 0.95, 50):
            mu = self.params.eta + frac * branch
            h = 0.3 - 2.2j
            rep = est.estimate_sumdiff_frames(
                rotate(self.ds, mu) * h, rotate(self.dd, mu) * h, self.params
            )
            assert abs(rep.mu_hat - mu) < 1e-9


class TestCompensation:
    def test_identity_at_zero(self):
        q = np.arange(8, dtype=complex)
        np.testing.assert_array_equal(est.compensate(q, 0.0), q)

    def test_exact_removal(self):
        d = np.exp(-1j * 0.3 * np.arange(32))
        mu = 0.17
        np.testing.assert_allclose(est.compensate(rotate(d, mu), mu), d, atol=1e-12)

    def test_compose_inverse(self):
        rng = np.random.default_rng(0)
        q = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        out = est.compensate(est.compensate(q, 0.4), -0.4)
        np.testing.assert_allclose(out, q, atol=1e-12)


class TestSymmetryMetric:
    def test_unit_modulus_symmetric_scores_n(self):
        n = 64
        half = np.exp(1j * np.linspace(0, 1.5, n // 2))
        q = np.concatenate([half, half[::-1]])  # q[n'] == q[N-1-n'], |q| = 1
        assert est.symmetry_metric(q).real == pytest.approx(n, abs=1e-9)

    def test_antisymmetric_scores_negative(self):
        n = 16
        half = np.ones(n // 2)
        q = np.concatenate([half, -half[::-1]])
        assert est.symmetry_metric(q).real == pytest.approx(-n)
