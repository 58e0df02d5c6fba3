"""Unit tests for end-to-end recovery: Fourier-domain unfolding, the
higher-order-difference baseline, threshold optimization, sampling bounds
and error metrics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _trials import fixpoint_trial, nonideal_trials

from modsample import (
    FoldConsistencyError,
    ModsampleError,
    RecoveryError,
    SampleVector,
    UndersampledError,
    UniformGrid,
    anti_difference,
    apply_residue,
    calibrated_mse,
    finite_difference,
    fold_ideal,
    fourier_prony_recover,
    mse,
    optimize_lambda,
    round_beta,
    sample,
    sampling_bounds,
    synthesize_random,
    usf_recover,
)
from modsample.folding import ResidueSpec


def _sv(values):
    values = np.asarray(values, dtype=float)
    return SampleVector(values=values, grid=UniformGrid(T=1.0, K=len(values)))


class TestSamplingBounds:
    @pytest.mark.parametrize(
        "tau,P,M,expected",
        [
            (0.996e-3, 15, 7, 21.652e-6),
            (199e-3, 14, 26, 2426.8e-6),
            (24.99e-3, 3, 44, 260.31e-6),
        ],
    )
    def test_published_fourier_rates(self, tau, P, M, expected):
        T_fd, _, _ = sampling_bounds(tau, P, M)
        assert T_fd == pytest.approx(expected, rel=1e-3)

    def test_baseline_rate_and_count(self):
        tau, P, M = 1.0, 4, 3
        T_fd, T_us, K_min = sampling_bounds(tau, P, M)
        Omega = 2.0 * np.pi * P / tau
        assert T_us == pytest.approx(1.0 / (2.0 * Omega * np.e))
        assert K_min == 2 * (P + M + 1)

    def test_argument_errors(self):
        with pytest.raises(ValueError):
            sampling_bounds(0.0, 1, 1)
        with pytest.raises(ValueError):
            sampling_bounds(1.0, -1, 1)


class TestMse:
    def test_examples(self):
        assert mse([1, 2], [1, 4]) == pytest.approx(2.0)
        assert mse([3.0, 4.0], [3.0, 4.0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mse([1.0], [1.0, 2.0])

    @given(
        st.lists(
            st.floats(min_value=-50.0, max_value=50.0, allow_nan=False),
            min_size=1,
            max_size=20,
        ),
        st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
    )
    @settings(max_examples=100, deadline=None)
    def test_translation_invariance(self, values, c):
        x = np.asarray(values)
        y = x[::-1].copy()
        assert mse(x + c, y + c) == pytest.approx(mse(x, y), rel=1e-9, abs=1e-9)

    def test_calibrated_kills_offset(self):
        x = np.array([1.0, 2.0, 3.0])
        assert calibrated_mse(x + 7.3, x) == pytest.approx(0.0, abs=1e-24)


class TestAntiDifference:
    def test_examples(self):
        np.testing.assert_allclose(anti_difference([2.0, -2.0]), [0.0, 2.0, 0.0])
        np.testing.assert_allclose(anti_difference(np.zeros(4)), np.zeros(5))

    @given(
        st.lists(
            st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
            min_size=1,
            max_size=30,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_inverts_difference(self, values):
        x = np.asarray(values)
        np.testing.assert_allclose(
            finite_difference(anti_difference(x), 1), x, atol=1e-9
        )


class TestFourierPronyRecover:
    def test_no_folds_returns_centered_input(self):
        g = synthesize_random(P=2, tau=1.0, amplitude=0.5, seed=6)
        y = sample(g, UniformGrid(T=1.0 / 16, K=16))
        report = fourier_prony_recover(y, 2, 0)
        np.testing.assert_allclose(
            report.gamma_hat.values, y.values - np.mean(y.values), atol=1e-12
        )
        assert report.model.M == 0

    @pytest.mark.parametrize("estimator", ["prony", "pencil"])
    def test_ideal_folds_exact(self, estimator):
        trial = fixpoint_trial(seed=17, P=5, amplitude=4.5)
        report = fourier_prony_recover(trial.y, trial.P, trial.M, estimator=estimator)
        err = calibrated_mse(report.gamma_hat.values, trial.gamma.values)
        assert err < 1e-12

    def test_threshold_agnostic(self):
        # identical code path regardless of the (unknown) folding threshold:
        # fold at 0.7 and recover without ever passing a threshold
        g = synthesize_random(P=3, tau=1.0, amplitude=3.0, seed=8)
        grid = UniformGrid(T=1.0 / 64, K=64)
        gamma = sample(g, grid)
        y, residue = fold_ideal(gamma, 0.7)
        from modsample import harness, residue_spec_from_samples

        spec = residue_spec_from_samples(residue, 1.0)
        M = harness.realized_fold_count(spec, grid)
        report = fourier_prony_recover(y, 3, M)
        assert calibrated_mse(report.gamma_hat.values, gamma.values) < 1e-12

    def test_nonideal_amplitudes_exact(self):
        (trial, spec2, y2, M2) = nonideal_trials(1, seed0=3)[0]
        report = fourier_prony_recover(y2, trial.P, M2)
        assert calibrated_mse(report.gamma_hat.values, trial.gamma.values) < 1e-10

    def test_report_consistency(self):
        trial = fixpoint_trial(seed=21, P=4, amplitude=5.0)
        report = fourier_prony_recover(trial.y, trial.P, trial.M)
        reassembled = (
            report.gamma_hat.values - report.residue_hat.values - report.offset_applied
        )
        np.testing.assert_allclose(reassembled, trial.y.values, atol=1e-12)

    def test_calibration_reference(self):
        trial = fixpoint_trial(seed=21, P=4, amplitude=5.0)
        report = fourier_prony_recover(
            trial.y, trial.P, trial.M, calibration_reference=trial.gamma.values
        )
        assert np.mean(report.gamma_hat.values) == pytest.approx(
            np.mean(trial.gamma.values), abs=1e-9
        )

    def test_literal_mode_approximate_recovery(self):
        # dropping the wrap sample leaks the bandlimited part into the
        # out-of-band bins, so literal mode is approximate rather than exact;
        # with few folds and generous oversampling it is still accurate
        trial = fixpoint_trial(seed=5, P=3, amplitude=1.6, k_factor=16)
        report = fourier_prony_recover(trial.y, trial.P, trial.M, mode="literal")
        err = calibrated_mse(report.gamma_hat.values, trial.gamma.values)
        assert report.diagnostics["mode"] == "literal"
        assert err < 1e-4
        assert err < calibrated_mse(trial.y.values, trial.gamma.values)

    def test_undersampled_rejected(self):
        y = _sv(np.zeros(8))
        with pytest.raises(UndersampledError):
            fourier_prony_recover(y, 2, 4)

    def test_negative_m_rejected(self):
        with pytest.raises(ValueError):
            fourier_prony_recover(_sv(np.zeros(8)), 1, -1)

    def test_error_carries_step(self):
        trial = fixpoint_trial(seed=17, P=5, amplitude=4.5)
        with pytest.raises(RecoveryError) as err:
            fourier_prony_recover(trial.y, trial.P, trial.M, estimator="bogus")
        assert err.value.step == 4


class TestUsfRecover:
    def _oversampled(self, seed=9, P=2, amplitude=3.0, K=256):
        g = synthesize_random(P, 1.0, amplitude, seed)
        grid = UniformGrid(T=1.0 / K, K=K)
        gamma = sample(g, grid)
        y, _ = fold_ideal(gamma, 1.0)
        Omega = 2.0 * np.pi * P
        beta = round_beta(float(np.max(np.abs(gamma.values))), 1.0)
        return gamma, y, Omega, beta

    def test_no_folds_identity(self):
        g = synthesize_random(P=2, tau=1.0, amplitude=0.8, seed=1)
        grid = UniformGrid(T=1.0 / 128, K=128)
        gamma = sample(g, grid)
        report = usf_recover(gamma, 1.0, 2.0 * np.pi * 2, 2.0)
        assert calibrated_mse(report.gamma_hat.values, gamma.values) < 1e-20

    def test_ideal_folds_exact(self):
        gamma, y, Omega, beta = self._oversampled()
        report = usf_recover(y, 1.0, Omega, beta)
        assert calibrated_mse(report.gamma_hat.values, gamma.values) < 1e-20
        assert report.diagnostics["N"] >= 1

    def test_nonideal_folds_detected_or_wrong(self):
        gamma, y, Omega, beta = self._oversampled(seed=12, P=2, K=256)
        grid = y.grid
        # shift one residue jump off the 2*lambda lattice
        spec = ResidueSpec(events=((64 * grid.T, 1.1),), tau=1.0)
        y2 = apply_residue(gamma, spec)
        try:
            report = usf_recover(y2, 1.0, Omega, beta)
            assert calibrated_mse(report.gamma_hat.values, gamma.values) > 1e-3
        except ModsampleError:
            pass

    def test_strict_false_never_raises_consistency(self):
        gamma, y, Omega, beta = self._oversampled(seed=12, P=2, K=256)
        spec = ResidueSpec(events=((64 * y.grid.T, 1.1),), tau=1.0)
        y2 = apply_residue(gamma, spec)
        report = usf_recover(y2, 1.0, Omega, beta, strict=False)
        assert report.method == "usf"

    def test_forced_order_validation(self):
        _, y, Omega, beta = self._oversampled()
        with pytest.raises(ValueError):
            usf_recover(y, 1.0, Omega, beta, N=0)


class TestOptimizeLambda:
    def _folded_at(self, lam_true, seed=5, P=2, K=256):
        g = synthesize_random(P, 1.0, 3.0, seed)
        grid = UniformGrid(T=1.0 / K, K=K)
        gamma = sample(g, grid)
        y, _ = fold_ideal(gamma, lam_true)
        return gamma, y, 2.0 * np.pi * P

    def test_recovers_true_threshold(self):
        gamma, y, Omega = self._folded_at(1.0)
        lam_opt, report = optimize_lambda(y, gamma, Omega, 0.55, 1.45, 0.01)
        assert abs(lam_opt - 1.0) <= 0.01 + 1e-12
        assert report.method == "usf_opt"

    def test_detects_miscalibrated_threshold(self):
        # hardware folded at 0.9 while the nominal threshold is 1.0
        gamma, y, Omega = self._folded_at(0.9)
        lam_opt, _ = optimize_lambda(y, gamma, Omega, 0.5, 1.5, 0.01)
        assert abs(lam_opt - 0.9) <= 0.01 + 1e-12

    def test_grid_validation(self):
        gamma, y, Omega = self._folded_at(1.0)
        with pytest.raises(ValueError):
            optimize_lambda(y, gamma, Omega, 0.0, 1.0, 0.01)
        with pytest.raises(ValueError):
            optimize_lambda(y, gamma, Omega, 1.0, 0.5, 0.01)


class TestBackwardsCompatibility:
    def test_fourier_matches_baseline_on_ideal_data(self):
        g = synthesize_random(P=3, tau=1.0, amplitude=4.0, seed=2)
        K = 512
        grid = UniformGrid(T=1.0 / K, K=K)
        gamma = sample(g, grid)
        y, residue = fold_ideal(gamma, 1.0)
        from modsample import harness, residue_spec_from_samples

        spec = residue_spec_from_samples(residue, 1.0)
        M = harness.realized_fold_count(spec, grid)
        Omega = 2.0 * np.pi * 3
        beta = round_beta(float(np.max(np.abs(gamma.values))), 1.0)
        fp = fourier_prony_recover(y, 3, M)
        us = usf_recover(y, 1.0, Omega, beta)
        rms = np.sqrt(
            mse(
                fp.gamma_hat.values - np.mean(fp.gamma_hat.values),
                us.gamma_hat.values - np.mean(us.gamma_hat.values),
            )
        )
        assert rms < 1e-8
