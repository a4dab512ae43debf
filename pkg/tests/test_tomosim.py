import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from causal_witness.cmat import pauli
from causal_witness.exceptions import InsufficientStatisticsError, UndefinedWeakValueError
from causal_witness.tomosim import (
    THREADS_ENV,
    ExperimentLayout,
    PointerModel,
    calibrate_momentum_coefficient,
    fitted_slope,
    photon_uniforms,
    pointer_distribution,
    run_ideal_tomography,
    run_tomography,
    simulate_pointer_record,
)
from causal_witness.twostate import D, H, PolarizerConfig, TwoState, V, pauli_weak_values, polarizer_two_state

from conftest import random_two_state, two_states

N_FULL = 1_000_000
SIXTH = PolarizerConfig(math.pi / 6, 0.0)


def gauss(x, delta):
    return (2 * math.pi * delta**2) ** -0.25 * np.exp(-(x**2) / (4 * delta**2))


def hand_amplitude(ts, j, g, delta):
    """Pointer after exp(-i g sigma_j p), projected on the post-selection."""
    w, v = np.linalg.eigh(pauli(j))
    amps = {round(val): np.vdot(ts.phi, v[:, k]) * np.vdot(v[:, k], ts.psi) for k, val in enumerate(w)}
    return lambda x: amps[1] * gauss(x - g, delta) + amps[-1] * gauss(x + g, delta)


def quad_moment(f, k, lim):
    return integrate.quad(lambda x: x**k * f(x), -lim, lim, limit=200, epsabs=1e-13, epsrel=1e-12)[0]


@pytest.fixture(scope="module")
def coupled_runs():
    layout = ExperimentLayout("coupled_polarizers", SIXTH)
    return {n: run_tomography(layout, n=n, seed=2024) for n in (10_000, 100_000, N_FULL)}


@pytest.fixture(scope="module")
def doubled_run():
    return run_tomography(ExperimentLayout("doubled_path", SIXTH), n=N_FULL, seed=2025)


def incoherent_weights(cfg):
    ts = polarizer_two_state(cfg)
    return np.real(pauli_weak_values(ts))


class TestPointerModel:
    def test_defaults(self):
        pm = PointerModel()
        assert pm.weakness == pytest.approx(1e-2)
        assert pm.is_weak
        assert pm.momentum_spread == 0.5

    def test_flag(self):
        assert not PointerModel(0.2, 1.0).is_weak

    @pytest.mark.parametrize("g,delta", [(0.1, 0.0), (-0.1, 1.0), (0.1, math.nan)])
    def test_invalid(self, g, delta):
        with pytest.raises(ValueError):
            PointerModel(g, delta)


class TestPointerDistribution:
    @pytest.mark.parametrize("g,delta", [(0.3, 1.0), (1.5, 0.7), (0.01, 2.0)])
    def test_moments_against_quadrature(self, rng, g, delta):
        ts = random_two_state(rng, min_overlap=0.2)
        for j in (1, 2, 3):
            dist = pointer_distribution(ts, j, PointerModel(g, delta))
            amp = hand_amplitude(ts, j, g, delta)
            dens = lambda x: abs(amp(x)) ** 2
            lim = g + 14 * delta
            norm = quad_moment(dens, 0, lim)
            assert dist.success_probability == pytest.approx(norm, rel=1e-9)
            assert dist.position_mean == pytest.approx(quad_moment(dens, 1, lim) / norm, abs=1e-9)
            assert dist.position_second_moment == pytest.approx(quad_moment(dens, 2, lim) / norm, rel=1e-9)
            # momentum density from a numerical Fourier transform of the position amplitude
            def ft(p):
                re = integrate.quad(lambda x: (amp(x) * np.exp(-1j * p * x)).real, -lim, lim, limit=200)[0]
                im = integrate.quad(lambda x: (amp(x) * np.exp(-1j * p * x)).imag, -lim, lim, limit=200)[0]
                return complex(re, im) / math.sqrt(2 * math.pi)

            for p in (-0.9, 0.0, 0.37):
                assert complex(dist.momentum_amplitude(p)) == pytest.approx(ft(p), abs=1e-9)
            pdens = lambda p: float(dist.momentum_pdf(p))
            plim = 14 / (2 * delta) + g
            assert quad_moment(pdens, 0, plim) == pytest.approx(1, abs=1e-9)
            assert dist.momentum_mean == pytest.approx(quad_moment(pdens, 1, plim), abs=1e-9)
            assert dist.momentum_second_moment == pytest.approx(quad_moment(pdens, 2, plim), rel=1e-8)

    def test_cdfs_integrate_pdfs(self, rng):
        ts = random_two_state(rng, min_overlap=0.2)
        dist = pointer_distribution(ts, 2, PointerModel(0.8, 1.0))
        for x in (-2.0, -0.3, 0.0, 1.1):
            assert dist.position_cdf(x) == pytest.approx(integrate.quad(dist.position_pdf, -20, x)[0], abs=1e-10)
            assert dist.momentum_cdf(x / 2) == pytest.approx(integrate.quad(dist.momentum_pdf, -12, x / 2)[0], abs=1e-10)

    def test_sampling_ks(self, rng):
        ts = random_two_state(rng, min_overlap=0.3)
        dist = pointer_distribution(ts, 1, PointerModel(1.2, 1.0))
        u = photon_uniforms(99, 0, 20_000)
        assert stats.kstest(dist.sample_position(u[:, 0]), dist.position_cdf).pvalue > 1e-3
        assert stats.kstest(dist.sample_momentum(u[:, 1]), dist.momentum_cdf).pvalue > 1e-3

    def test_inversion_accuracy(self):
        dist = pointer_distribution(TwoState(V, D), 2, PointerModel(0.5, 1.0))
        u = np.array([1e-9, 0.1, 0.5, 0.77, 1 - 1e-9])
        np.testing.assert_allclose(dist.position_cdf(dist.sample_position(u)), u, atol=1e-12)
        np.testing.assert_allclose(dist.momentum_cdf(dist.sample_momentum(u)), u, atol=1e-12)

    @given(two_states())
    def test_uncoupled(self, ts):
        for j in (1, 2, 3):
            dist = pointer_distribution(ts, j, PointerModel(0.0, 1.0))
            assert dist.position_mean == 0 and dist.momentum_mean == 0
            assert dist.success_probability == pytest.approx(abs(ts.overlap) ** 2, abs=1e-12)

    def test_eigenstate_shift(self):
        dist = pointer_distribution(TwoState(V, D), 3, PointerModel(0.05, 1.0))
        assert dist.amp_minus == 0
        assert dist.position_mean == 0.05

    def test_orthogonal(self):
        with pytest.raises(UndefinedWeakValueError):
            pointer_distribution(TwoState(V, H), 1, PointerModel())

    @settings(max_examples=25)
    @given(two_states(min_overlap=0.7), st.sampled_from([1, 2, 3]))
    def test_linear_response(self, ts, j):
        # |w| <= 1/0.7 here; the curvature of the exact mean grows like |w|^3
        w = pauli_weak_values(ts)[j - 1]
        assert fitted_slope(ts, j, 1.0, "position") == pytest.approx(w.real, abs=1e-6)
        kappa = calibrate_momentum_coefficient(PointerModel(0.01, 1.0))
        assert fitted_slope(ts, j, 1.0, "momentum") / kappa == pytest.approx(w.imag, abs=1e-6)

    def test_curvature_is_second_order(self):
        ts = TwoState(V, polarizer_two_state(PolarizerConfig(1.25, 0.0)).post)
        w = pauli_weak_values(ts)[0].real
        coarse = abs(fitted_slope(ts, 1, 1.0, "position", rel_g=1e-3) - w)
        fine = abs(fitted_slope(ts, 1, 1.0, "position", rel_g=1e-4) - w)
        assert coarse > 1e-6
        assert fine == pytest.approx(coarse / 100, rel=0.05)

    @pytest.mark.parametrize("delta", [0.5, 1.0, 3.0])
    def test_calibration_matches_gaussian_theory(self, delta):
        assert calibrate_momentum_coefficient(PointerModel(0.01, delta)) == pytest.approx(1 / (2 * delta**2), rel=1e-5)


class TestRandomStreams:
    def test_slices_agree(self):
        full = photon_uniforms(5, 0, 300)
        np.testing.assert_array_equal(full[120:], photon_uniforms(5, 120, 300))
        assert full.shape == (300, 8)
        assert (full > 0).all() and (full < 1).all()

    def test_seeds_differ(self):
        assert not np.array_equal(photon_uniforms(1, 0, 10), photon_uniforms(2, 0, 10))

    def test_thread_and_chunk_invariance(self, monkeypatch):
        layout = ExperimentLayout("coupled_polarizers", SIXTH)
        a = simulate_pointer_record(layout, PointerModel(), 150_000, 11, threads=1)
        b = simulate_pointer_record(layout, PointerModel(), 150_000, 11, threads=3)
        monkeypatch.setenv(THREADS_ENV, "2")
        c = simulate_pointer_record(layout, PointerModel(), 150_000, 11)
        for rec in (b, c):
            for name in ("photon", "observable", "position", "momentum"):
                np.testing.assert_array_equal(getattr(a, name), getattr(rec, name))

    def test_prefix_consistency(self):
        layout = ExperimentLayout("doubled_path", SIXTH)
        short = simulate_pointer_record(layout, PointerModel(), 1000, 3)
        long = simulate_pointer_record(layout, PointerModel(), 70_000, 3)
        k = short.n_detected
        np.testing.assert_array_equal(short.photon, long.photon[:k])
        np.testing.assert_array_equal(short.position, long.position[:k])

    @pytest.mark.parametrize("seed", [-1, 2**64, 1.5, True])
    def test_bad_seed(self, seed):
        with pytest.raises((TypeError, ValueError)):
            run_tomography(ExperimentLayout("coupled_polarizers", SIXTH), n=10, seed=seed)


class TestLayouts:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentLayout("doubled_path", SIXTH, 0.3)
        with pytest.raises(ValueError):
            ExperimentLayout("fixed_order", SIXTH, 0.5)
        with pytest.raises(ValueError):
            ExperimentLayout("teleporter", SIXTH)
        assert ExperimentLayout("coupled_polarizers", (0.2, 0.0)).config == PolarizerConfig(0.2, 0.0)

    def test_detection_rates(self):
        n = 60_000
        coupled = simulate_pointer_record(ExperimentLayout("coupled_polarizers", SIXTH), PointerModel(), n, 1)
        doubled = simulate_pointer_record(ExperimentLayout("doubled_path", SIXTH), PointerModel(), n, 1)
        pass_prob = math.cos(math.pi / 6) ** 2
        for rec, expected in ((coupled, 0.5 * pass_prob), (doubled, 0.5 * pass_prob**2)):
            assert rec.n_detected / n == pytest.approx(expected, abs=5 * math.sqrt(expected / n))

    def test_round_robin(self):
        rec = simulate_pointer_record(ExperimentLayout("coupled_polarizers", SIXTH), PointerModel(), 3000, 1)
        np.testing.assert_array_equal(rec.observable, rec.photon % 3 + 1)


class TestRunTomography:
    def test_determinism(self):
        layout = ExperimentLayout("coupled_polarizers", SIXTH)
        a = run_tomography(layout, n=20_000, seed=8)
        b = run_tomography(layout, n=20_000, seed=8)
        np.testing.assert_array_equal(a.pauli_means, b.pauli_means)
        np.testing.assert_array_equal(a.reconstructed.matrix, b.reconstructed.matrix)
        assert a.lambda_minus_se == b.lambda_minus_se

    def test_target_and_matrix(self, coupled_runs):
        est = coupled_runs[N_FULL]
        target = 0.5 - 0.5 / math.cos(math.pi / 6)
        assert abs(est.lambda_minus.real - target) <= 5 * est.lambda_minus_se
        w = incoherent_weights(SIXTH)
        assert np.all(np.abs(est.pauli_means.real - w) <= 5 * est.se_real)
        assert np.all(np.abs(est.pauli_means.imag) <= 5 * est.se_imag)
        assert est.counts.sum() == est.n_detected
        assert est.seed == 2024 and est.n_emitted == N_FULL

    def test_error_scaling(self, coupled_runs):
        w = incoherent_weights(SIXTH)
        ses = [coupled_runs[n].se_real for n in (10_000, 100_000, N_FULL)]
        for small, big in zip(ses, ses[1:]):
            ratio = small / big
            assert np.all((ratio > math.sqrt(10) / 3) & (ratio < 3 * math.sqrt(10)))
        for n, est in coupled_runs.items():
            assert np.all(np.abs(est.pauli_means.real - w) <= 5 * est.se_real)

    def test_layout_equivalence(self, coupled_runs, doubled_run):
        a, b = coupled_runs[N_FULL], doubled_run
        for part, se in ((np.real, "se_real"), (np.imag, "se_imag")):
            combined = np.hypot(getattr(a, se), getattr(b, se))
            assert np.all(np.abs(part(a.pauli_means) - part(b.pauli_means)) <= 5 * combined)

    def test_unbiased_at_third_pi(self):
        cfg = PolarizerConfig(math.pi / 3, 0.4)
        est = run_tomography(ExperimentLayout("coupled_polarizers", cfg), n=N_FULL, seed=77)
        assert np.all(np.abs(est.pauli_means.real - incoherent_weights(cfg)) <= 3 * est.se_real)

    def test_fixed_order(self):
        cfg = PolarizerConfig(math.pi / 6, math.pi / 2)
        est = run_tomography(ExperimentLayout("fixed_order", cfg, 1.0), n=300_000, seed=5)
        w = pauli_weak_values(polarizer_two_state(cfg))
        assert np.all(np.abs(est.pauli_means.real - w.real) <= 5 * est.se_real)
        assert np.all(np.abs(est.pauli_means.imag - w.imag) <= 5 * est.se_imag)
        assert abs(est.lambda_minus.real) <= 5 * est.lambda_minus_se
        assert est.reconstructed.mode == "fixed_up"

    def test_strong_coupling_warns(self):
        with pytest.warns(RuntimeWarning):
            run_tomography(ExperimentLayout("coupled_polarizers", SIXTH), PointerModel(0.5, 1.0), n=100, seed=1)

    def test_weak_coupling_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            run_tomography(ExperimentLayout("coupled_polarizers", SIXTH), n=100, seed=1)

    def test_no_detections(self):
        with pytest.raises(InsufficientStatisticsError):
            run_tomography(ExperimentLayout("coupled_polarizers", PolarizerConfig(0.3, 0)), n=1, seed=3)

    @pytest.mark.parametrize("n", [0, -5, 2.5])
    def test_bad_count(self, n):
        with pytest.raises(ValueError):
            run_tomography(ExperimentLayout("coupled_polarizers", SIXTH), n=n)


class TestIdealTomography:
    def test_converges(self):
        est = run_ideal_tomography(TwoState(V, D), n=N_FULL, seed=4)
        np.testing.assert_allclose(est.pauli_means.imag, 0)
        assert np.all(np.abs(est.pauli_means.real - [1, 0, 1]) <= 5 * est.se_real + 1e-12)
        m = est.reconstructed.matrix
        se_off = math.hypot(est.se_real[0], est.se_real[1]) / 2
        assert abs(m[0, 1] - 0.5) <= 5 * se_off
        assert m[0, 0] == 1 and m[1, 1] == 0

    def test_time_symmetric_limit(self):
        fwd = run_ideal_tomography(TwoState(V, D), n=200_000, seed=6)
        rev = run_ideal_tomography(TwoState(D, V), n=200_000, seed=6)
        combined = np.hypot(fwd.se_real, rev.se_real)
        assert np.all(np.abs(fwd.pauli_means.real - rev.pauli_means.real) <= 5 * combined + 1e-12)

    def test_single_sample(self):
        est = run_ideal_tomography(TwoState(V, D), n=1, seed=0)
        assert not est.se_defined
        assert est.counts.tolist() == [1, 0, 0]
        assert est.reconstructed.trace == pytest.approx(1)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            run_ideal_tomography(TwoState(V, H), n=10)
