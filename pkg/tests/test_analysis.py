"""Poincare sections, spectra, Lyapunov exponents and the classifier."""

import numpy as np
import pytest

import spinmaser as sm
from spinmaser.analysis import (
    CHAOS,
    LIMIT_CYCLE,
    NO_SIGNAL,
    QUASI_PERIODIC,
    InsufficientDataError,
    LyapunovResult,
    PoincareSection,
    analyze_and_classify,
    classify,
    count_peaks,
    dominant_frequency,
    jacobian_vector,
    lyapunov,
    poincare,
    section_statistic,
    spectrum,
)
from spinmaser.integrate import IntegrationConfig, Trajectory

WC = sm.DEFAULT_OMEGA_C


def circle_trajectory(f0=8.85, amp=0.2, pz=0.1, t_end=20.0, dt=1e-4,
                      phase=0.0):
    t = np.arange(0.0, t_end, dt)
    px = amp * np.cos(2 * np.pi * f0 * t + phase)
    py = amp * np.sin(2 * np.pi * f0 * t + phase)
    return Trajectory(t, px, py, np.full_like(t, pz), dt)


class TestPoincare:
    def test_ideal_circle_single_cluster(self):
        # a pure rotation crosses Py=0 (rising) once per period, always at
        # the same (Px, Pz); interpolation keeps the spread below 1e-6
        traj = circle_trajectory()
        sec = poincare(traj)
        assert sec.direction == 1
        pts = sec.points
        assert len(pts) == pytest.approx(20 * 8.85, abs=2)
        spread = np.max(np.abs(pts - pts.mean(axis=0)))
        assert spread < 1e-6
        assert pts[0, 0] == pytest.approx(0.2, abs=1e-6)
        assert pts[0, 1] == pytest.approx(0.1, abs=1e-12)

    def test_crossing_times_regular(self):
        traj = circle_trajectory(f0=5.0)
        sec = poincare(traj)
        periods = np.diff(sec.times)
        np.testing.assert_allclose(periods, 0.2, atol=1e-7)

    def test_direction_selects_half(self):
        traj = circle_trajectory()
        up = poincare(traj, direction=1)
        down = poincare(traj, direction=-1)
        assert up.points[0, 0] == pytest.approx(0.2, abs=1e-6)
        assert down.points[0, 0] == pytest.approx(-0.2, abs=1e-6)

    def test_insufficient_crossings(self):
        traj = circle_trajectory(t_end=0.5)
        with pytest.raises(InsufficientDataError):
            poincare(traj, min_crossings=10)

    def test_section_statistic_small_for_closed_curve(self):
        # ellipse sampled irrationally -> dense closed curve in the section
        t = np.arange(0.0, 400.0, 1e-2)
        f1, f2 = 1.0, np.sqrt(2) / 3
        px = 0.2 * np.cos(2 * np.pi * f1 * t) * (1 + 0.3 * np.cos(2 * np.pi * f2 * t))
        py = 0.2 * np.sin(2 * np.pi * f1 * t) * (1 + 0.3 * np.cos(2 * np.pi * f2 * t))
        pz = 0.1 + 0.05 * np.sin(2 * np.pi * f2 * t)
        sec = poincare(Trajectory(t, px, py, pz, 1e-2))
        assert section_statistic(sec) < 0.1

    def test_section_statistic_large_for_scatter(self, rng):
        pts = rng.uniform(-1, 1, size=(5, 2))
        sec = PoincareSection(pts, 1, np.arange(5.0))
        assert section_statistic(sec) > 0.1


class TestSpectrum:
    def test_sine_peak_frequency_and_amplitude(self):
        n, dt = 2 ** 14, 1e-3
        t = np.arange(n) * dt
        f0 = 40.0 / (n * dt)  # exactly on a bin
        x = 0.7 * np.sin(2 * np.pi * f0 * t) + 0.2
        spec = spectrum(x, dt, min_len=n)
        assert dominant_frequency(spec) == pytest.approx(f0, abs=1e-12)
        k = int(round(f0 * n * dt))
        assert spec.amps[k] == pytest.approx(0.7, rel=1e-9)
        assert spec.amps[0] == pytest.approx(0.2, rel=1e-9)  # DC retained
        assert spec.resolution == pytest.approx(1.0 / (n * dt))

    def test_two_tone_peak_count(self):
        n, dt = 2 ** 14, 1e-3
        t = np.arange(n) * dt
        df = 1.0 / (n * dt)
        x = np.sin(2 * np.pi * 50 * df * t) + 0.5 * np.sin(2 * np.pi * 90 * df * t)
        spec = spectrum(x, dt, min_len=n)
        assert count_peaks(spec) == 2

    def test_rejects_short_or_nonuniform(self):
        with pytest.raises(ValueError):
            spectrum(np.zeros(100), 1e-3, min_len=2 ** 14)
        t = np.concatenate([np.arange(10) * 1e-3, [0.02]])
        with pytest.raises(ValueError):
            spectrum(np.zeros(11), 1e-3, times=t, min_len=4)

    def test_parseval(self, rng):
        n, dt = 2 ** 12, 2e-3
        x = rng.standard_normal(n)
        spec = spectrum(x, dt, min_len=n)
        # single-sided amplitude back to power: sum a_k^2/2 (+DC) = mean square
        power = spec.amps[0] ** 2 + 0.5 * np.sum(spec.amps[1:-1] ** 2) \
            + spec.amps[-1] ** 2
        assert power == pytest.approx(np.mean(x ** 2), rel=1e-9)


class TestJacobianVector:
    def test_matches_finite_differences(self, base_params, rng):
        from spinmaser.integrate import derivative

        params = base_params.with_alpha(4 * base_params.alpha_c)
        ens = sm.discretize(sm.Uniform(WC, 2.0 / params.t2), 11)
        st_ = sm.SpinEnsembleState(0.1 * rng.standard_normal(11),
                                   0.1 * rng.standard_normal(11),
                                   0.3 + 0.1 * rng.standard_normal(11))
        q = tuple(rng.standard_normal(11) for _ in range(3))
        jx, jy, jz = jacobian_vector(st_, q, params, ens)
        h = 1e-6
        plus = sm.SpinEnsembleState(st_.px + h * q[0], st_.py + h * q[1],
                                    st_.pz + h * q[2])
        minus = sm.SpinEnsembleState(st_.px - h * q[0], st_.py - h * q[1],
                                     st_.pz - h * q[2])
        fd = [(a - b) / (2 * h) for a, b in zip(derivative(plus, params, ens),
                                                derivative(minus, params, ens))]
        np.testing.assert_allclose(jx, fd[0], atol=1e-6)
        np.testing.assert_allclose(jy, fd[1], atol=1e-6)
        np.testing.assert_allclose(jz, fd[2], atol=1e-6)

    def test_shape_mismatch(self, base_params):
        ens = sm.discretize(sm.Uniform(WC, 1.0), 5)
        st_ = sm.equilibrium_state(ens, base_params)
        with pytest.raises(ValueError):
            jacobian_vector(st_, (np.zeros(4), np.zeros(4), np.zeros(4)),
                            base_params, ens)


class TestLyapunov:
    def test_free_decay_rate(self, base_params):
        # without feedback the least-stable direction decays at exactly 1/T2
        cfg = IntegrationConfig(t_end=10.0, seed=0)
        res = lyapunov(base_params, sm.Uniform(WC, 1.0 / base_params.t2),
                       cfg, tau=1.0, k=300, transient=50.0, m=21)
        assert res.lam == pytest.approx(-1.0 / base_params.t2, rel=0.02)

    def test_limit_cycle_exponent_near_zero(self, base_params):
        params = base_params.with_alpha(4 * base_params.alpha_c)
        cfg = IntegrationConfig(t_end=10.0, seed=0)
        res = lyapunov(params, sm.Uniform(WC, 1.0 / params.t2), cfg,
                       tau=1.0, k=400, transient=300.0, m=41)
        assert abs(res.lam) < 2e-3

    def test_history_converges_to_lam(self, base_params):
        cfg = IntegrationConfig(t_end=10.0, seed=1)
        res = lyapunov(base_params, sm.Uniform(WC, 1.0 / base_params.t2),
                       cfg, tau=0.5, k=200, transient=20.0, m=11)
        assert res.history[-1] == pytest.approx(res.lam, rel=1e-9)
        assert res.k == 200
        assert res.tau == pytest.approx(0.5)

    def test_reproducible(self, base_params):
        params = base_params.with_alpha(4 * base_params.alpha_c)
        cfg = IntegrationConfig(t_end=10.0, seed=5)
        a = lyapunov(params, sm.Uniform(WC, 5.0 / params.t2), cfg,
                     tau=0.5, k=50, transient=20.0, m=21)
        b = lyapunov(params, sm.Uniform(WC, 5.0 / params.t2), cfg,
                     tau=0.5, k=50, transient=20.0, m=21)
        assert a.lam == b.lam


class TestClassifier:
    def lyap(self, lam, err=1e-4):
        return LyapunovResult(lam, err, 100, 1.0, np.array([lam]))

    def quiet_traj(self):
        t = np.arange(0.0, 10.0, 1e-2)
        z = np.full_like(t, 0.39)
        return Trajectory(t, 1e-6 * np.cos(t), 1e-6 * np.sin(t), z, 1e-2)

    def test_no_signal(self):
        label = classify(self.quiet_traj(), None, None, None)
        assert label.kind == NO_SIGNAL
        assert label.omega_s is None

    def test_chaos_requires_magnitude_and_significance(self):
        traj = circle_trajectory()
        sec = poincare(traj)
        spec = spectrum(traj.px, traj.sample_dt, min_len=2 ** 10)
        chaos = classify(traj, self.lyap(0.01), spec, sec)
        assert chaos.kind == CHAOS
        # big exponent but big error bar -> not chaos
        noisy = classify(traj, self.lyap(0.01, err=0.009), spec, sec)
        assert noisy.kind != CHAOS
        # small exponent -> not chaos
        small = classify(traj, self.lyap(0.004), spec, sec)
        assert small.kind != CHAOS

    def test_limit_cycle_from_tight_cluster(self):
        traj = circle_trajectory()
        sec = poincare(traj)
        spec = spectrum(traj.px, traj.sample_dt, min_len=2 ** 10)
        label = classify(traj, self.lyap(0.0), spec, sec)
        assert label.kind == LIMIT_CYCLE
        assert label.omega_s == pytest.approx(2 * np.pi * 8.85, rel=1e-2)
        assert label.evidence["cluster_radius"] < 1e-3 * 0.2

    def test_quasi_periodic_fallback(self):
        t = np.arange(0.0, 200.0, 5e-3)
        f1, f2 = 8.85, 8.85 * np.sqrt(2) / 10
        r = 0.2 * (1 + 0.3 * np.cos(2 * np.pi * f2 * t))
        traj = Trajectory(t, r * np.cos(2 * np.pi * f1 * t),
                          r * np.sin(2 * np.pi * f1 * t),
                          0.1 + 0.02 * np.sin(2 * np.pi * f2 * t), 5e-3)
        sec = poincare(traj)
        spec = spectrum(traj.px, traj.sample_dt, min_len=2 ** 12)
        label = classify(traj, self.lyap(0.0), spec, sec)
        assert label.kind == QUASI_PERIODIC
        assert not label.unclassified

    def test_unclassified_flag_on_conflict(self, rng):
        traj = circle_trajectory()
        spec = spectrum(traj.px, traj.sample_dt, min_len=2 ** 10)
        scattered = PoincareSection(rng.uniform(-1, 1, (6, 2)), 1,
                                    np.arange(6.0))
        label = classify(traj, self.lyap(0.0), spec, scattered)
        assert label.kind == QUASI_PERIODIC
        assert label.unclassified


class TestEndToEnd:
    def test_no_signal_below_threshold(self, base_params):
        # near threshold the decay rate is (1 - alpha/alpha_c)/T2, so the
        # 1e-4 quiet criterion needs ~500 s from the 3.9e-3 seed
        params = base_params.with_alpha(0.9 * base_params.alpha_c)
        cfg = IntegrationConfig(t_end=900.0, transient=300.0, seed=0)
        label, window, spec, sec, lyap_res = analyze_and_classify(
            params, sm.Uniform(WC, 1.0 / params.t2), cfg, m=21,
            n_fft=2 ** 14)
        assert label.kind == NO_SIGNAL
        assert lyap_res is None  # skipped for a quiet signal

    def test_limit_cycle_point(self, base_params):
        params = base_params.with_alpha(4 * base_params.alpha_c)
        cfg = IntegrationConfig(t_end=430.0, transient=330.0, seed=1)
        label, window, spec, sec, lyap_res = analyze_and_classify(
            params, sm.Uniform(WC, 1.0 / params.t2), cfg, m=81,
            n_fft=2 ** 14, lyap_tau=0.5, lyap_k=400, lyap_transient=150.0)
        assert label.kind == LIMIT_CYCLE
        assert label.omega_s == pytest.approx(WC, rel=1e-3)
        assert lyap_res is not None
        # the spectral window is thinned back to the configured sampling
        assert spec.resolution == pytest.approx(1.0 / (2 ** 14 * cfg.sample_dt),
                                                rel=1e-9)
