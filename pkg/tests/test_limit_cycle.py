"""Self-consistent limit-cycle solver and per-frequency profiles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spinmaser as sm
from spinmaser.limitcycle import NoSolution, symmetry_center
from spinmaser.quadrature import rho_quadrature

WC = sm.DEFAULT_OMEGA_C


def single_species_solution(params):
    """Closed-form amplitude and Pz for one Larmor frequency.

    Substituting a delta density collapses the amplitude condition to
    amp^2 = (alpha P0 T2 - 1)/(alpha^2 T1 T2) and P_z = 1/(alpha T2).
    """
    a = params.alpha
    amp2 = (a * params.p0 * params.t2 - 1.0) / (a**2 * params.t1 * params.t2)
    return amp2, 1.0 / (a * params.t2)


class TestSingleSpecies:
    @pytest.mark.parametrize("ratio", [1.5, 2.0, 4.0])
    def test_amplitude_and_pz(self, base_params, ratio):
        params = base_params.with_alpha(ratio * base_params.alpha_c)
        dist = sm.DiracComb((WC,), (1.0,))
        sol = sm.solve(params, dist)
        amp2, pz = single_species_solution(params)
        assert sol.omega_s == pytest.approx(WC, abs=1e-12)
        assert sol.amp2 == pytest.approx(amp2, rel=1e-10)
        _, p_z = sm.profile(sol, params, WC)
        assert p_z == pytest.approx(pz, rel=1e-10)

    def test_below_threshold_no_solution(self, base_params):
        params = base_params.with_alpha(0.9 * base_params.alpha_c)
        assert isinstance(sm.solve(params, sm.DiracComb((WC,), (1.0,))),
                          NoSolution)

    def test_at_threshold_no_solution(self, base_params):
        params = base_params.with_alpha(base_params.alpha_c)
        assert isinstance(sm.solve(params, sm.DiracComb((WC,), (1.0,))),
                          NoSolution)

    def test_alpha_zero_rejected(self, base_params):
        with pytest.raises(ValueError):
            sm.solve(base_params, sm.DiracComb((WC,), (1.0,)))


@pytest.fixture(scope="module")
def params(base_params):
    return base_params.with_alpha(4 * base_params.alpha_c)


class TestSymmetricContinuum:
    def test_omega_s_pinned_at_center(self, params):
        for eps_t2 in (0.5, 1.0, 3.0, 6.0):
            sol = sm.solve(params, sm.Uniform(WC, eps_t2 / params.t2))
            assert not isinstance(sol, NoSolution)
            assert sol.omega_s == WC
            assert abs(sol.residuals[0]) < 1e-10
            assert abs(sol.residuals[1]) < 1e-10

    def test_amp_decreases_with_width(self, params):
        amps = [sm.solve(params, sm.Uniform(WC, e / params.t2)).amp
                for e in (0.5, 1.0, 2.0, 4.0, 6.0)]
        assert all(a > b for a, b in zip(amps, amps[1:]))
        assert all(a > 0 for a in amps)

    def test_narrow_width_approaches_single_species(self, params):
        sol = sm.solve(params, sm.Uniform(WC, 1e-4 / params.t2))
        amp2, _ = single_species_solution(params)
        assert sol.amp2 == pytest.approx(amp2, rel=1e-4)

    def test_no_solution_below_broadened_threshold(self, base_params):
        # flat width 6/T2 raises the threshold to ~2.4 alpha_c
        params = base_params.with_alpha(2.0 * base_params.alpha_c)
        sol = sm.solve(params, sm.Uniform(WC, 6.0 / params.t2))
        assert isinstance(sol, NoSolution)

    def test_self_consistency_identity(self, params):
        # the weighted profile must average back to the solved amplitude
        dist = sm.Uniform(WC, 3.0 / params.t2)
        sol = sm.solve(params, dist)
        om, w = rho_quadrature(dist, 400)
        p_t, _ = sm.profile(sol, params, om)
        avg = np.sum(w * p_t)
        assert avg.real == pytest.approx(sol.amp, rel=1e-9)
        assert abs(avg.imag) < 1e-12 * sol.amp

    def test_quadrature_override(self, params):
        dist = sm.Uniform(WC, 2.0 / params.t2)
        ens = sm.discretize(dist, 81)
        sol = sm.solve(params, dist, quad=(ens.freqs, ens.weights))
        # fixed point of the discretized average, not the continuum one
        p_t, _ = sm.profile(sol, params, ens.freqs)
        avg = np.sum(ens.weights * p_t)
        assert avg.real == pytest.approx(sol.amp, rel=1e-9)

    @given(ratio=st.floats(1.2, 8.0), eps_t2=st.floats(0.1, 4.0))
    @settings(max_examples=25, deadline=None)
    def test_positive_amp_and_bounded(self, base_params, ratio, eps_t2):
        params = base_params.with_alpha(ratio * base_params.alpha_c)
        sol = sm.solve(params, sm.Uniform(WC, eps_t2 / params.t2))
        if isinstance(sol, NoSolution):
            return
        assert 0 < sol.amp <= params.p0
        assert abs(sol.residuals[1]) < 1e-9


class TestAsymmetric:
    def test_root_density_shifts_omega_s(self, params):
        eps = 2.0 / params.t2
        dist = sm.Root(WC, eps)
        sol = sm.solve(params, dist)
        assert not isinstance(sol, NoSolution)
        # pulled below the center toward the long sqrt tail
        assert sol.omega_s < WC
        assert WC - 2 * eps / 3 < sol.omega_s < WC + eps / 3
        assert max(abs(r) for r in sol.residuals) < 1e-10

    def test_root_conditions_hold(self, params):
        dist = sm.Root(WC, 3.0 / params.t2)
        om, w = rho_quadrature(dist, 400)
        sol = sm.solve(params, dist, quad=(om, w))
        ell = sm.lorentz_weight(om, sol.omega_s, sol.amp2, params)
        first_moment = np.sum(w * (om - sol.omega_s) * ell)
        assert abs(first_moment) < 1e-9 * params.t1
        balance = np.sum(w * ell)
        rhs = params.t1 / (params.alpha * params.p0 * params.t2)
        assert balance == pytest.approx(rhs, rel=1e-9)

    def test_mirrored_comb_is_symmetric(self, params):
        comb = sm.DiracComb((WC - 0.2, WC, WC + 0.2), (0.3, 0.4, 0.3))
        assert symmetry_center(comb) == pytest.approx(WC)
        sol = sm.solve(params, comb)
        assert sol.omega_s == pytest.approx(WC)

    def test_lopsided_comb_is_asymmetric(self, params):
        comb = sm.DiracComb((WC - 0.2, WC, WC + 0.2), (0.5, 0.3, 0.2))
        assert symmetry_center(comb) is None
        sol = sm.solve(params, comb)
        assert not isinstance(sol, NoSolution)
        assert sol.omega_s != WC
        assert max(abs(r) for r in sol.residuals) < 1e-10

    def test_tabulated_triangle(self, params):
        g = np.linspace(WC - 0.5, WC + 0.5, 101)
        d = 2.0 * (1.0 - np.abs(g - WC) / 0.5) / 0.5 / 2.0
        d /= np.trapezoid(d, g)
        dist = sm.Tabulated(tuple(g), tuple(d))
        sol = sm.solve(params, dist)
        assert sol.omega_s == pytest.approx(WC, abs=1e-9)


class TestProfile:
    def test_lorentz_weight_peak_and_symmetry(self, base_params):
        params = base_params.with_alpha(4 * base_params.alpha_c)
        ell_c = sm.lorentz_weight(WC, WC, 0.01, params)
        ell_p = sm.lorentz_weight(WC + 0.3, WC, 0.01, params)
        ell_m = sm.lorentz_weight(WC - 0.3, WC, 0.01, params)
        assert ell_c > ell_p
        assert ell_p == pytest.approx(ell_m, rel=1e-12)

    def test_pz_between_saturation_and_equilibrium(self, base_params):
        params = base_params.with_alpha(4 * base_params.alpha_c)
        dist = sm.Uniform(WC, 2.0 / params.t2)
        sol = sm.solve(params, dist)
        om = np.linspace(WC - 1.0, WC + 1.0, 201)
        p_t, p_z = sm.profile(sol, params, om)
        assert np.all(p_z > 0)
        assert np.all(p_z <= params.p0 + 1e-12)
        # off-resonant spins saturate less (larger Pz), emit less (smaller |P_T|)
        assert p_z[0] > p_z[100]
        assert abs(p_t[100]) > abs(p_t[0])

    def test_profile_phase_sign(self, base_params):
        params = base_params.with_alpha(4 * base_params.alpha_c)
        sol = sm.solve(params, sm.Uniform(WC, 2.0 / params.t2))
        p_plus, _ = sm.profile(sol, params, WC + 0.2)
        p_res, _ = sm.profile(sol, params, WC)
        assert abs(p_res.imag) < 1e-14
        assert p_plus.imag < 0  # detuned spins lag/lead antisymmetrically
        p_minus, _ = sm.profile(sol, params, WC - 0.2)
        assert p_minus.imag == pytest.approx(-p_plus.imag, rel=1e-12)
