"""Parameters, distributions and discretization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spinmaser as sm
from spinmaser.model import FrequencyDistribution, branches, support

WC = sm.DEFAULT_OMEGA_C


class TestPhysicalParams:
    def test_alpha_c(self, base_params):
        # 1/(T2*P0) with the headline constants
        assert base_params.alpha_c == pytest.approx(
            1.0 / (13.65 * 0.392097), rel=1e-12)
        assert base_params.alpha_c == pytest.approx(0.186842, rel=1e-5)

    def test_with_alpha(self, base_params):
        p = base_params.with_alpha(0.5)
        assert p.alpha == 0.5
        assert (p.t1, p.t2, p.p0) == (base_params.t1, base_params.t2,
                                      base_params.p0)
        assert base_params.alpha == 0.0  # original untouched

    @pytest.mark.parametrize("kwargs", [
        dict(t1=-1.0, t2=13.65, p0=0.39, alpha=0.1),
        dict(t1=13.0, t2=0.0, p0=0.39, alpha=0.1),
        dict(t1=13.0, t2=13.65, p0=0.0, alpha=0.1),
        dict(t1=13.0, t2=13.65, p0=1.2, alpha=0.1),
        dict(t1=13.0, t2=13.65, p0=0.39, alpha=-0.1),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            sm.PhysicalParams(**kwargs)


class TestDistributions:
    def test_uniform_support_and_density(self):
        d = sm.Uniform(WC, 2.0)
        lo, hi = support(d)
        assert lo == pytest.approx(WC - 1.0)
        assert hi == pytest.approx(WC + 1.0)
        assert sm.density(d, WC) == pytest.approx(0.5)
        assert sm.density(d, WC + 1.5) == 0.0
        assert sm.density(d, WC - 1.5) == 0.0

    def test_root_support_and_branch_values(self):
        eps = 3.0
        d = sm.Root(WC, eps)
        lo, hi = support(d)
        assert lo == pytest.approx(WC - 2.0)
        assert hi == pytest.approx(WC + 1.0)
        # plateau height 3/(2 eps), continuous at both plateau edges
        plateau = 1.5 / eps
        assert sm.density(d, WC - 0.5) == pytest.approx(plateau)
        assert sm.density(d, WC - 1.0 + 1e-12) == pytest.approx(plateau, rel=1e-5)
        assert sm.density(d, WC) == pytest.approx(plateau)
        # end points vanish
        assert sm.density(d, lo) == pytest.approx(0.0, abs=1e-12)
        assert sm.density(d, hi) == pytest.approx(0.0, abs=1e-7)
        # rising branch is sqrt-shaped: midpoint value = plateau/sqrt(2)
        assert sm.density(d, WC - 1.5) == pytest.approx(plateau / np.sqrt(2))

    @pytest.mark.parametrize("make", [
        lambda: sm.Uniform(WC, 0.0),
        lambda: sm.Root(WC, -1.0),
        lambda: sm.DiracComb((1.0, 2.0), (0.7, 0.7)),
        lambda: sm.DiracComb((2.0, 1.0), (0.5, 0.5)),
        lambda: sm.DiracComb((1.0,), (-1.0,)),
        lambda: sm.Tabulated((0.0, 1.0), (1.0, 3.0)),  # integral != 1
        lambda: sm.Tabulated((1.0, 0.0), (1.0, 1.0)),
    ])
    def test_validation(self, make):
        with pytest.raises(ValueError):
            make()

    @pytest.mark.parametrize("dist", [
        sm.Uniform(WC, 2.5),
        sm.Root(WC, 2.5),
        sm.Tabulated((WC - 1, WC, WC + 1), (0.0, 1.0, 0.0)),
    ])
    def test_density_normalization(self, dist):
        lo, hi = support(dist)
        w = np.linspace(lo, hi, 20001)
        assert np.trapezoid(sm.density(dist, w), w) == pytest.approx(1.0, abs=1e-6)

    def test_branches_cover_support(self):
        for dist in (sm.Uniform(WC, 1.0), sm.Root(WC, 1.0),
                     sm.Tabulated((0.0, 1.0, 3.0), (0.0, 0.5, 0.25))):
            br = branches(dist)
            lo, hi = support(dist)
            assert br[0][0] == pytest.approx(lo)
            assert br[-1][1] == pytest.approx(hi)
            for (a, b), (c, _) in zip(br, br[1:]):
                assert b == pytest.approx(c)

    @given(eps=st.floats(0.01, 10.0), center=st.floats(-100.0, 100.0))
    @settings(max_examples=50, deadline=None)
    def test_root_mean_is_center_minus_two_ninths_eps(self, eps, center):
        # first moment of the piecewise-root density, integrated by parts:
        # -7 eps/45 (rising) - eps/12 (plateau) + eps/60 (falling) = -2 eps/9
        d = sm.Root(center, eps)
        lo, hi = support(d)
        w = np.linspace(lo, hi, 40001)
        rho = sm.density(d, w)
        mean = np.trapezoid(rho * w, w) / np.trapezoid(rho, w)
        assert mean == pytest.approx(center - 2 * eps / 9, abs=1e-5 * eps)


class TestDiscretize:
    def test_weights_normalized_and_positive(self):
        for dist in (sm.Uniform(WC, 2.0), sm.Root(WC, 2.0)):
            ens = sm.discretize(dist, 81)
            assert ens.m == 81
            assert ens.weights.sum() == pytest.approx(1.0, abs=1e-14)
            assert np.all(ens.weights >= 0)
            lo, hi = support(dist)
            assert ens.freqs[0] == pytest.approx(lo)
            assert ens.freqs[-1] == pytest.approx(hi)

    def test_uniform_weights_flat_with_half_ends(self):
        ens = sm.discretize(sm.Uniform(WC, 2.0), 5)
        w = ens.weights
        assert w[0] == pytest.approx(w[2] / 2)
        assert w[-1] == pytest.approx(w[2] / 2)
        assert w[1] == pytest.approx(w[2])

    def test_root_quadrature_mean(self):
        eps = 2.0
        # sqrt branch endpoints slow the trapezoid rule to O(h^1.5)
        ens = sm.discretize(sm.Root(WC, eps), 3201)
        mean = float(ens.weights @ ens.freqs)
        assert mean == pytest.approx(WC - 2 * eps / 9, abs=1e-5)

    def test_dirac_comb_passthrough(self):
        d = sm.DiracComb((1.0, 2.0, 5.0), (0.2, 0.5, 0.3))
        ens = sm.discretize(d, 81)
        np.testing.assert_allclose(ens.freqs, d.freqs)
        np.testing.assert_allclose(ens.weights, d.weights)

    def test_m_validation(self):
        with pytest.raises(ValueError):
            sm.discretize(sm.Uniform(WC, 1.0), 1)

    def test_arrays_read_only(self):
        ens = sm.discretize(sm.Uniform(WC, 1.0), 11)
        with pytest.raises(ValueError):
            ens.freqs[0] = 0.0


class TestStateAndAverage:
    def test_equilibrium_state(self, base_params):
        ens = sm.discretize(sm.Uniform(WC, 1.0), 7)
        st_ = sm.equilibrium_state(ens, base_params)
        assert np.all(st_.px == 0) and np.all(st_.py == 0)
        np.testing.assert_allclose(st_.pz, base_params.p0)
        avg = sm.average_polarization(st_, ens)
        assert avg.transverse == 0j
        assert avg.pz == pytest.approx(base_params.p0)

    def test_average_is_weighted(self):
        ens = sm.DiscretizedEnsemble(np.array([1.0, 2.0]),
                                     np.array([0.25, 0.75]))
        st_ = sm.SpinEnsembleState(np.array([1.0, -1.0]),
                                   np.array([0.0, 2.0]),
                                   np.array([0.5, 0.5]))
        avg = sm.average_polarization(st_, ens)
        assert avg.px == pytest.approx(0.25 - 0.75)
        assert avg.py == pytest.approx(1.5)
        assert avg.pz == pytest.approx(0.5)
        assert avg.transverse == pytest.approx(complex(-0.5, 1.5))

    def test_size_mismatch(self):
        ens = sm.DiscretizedEnsemble(np.array([1.0, 2.0]), np.array([0.5, 0.5]))
        st_ = sm.SpinEnsembleState(np.zeros(3), np.zeros(3), np.zeros(3))
        with pytest.raises(ValueError):
            sm.average_polarization(st_, ens)

    @given(m=st.integers(2, 50), eps_t2=st.floats(0.1, 8.0))
    @settings(max_examples=30, deadline=None)
    def test_discretize_any_size(self, m, eps_t2):
        ens = sm.discretize(sm.Uniform(WC, eps_t2 / 13.65), m)
        assert ens.m == m
        assert ens.weights.sum() == pytest.approx(1.0, abs=1e-12)
