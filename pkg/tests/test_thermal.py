import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from causal_witness.exceptions import BasisError, TemperaturePoleError
from causal_witness.thermal import (
    GibbsSpec,
    build_thermal_gamma,
    effective_beta,
    gibbs_diagonal,
    gibbs_populations,
)

REFERENCE_SPEC = GibbsSpec(0.0, 1.0, 2.0, 3.0)

energies = st.floats(-5, 5)
betas = st.floats(-4, 4)


@st.composite
def specs(draw):
    e0 = draw(energies)
    gap = draw(st.floats(0.1, 3)) * draw(st.sampled_from([-1, 1]))
    return GibbsSpec(e0, e0 + gap, draw(betas), draw(betas))


class TestPopulations:
    def test_infinite_temperature(self):
        assert gibbs_populations(GibbsSpec(0, 1, 0, 0), 1) == (0.5, 0.5)

    def test_scalar_oracle(self):
        p0, p1 = gibbs_populations(REFERENCE_SPEC, 1)
        assert p1 == pytest.approx(math.exp(-2) / (1 + math.exp(-2)), rel=1e-15)
        assert p1 == pytest.approx(0.11920, abs=1e-5)
        p0, p1 = gibbs_populations(REFERENCE_SPEC, 2)
        assert p1 == pytest.approx(math.exp(-3) / (1 + math.exp(-3)), rel=1e-15)

    @given(specs(), st.sampled_from([1, 2]))
    def test_normalized(self, spec, which):
        p0, p1 = gibbs_populations(spec, which)
        assert p0 >= 0 and p1 >= 0
        assert p0 + p1 == pytest.approx(1, abs=1e-15)

    def test_degenerate_levels(self):
        with pytest.raises(ValueError):
            GibbsSpec(1.0, 1.0, 2.0, 3.0)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            GibbsSpec(0.0, 1.0, math.inf, 3.0)

    def test_bad_selector(self):
        with pytest.raises(ValueError):
            gibbs_populations(REFERENCE_SPEC, 3)


class TestPseudoStates:
    def test_incoherent_is_mean_temperature(self):
        g = build_thermal_gamma(REFERENCE_SPEC, "incoherent")
        np.testing.assert_allclose(g.matrix, gibbs_diagonal(2.5, REFERENCE_SPEC), atol=1e-15)

    def test_coherent_diagonal(self):
        g = build_thermal_gamma(REFERENCE_SPEC, "coherent")
        gibbs = np.diag(gibbs_diagonal(2.5, REFERENCE_SPEC)).real
        expected = (0.5 - 1 / math.sqrt(2)) + math.sqrt(2) * gibbs
        np.testing.assert_allclose(np.diag(g.matrix).real, expected, atol=1e-15)
        np.testing.assert_allclose(np.diag(g.matrix).real, [1.09983, -0.09983], atol=1e-5)
        assert g.trace == pytest.approx(1, abs=1e-15)

    def test_equal_temperatures(self):
        spec = GibbsSpec(0.0, 1.0, 1.7, 1.7)
        np.testing.assert_allclose(build_thermal_gamma(spec, "fixed").matrix, gibbs_diagonal(1.7, spec), atol=1e-15)

    @given(specs())
    def test_diagonal_in_energy_basis(self, spec):
        for mode in ("fixed", "incoherent", "coherent"):
            m = build_thermal_gamma(spec, mode).matrix
            assert m[0, 1] == 0 and m[1, 0] == 0

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            build_thermal_gamma(REFERENCE_SPEC, "lukewarm")


class TestEffectiveBeta:
    def test_reference_values(self):
        inc = effective_beta(build_thermal_gamma(REFERENCE_SPEC, "incoherent"), REFERENCE_SPEC).beta_eff
        coh = effective_beta(build_thermal_gamma(REFERENCE_SPEC, "coherent"), REFERENCE_SPEC).beta_eff
        assert inc == pytest.approx(2.5, abs=1e-12)
        assert inc.imag == 0
        assert coh.real == pytest.approx(2.3995, abs=1e-4)
        assert coh.imag == pytest.approx(math.pi, abs=1e-15)

    def test_maximally_mixed(self):
        assert effective_beta(np.eye(2) / 2, GibbsSpec(0, 1, 0, 0)).beta_eff == 0

    @given(specs(), betas)
    def test_round_trip(self, spec, beta):
        assert effective_beta(gibbs_diagonal(beta, spec), spec).beta_eff == pytest.approx(beta, abs=1e-12)

    @given(specs())
    def test_incoherent_mean(self, spec):
        b = effective_beta(build_thermal_gamma(spec, "incoherent"), spec)
        assert b.is_real
        assert b.beta_eff.real == pytest.approx((spec.beta1 + spec.beta2) / 2, abs=1e-12)

    @given(specs())
    def test_coherent_branch(self, spec):
        g = build_thermal_gamma(spec, "coherent")
        diag = np.diag(g.matrix).real
        assume(min(abs(diag)) > 1e-12)
        b = effective_beta(g, spec).beta_eff
        if diag.min() < 0:
            assert b.imag * spec.gap == pytest.approx(math.pi, abs=1e-15)
        else:
            assert b.imag == 0
        assert -math.pi < b.imag * spec.gap <= math.pi + 1e-12

    def test_wider_gap(self):
        spec = GibbsSpec(0, 2, 2, 3)
        b = effective_beta(build_thermal_gamma(spec, "coherent"), spec).beta_eff
        assert b.imag == pytest.approx(math.pi / 2, abs=1e-15)

    def test_negative_zero_imaginary_part(self):
        m = np.diag([complex(0.9, 0.0), complex(-0.1, -0.0)])
        assert effective_beta(m, GibbsSpec(0, 1, 0, 0)).beta_eff.imag == pytest.approx(math.pi)

    def test_pole(self):
        with pytest.raises(TemperaturePoleError):
            effective_beta(np.diag([1.0, 0.0]), REFERENCE_SPEC)

    def test_off_diagonal(self):
        with pytest.raises(BasisError):
            effective_beta(np.array([[0.5, 0.1], [0.1, 0.5]]), REFERENCE_SPEC)
