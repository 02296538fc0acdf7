import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracwave.errors import DegenerateExpansion
from fracwave.solver import NewtonOptions, newton_solve
from fracwave.stokes import (alpha_critical, even_expansion, even_stokes, gamma2,
                             general_expansion, general_stokes_coeffs, odd_expansion, odd_stokes,
                             psi0_root, sigma0_sign_prediction, stokes_slope_prediction)
from fracwave.validate import stokes_residual_ratio
from fracwave.wave import residual_norm


class TestOdd:
    def test_zero_amplitude(self):
        psi, c = odd_stokes(0.0, 1.5, 32)
        assert c == -1.0 and np.max(np.abs(psi.values)) == 0.0

    def test_third_harmonic(self):
        e = odd_expansion(0.1, 2.0)
        assert e.harmonics[3] == pytest.approx(-6.25e-5, rel=1e-12)

    def test_speed(self):
        assert odd_expansion(0.2, 1.0).c == pytest.approx(-0.94, abs=1e-14)

    def test_seed_quality(self):
        seed, c = odd_stokes(0.05, 1.3, 256)
        w = newton_solve(seed, 1.3, c, 0.0, NewtonOptions(symmetry="odd"))
        assert len(w.residual_history) - 1 <= 5
        assert np.max(np.abs(w.field.values - seed.values)) < 1e-4


class TestEven:
    def test_zero_amplitude(self):
        psi, c = even_stokes(0.0, 1.5, 32)
        assert c == 0.5
        assert np.allclose(psi.values, 0.5)

    def test_gamma2(self):
        assert gamma2(2.0) == pytest.approx(6.0, abs=1e-14)
        assert gamma2(0.6) < 0
        assert even_expansion(0.05, 0.6).c < 0.5

    def test_even_residual_is_fourth_order(self):
        # the expansion stops at A^3, leaving an A^4 residual: ratio near 16
        for alpha in (2.0, 1.0, 0.6):
            assert stokes_residual_ratio(alpha, 0.05, "even", 256) == pytest.approx(16.0, rel=0.1)

    @pytest.mark.parametrize("alpha", [2.0, 1.0, 0.6])
    def test_odd_residual_is_fifth_order(self, alpha):
        assert stokes_residual_ratio(alpha, 0.05, "odd", 256) == pytest.approx(32.0, rel=0.2)


class TestThreshold:
    def test_alpha0(self):
        a0 = alpha_critical()
        assert a0 == pytest.approx(0.678072, abs=1e-6)
        assert abs(gamma2(a0)) < 1e-12
        assert np.sign(gamma2(a0 - 0.01)) == -1
        assert np.sign(gamma2(a0 + 0.01)) == 1


class TestGeneral:
    def test_alpha1(self):
        a1, a2, g2 = general_stokes_coeffs(1.0)
        assert (a1, a2, g2) == pytest.approx((0.25, 2.0, 3.0), abs=1e-14)

    def test_alpha2(self):
        a1, a2, g2 = general_stokes_coeffs(2.0)
        assert (a1, a2, g2) == pytest.approx((0.0, 0.5, 6.0), abs=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateExpansion):
            general_stokes_coeffs(alpha_critical())

    @settings(deadline=None, derandomize=True, max_examples=30)
    @given(alpha=st.floats(0.51, 2.0))
    def test_sign_prediction(self, alpha):
        if abs(alpha - alpha_critical()) < 1e-3:
            return
        _, a2, g2 = general_stokes_coeffs(alpha)
        assert sigma0_sign_prediction(alpha) == np.sign(a2) == np.sign(g2)

    def test_psi0_root(self):
        assert psi0_root(0.8, 0.0) == pytest.approx(math.sqrt(0.4), abs=1e-14)
        r = psi0_root(0.8, 0.01)
        assert 2 * r ** 3 - 0.8 * r - 0.01 == pytest.approx(0.0, abs=1e-14)

    def test_general_base_point(self):
        e = general_expansion(0.0, 1.2, 0.45)
        assert e.c == pytest.approx(6 * 0.45 ** 2 - 1, abs=1e-14)
        assert e.b == pytest.approx(2 * 0.45 ** 3 - e.c * 0.45, abs=1e-14)

    def test_general_residual_small(self):
        e = general_expansion(0.02, 1.5, 0.45)
        psi = e.field(128)
        assert residual_norm(psi, 1.5, e.c, e.b) < 1e-5


class TestSlopePrediction:
    def test_values(self):
        assert stokes_slope_prediction(2.0) == pytest.approx(math.pi / 3, abs=1e-14)
        assert stokes_slope_prediction(1.0) == pytest.approx(math.pi / 6, abs=1e-14)

    @settings(deadline=None, derandomize=True, max_examples=20)
    @given(alpha=st.floats(0.501, 2.0))
    def test_positive(self, alpha):
        assert stokes_slope_prediction(alpha) > 0
