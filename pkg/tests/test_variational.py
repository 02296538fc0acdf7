import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracwave.elliptic import cnoidal_wave
from fracwave.errors import Infeasible, InvalidParameter
from fracwave.spectral import SpectralField, parity_check, quartic_integral, single_lobe_check
from fracwave.variational import (M0, B_c, align, garding_ratio, minimize_single,
                                  minimize_two_constraints, quartic,
                                  symmetrization_identity_check)
from fracwave.wave import residual_norm


class TestSingleConstraint:
    @pytest.mark.parametrize("c", [0.1, 0.3, 0.45])
    def test_even_small_speed_gives_constant(self, c):
        res = minimize_single(2.0, c, "even", 32)
        assert np.ptp(res.psi.values) < 1e-6
        assert res.psi.mean() == pytest.approx(math.sqrt(c / 2), rel=1e-6)

    def test_odd_alpha2_is_cnoidal(self):
        res = minimize_single(2.0, 0.0, "odd", 64)
        exact = cnoidal_wave(1 / math.sqrt(2), 64)
        assert align(res.psi, exact.field).linf < 1e-6
        assert res.wave.residual_l2 < 1e-6

    def test_odd_minimizer_shape(self):
        res = minimize_single(1.2, 0.4, "odd", 64)
        assert single_lobe_check(res.psi)
        x = res.psi.x
        peak = x[np.argmax(np.abs(res.psi.values))]
        # a single lobe per half period, even about its crest
        assert parity_check(res.psi, float(peak)) == "even"

    def test_constraint_and_history(self):
        res = minimize_single(1.5, 0.5, "odd", 32)
        assert res.constraint_residual() < 1e-10
        assert np.all(np.diff(res.history) <= 1e-14 * max(1.0, abs(res.history[0])))
        assert quartic_integral(res.chi) == pytest.approx(1.0, abs=1e-10)

    def test_multistart_dispersion(self):
        res = minimize_single(1.0, 0.2, "odd", 32, restarts=6)
        obj = np.array([q for q in res.start_objectives if np.isfinite(q)])
        assert np.max(obj) - np.min(obj) < 1e-6 * max(1.0, np.min(obj))

    def test_rejects_noncoercive(self):
        with pytest.raises(InvalidParameter):
            minimize_single(1.0, -1.0, "odd")
        with pytest.raises(InvalidParameter):
            minimize_single(1.0, 0.0, "even")


class TestTwoConstraints:
    def test_zero_mean_below_odd(self):
        r = minimize_two_constraints(1.5, 0.3, 0.0, 32)
        q = minimize_single(1.5, 0.3, "odd", 32)
        assert r.q <= q.q * (1 + 1e-10)

    def test_nonzero_b(self):
        res = minimize_two_constraints(2.0, 1.0, 0.3 * M0, 64)
        assert abs(res.wave.b) > 1e-4
        assert res.wave.residual_l2 < 1e-6
        assert res.psi.mean() / math.sqrt(res.mu / 2) == pytest.approx(0.3 * M0, abs=1e-10)

    def test_infeasible(self):
        with pytest.raises(Infeasible):
            minimize_two_constraints(1.0, 0.5, 1.01 * M0, 32)

    def test_boundary_is_constant(self):
        res = minimize_two_constraints(1.0, 0.5, -M0, 32)
        assert res.wave.family == "constant"
        assert np.ptp(res.psi.values) == 0.0
        assert res.psi.mean() < 0


class TestIdentity:
    def test_constant(self):
        u = SpectralField.constant(M0, 16)
        chk = symmetrization_identity_check(u, M0)
        assert abs(chk.lhs) < 1e-13 and abs(chk.rhs) < 1e-13

    @settings(deadline=None, derandomize=True, max_examples=10)
    @given(seed=st.integers(0, 2 ** 16))
    def test_random_normalized(self, seed):
        rng = np.random.default_rng(seed)
        u = SpectralField.from_values(rng.normal(size=16)).resample(32)
        u = u * quartic_integral(u) ** -0.25
        chk = symmetrization_identity_check(u, u.mean())
        assert abs(chk.difference) < 1e-8


class TestForms:
    def test_quartic_matches_grid(self):
        u = SpectralField.from_function(lambda x: np.sin(x) + 0.3 * np.cos(2 * x), 32)
        from fracwave.spectral import coords
        assert quartic(coords(u)) == pytest.approx(quartic_integral(u), rel=1e-13)

    @pytest.mark.parametrize("alpha,c", [(2.0, 0.5), (0.7, 0.1), (1.2, 3.0)])
    def test_garding_positive_on_odd(self, alpha, c):
        u = SpectralField.from_function(lambda x: np.sin(x) + 0.2 * np.sin(3 * x), 64)
        assert garding_ratio(u, alpha, c) > 0

    def test_Bc_of_sine(self):
        u = SpectralField.from_function(np.sin, 32)
        assert B_c(u, 1.3, 0.5) == pytest.approx(0.5 * math.pi * 1.5, rel=1e-13)


def test_rescaled_minimizer_solves_equation():
    res = minimize_single(1.0, 0.5, "odd", 32)
    assert residual_norm(res.psi, 1.0, 0.5, 0.0) < 1e-6
