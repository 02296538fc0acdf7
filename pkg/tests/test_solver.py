import math

import numpy as np
import pytest

from fracwave.continuation import wave_at_c
from fracwave.elliptic import cnoidal_wave, dnoidal_wave, k_from_c
from fracwave.errors import InvalidParameter, NoConvergence
from fracwave.linops import assemble_L
from fracwave.solver import (NewtonOptions, check_slope, dF_domega_partial, newton_solve,
                             slope_wrt_c, solve_even_at_amplitude, solve_phi)
from fracwave.spectral import (SpectralField, coords, cubic_integral, parity_check,
                               quartic_integral)
from fracwave.stokes import even_stokes, odd_stokes
from fracwave.variational import align, minimize_two_constraints
from fracwave.wave import WaveProfile, decompose, recompose, residual_norm


class TestNewton:
    def test_cnoidal_from_stokes(self):
        seed, c = odd_stokes(0.05, 2.0, 256)
        assert c == pytest.approx(-0.99625, abs=1e-14)
        w = newton_solve(seed, 2.0, c, 0.0, NewtonOptions(symmetry="odd"))
        exact = cnoidal_wave(k_from_c(c, "cnoidal"), 256)
        assert align(w.field, exact.field).linf < 1e-8
        assert w.residual_l2 < 1e-10

    def test_constant_root(self):
        c = 0.3
        seed = SpectralField.constant(math.sqrt(c / 2), 64)
        w = newton_solve(seed, 1.2, c, 0.0, NewtonOptions(symmetry="even"))
        assert len(w.residual_history) == 1
        assert np.array_equal(w.field.values, seed.values)

    def test_even_alpha1_mean(self):
        seed, c = even_stokes(0.05, 1.0, 32)
        w = newton_solve(seed, 1.0, c, 0.0, NewtonOptions(symmetry="even"))
        assert w.residual_l2 < 1e-10
        assert abs(w.field.mean() - 0.5) > 1e-4
        # the same wave from the mean-constrained minimizer
        m = w.field.mean() / quartic_integral(w.field) ** 0.25
        res = minimize_two_constraints(1.0, c, m, 32)
        assert align(res.psi, w.field).linf < 1e-6

    def test_quadratic_convergence(self):
        seed, c = odd_stokes(0.3, 1.4, 128)
        w = newton_solve(seed, 1.4, c, 0.0, NewtonOptions(symmetry="odd", tol=1e-13))
        hist = w.residual_history
        pairs = [(r0, r1) for r0, r1 in zip(hist, hist[1:]) if r0 < 1e-3 and r1 > 1e-12]
        assert pairs
        for r0, r1 in pairs:
            assert r1 <= 100.0 * r0 ** 2

    def test_no_convergence(self):
        seed = SpectralField.from_function(lambda x: 5 * np.sin(x), 32)
        with pytest.raises(NoConvergence):
            newton_solve(seed, 1.0, 0.0, 0.0, NewtonOptions(max_iter=2, symmetry="odd"))

    def test_bad_inputs(self):
        with pytest.raises(InvalidParameter):
            newton_solve(SpectralField.zeros(16), 0.4, 0.0)
        with pytest.raises(InvalidParameter):
            newton_solve(SpectralField.zeros(16), 1.0, float("nan"))
        with pytest.raises(InvalidParameter):
            NewtonOptions(symmetry="sideways")

    def test_normalization(self):
        w = wave_at_c("odd", 1.5, 0.2, 128)
        assert parity_check(w.field, 0.0) == "odd"
        x = w.field.x
        assert 0 < x[np.argmax(w.field.values)] <= math.pi
        e = wave_at_c("even", 1.5, 0.8, 128)
        assert np.argmax(e.field.values) == np.argmin(np.abs(e.field.x))

    def test_odd_family_has_zero_b(self):
        for c in (-0.5, 0.5, 2.0):
            w = wave_at_c("odd", 1.2, c, 128)
            # b = (1/π)∫ψ³ recomputed from the profile
            assert abs(cubic_integral(w.field) / math.pi) < 1e-8


class TestTranslationMode:
    @pytest.mark.parametrize("family,alpha,c", [("odd", 1.0, 0.5), ("even", 1.0, 1.0),
                                                ("bnz", 2.0, 1.6)])
    def test_kernel(self, family, alpha, c):
        w = wave_at_c(family, alpha, c, 128)
        L = assemble_L(w)
        v = L @ coords(w.field.derivative())
        assert np.max(np.abs(v)) < 1e-8 * np.linalg.norm(L, 2)


class TestPhiProblem:
    def test_a_zero_is_odd_problem(self):
        odd = wave_at_c("odd", 1.3, 0.4, 128)
        shifted = odd.field.translate(math.pi / 2)
        zm = solve_phi(0.4, 0.0, 1.3, shifted)
        assert align(zm.phi, odd.field).linf < 1e-9
        assert abs(zm.beta) < 1e-10

    def test_dnoidal(self):
        d = dnoidal_wave(0.6, 256)
        zm0 = decompose(d)
        assert zm0.a == pytest.approx(0.5, abs=1e-12)
        assert zm0.omega == pytest.approx(d.c - 1.5, abs=1e-12)
        assert zm0.beta == pytest.approx(0.5 * (d.c - 0.5), abs=1e-10)
        zm = solve_phi(zm0.omega, 0.5, 2.0, zm0.phi)
        assert np.max(np.abs(zm.phi.values - (d.field - 0.5).values)) < 1e-8

    def test_perturbed_mean(self):
        w = wave_at_c("even", 1.0, 1.0, 128)
        zm = decompose(w)
        zp = solve_phi(zm.omega, zm.a + 1e-3, 1.0, zm.phi)
        assert 0 < abs(zp.phi_norm_sq() - zm.phi_norm_sq()) < 1e-1

    def test_recompose(self):
        w = wave_at_c("even", 1.0, 1.0, 256)
        back = recompose(decompose(w), "even-b0")
        assert back.c == pytest.approx(w.c, abs=1e-12)
        assert abs(back.b) < 1e-10
        assert back.residual_l2 < 1e-9


class TestDecompose:
    def test_constant(self):
        c = 0.4
        a = math.sqrt(c / 2)
        w = WaveProfile(SpectralField.constant(a, 16), 1.0, c, 0.0, "constant", 0.0)
        zm = decompose(w)
        assert zm.a == pytest.approx(a) and zm.omega == pytest.approx(-2 * c)
        assert abs(zm.beta) < 1e-15
        assert np.max(np.abs(zm.phi.values)) == 0.0

    def test_json_round_trip(self):
        w = wave_at_c("odd", 1.0, 0.0, 64)
        back = WaveProfile.from_json(w.to_json())
        assert np.array_equal(back.field.coeffs, w.field.coeffs)
        assert (back.alpha, back.c, back.b, back.family) == (w.alpha, w.c, w.b, w.family)


class TestSlopes:
    def test_stokes_regime(self):
        seed, c = odd_stokes(0.05, 2.0, 128)
        w = newton_solve(seed, 2.0, c, 0.0, NewtonOptions(symmetry="odd"))
        assert slope_wrt_c(w) == pytest.approx(2 * math.pi / 3, rel=0.05)

    def test_against_difference(self):
        w = wave_at_c("odd", 2.0, 0.0, 256)   # k = 1/√2
        check_slope(w, tol=1e-6)

    def test_even_partial_alpha2(self):
        from fracwave.stokes import stokes_slope_prediction
        seed, c = even_stokes(0.02, 2.0, 128)
        w = newton_solve(seed, 2.0, c, 0.0, NewtonOptions(symmetry="even"))
        assert dF_domega_partial(decompose(w)) == pytest.approx(stokes_slope_prediction(2.0),
                                                                rel=0.05)


class TestAmplitudeSolve:
    def test_amplitude_constraint(self):
        w = solve_even_at_amplitude(1.5, 0.01, 32)
        assert 2 * w.field.coeff(1).real == pytest.approx(0.01, abs=1e-13)
        assert w.residual_l2 < 1e-10

    def test_rejects_zero_amplitude(self):
        with pytest.raises(InvalidParameter):
            solve_even_at_amplitude(1.5, 0.0)


def test_residual_of_exact_wave():
    w = cnoidal_wave(0.5, 128)
    assert residual_norm(w.field, 2.0, w.c, 0.0) < 1e-10
