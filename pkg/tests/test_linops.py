import math

import numpy as np
import pytest

from fracwave.continuation import analyze_wave, wave_at_c
from fracwave.elliptic import cnoidal_critical_modulus, cnoidal_wave, dnoidal_wave
from fracwave.errors import HypothesisViolated
from fracwave.linops import (assemble_L, classify_even, classify_odd, constrained_index,
                             kdv_spectrum, restricted_L_X0, s0_invertibility, spectrum,
                             subspace_counts, x0_counts)
from fracwave.solver import NewtonOptions, dF_domega_partial, newton_solve
from fracwave.spectral import SpectralField, coords, cubic_integral, quartic_integral
from fracwave.stokes import even_stokes, general_stokes_coeffs
from fracwave.wave import WaveProfile, ZeroMeanWave, decompose


def constant_wave(c: float, alpha: float, n: int = 32) -> WaveProfile:
    psi = SpectralField.constant(math.sqrt(c / 2), n)
    return WaveProfile(psi, alpha, c, 0.0, "constant", 0.0)


class TestAssemble:
    def test_constant_diagonal(self):
        w = constant_wave(0.4, 1.3)
        L = assemble_L(w)
        assert np.allclose(L, np.diag(np.diag(L)), atol=1e-14)
        m = w.n_modes // 2 - 1
        k = np.concatenate([[0], np.arange(1, m + 1), np.arange(1, m + 1)])
        assert np.allclose(np.diag(L), k ** 1.3 - 0.8, atol=1e-13)

    def test_constant_eigenvalues(self):
        ev = spectrum(constant_wave(0.4, 2.0)).eigenvalues
        assert ev[:4] == pytest.approx([-0.8, 0.2, 0.2, 3.2], abs=1e-13)

    def test_symmetric(self):
        L = assemble_L(wave_at_c("odd", 1.0, 0.3, 64))
        assert np.allclose(L, L.T, atol=1e-13)


class TestCounts:
    @pytest.mark.parametrize("alpha,c", [(2.0, 0.5), (1.0, -0.3), (0.7, -0.8)])
    def test_odd(self, alpha, c):
        rep = spectrum(wave_at_c("odd", alpha, c, 256))
        assert (rep.n_L, rep.z_L) == (2, 1)

    @pytest.mark.parametrize("k", [0.5, 0.8])
    def test_dnoidal(self, k):
        rep = spectrum(dnoidal_wave(k, 128))
        assert (rep.n_L, rep.z_L) == (1, 1)

    def test_upper_fold_branch(self):
        # Stokes side of the alpha = 0.6 fold
        rep = spectrum(wave_at_c("even", 0.6, 0.49, 256))
        assert rep.n_L == 2

    def test_nodal_bounds(self):
        rep = spectrum(wave_at_c("odd", 1.5, 1.0, 128))
        for n, changes in enumerate(rep.nodal_counts, start=1):
            assert changes <= 2 * (n - 1)

    def test_translation_mode_lowest_in_odd_pi2(self):
        w = wave_at_c("odd", 1.2, 0.5, 128)
        ev = subspace_counts(w, "odd-pi2").eigenvalues
        assert abs(ev[0]) < 1e-8
        rep = spectrum(w)
        assert rep.kernel_similarity > 0.999


class TestSigma0:
    def test_dnoidal_positive(self):
        assert spectrum(dnoidal_wave(0.5, 128)).sigma0 > 0

    def test_cnoidal_sign_flip(self):
        k_star = cnoidal_critical_modulus()
        lo = spectrum(cnoidal_wave(k_star - 0.01, 256)).sigma0
        hi = spectrum(cnoidal_wave(k_star + 0.01, 256)).sigma0
        assert lo < 0 < hi

    def test_range_flag(self):
        rep = spectrum(wave_at_c("odd", 1.0, 0.5, 128))
        assert rep.one_in_range and rep.range_projection < 1e-6


class TestX0:
    @pytest.mark.parametrize("alpha,c", [(2.0, 0.7), (1.0, 1.0), (1.0, 2.0)])
    def test_even_counts(self, alpha, c):
        counts = x0_counts(wave_at_c("even", alpha, c, 256))
        assert (counts.n, counts.z) == (1, 1)

    def test_odd_at_pitchfork(self):
        w = cnoidal_wave(cnoidal_critical_modulus(), 256)
        assert x0_counts(w).z == 2

    @pytest.mark.parametrize("family,alpha,c", [("even", 1.0, 1.0), ("odd", 1.0, 0.3)])
    def test_quadratic_form(self, family, alpha, c):
        w = wave_at_c(family, alpha, c, 256)
        zm = decompose(w)
        r = coords(zm.phi)[1:]
        lhs = 2 * math.pi * float(r @ restricted_L_X0(w) @ r)
        rhs = -4 * quartic_integral(zm.phi) - 6 * zm.a * cubic_integral(zm.phi)
        assert lhs == pytest.approx(rhs, abs=1e-8)


class TestConstrainedIndex:
    def test_odd_stable_side(self):
        w = wave_at_c("odd", 2.0, 1.0, 256)
        ci = constrained_index(w, spectrum(w))
        assert ci.n_constrained == 0

    def test_odd_unstable_side(self):
        w = wave_at_c("odd", 2.0, 2.0, 256)
        ci = constrained_index(w, spectrum(w))
        assert ci.n_constrained == 1

    @pytest.mark.parametrize("alpha,c,past_fold", [(2.0, 0.7, False), (1.0, 2.0, False),
                                                   (0.6, 0.49, False)])
    def test_even_determinant(self, alpha, c, past_fold):
        w = wave_at_c("even", alpha, c, 256, past_fold=past_fold)
        rep = spectrum(w)
        d = constrained_index(w, rep, "1,psi").matrix
        # ⟨φ, ∂_ωφ⟩ is half the partial slope
        expected = -rep.sigma0 * 0.5 * dF_domega_partial(decompose(w))
        assert np.linalg.det(d) == pytest.approx(expected, rel=1e-6)


class TestVerdicts:
    def test_odd_cases(self):
        assert classify_odd(-1.0, 1.0).verdict == "stable"
        assert classify_odd(1.0, 1.0).verdict == "unstable"
        assert classify_odd(-1.0, -1.0).verdict == "unstable"
        assert classify_odd(1.0, -1.0).verdict == "inconclusive"
        assert classify_odd(0.0, -1.0).verdict == "unstable"
        assert classify_odd(1.0, 0.0).verdict == "unstable"
        assert classify_odd(None, 1.0, one_in_range=False).verdict == "unstable"
        assert classify_odd(None, -1.0, one_in_range=False).verdict == "inconclusive"

    @pytest.mark.parametrize("c,expected", [(1.0, "stable"), (2.0, "unstable")])
    def test_odd_alpha2(self, c, expected):
        assert analyze_wave(wave_at_c("odd", 2.0, c, 256)).verdict.verdict == expected

    @pytest.mark.parametrize("k", [0.3, 0.6, 0.9])
    def test_dnoidal_stable(self, k):
        assert analyze_wave(dnoidal_wave(k, 256)).verdict.verdict == "stable"

    def test_alpha1_even_large_speed(self):
        smp = analyze_wave(wave_at_c("even", 1.0, 2.0, 256))
        assert smp.verdict.verdict == "stable"
        assert smp.partial_slope > 0

    def test_even_hypothesis(self):
        zm = ZeroMeanWave(SpectralField.zeros(16), 0.5, -1.5, 0.0, 1.0)
        with pytest.raises(HypothesisViolated):
            classify_even(zm, 1.0)

    def test_alpha06_sides(self, even_branch_a06):
        c_star = even_branch_a06.events_of("stability-change")[0].location
        c_fold = even_branch_a06.events_of("fold")[0].location
        turned = False
        for prev, smp in zip(even_branch_a06.samples, even_branch_a06.samples[1:]):
            turned = turned or smp.c > prev.c
            if not turned or abs(smp.c - c_star) < 1e-3:
                continue
            expected = "stable" if smp.c < c_star else "unstable"
            assert smp.verdict.verdict == expected, (smp.c, c_fold)


class TestS0:
    def test_dnoidal(self):
        w = dnoidal_wave(0.5, 128)
        s0 = s0_invertibility(decompose(w)).s0
        assert s0 == pytest.approx(2 * math.pi / spectrum(w).sigma0, rel=0.01)

    @pytest.mark.parametrize("alpha", [2.0, 1.0])
    def test_stokes_regime(self, alpha):
        seed, c = even_stokes(0.02, alpha, 128)
        w = newton_solve(seed, alpha, c, 0.0, NewtonOptions(symmetry="even"))
        _, a2, _ = general_stokes_coeffs(alpha)
        assert s0_invertibility(decompose(w)).s0 == pytest.approx(1 / a2, rel=0.01)


class TestKdv:
    def test_zero_wave(self):
        c, alpha = 0.3, 1.5
        w = WaveProfile(SpectralField.zeros(32), alpha, c, 0.0, "constant", 0.0)
        k = kdv_spectrum(w)
        assert np.max(np.abs(k.eigenvalues.real)) < 1e-12
        n = np.arange(1, 16)
        expected = np.sort(np.concatenate([n * (n ** alpha + c), -n * (n ** alpha + c), [0.0]]))
        assert np.allclose(np.sort(k.eigenvalues.imag), expected, atol=1e-10)

    def test_unstable_odd(self):
        k = kdv_spectrum(wave_at_c("odd", 2.0, 2.0, 128))
        assert k.unstable_count() == 1

    def test_dnoidal_on_axis(self):
        k = kdv_spectrum(dnoidal_wave(0.5, 128))
        assert k.max_real < 1e-6

    def test_hamiltonian_symmetry(self):
        k = kdv_spectrum(wave_at_c("odd", 1.0, 0.0, 128))
        assert k.hamiltonian_defect() < 1e-6 * k.scale


def test_alpha06_odd_wave_with_three_negative_eigenvalues():
    """Recorded behaviour: between the sigma0 divergence and the upper end of the
    resolved range the alpha = 0.6 odd wave has n(L) = 3, split as one odd and
    two even (about 0) directions."""
    w = wave_at_c("odd", 0.6, -0.4, 256)
    rep = spectrum(w)
    assert (rep.n_L, rep.z_L) == (3, 1)
    assert subspace_counts(w, "odd").n == 1
    assert subspace_counts(w, "even").n == 2
    from fracwave.spectral import single_lobe_check
    assert single_lobe_check(w.field)
