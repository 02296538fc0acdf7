import numpy as np
import pytest

from fracwave.continuation import (ContinuationOptions, branch_switch, continue_in_c,
                                   detect_fold, find_events, jacobian_checks, merge_branches,
                                   stokes_start, trace_bnz_branch, trace_family, wave_at_c)
from fracwave.errors import BelowThreshold, InvalidParameter, ParameterOutOfRange
from fracwave.linops import spectrum
from fracwave.spectral import parity_check


def momenta(branch):
    return np.array([0.5 * s.wave.momentum() for s in branch.samples])


class TestOddAlpha2:
    def test_monotone_without_fold(self, odd_branch_a2):
        assert np.all(np.diff(odd_branch_a2.c_values) > 0)
        assert not odd_branch_a2.events_of("fold")
        assert np.all(np.diff(momenta(odd_branch_a2)) > 0)

    def test_slopes_positive(self, odd_branch_a2):
        assert all(s.slope > 0 for s in odd_branch_a2.samples if s.slope is not None)

    def test_stability_change_at_pitchfork(self, odd_branch_a2):
        pf = odd_branch_a2.events_of("pitchfork")[0]
        sc = odd_branch_a2.events_of("stability-change")
        assert sc and abs(sc[0].location - pf.location) < 5e-3
        for s in odd_branch_a2.samples:
            if abs(s.c - pf.location) > 1e-2:
                assert s.verdict.verdict == ("stable" if s.c < pf.location else "unstable")


class TestEven:
    def test_alpha2_no_events(self):
        br = trace_family("even-b0", 2.0, 2.0, 128)
        assert br.status == "complete"
        assert not br.events_of("pitchfork") and not br.events_of("fold")
        assert all(s.verdict.verdict == "stable" for s in br.samples)

    def test_alpha1_momentum_decreasing(self):
        br = trace_family("even-b0", 1.0, 2.5, 128)
        assert np.all(np.diff(br.c_values) > 0)
        assert np.all(np.diff(momenta(br)) < 0)

    def test_fold_just_below_threshold(self):
        br = trace_family("even-b0", 0.67, 0.6, 128)
        fold = br.events_of("fold")
        assert fold and fold[0].location < 0.5

    def test_waves_are_even(self):
        w = wave_at_c("even", 1.3, 1.1, 128)
        assert parity_check(w.field, 0.0) == "even"

    def test_constant_side(self):
        w = wave_at_c("even", 2.0, 0.3, 64)
        assert w.family == "constant"
        assert np.allclose(w.field.values, np.sqrt(0.15))

    def test_past_fold_absent(self):
        with pytest.raises(ParameterOutOfRange):
            wave_at_c("even", 2.0, 0.7, 64, past_fold=True)


class TestBranchSwitch:
    def test_both_signs(self):
        odd = wave_at_c("odd", 2.0, 1.6, 128)
        plus, minus = branch_switch(odd, 1), branch_switch(odd, -1)
        assert plus.b > 1e-3 and minus.b < -1e-3
        assert plus.b == pytest.approx(-minus.b, rel=1e-8)
        assert plus.residual_l2 < 1e-9 and minus.residual_l2 < 1e-9

    def test_below_pitchfork(self):
        with pytest.raises(BelowThreshold):
            branch_switch(wave_at_c("odd", 2.0, 1.0, 128))

    def test_needs_odd_wave(self):
        with pytest.raises(InvalidParameter):
            branch_switch(wave_at_c("even", 2.0, 0.7, 64))

    def test_bnz_sigma0_divergence(self):
        up, down = trace_bnz_branch(wave_at_c("odd", 2.0, 1.6, 128), 3.2)
        ev = up.events_of("sigma0-divergence")
        assert ev and ev[0].location == pytest.approx(3.030, abs=2e-3)
        w = ev[0].witness
        assert w["sigma0_left"] < 0 < w["sigma0_right"]
        assert (w["n_L_left"], w["n_L_right"]) == (2, 1)
        # the reverse trace returns to the odd family at the pitchfork
        assert abs(down.samples[-1].wave.b) < 1e-8
        assert down.samples[-1].c == pytest.approx(1.424, abs=0.03)

    def test_bnz_unstable(self):
        w = wave_at_c("bnz", 2.0, 2.0, 128)
        assert spectrum(w).sigma0 < 0


class TestJacobianChecks:
    @pytest.mark.parametrize("family,alpha,c", [("odd", 1.0, 1.0), ("even", 2.0, 0.7),
                                                ("bnz", 2.0, 2.0)])
    def test_agree(self, family, alpha, c):
        rep = jacobian_checks(wave_at_c(family, alpha, c, 128))
        assert rep.sigma0_agrees and rep.det_agrees
        assert rep.sigma0_from_da_db == pytest.approx(rep.sigma0, rel=1e-6)


class TestMechanics:
    def test_half_step_reproduces_events(self):
        coarse = trace_family("odd-b0", 2.0, 2.0, 128)
        fine = trace_family("odd-b0", 2.0, 2.0, 128,
                            ContinuationOptions(dc=0.01, dc_max=0.025))
        a = coarse.events_of("pitchfork")[0].location
        b = fine.events_of("pitchfork")[0].location
        assert abs(a - b) < 2e-4

    def test_find_events_idempotent(self, odd_branch_a2):
        kinds = sorted(e.kind for e in find_events(odd_branch_a2))
        assert kinds == sorted(e.kind for e in odd_branch_a2.events)

    def test_no_fold_on_monotone_branch(self, odd_branch_a2):
        assert detect_fold(odd_branch_a2) is None

    def test_merge(self):
        opts = ContinuationOptions(analyze=False, detect_events=False)
        mid = wave_at_c("odd", 1.5, 0.0, 64)
        up = continue_in_c(mid, 0.3, opts)
        down = continue_in_c(mid, -0.3, opts)
        merged = merge_branches(down, up)
        assert len(merged.samples) == len(up.samples) + len(down.samples) - 1
        assert np.all(np.diff(merged.c_values) > 0)

    def test_stokes_start_families(self):
        with pytest.raises(InvalidParameter):
            stokes_start("asymmetric-bnz", 1.0)
