"""Branch tracing in the wave speed and detection of bifurcations.

Three families are traced, each with its own unknowns in real Fourier
coordinates:

``odd-b0``
    odd profiles, ``b = 0``;
``even-b0``
    even profiles including the mean, ``b = 0``;
``asymmetric-bnz``
    zero-mean even profiles (odd waves translated by a quarter period and
    perturbed), ``b`` recovered from the constant Fourier row.

Stepping is in ``c`` with a secant predictor and switches to
pseudo-arclength once ``|dc/ds|`` drops below a threshold, so turning points
can be passed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import (
    AtBifurcation,
    BelowThreshold,
    DiagnosticsFailure,
    FracwaveError,
    HypothesisViolated,
    InvalidParameter,
    NoConvergence,
    StepUnderflow,
)
from .linops import (
    count_indices, subspace_restriction,
    LinearizationReport,
    StabilityVerdict,
    classify_even,
    classify_general,
    classify_odd,
    constrained_index,
    s0_invertibility,
    spectrum,
)
from .solver import (
    NewtonOptions,
    _Cubic,
    _newton,
    dF_domega_partial,
    even_frame,
    newton_solve,
    slope_wrt_c,
    solve_phi,
)
from .spectral import TWO_PI, SpectralField, coords, field_from_coords, subspace_indices
from .stokes import even_stokes, odd_stokes
from .wave import WaveProfile, ZeroMeanWave, decompose, residual_norm

_KIND = {"odd-b0": "odd", "even-b0": "even", "asymmetric-bnz": "even-zero-mean"}


@dataclass(frozen=True)
class ContinuationOptions:
    """Step control for :func:`continue_in_c`.

    ``max_profile_jump`` bounds ``‖ψ_{k+1} - ψ_k‖`` (L² over the circle);
    larger steps are rejected and retried with half the size.
    """

    dc: float = 0.02
    dc_min: float = 1e-8
    dc_max: float = 0.05
    grow_after: int = 4
    arclength_switch: float = 0.1
    max_steps: int = 2000
    max_profile_jump: float = 0.5
    analyze: bool = True
    detect_events: bool = True
    on_stuck: str = "raise"
    newton: NewtonOptions = NewtonOptions(normalize=False)


@dataclass
class BranchSample:
    """One analyzed point of a branch."""

    wave: WaveProfile
    zm: ZeroMeanWave
    report: LinearizationReport | None
    verdict: StabilityVerdict | None
    s: float
    dc_ds: float
    slope: float | None = None
    partial_slope: float | None = None
    s0: float | None = None
    mode: str = "natural"

    @property
    def c(self) -> float:
        return self.wave.c

    def row(self) -> dict:
        r = self.report
        return {
            "c": self.wave.c,
            "b": self.wave.b,
            "a": self.zm.a,
            "omega": self.zm.omega,
            "beta": self.zm.beta,
            "F": 0.5 * self.wave.momentum(),
            "sigma0": None if r is None else r.sigma0,
            "n_L": None if r is None else r.n_L,
            "z_L": None if r is None else r.z_L,
            "s0": self.s0,
            "verdict": None if self.verdict is None else self.verdict.verdict,
        }


@dataclass(frozen=True)
class BranchEvent:
    """A located bifurcation or stability change.

    ``location`` is the value of ``c`` at the event; ``bracket`` is the width
    of the final bracket in ``c``.
    """

    kind: str
    location: float
    bracket: float
    witness: dict = field(default_factory=dict)
    between: tuple = ()


@dataclass
class Branch:
    family: str
    alpha: float
    n_modes: int
    samples: list = field(default_factory=list)
    events: list = field(default_factory=list)
    status: str = "complete"
    diagnostics: str = ""

    @property
    def c_values(self) -> np.ndarray:
        return np.array([s.c for s in self.samples])

    def events_of(self, kind: str) -> list:
        return [e for e in self.events if e.kind == kind]


# family problems -----------------------------------------------------------

class _FamilyProblem:
    """Residual ``F(r, c)`` and its derivatives for one family."""

    def __init__(self, family: str, alpha: float, n_modes: int):
        if family not in _KIND:
            raise InvalidParameter(f"cannot continue family {family!r}")
        self.family = family
        self.alpha = alpha
        self.n_modes = n_modes
        self.m = n_modes // 2 - 1
        self.kind = _KIND[family]
        self.idx = subspace_indices(self.m, self.kind)
        self.cubic = _Cubic(alpha, self.m)

    def full(self, z: np.ndarray) -> np.ndarray:
        r = np.zeros(2 * self.m + 1)
        r[self.idx] = z
        return r

    def F(self, r: np.ndarray, c: float) -> np.ndarray:
        return self.cubic.residual(r, c, 0.0)[self.idx]

    def J(self, r: np.ndarray, c: float) -> np.ndarray:
        return self.cubic.jacobian(r, c)[np.ix_(self.idx, self.idx)]

    def Fc(self, r: np.ndarray) -> np.ndarray:
        return r[self.idx]

    def b_of(self, r: np.ndarray) -> float:
        return 2.0 * self.cubic.cube_mean(r) if self.family == "asymmetric-bnz" else 0.0

    def wave(self, r: np.ndarray, c: float, history=()) -> WaveProfile:
        psi = field_from_coords(r, self.n_modes)
        b = self.b_of(r)
        return WaveProfile(psi, self.alpha, c, b, self.family,
                           residual_norm(psi, self.alpha, c, b),
                           {"shift": 0.0, "sign": 1, "symmetry": self.kind}, tuple(history))

    def solve_at(self, r_seed: np.ndarray, c: float, opts: NewtonOptions) -> np.ndarray:
        r, hist = _newton(lambda r: self.cubic.residual(r, c, 0.0),
                          lambda r: self.cubic.jacobian(r, c), r_seed, self.idx, opts)
        return r

    def solve_arclength(self, z_pred: np.ndarray, c_pred: float, t_z: np.ndarray, t_c: float,
                        opts: NewtonOptions) -> tuple[np.ndarray, float]:
        """Bordered Newton for ``F = 0`` on the hyperplane orthogonal to the tangent."""
        z, c = z_pred.copy(), c_pred
        for _ in range(opts.max_iter):
            r = self.full(z)
            f = self.F(r, c)
            g = t_z @ (z - z_pred) + t_c * (c - c_pred)
            norm = math.sqrt(TWO_PI) * float(np.linalg.norm(f))
            if norm < opts.tol and abs(g) < 1e-12:
                return z, c
            jac = np.empty((z.size + 1, z.size + 1))
            jac[:-1, :-1] = self.J(r, c)
            jac[:-1, -1] = self.Fc(r)
            jac[-1, :-1] = t_z
            jac[-1, -1] = t_c
            cond = np.linalg.cond(jac)
            if not cond <= opts.max_cond:
                raise NoConvergence(f"bordered Jacobian singular ({cond:.2e})", norm)
            step = np.linalg.solve(jac, np.concatenate([f, [g]]))
            z = z - step[:-1]
            c = c - step[-1]
        raise NoConvergence("arclength corrector did not converge")

    def solve_fixed_omega(self, r_seed: np.ndarray, c_seed: float, omega: float,
                          opts: NewtonOptions) -> tuple[np.ndarray, float]:
        """Solve with ``ω = c - 6a²`` fixed and ``c`` unknown (``a`` is the constant coordinate)."""
        r = r_seed.copy()
        c = c_seed
        n = self.idx.size
        has_mean = self.idx[0] == 0
        for _ in range(opts.max_iter):
            f = np.append(self.F(r, c), c - 6.0 * r[0] ** 2 - omega)
            norm = math.sqrt(TWO_PI) * float(np.linalg.norm(f))
            if norm < opts.tol:
                return r, c
            jac = np.zeros((n + 1, n + 1))
            jac[:n, :n] = self.J(r, c)
            jac[:n, n] = self.Fc(r)
            if has_mean:
                jac[n, 0] = -12.0 * r[0]
            jac[n, n] = 1.0
            step = np.linalg.solve(jac, f)
            r[self.idx] -= step[:n]
            c -= step[n]
        raise NoConvergence("fixed-omega solve did not converge")


# analysis ------------------------------------------------------------------

def analyze_wave(wave: WaveProfile, s: float = 0.0, dc_ds: float = 1.0,
                 mode: str = "natural") -> BranchSample:
    """Linearization data and stability verdict for one wave."""
    zm = decompose(wave)
    report = spectrum(wave)
    slope = partial = s0 = None
    verdict = None
    if wave.family == "odd-b0":
        slope = slope_wrt_c(wave)
        verdict = classify_odd(report.sigma0, slope, report.one_in_range, report.n_L, report.z_L)
    elif wave.family == "even-b0":
        try:
            partial = dF_domega_partial(zm)
            s0 = s0_invertibility(zm).s0
            verdict = classify_even(zm, partial, s0)
        except HypothesisViolated as exc:
            verdict = StabilityVerdict("inconclusive", f"hypothesis violated: {exc}", {})
        except AtBifurcation as exc:
            verdict = StabilityVerdict("inconclusive", f"derivative failed: {exc}", {})
    elif wave.family == "asymmetric-bnz":
        slope = slope_wrt_c(wave)
        ci = constrained_index(wave, report, "1,psi")
        verdict = classify_general(ci, report)
        try:
            s0 = s0_invertibility(zm).s0
        except AtBifurcation:
            s0 = None
    return BranchSample(wave, zm, report, verdict, s, dc_ds, slope, partial, s0, mode)


def _plain_sample(wave: WaveProfile, s: float, dc_ds: float, mode: str) -> BranchSample:
    return BranchSample(wave, decompose(wave), None, None, s, dc_ds, mode=mode)


# continuation --------------------------------------------------------------

def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    return v / n if n > 0 else v


def continue_in_c(
    start: WaveProfile,
    c_end: float,
    opts: ContinuationOptions | None = None,
    second: WaveProfile | None = None,
    stop_when: Callable[[WaveProfile], bool] | None = None,
) -> Branch:
    """Trace the family of ``start`` until ``c`` crosses ``c_end``.

    Parameters
    ----------
    start : WaveProfile
        Converged first point; its family selects the unknowns.
    c_end : float
        Target speed. Stepping stops once ``c`` passes it.
    opts : ContinuationOptions, optional
    second : WaveProfile, optional
        A second nearby point on the same branch; the secant through both
        fixes the initial direction (needed when the branch starts by moving
        away from ``c_end``, as before a fold).
    stop_when : callable, optional
        Predicate on each accepted wave that ends the run early.

    Raises
    ------
    StepUnderflow
        If the step falls below ``dc_min`` in both stepping modes and
        ``opts.on_stuck`` is ``"raise"``.
    """
    opts = opts or ContinuationOptions()
    prob = _FamilyProblem(start.family, start.alpha, start.n_modes)
    branch = Branch(start.family, start.alpha, start.n_modes)

    def record(wave, s, dc_ds, mode):
        smp = analyze_wave(wave, s, dc_ds, mode) if opts.analyze else _plain_sample(wave, s, dc_ds, mode)
        branch.samples.append(smp)

    pts_z = [coords(start.field)[prob.idx]]
    pts_c = [start.c]
    record(start, 0.0, 0.0, "natural")
    direction = math.copysign(1.0, c_end - start.c)
    if second is not None:
        pts_z.append(coords(second.field)[prob.idx])
        pts_c.append(second.c)
        dz = pts_z[1] - pts_z[0]
        dcc = pts_c[1] - pts_c[0]
        ds0 = math.sqrt(float(dz @ dz) + dcc * dcc)
        record(second, ds0, dcc / ds0, "natural")
        direction = math.copysign(1.0, dcc) if dcc != 0 else direction
    mode = "natural"
    h = opts.dc
    successes = 0
    s_total = branch.samples[-1].s
    target_side = math.copysign(1.0, c_end - pts_c[-1]) if pts_c[-1] != c_end else direction
    for _ in range(opts.max_steps):
        z_k, c_k = pts_z[-1], pts_c[-1]
        if len(pts_z) >= 2:
            tz, tc = pts_z[-1] - pts_z[-2], pts_c[-1] - pts_c[-2]
            nrm = math.sqrt(float(tz @ tz) + tc * tc)
            tz, tc = tz / nrm, tc / nrm
            if mode == "natural" and abs(tc) < opts.arclength_switch:
                mode = "arclength"
        else:
            # tangent from the linearized equation: J dz/dc = -F_c
            r_k = prob.full(z_k)
            dzdc = np.linalg.lstsq(prob.J(r_k, c_k), -prob.Fc(r_k), rcond=None)[0]
            nrm = math.sqrt(float(dzdc @ dzdc) + 1.0)
            tz, tc = direction * dzdc / nrm, direction / nrm
            if mode == "natural" and abs(tc) < opts.arclength_switch:
                mode = "arclength"
        try:
            if mode == "natural":
                dc = direction * h
                if tc != 0:
                    dc = math.copysign(h, tc)
                c_new = c_k + dc
                z_guess = z_k + (tz / tc) * dc if tc != 0 else z_k
                r_new = prob.solve_at(prob.full(z_guess), c_new, opts.newton)
                z_new = r_new[prob.idx]
            else:
                z_pred = z_k + h * tz
                c_pred = c_k + h * tc
                z_new, c_new = prob.solve_arclength(z_pred, c_pred, tz, tc, opts.newton)
                r_new = prob.full(z_new)
            jump = math.sqrt(TWO_PI) * float(np.linalg.norm(z_new - z_k))
            if jump > opts.max_profile_jump:
                raise NoConvergence(f"profile jump {jump:.3f} exceeds bound")
            if mode == "arclength":
                # reject steps that reverse along the branch
                if tz @ (z_new - z_k) + tc * (c_new - c_k) <= 0:
                    raise NoConvergence("corrector moved backwards")
        except (NoConvergence, np.linalg.LinAlgError):
            h *= 0.5
            successes = 0
            if h < opts.dc_min:
                if mode == "natural":
                    mode, h = "arclength", opts.dc
                    continue
                branch.status = "stuck"
                branch.diagnostics = f"step underflow at c = {c_k:.10g} ({mode} mode)"
                if opts.on_stuck == "raise":
                    err = StepUnderflow(branch.diagnostics)
                    err.branch = branch
                    raise err
                break
            continue
        dz = z_new - z_k
        dcc = c_new - c_k
        ds = math.sqrt(float(dz @ dz) + dcc * dcc)
        s_total += ds
        pts_z.append(z_new)
        pts_c.append(c_new)
        wave = prob.wave(r_new, c_new)
        record(wave, s_total, dcc / ds if ds > 0 else 0.0, mode)
        successes += 1
        if successes >= opts.grow_after:
            h = min(2.0 * h, opts.dc_max)
            successes = 0
        if stop_when is not None and stop_when(wave):
            branch.status = "stopped"
            break
        if (c_new - c_end) * target_side >= 0:
            break
    else:
        branch.status = "max-steps"
    if opts.detect_events and opts.analyze:
        find_events(branch)
    return branch


def stokes_start(family: str, alpha: float, n_modes: int = 256, A: float = 0.05,
                 opts: NewtonOptions | None = None) -> WaveProfile:
    """Newton-converged wave seeded by the Stokes expansion of amplitude ``A``."""
    opts = opts or NewtonOptions()
    if family == "odd-b0":
        seed, c = odd_stokes(A, alpha, n_modes)
        return newton_solve(seed, alpha, c, 0.0, replace(opts, symmetry="odd"))
    if family == "even-b0":
        seed, c = even_stokes(A, alpha, n_modes)
        return newton_solve(seed, alpha, c, 0.0, replace(opts, symmetry="even"))
    raise InvalidParameter("Stokes starts exist for odd-b0 and even-b0 only")


def trace_family(family: str, alpha: float, c_end: float, n_modes: int = 256,
                 opts: ContinuationOptions | None = None) -> Branch:
    """Start from small-amplitude waves and continue to ``c_end``.

    Even branches start from two Stokes amplitudes (0.05 and 0.06) so that
    the initial direction follows increasing amplitude, whichever way ``c``
    moves.
    """
    first = stokes_start(family, alpha, n_modes, 0.05)
    second = stokes_start(family, alpha, n_modes, 0.06) if family == "even-b0" else None
    return continue_in_c(first, c_end, opts, second=second)


# events --------------------------------------------------------------------

def _bisect(lo: float, hi: float, f_lo, test: Callable[[float], object], width: float,
            max_iter: int = 60) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` keeping ``test`` different at the two ends."""
    for _ in range(max_iter):
        if abs(hi - lo) <= width:
            break
        mid = 0.5 * (lo + hi)
        if test(mid) == f_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _nearest(branch: Branch, c: float) -> BranchSample:
    return min(branch.samples, key=lambda smp: abs(smp.c - c))


def _resolve(branch: Branch, c: float, seed: BranchSample) -> WaveProfile:
    prob = _FamilyProblem(branch.family, branch.alpha, branch.n_modes)
    r = prob.solve_at(coords(seed.wave.field), c, NewtonOptions(normalize=False))
    return prob.wave(r, c)


def _natural_pairs(branch: Branch):
    smp = branch.samples
    skip = _fold_pairs(branch)
    for i in range(len(smp) - 1):
        lo, hi = smp[i], smp[i + 1]
        if lo.report is None or hi.report is None or i in skip:
            continue
        yield i, lo, hi


def detect_pitchfork(branch: Branch, refine: bool = True, width: float = 1e-4) -> BranchEvent | None:
    """Locate a sign change of finite σ₀ (with unchanged ``n(L)``); ``None`` if absent."""
    for i, lo, hi in _natural_pairs(branch):
        a, b = lo.report.sigma0, hi.report.sigma0
        if a is None or b is None or lo.report.n_L != hi.report.n_L:
            continue
        if (a > 0) == (b > 0):
            continue
        c_lo, c_hi = lo.c, hi.c
        if refine:
            def sign_at(c):
                w = _resolve(branch, c, _nearest(branch, c))
                s = spectrum(w).sigma0
                return None if s is None else s > 0
            c_lo, c_hi = _bisect(c_lo, c_hi, a > 0, sign_at, width)
        loc = 0.5 * (c_lo + c_hi)
        return BranchEvent("pitchfork", loc, abs(c_hi - c_lo),
                           {"sigma0_left": a, "sigma0_right": b}, (i, i + 1))
    return None


def _symmetric_count(wave: WaveProfile, family: str) -> int:
    """Strict negative count of ``L`` on the symmetry class holding ``1`` but not ``ψ'``."""
    kind = "even-pi2" if family == "odd-b0" else "even"
    return count_indices(subspace_restriction(wave, kind), tol=0.0).n


def detect_sigma0_divergence(branch: Branch, refine: bool = True, width: float = 1e-4
                             ) -> BranchEvent | None:
    """Locate a change of ``n(L)`` away from folds, where σ₀ passes through infinity."""
    smp = branch.samples
    skip = _fold_pairs(branch)
    # a doubled kernel means an eigenvalue sits inside the zero tolerance, so
    # counts are compared only between consecutive samples with a simple kernel
    simple = [j for j, x in enumerate(smp) if x.report is not None and x.report.z_L == 1]
    for i, j in zip(simple, simple[1:]):
        lo, hi = smp[i], smp[j]
        if lo.report.n_L == hi.report.n_L or any(k in skip for k in range(i, j)):
            continue
        c_lo, c_hi = lo.c, hi.c
        if refine:
            def count_at(c):
                return _symmetric_count(_resolve(branch, c, _nearest(branch, c)), branch.family)
            c_lo, c_hi = _bisect(c_lo, c_hi, _symmetric_count(lo.wave, branch.family),
                                 count_at, width)
        loc = 0.5 * (c_lo + c_hi)
        w = _resolve(branch, loc, _nearest(branch, loc)) if refine else None
        rep = spectrum(w, check_kernel=False) if w is not None else None
        witness = {
            "sigma0_left": lo.report.sigma0, "sigma0_right": hi.report.sigma0,
            "n_L_left": lo.report.n_L, "n_L_right": hi.report.n_L,
            "z_L_at_event": None if rep is None else rep.z_L,
            "one_in_range_at_event": None if rep is None else rep.one_in_range,
            "range_projection_at_event": None if rep is None else rep.range_projection,
        }
        return BranchEvent("sigma0-divergence", loc, abs(c_hi - c_lo), witness, (i, j))
    return None


def _golden(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while abs(hi - lo) > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def _fold_pairs(branch: Branch) -> set:
    """Sample pairs adjacent to a sign change of ``dc/ds``."""
    smp = branch.samples
    near = set()
    for i in range(1, len(smp) - 1):
        if smp[i].dc_ds * smp[i + 1].dc_ds < 0:
            near.update(range(max(i - 2, 0), i + 3))
    return near


def detect_fold(branch: Branch, refine: bool = True, width: float = 1e-7) -> BranchEvent | None:
    """Locate a sign change of ``dc/ds``.

    The turn is refined by golden-section extremization of ``c`` as a
    function of ``ω = c - 6a²``, which stays monotone through the fold;
    ``s₀`` and ``z(L)`` are reported at the extremum.
    """
    smp = branch.samples
    for i in range(1, len(smp) - 1):
        if smp[i].dc_ds == 0.0 or smp[i + 1].dc_ds == 0.0:
            continue
        if smp[i].dc_ds * smp[i + 1].dc_ds >= 0:
            continue
        j0, j1 = max(i - 1, 0), min(i + 2, len(smp) - 1)
        cs = [s.c for s in smp[j0:j1 + 1]]
        loc = min(cs) if smp[i].dc_ds < 0 else max(cs)
        bracket = max(cs) - min(cs)
        witness = {"dc_ds_left": smp[i].dc_ds, "dc_ds_right": smp[i + 1].dc_ds}
        if refine and branch.family == "even-b0":
            prob = _FamilyProblem(branch.family, branch.alpha, branch.n_modes)
            opts = NewtonOptions(normalize=False)
            window = smp[j0:j1 + 1]
            sign = 1.0 if smp[i].dc_ds < 0 else -1.0

            def solve(om):
                seed = min(window, key=lambda s: abs(s.zm.omega - om))
                return prob.solve_fixed_omega(coords(seed.wave.field), seed.c, om, opts)

            om = _golden(lambda w: sign * solve(w)[1], smp[j0].zm.omega, smp[j1].zm.omega, width)
            r, c = solve(om)
            wave = prob.wave(r, c)
            rep = spectrum(wave, check_kernel=False)
            loc = float(c)
            # c is quadratic near the turn, so the bracket in c is tiny
            bracket = max(abs(solve(om + width)[1] - c), abs(solve(om - width)[1] - c))
            witness.update({"omega": om, "z_L": rep.z_L, "n_L": rep.n_L,
                            "lowest_eigenvalues": [float(v) for v in rep.eigenvalues[:3]],
                            "tol_zero": rep.tol_zero})
            try:
                witness["s0"] = s0_invertibility(decompose(wave)).s0
            except FracwaveError as exc:
                witness["s0"] = None
                witness["s0_error"] = str(exc)
        return BranchEvent("fold", float(loc), float(bracket), witness, (i, i + 1))
    return None


def detect_stability_change(branch: Branch, refine: bool = True, width: float = 1e-4
                            ) -> list[BranchEvent]:
    """Locate verdict changes between consecutive samples.

    Even branches are bisected in ``ω`` (they may turn in ``c``); the others
    in ``c`` with re-solves seeded from the nearest sample.
    """
    events = []
    smp = branch.samples
    for i in range(len(smp) - 1):
        lo, hi = smp[i], smp[i + 1]
        if lo.verdict is None or hi.verdict is None or lo.verdict.verdict == hi.verdict.verdict:
            continue
        c_lo, c_hi = lo.c, hi.c
        witness = {"left": lo.verdict.verdict, "right": hi.verdict.verdict}
        if refine and branch.family == "even-b0":
            prob = _FamilyProblem(branch.family, branch.alpha, branch.n_modes)
            opts = NewtonOptions(normalize=False)

            def solve(om):
                seed = lo if abs(lo.zm.omega - om) < abs(hi.zm.omega - om) else hi
                return prob.solve_fixed_omega(coords(seed.wave.field), seed.c, om, opts)

            def verdict_at(om):
                r, c = solve(om)
                return analyze_wave(prob.wave(r, c)).verdict.verdict

            om_lo, om_hi = _bisect(lo.zm.omega, hi.zm.omega, lo.verdict.verdict, verdict_at,
                                   1e-3 * width)
            c_lo, c_hi = solve(om_lo)[1], solve(om_hi)[1]
            witness["omega"] = 0.5 * (om_lo + om_hi)
        elif refine and lo.dc_ds * hi.dc_ds > 0:
            def verdict_at(c):
                return analyze_wave(_resolve(branch, c, _nearest(branch, c))).verdict.verdict
            c_lo, c_hi = _bisect(c_lo, c_hi, lo.verdict.verdict, verdict_at, width)
        events.append(BranchEvent("stability-change", float(0.5 * (c_lo + c_hi)),
                                  float(abs(c_hi - c_lo)), witness, (i, i + 1)))
    return events


def find_events(branch: Branch) -> list[BranchEvent]:
    """Run every detector and store the results on the branch."""
    events = []
    for det in (detect_fold, detect_pitchfork, detect_sigma0_divergence):
        try:
            ev = det(branch)
        except FracwaveError as exc:
            ev = None
            branch.diagnostics += f" {det.__name__} failed: {exc};"
        if ev is not None:
            events.append(ev)
    try:
        events.extend(detect_stability_change(branch))
    except FracwaveError as exc:
        branch.diagnostics += f" detect_stability_change failed: {exc};"
    branch.events = sorted(events, key=lambda e: e.location)
    return branch.events


# branch switching ----------------------------------------------------------

def switch_seed(odd_wave: WaveProfile, sign: int, eps_rel: float = 1e-3) -> SpectralField:
    """Quarter-period translate plus ``±ε cos 2x`` with ``ε = eps_rel·‖ψ‖∞``."""
    base = even_frame(odd_wave).field
    eps = math.copysign(eps_rel * odd_wave.field.sup_norm(), sign)
    return base + SpectralField.from_function(lambda x: eps * np.cos(2.0 * x), odd_wave.n_modes)


def deflated_newton(seed: SpectralField, known: SpectralField, alpha: float, c: float,
                    max_iter: int = 100, tol: float = 1e-10) -> np.ndarray:
    """Newton on the deflated zero-mean system ``(1 + 1/‖r - r*‖²) F(r) = 0``.

    ``r*`` are the coordinates of ``known``; the deflation factor blows up
    there, so iterates cannot converge back onto it. Returns the coordinates
    of the new root (the factor does not change the roots of ``F``).
    """
    m = seed.n_modes // 2 - 1
    idx = subspace_indices(m, "even-zero-mean")
    prob = _Cubic(alpha, m)
    r = coords(seed)
    r[0] = 0.0
    z = r[idx]
    z_star = coords(known)[idx]
    for _ in range(max_iter):
        r = np.zeros(2 * m + 1)
        r[idx] = z
        f = prob.residual(r, c, 0.0)[idx]
        if math.sqrt(TWO_PI) * float(np.linalg.norm(f)) < tol:
            return r
        d = z - z_star
        d2 = float(d @ d)
        if d2 == 0.0:
            raise NoConvergence("deflated iterate hit the deflated root")
        mult = 1.0 + 1.0 / d2
        grad = -2.0 * d / d2 ** 2
        jac = mult * prob.jacobian(r, c)[np.ix_(idx, idx)] + np.outer(f, grad)
        step = np.linalg.lstsq(jac, mult * f, rcond=1e-13)[0]
        z = z - step
        if not np.all(np.isfinite(z)):
            break
    raise NoConvergence("deflated Newton did not converge")


def branch_switch(odd_wave: WaveProfile, sign: int = 1,
                  eps_schedule: tuple = (1e-3, 1e-2, 3e-2, 0.1, 0.3)) -> WaveProfile:
    """Move from an odd ``b = 0`` wave past the pitchfork onto the ``b ≠ 0`` family.

    The translated wave is perturbed by ``±ε cos 2x``, which keeps evenness
    about 0 but breaks oddness about ``π/2``, and the zero-mean problem is
    solved with ``b`` free. Plain Newton from ``ε = 1e-3‖ψ‖∞`` is tried
    first. Its Jacobian is regular at the symmetric wave for ``c ≠ c*``, so it
    often converges straight back; the same seeds are then passed to deflated
    Newton with the symmetric wave deflated, for increasing ``ε`` along
    ``eps_schedule``. The first root with ``b`` of the requested sign wins.

    Raises
    ------
    BelowThreshold
        If no seed reaches a root with ``|b| >= 1e-8`` (expected below the
        pitchfork).
    """
    if odd_wave.family != "odd-b0":
        raise InvalidParameter("branch switching starts from an odd b = 0 wave")
    opts = NewtonOptions(symmetry="even-about-0", normalize=False)
    known = even_frame(odd_wave).field
    attempts = [(eps_schedule[0], False)] + [(eps, True) for eps in eps_schedule]
    last = None
    for eps, deflate in attempts:
        seed = switch_seed(odd_wave, sign, eps)
        try:
            if deflate:
                r = deflated_newton(seed, known, odd_wave.alpha, odd_wave.c)
                seed = field_from_coords(r, odd_wave.n_modes)
            w = newton_solve(seed, odd_wave.alpha, odd_wave.c, None, opts)
        except NoConvergence as exc:
            last = str(exc)
            continue
        if abs(w.b) >= 1e-8 and w.b * sign > 0:
            info = dict(w.normalization)
            info.update(switch_eps=eps, deflated=deflate)
            return replace(w, family="asymmetric-bnz", normalization=info)
        last = f"converged to b = {w.b:.3e}"
    raise BelowThreshold(f"no b != 0 solution at c = {odd_wave.c}: {last}")


def trace_bnz_branch(odd_wave: WaveProfile, c_end: float, sign: int = 1,
                     opts: ContinuationOptions | None = None) -> tuple[Branch, Branch]:
    """Switch onto the ``b ≠ 0`` family and continue it toward ``c_end`` and back toward ``c*``."""
    opts = opts or ContinuationOptions()
    start = branch_switch(odd_wave, sign)
    up = continue_in_c(start, c_end, opts)
    down_opts = replace(opts, on_stuck="stop")
    down = continue_in_c(start, -1.0, down_opts, stop_when=lambda w: abs(w.b) < 1e-8)
    return up, down


# parameter-map checks ----------------------------------------------------------

@dataclass(frozen=True)
class JacobianReport:
    c: float
    da_db: float
    sigma0: float | None
    sigma0_from_da_db: float
    sigma0_agrees: bool | None
    det_map: float
    s0_linops: float | None
    det_agrees: bool | None


def jacobian_checks(wave: WaveProfile, h: float = 1e-5, rel_tol: float = 0.02) -> JacobianReport:
    """Finite-difference checks of the ``(c, b) ↔ (ω, a)`` parameter maps.

    Odd waves are first moved to the frame where they are even about 0.

    * ``∂a/∂b`` at fixed ``c`` by re-solving with ``b ± h``; compared with
      ``σ₀ = -2π ∂a/∂b``.
    * Determinant of ``(ω, a) ↦ (c, b)`` from re-solves of the ``φ``-problem,
      which equals ``-s₀``; compared with ``s₀ = 2π/σ₀`` from the linear
      operator.

    Raises
    ------
    AtBifurcation
        If a neighbouring solve fails.
    """
    if wave.family == "odd-b0":
        wave = even_frame(wave)
    opts = NewtonOptions(symmetry="even-about-0", normalize=False)
    try:
        wp = newton_solve(wave.field, wave.alpha, wave.c, wave.b + h, opts)
        wm = newton_solve(wave.field, wave.alpha, wave.c, wave.b - h, opts)
    except NoConvergence as exc:
        raise AtBifurcation(f"neighbouring (c, b) solve failed: {exc}") from exc
    da_db = (wp.mean - wm.mean) / (2.0 * h)
    rep = spectrum(wave, check_kernel=False)
    sig = rep.sigma0
    sig_fd = -TWO_PI * da_db
    zm = decompose(wave)
    hw = 1e-5 * max(1.0, abs(zm.omega))
    popts = NewtonOptions(symmetry="even")
    try:
        sols = {
            key: solve_phi(zm.omega + dw, zm.a + da, wave.alpha, zm.phi, popts)
            for key, (dw, da) in {"w+": (hw, 0), "w-": (-hw, 0), "a+": (0, hw), "a-": (0, -hw)}.items()
        }
    except (NoConvergence, FracwaveError) as exc:
        raise AtBifurcation(f"neighbouring (omega, a) solve failed: {exc}") from exc
    dc_dw = (sols["w+"].c - sols["w-"].c) / (2 * hw)
    dc_da = (sols["a+"].c - sols["a-"].c) / (2 * hw)
    db_dw = (sols["w+"].b - sols["w-"].b) / (2 * hw)
    db_da = (sols["a+"].b - sols["a-"].b) / (2 * hw)
    det = dc_dw * db_da - dc_da * db_dw
    s0_lin = TWO_PI / sig if sig not in (None, 0.0) else None

    def close(x, y):
        if x is None or y is None:
            return None
        return abs(x - y) <= rel_tol * max(abs(x), abs(y))

    return JacobianReport(wave.c, da_db, sig, sig_fd, close(sig, sig_fd), det, s0_lin,
                          close(-det, s0_lin))


# waves at prescribed speed ------------------------------------------------------

def wave_at_c(family: str, alpha: float, c: float, n_modes: int = 256,
              sign: int = 1, opts: ContinuationOptions | None = None,
              past_fold: bool = False) -> WaveProfile:
    """Converged wave of ``family`` at speed ``c``, reached by continuation.

    ``odd`` waves are continued from the Stokes end at ``c = -1``; ``even``
    waves from the constant branch at ``c = 1/2`` (the constant ``√(c/2)`` is
    returned on the side of ``1/2`` without a nonconstant even wave). For
    ``α < α₀`` the even branch turns at a fold, so speeds just above the fold
    are met twice: by default the first solution met from the Stokes end is
    returned, and ``past_fold=True`` selects the one beyond the turn.
    ``bnz`` waves are obtained by branch switching at ``c`` from the odd
    wave, with the sign of ``b`` set by ``sign``.

    Raises
    ------
    ParameterOutOfRange
        If the family has no wave at ``c`` (or none beyond a fold).
    """
    from .errors import ParameterOutOfRange
    from .stokes import alpha_critical, gamma2

    opts = opts or ContinuationOptions(analyze=False, detect_events=False)
    opts = replace(opts, analyze=False, detect_events=False, on_stuck="raise")
    c = float(c)
    if family in ("odd", "odd-b0", "bnz", "asymmetric-bnz"):
        if c <= -1.0:
            raise ParameterOutOfRange("odd waves exist for c > -1 only")
        start = stokes_start("odd-b0", alpha, n_modes, 0.05)
        if c <= start.c:
            seed, c_seed = odd_stokes(math.sqrt((c + 1.0) / 1.5), alpha, n_modes)
            odd = newton_solve(seed, alpha, c, 0.0, NewtonOptions(symmetry="odd"))
        else:
            br = continue_in_c(start, c, opts)
            odd = _land(br, c)
        if family in ("odd", "odd-b0"):
            return odd
        return branch_switch(odd, sign)
    if family not in ("even", "even-b0"):
        raise InvalidParameter(f"unknown family {family!r}")
    supercritical = alpha > alpha_critical()
    if (supercritical and c <= 0.5) or c <= 0.0:
        if c <= 0.0:
            raise ParameterOutOfRange("even waves need c > 0")
        psi = SpectralField.constant(math.sqrt(c / 2.0), n_modes)
        return WaveProfile(psi, alpha, c, 0.0, "constant", residual_norm(psi, alpha, c, 0.0))
    first = stokes_start("even-b0", alpha, n_modes, 0.05)
    if past_fold:
        return _beyond_fold(first, c, opts)
    if (c - 0.5) * (first.c - c) >= 0.0:
        # between the bifurcation point and the first Stokes start
        seed, _ = even_stokes(math.sqrt((2.0 * c - 1.0) / gamma2(alpha)), alpha, n_modes)
        return newton_solve(seed, alpha, c, 0.0, NewtonOptions(symmetry="even"))
    second = stokes_start("even-b0", alpha, n_modes, 0.06)
    ceiling = max(c, 0.5) + 0.5
    br = continue_in_c(first, c, opts, second=second, stop_when=lambda w: w.c > ceiling)
    if br.status == "stopped":
        raise ParameterOutOfRange(f"even branch does not reach c = {c} (it turns before)")
    return _land(br, c)


def _beyond_fold(first: WaveProfile, c: float, opts: ContinuationOptions) -> WaveProfile:
    """Even wave at ``c`` on the part of the branch after its turning point."""
    from .errors import ParameterOutOfRange

    second = stokes_start("even-b0", first.alpha, first.n_modes, 0.06)
    # continue toward c_end beyond the target; stop once past the fold and c
    state = {"turned": False, "prev": None}

    def done(w: WaveProfile) -> bool:
        prev, state["prev"] = state["prev"], w.c
        state["turned"] = state["turned"] or (prev is not None and w.c > prev)
        return state["turned"] and w.c > c

    br = continue_in_c(first, c + 1.0, opts, second=second, stop_when=done)
    smp = br.samples
    for i in range(1, len(smp)):
        if smp[i - 1].dc_ds * smp[i].dc_ds < 0.0:
            turn = i
            break
    else:
        raise ParameterOutOfRange(f"no fold on the even branch before c = {c}")
    for j in range(turn, len(smp)):
        if (smp[j - 1].c - c) * (smp[j].c - c) <= 0.0:
            return _land(Branch(br.family, br.alpha, br.n_modes, smp[: j + 1]), c)
    raise ParameterOutOfRange(f"even branch beyond the fold does not reach c = {c}")


def _land(branch: Branch, c: float) -> WaveProfile:
    """Newton solve at exactly ``c`` from the last two samples (secant seed)."""
    a, b = branch.samples[-2], branch.samples[-1]
    t = (c - a.c) / (b.c - a.c) if b.c != a.c else 1.0
    seed = a.wave.field + (b.wave.field - a.wave.field) * t
    prob = _FamilyProblem(branch.family, branch.alpha, branch.n_modes)
    r = prob.solve_at(coords(seed), c, NewtonOptions(normalize=False))
    w = prob.wave(r, c)
    return newton_solve(w.field, w.alpha, c, 0.0,
                        NewtonOptions(symmetry=prob.kind), family=branch.family)


def merge_branches(down: Branch, up: Branch) -> Branch:
    """Join two runs started from the same wave in opposite directions.

    ``down`` is reversed (arclength and ``dc/ds`` change sign) and its copy
    of the shared start is dropped. Events are not recomputed.
    """
    if down.family != up.family or down.alpha != up.alpha:
        raise InvalidParameter("branches belong to different families")
    rev = []
    for smp in reversed(down.samples[1:]):
        rev.append(replace(smp, s=-smp.s, dc_ds=-smp.dc_ds))
    merged = Branch(up.family, up.alpha, up.n_modes, rev + list(up.samples))
    merged.status = up.status if down.status in ("complete", "stopped") else down.status
    merged.diagnostics = (down.diagnostics + " " + up.diagnostics).strip()
    return merged
