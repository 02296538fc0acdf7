"""Newton solvers for the stationary wave equation and its zero-mean forms.

All unknowns live in the real orthonormal Fourier coordinates of
:mod:`fracwave.spectral`; symmetry restrictions simply select a subset of
coordinates, which removes the translation kernel and keeps the Jacobian
invertible away from bifurcations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import (
    AtBifurcation,
    DiagnosticsFailure,
    InvalidParameter,
    NoConvergence,
    ParameterOutOfRange,
    SingularJacobian,
)
from .spectral import (
    TWO_PI,
    SpectralField,
    coords,
    coords_from_half,
    field_from_coords,
    grid_to_half,
    half_from_coords,
    half_to_grid,
    operator_matrix,
    pad_size,
    parity_check,
    subspace_indices,
    symbol_diagonal,
)
from .wave import WaveProfile, ZeroMeanWave, decompose, recompose, residual_norm

__all__ = [
    "NewtonOptions",
    "WaveProfile",
    "ZeroMeanWave",
    "decompose",
    "recompose",
    "newton_solve",
    "solve_phi",
    "derivative_wrt_c",
    "slope_wrt_c",
    "check_slope",
    "phi_parameter_derivatives",
    "dF_domega_partial",
]

_SYMMETRY_NAMES = {
    "auto": "auto",
    "none": "full",
    "full": "full",
    "odd": "odd",
    "odd-about-0": "odd",
    "even": "even",
    "even-about-0": "even",
}


@dataclass(frozen=True)
class NewtonOptions:
    """Settings shared by the Newton solvers.

    ``symmetry`` is one of ``auto``, ``none``, ``even-about-0`` or
    ``odd-about-0`` (``even``/``odd`` are accepted as aliases). ``auto``
    reads the parity of the seed.
    """

    max_iter: int = 50
    tol: float = 1e-10
    symmetry: str = "auto"
    max_cond: float = 1e12
    polish: bool = True
    normalize: bool = True

    def __post_init__(self):
        if self.symmetry not in _SYMMETRY_NAMES:
            raise InvalidParameter(f"unknown symmetry {self.symmetry!r}")
        if self.max_iter < 0 or not self.tol > 0:
            raise InvalidParameter("max_iter must be >= 0 and tol > 0")


DEFAULT_OPTIONS = NewtonOptions()


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.5 or alpha > 2.0:
        raise InvalidParameter(f"alpha must exceed 0.5 and be at most 2, got {alpha!r}")
    return alpha


class _Cubic:
    """Residual and Jacobian of ``D^α u + s u + b - 2(u³ + 3a u²)`` in real coordinates.

    With ``a = 0`` this is the stationary operator with ``s = c``; with
    ``a ≠ 0`` and zero-mean unknowns it is the ``φ``-equation with ``s = ω``.
    """

    def __init__(self, alpha: float, m: int):
        self.alpha = alpha
        self.m = m
        self.n_pad = pad_size(m)
        self.diag = symbol_diagonal(alpha, m)

    def values(self, r: np.ndarray) -> np.ndarray:
        return half_to_grid(half_from_coords(r), self.n_pad)

    def residual(self, r: np.ndarray, shift: float, b: float, a: float = 0.0) -> np.ndarray:
        g = self.values(r)
        nonlinear = coords_from_half(grid_to_half(g ** 3 + 3.0 * a * g * g, self.m))
        res = self.diag * r + shift * r - 2.0 * nonlinear
        res[0] += b
        return res

    def jacobian(self, r: np.ndarray, shift: float, a: float = 0.0) -> np.ndarray:
        g = self.values(r)
        pot = grid_to_half(6.0 * g * g + 12.0 * a * g, 2 * self.m)
        return operator_matrix(pot, self.alpha, shift, self.m)

    def cube_mean(self, r: np.ndarray) -> float:
        return float(np.mean(self.values(r) ** 3))


def _newton(
    fun: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    r0: np.ndarray,
    idx: np.ndarray,
    opts: NewtonOptions,
    use_lstsq: bool = False,
) -> tuple[np.ndarray, list[float]]:
    """Plain Newton iteration on the coordinates ``idx``; other coordinates stay zero."""
    r = np.zeros_like(r0)
    r[idx] = r0[idx]
    history: list[float] = []
    polished = not opts.polish
    for _ in range(opts.max_iter + 1):
        res = fun(r)[idx]
        norm = math.sqrt(TWO_PI) * float(np.linalg.norm(res))
        history.append(norm)
        if not math.isfinite(norm):
            raise NoConvergence("Newton iterates diverged", last_residual=norm)
        if norm < opts.tol:
            # an exact seed needs no step; otherwise take one polishing step
            if polished or len(history) == 1:
                return r, history
            polished = True
        if len(history) > opts.max_iter:
            break
        j = jac(r)[np.ix_(idx, idx)]
        if use_lstsq:
            step = np.linalg.lstsq(j, res, rcond=1e-13)[0]
        else:
            cond = np.linalg.cond(j)
            if not cond <= opts.max_cond:
                raise SingularJacobian(
                    f"Jacobian condition number {cond:.3e} exceeds {opts.max_cond:.1e}",
                    last_residual=norm)
            step = np.linalg.solve(j, res)
        trial = r.copy()
        trial[idx] -= step
        if polished and norm < opts.tol:
            # polishing step: keep it only if it does not hurt
            new = math.sqrt(TWO_PI) * float(np.linalg.norm(fun(trial)[idx]))
            if new <= norm:
                r = trial
                history.append(new)
            return r, history
        r = trial
    raise NoConvergence(
        f"no convergence after {opts.max_iter} Newton steps (residual {history[-1]:.3e})",
        last_residual=history[-1])


def _resolve_symmetry(seed: SpectralField, symmetry: str, zero_mean: bool) -> str:
    kind = _SYMMETRY_NAMES[symmetry]
    if kind == "auto":
        par = parity_check(seed, 0.0, tol=1e-8)
        kind = {"odd": "odd", "even": "even"}.get(par, "full")
    if zero_mean:
        kind = {"even": "even-zero-mean", "full": "zero-mean"}.get(kind, kind)
    return kind


def _classify_family(psi: SpectralField, b: float, kind: str) -> str:
    spread = float(np.ptp(psi.values))
    if spread <= 1e-12 * max(1.0, psi.sup_norm()):
        return "constant"
    if abs(b) > 1e-10:
        return "asymmetric-bnz"
    if kind == "odd" or parity_check(psi, 0.0, tol=1e-8) == "odd":
        return "odd-b0"
    return "even-b0"


def _normalize(psi: SpectralField, family: str) -> tuple[SpectralField, dict]:
    if family == "odd-b0":
        if psi.evaluate(math.pi / 2) < 0.0:
            return -psi, {"shift": 0.0, "sign": -1}
        return psi, {"shift": 0.0, "sign": 1}
    if family == "constant":
        return psi, {"shift": 0.0, "sign": 1}
    if psi.evaluate(0.0) < psi.evaluate(math.pi):
        return psi.translate(math.pi), {"shift": math.pi, "sign": 1}
    return psi, {"shift": 0.0, "sign": 1}


def newton_solve(
    seed: SpectralField,
    alpha: float,
    c: float,
    b: float | None = 0.0,
    opts: NewtonOptions | None = None,
    family: str | None = None,
) -> WaveProfile:
    """Solve ``D^α ψ + c ψ + b = 2ψ³`` by Newton's method from ``seed``.

    Parameters
    ----------
    seed : SpectralField
        Initial guess; its grid size fixes the resolution.
    alpha, c : float
        Fractional order in ``(1/2, 2]`` and wave speed.
    b : float or None
        Integration constant. ``None`` solves the zero-mean problem
        ``D^α ψ + c ψ = 2Π₀ψ³`` and recovers ``b = (1/π)∫ψ³`` afterwards;
        this is how the ``b ≠ 0`` family bifurcating from odd waves is traced.
    opts : NewtonOptions, optional
        Iteration settings and symmetry restriction.
    family : str, optional
        Force the family tag instead of inferring it.

    Returns
    -------
    WaveProfile
        Converged wave in its normalized frame.

    Raises
    ------
    NoConvergence
        If the residual does not drop below ``opts.tol``.
    SingularJacobian
        If the restricted Jacobian has condition number above ``opts.max_cond``.
    """
    alpha = _check_alpha(alpha)
    opts = opts or DEFAULT_OPTIONS
    if not isinstance(seed, SpectralField):
        raise InvalidParameter("seed must be a SpectralField")
    c = float(c)
    if not math.isfinite(c) or (b is not None and not math.isfinite(float(b))):
        raise InvalidParameter("c and b must be finite")
    n = seed.n_modes
    m = n // 2 - 1
    zero_mean = b is None
    kind = _resolve_symmetry(seed, opts.symmetry, zero_mean)
    idx = subspace_indices(m, kind)
    prob = _Cubic(alpha, m)
    b_eff = 0.0 if zero_mean else float(b)
    r0 = coords(seed)
    if zero_mean:
        r0[0] = 0.0
    r, history = _newton(
        lambda r: prob.residual(r, c, b_eff),
        lambda r: prob.jacobian(r, c),
        r0, idx, opts, use_lstsq=kind in ("full", "zero-mean"),
    )
    if zero_mean:
        b_eff = 2.0 * prob.cube_mean(r)
    psi = field_from_coords(r, n)
    fam = family or _classify_family(psi, b_eff, kind)
    norm_info = {"shift": 0.0, "sign": 1}
    if opts.normalize:
        psi, norm_info = _normalize(psi, fam)
    norm_info["symmetry"] = kind
    return WaveProfile(psi, alpha, c, b_eff, fam, residual_norm(psi, alpha, c, b_eff),
                       norm_info, tuple(history))


def solve_phi(
    omega: float,
    a: float,
    alpha: float,
    seed: SpectralField,
    opts: NewtonOptions | None = None,
) -> ZeroMeanWave:
    """Solve ``D^α φ + ω φ = 2Π₀(φ³ + 3aφ²)`` for zero-mean even ``φ``.

    ``β = (1/π)∫(φ³ + 3aφ²)`` is evaluated on the converged profile, so the
    pair ``(φ, a)`` describes the wave ``ψ = a + φ`` with ``c = ω + 6a²`` and
    ``b = β - ωa - 4a³``.

    Raises
    ------
    ParameterOutOfRange
        If ``omega <= -1``.
    """
    alpha = _check_alpha(alpha)
    omega, a = float(omega), float(a)
    if not math.isfinite(omega) or omega <= -1.0:
        raise ParameterOutOfRange(f"omega must exceed -1, got {omega!r}")
    if not math.isfinite(a):
        raise InvalidParameter("a must be finite")
    opts = opts or DEFAULT_OPTIONS
    n = seed.n_modes
    m = n // 2 - 1
    sym = _SYMMETRY_NAMES[opts.symmetry]
    kind = "zero-mean" if sym == "full" else "even-zero-mean"
    idx = subspace_indices(m, kind)
    prob = _Cubic(alpha, m)
    r, _ = _newton(
        lambda r: prob.residual(r, omega, 0.0, a),
        lambda r: prob.jacobian(r, omega, a),
        coords(seed), idx, opts, use_lstsq=kind == "zero-mean",
    )
    phi = field_from_coords(r, n)
    g = prob.values(r)
    beta = 2.0 * float(np.mean(g ** 3 + 3.0 * a * g * g))
    return ZeroMeanWave(phi, a, omega, beta, alpha)


def _restricted_operator(psi: WaveProfile, kind: str) -> tuple[np.ndarray, np.ndarray]:
    m = psi.n_modes // 2 - 1
    prob = _Cubic(psi.alpha, m)
    t = prob.jacobian(coords(psi.field), psi.c)
    idx = subspace_indices(m, kind)
    return t[np.ix_(idx, idx)], idx


def derivative_wrt_c(psi: WaveProfile, max_cond: float = 1e12) -> SpectralField:
    """``∂_c ψ`` along the family through ``psi``.

    Odd waves with ``b = 0`` satisfy ``L ∂_c ψ = -ψ`` in the odd subspace.
    Zero-mean waves (the ``b ≠ 0`` family with mean zero) satisfy
    ``Π₀ L ∂_c ψ = -ψ`` in the zero-mean even subspace.

    Raises
    ------
    AtBifurcation
        If the restricted operator is numerically singular.
    """
    if psi.family == "odd-b0":
        kind = "odd"
    elif abs(psi.field.mean()) < 1e-10:
        kind = "even-zero-mean" if parity_check(psi.field, 0.0) == "even" else "zero-mean"
    else:
        raise InvalidParameter("derivative_wrt_c needs an odd wave or a zero-mean wave")
    t, idx = _restricted_operator(psi, kind)
    cond = np.linalg.cond(t)
    if not cond <= max_cond:
        raise AtBifurcation(f"restricted operator singular (condition {cond:.3e})")
    rhs = -coords(psi.field)[idx]
    u = np.zeros(2 * (psi.n_modes // 2 - 1) + 1)
    u[idx] = np.linalg.solve(t, rhs)
    return field_from_coords(u, psi.n_modes)


def slope_wrt_c(psi: WaveProfile) -> float:
    """``d/dc ‖ψ‖² = 2⟨ψ, ∂_c ψ⟩``."""
    return 2.0 * psi.field.inner(derivative_wrt_c(psi))


def check_slope(psi: WaveProfile, h: float = 1e-5, tol: float = 1e-4) -> float:
    """Cross-check :func:`slope_wrt_c` against a centered re-solve difference.

    Returns the slope; raises ``DiagnosticsFailure`` on a mismatch above
    ``tol·max(1, |slope|)``.
    """
    slope = slope_wrt_c(psi)
    b = None if psi.family == "asymmetric-bnz" else 0.0
    opts = NewtonOptions(normalize=False)
    try:
        plus = newton_solve(psi.field, psi.alpha, psi.c + h, b, opts, family=psi.family)
        minus = newton_solve(psi.field, psi.alpha, psi.c - h, b, opts, family=psi.family)
    except NoConvergence as exc:
        raise AtBifurcation(f"finite-difference re-solve failed: {exc}") from exc
    fd = (plus.momentum() - minus.momentum()) / (2.0 * h)
    if abs(fd - slope) > tol * max(1.0, abs(slope)):
        raise DiagnosticsFailure(f"slope mismatch: linear solve {slope:.8g}, difference {fd:.8g}")
    return slope


def fd_step(omega: float) -> float:
    return 1e-5 * max(1.0, abs(omega))


@dataclass(frozen=True)
class PhiDerivatives:
    """Centered differences of the two-parameter family ``φ(ω, a)``."""

    d_omega_phi: SpectralField
    d_a_phi: SpectralField
    d_omega_beta: float
    d_a_beta: float
    d_omega_norm: float
    h: float


def phi_parameter_derivatives(zm: ZeroMeanWave, h: float | None = None,
                              opts: NewtonOptions | None = None) -> PhiDerivatives:
    """Differentiate ``φ``, ``β`` and ``‖φ‖²`` in ``ω`` and ``a`` by centered re-solves.

    Raises
    ------
    AtBifurcation
        If any of the four neighbouring solves fails.
    """
    h = fd_step(zm.omega) if h is None else float(h)
    opts = replace(opts or DEFAULT_OPTIONS, symmetry="even")
    try:
        wp = solve_phi(zm.omega + h, zm.a, zm.alpha, zm.phi, opts)
        wm = solve_phi(zm.omega - h, zm.a, zm.alpha, zm.phi, opts)
        ap = solve_phi(zm.omega, zm.a + h, zm.alpha, zm.phi, opts)
        am = solve_phi(zm.omega, zm.a - h, zm.alpha, zm.phi, opts)
    except (NoConvergence, ParameterOutOfRange) as exc:
        raise AtBifurcation(f"neighbouring solve failed: {exc}") from exc
    inv = 1.0 / (2.0 * h)
    return PhiDerivatives(
        d_omega_phi=(wp.phi - wm.phi) * inv,
        d_a_phi=(ap.phi - am.phi) * inv,
        d_omega_beta=(wp.beta - wm.beta) * inv,
        d_a_beta=(ap.beta - am.beta) * inv,
        d_omega_norm=(wp.phi_norm_sq() - wm.phi_norm_sq()) * inv,
        h=h,
    )


def dF_domega_partial(zm: ZeroMeanWave, h: float | None = None,
                      opts: NewtonOptions | None = None) -> float:
    """``∂‖φ‖²/∂ω`` at fixed mean ``a`` by centered differences of :func:`solve_phi`."""
    h = fd_step(zm.omega) if h is None else float(h)
    opts = replace(opts or DEFAULT_OPTIONS, symmetry="even")
    try:
        wp = solve_phi(zm.omega + h, zm.a, zm.alpha, zm.phi, opts)
        wm = solve_phi(zm.omega - h, zm.a, zm.alpha, zm.phi, opts)
    except (NoConvergence, ParameterOutOfRange) as exc:
        raise AtBifurcation(f"neighbouring solve failed: {exc}") from exc
    return (wp.phi_norm_sq() - wm.phi_norm_sq()) / (2.0 * h)


def solve_even_at_amplitude(alpha: float, A: float, n_modes: int = 64,
                            opts: NewtonOptions | None = None) -> WaveProfile:
    """Even ``b = 0`` wave whose ``cos x`` coefficient equals ``A``, with ``c`` unknown.

    Bordered Newton on ``(ψ, c)`` seeded by the even Stokes expansion. Unlike
    a solve at prescribed ``c`` it stays well posed at the bifurcation from
    the constant branch, so the sign of ``c - 1/2`` at small ``A`` gives the
    direction of the bifurcation.

    Raises
    ------
    NoConvergence
        If the bordered residual does not drop below ``opts.tol``.
    """
    from .stokes import even_stokes

    alpha = _check_alpha(alpha)
    if not A > 0.0:
        raise InvalidParameter("amplitude must be positive")
    opts = opts or DEFAULT_OPTIONS
    m = n_modes // 2 - 1
    seed, c = even_stokes(A, alpha, n_modes)
    idx = subspace_indices(m, "even")
    prob = _Cubic(alpha, m)
    r = coords(seed)
    target = A / math.sqrt(2.0)      # coordinate of A cos x
    r[1] = target
    z = np.append(r[idx], c)
    norm = math.inf
    for _ in range(opts.max_iter):
        r = np.zeros(2 * m + 1)
        r[idx] = z[:-1]
        res = prob.residual(r, z[-1], 0.0)[idx]
        norm = math.sqrt(TWO_PI) * float(np.linalg.norm(res))
        if norm < opts.tol:
            break
        j = np.zeros((idx.size + 1, idx.size + 1))
        j[:-1, :-1] = prob.jacobian(r, z[-1])[np.ix_(idx, idx)]
        j[:-1, -1] = r[idx]
        j[-1, 1] = 1.0
        z = z - np.linalg.solve(j, np.append(res, z[1] - target))
    else:
        raise NoConvergence(f"bordered solve did not converge (residual {norm:.3e})",
                            last_residual=norm)
    psi = field_from_coords(r, n_modes)
    c = float(z[-1])
    return WaveProfile(psi, alpha, c, 0.0, "even-b0", residual_norm(psi, alpha, c, 0.0),
                       {"shift": 0.0, "sign": 1, "amplitude": A})


def even_frame(psi: WaveProfile) -> WaveProfile:
    """Translate an odd wave by a quarter period so it becomes even about 0."""
    shifted = psi.field.translate(math.pi / 2)
    info = dict(psi.normalization)
    info["shift"] = info.get("shift", 0.0) + math.pi / 2
    return replace(psi, field=shifted, normalization=info)
