"""Linearized operator ``L = D^α + c - 6ψ²``: spectra, σ₀, indices and verdicts.

Matrices are Galerkin matrices in the real orthonormal Fourier basis (the
constant, then cosines, then sines; the Nyquist mode is omitted), so ``L``
is a dense symmetric matrix of size ``n_modes - 1``.  Inner products of
fields are ``2π`` times the coordinate dot products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DiagnosticsFailure, HypothesisViolated, InvalidParameter
from .spectral import (
    TWO_PI,
    SpectralField,
    coords,
    cubic_dealiased,
    field_from_coords,
    grid_to_half,
    half_spectrum,
    half_to_grid,
    operator_matrix,
    pad_size,
    quartic_integral,
    subspace_indices,
)
from .wave import WaveProfile, ZeroMeanWave

RANGE_TOL = 1e-6


def _dim(psi: WaveProfile) -> int:
    return psi.n_modes - 1


def assemble_L(psi: WaveProfile) -> np.ndarray:
    """Symmetric matrix of ``D^α + c - 6ψ²`` (potential products computed exactly)."""
    m = psi.n_modes // 2 - 1
    g = half_to_grid(half_spectrum(psi.field), pad_size(m))
    pot = grid_to_half(6.0 * g * g, 2 * m)
    return operator_matrix(pot, psi.alpha, psi.c, m)


def sign_changes(values: np.ndarray, rel_tol: float = 1e-8) -> int:
    """Number of circular sign changes, ignoring samples below ``rel_tol·max|v|``."""
    v = np.asarray(values, dtype=float)
    keep = v[np.abs(v) > rel_tol * float(np.max(np.abs(v)))]
    if keep.size == 0:
        return 0
    s = np.sign(keep)
    return int(np.count_nonzero(s != np.roll(s, 1)))


@dataclass
class LinearizationReport:
    """Eigen-data of ``L`` together with σ₀ and range membership of 1.

    ``sigma0`` is ``None`` when 1 is not in the range of ``L`` (σ₀ unbounded);
    ``range_projection`` is the norm of the projection of the normalized
    constant onto the numerical kernel, kept for auditing.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    n_modes: int
    n_L: int
    z_L: int
    tol_zero: float
    sigma0: float | None = None
    one_in_range: bool = True
    range_projection: float = 0.0
    nodal_counts: tuple = ()
    kernel_similarity: float = float("nan")

    @property
    def sigma0_unbounded(self) -> bool:
        return self.sigma0 is None

    def eigenfield(self, i: int) -> SpectralField:
        return field_from_coords(self.eigenvectors[:, i], self.n_modes)

    @property
    def eigenfields(self) -> list[SpectralField]:
        return [self.eigenfield(i) for i in range(min(6, self.eigenvalues.size))]

    def to_dict(self) -> dict:
        return {
            "eigenvalues_lowest": [float(v) for v in self.eigenvalues[:8]],
            "n_L": self.n_L,
            "z_L": self.z_L,
            "tol_zero": self.tol_zero,
            "sigma0": self.sigma0,
            "one_in_range": self.one_in_range,
            "range_projection": self.range_projection,
            "nodal_counts": list(self.nodal_counts),
        }


def _kernel_basis(evals: np.ndarray, evecs: np.ndarray, tol: float) -> np.ndarray:
    return evecs[:, np.abs(evals) <= tol]


def spectrum(psi: WaveProfile, L: np.ndarray | None = None, check_kernel: bool = True) -> LinearizationReport:
    """Full symmetric eigendecomposition of ``L`` with index counts and σ₀.

    Zero eigenvalues are those with ``|λ| <= 1e-6·(1 + spectral radius)``.
    For non-constant waves the translation mode ``∂ₓψ`` must lie in the
    numerical kernel (cosine similarity above 0.999).

    Raises
    ------
    DiagnosticsFailure
        If ``∂ₓψ`` is not matched by the kernel.
    """
    L = assemble_L(psi) if L is None else L
    evals, evecs = linalg.eigh(L)
    radius = float(np.max(np.abs(evals)))
    tol = 1e-6 * (1.0 + radius)
    n_L = int(np.count_nonzero(evals < -tol))
    z_L = int(np.count_nonzero(np.abs(evals) <= tol))
    report = LinearizationReport(evals, evecs, psi.n_modes, n_L, z_L, tol)
    dpsi = coords(psi.field.derivative())
    dnorm = float(np.linalg.norm(dpsi))
    if dnorm > 1e-10 * max(1.0, float(np.linalg.norm(coords(psi.field)))):
        q = _kernel_basis(evals, evecs, tol)
        sim = float(np.linalg.norm(q.T @ dpsi)) / dnorm if q.shape[1] else 0.0
        report.kernel_similarity = sim
        if check_kernel and sim <= 0.999:
            raise DiagnosticsFailure(
                f"translation mode not in the numerical kernel (similarity {sim:.6f})")
    report.nodal_counts = tuple(sign_changes(report.eigenfield(i).values) for i in range(3))
    value, in_range, proj = sigma0(psi, report, L)
    report.sigma0, report.one_in_range, report.range_projection = value, in_range, proj
    return report


def deflated_solve(L: np.ndarray, report: LinearizationReport, rhs: np.ndarray) -> np.ndarray:
    """Solve ``L u = rhs`` on the complement of the numerical kernel.

    The kernel component of ``rhs`` is removed and the returned ``u`` is
    orthogonal to the kernel.
    """
    q = _kernel_basis(report.eigenvalues, report.eigenvectors, report.tol_zero)
    rhs = rhs - q @ (q.T @ rhs)
    return linalg.solve(L + q @ q.T, rhs, assume_a="sym")


def sigma0(psi: WaveProfile, report: LinearizationReport, L: np.ndarray | None = None
           ) -> tuple[float | None, bool, float]:
    """``σ₀ = ⟨L⁻¹1, 1⟩`` by a deflated solve.

    Returns
    -------
    value : float or None
        σ₀, or ``None`` when 1 is not in the range of ``L``.
    one_in_range : bool
        False when the normalized constant has a kernel component above 1e-6.
    projection : float
        Norm of that kernel component.
    """
    L = assemble_L(psi) if L is None else L
    e0 = np.zeros(L.shape[0])
    e0[0] = 1.0
    q = _kernel_basis(report.eigenvalues, report.eigenvectors, report.tol_zero)
    proj = float(np.linalg.norm(q.T @ e0)) if q.shape[1] else 0.0
    if proj > RANGE_TOL:
        return None, False, proj
    u = deflated_solve(L, report, e0)
    return TWO_PI * float(u[0]), True, proj


def restricted_L_X0(psi: WaveProfile) -> np.ndarray:
    """Matrix of ``L|_{X₀} f = L f + (3/π)⟨f, ψ²⟩`` on zero-mean coordinates.

    The rank-one correction removes the mean of ``L f``; the result equals
    the compression ``Π₀ L Π₀``.
    """
    L = assemble_L(psi)
    m = psi.n_modes // 2 - 1
    g = half_to_grid(half_spectrum(psi.field), pad_size(m))
    psi2 = _coords_of_grid(g * g, m)
    # rank-one term: (3/π)⟨f, ψ²⟩ = 6 (ψ² coordinates · f), placed on the constant row
    full = L.copy()
    full[0, :] += 6.0 * psi2
    return full[1:, 1:]


def _coords_of_grid(values: np.ndarray, m: int) -> np.ndarray:
    from .spectral import coords_from_half
    return coords_from_half(grid_to_half(values, m))


@dataclass(frozen=True)
class IndexCounts:
    n: int
    z: int
    eigenvalues: np.ndarray


def count_indices(matrix: np.ndarray, tol: float | None = None) -> IndexCounts:
    evals = linalg.eigvalsh(matrix)
    if tol is None:
        tol = 1e-6 * (1.0 + float(np.max(np.abs(evals))))
    return IndexCounts(int(np.count_nonzero(evals < -tol)),
                       int(np.count_nonzero(np.abs(evals) <= tol)), evals)


def x0_counts(psi: WaveProfile) -> IndexCounts:
    """``n(L|_{X₀})`` and ``z(L|_{X₀})``."""
    return count_indices(restricted_L_X0(psi))


def subspace_restriction(psi: WaveProfile, kind: str) -> np.ndarray:
    """``L`` compressed to a symmetry subspace (e.g. ``odd-pi2``)."""
    L = assemble_L(psi)
    idx = subspace_indices(psi.n_modes // 2 - 1, kind)
    return L[np.ix_(idx, idx)]


def subspace_counts(psi: WaveProfile, kind: str) -> IndexCounts:
    """Index counts of ``L`` compressed to a symmetry subspace."""
    return count_indices(subspace_restriction(psi, kind))


@dataclass(frozen=True)
class ConstrainedIndex:
    """Counts of ``L`` restricted to the orthogonal complement of two constraints."""

    n_constrained: int
    z_constrained: int
    matrix: np.ndarray
    n0: int
    z0: int
    z_inf: int
    pair: str


def _matrix_counts(d: np.ndarray) -> tuple[int, int]:
    if d.size == 0:
        return 0, 0
    evals = np.linalg.eigvalsh(d)
    tol = 1e-9 * (1.0 + float(np.max(np.abs(evals))))
    return int(np.count_nonzero(evals < -tol)), int(np.count_nonzero(np.abs(evals) <= tol))


def constrained_index(
    psi: WaveProfile,
    report: LinearizationReport,
    pair: str = "1,psi",
    slope: float | None = None,
    L: np.ndarray | None = None,
) -> ConstrainedIndex:
    """Index of ``L`` on ``{1, g}^⊥`` with ``g = ψ`` or ``g = ψ³``.

    For odd ``b = 0`` waves the 2×2 matrix is built from the closed-form
    projections ``⟨L⁻¹ψ³, ψ³⟩ = -¼∫ψ⁴``, ``⟨L⁻¹ψ, ψ⟩ = -½ d‖ψ‖²/dc`` and
    ``⟨L⁻¹1, g⟩ = 0``; other waves use deflated solves.  When 1 is not in
    the range of ``L`` the constant row is dropped and one zero eigenvalue is
    removed (``z_inf = 1``).
    """
    if pair not in ("1,psi", "1,psi3"):
        raise InvalidParameter("pair must be '1,psi' or '1,psi3'")
    in_range = report.one_in_range
    if psi.family == "odd-b0":
        if pair == "1,psi3":
            g_entry = -0.25 * quartic_integral(psi.field)
        else:
            if slope is None:
                from .solver import slope_wrt_c
                slope = slope_wrt_c(psi)
            g_entry = -0.5 * slope
        if in_range:
            d = np.array([[g_entry, 0.0], [0.0, report.sigma0]])
        else:
            d = np.array([[g_entry]])
    else:
        L = assemble_L(psi) if L is None else L
        g = psi.field if pair == "1,psi" else cubic_dealiased(psi.field)
        gc = coords(g)
        wg = deflated_solve(L, report, gc)
        if in_range:
            e0 = np.zeros_like(gc)
            e0[0] = 1.0
            w1 = deflated_solve(L, report, e0)
            d = TWO_PI * np.array([[wg @ gc, wg @ e0], [w1 @ gc, w1 @ e0]])
            d = 0.5 * (d + d.T)
        else:
            d = TWO_PI * np.array([[wg @ gc]])
    n0, z0 = _matrix_counts(d)
    z_inf = 0 if in_range else 1
    return ConstrainedIndex(report.n_L - n0 - z0, report.z_L + z0 - z_inf, d, n0, z0, z_inf, pair)


# verdicts ------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of a stability criterion with the case that fired."""

    verdict: str
    criterion_path: str
    data: dict = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


def classify_odd(sigma0_value: float | None, slope: float, one_in_range: bool = True,
                 n_L: int | None = None, z_L: int | None = None) -> StabilityVerdict:
    """Stability of an odd ``b = 0`` wave from σ₀ and ``d‖ψ‖²/dc``.

    With 1 in the range of ``L``: stable when ``σ₀ <= 0`` and slope ``>= 0``;
    unstable when ``σ₀·slope > 0``, or ``σ₀ = 0`` with slope ``< 0``, or
    ``σ₀ > 0`` with slope ``= 0``; inconclusive when ``σ₀ > 0`` and slope ``< 0``.
    Otherwise: unstable when slope ``>= 0`` and inconclusive when slope ``< 0``.
    """
    data = {"sigma0": sigma0_value, "slope": slope, "n_L": n_L, "z_L": z_L,
            "one_in_range": one_in_range}
    if not one_in_range or sigma0_value is None:
        if slope >= 0.0:
            return StabilityVerdict("unstable", "1 not in range, slope >= 0", data)
        return StabilityVerdict("inconclusive", "1 not in range, slope < 0", data)
    s = sigma0_value
    if s <= 0.0 and slope >= 0.0:
        return StabilityVerdict("stable", "sigma0 <= 0, slope >= 0", data)
    if s * slope > 0.0:
        return StabilityVerdict("unstable", "sigma0 * slope > 0", data)
    if s == 0.0 and slope < 0.0:
        return StabilityVerdict("unstable", "sigma0 = 0, slope < 0", data)
    if s > 0.0 and slope == 0.0:
        return StabilityVerdict("unstable", "sigma0 > 0, slope = 0", data)
    return StabilityVerdict("inconclusive", "sigma0 > 0, slope < 0", data)


def classify_even(zm: ZeroMeanWave, partial_slope: float, s0: float | None = None
                  ) -> StabilityVerdict:
    """Stability of an even wave: stable iff ``∂‖φ‖²/∂ω >= 0`` (requires ``ω > -1``).

    Raises
    ------
    HypothesisViolated
        If ``ω <= -1``.
    """
    if zm.omega <= -1.0:
        raise HypothesisViolated(f"criterion needs omega > -1, got {zm.omega!r}")
    data = {"omega": zm.omega, "a": zm.a, "partial_slope": partial_slope, "s0": s0}
    if partial_slope >= 0.0:
        return StabilityVerdict("stable", "partial slope >= 0", data)
    return StabilityVerdict("unstable", "partial slope < 0", data)


def classify_general(ci: ConstrainedIndex, report: LinearizationReport) -> StabilityVerdict:
    """Verdict from ``n(L|_{{1,ψ}^⊥})``: 0 stable, 1 unstable, more inconclusive."""
    data = {"n_constrained": ci.n_constrained, "z_constrained": ci.z_constrained,
            "n_L": report.n_L, "z_L": report.z_L, "sigma0": report.sigma0,
            "D0": ci.matrix.tolist()}
    if ci.n_constrained <= 0:
        return StabilityVerdict("stable", "constrained index 0", data)
    if ci.n_constrained == 1:
        return StabilityVerdict("unstable", "constrained index 1", data)
    return StabilityVerdict("inconclusive", f"constrained index {ci.n_constrained}", data)


# s0 and the spectrum of ∂ₓL ----------------------------------------------------

@dataclass(frozen=True)
class S0Result:
    s0: float
    d_omega_beta: float
    d_a_beta: float
    sigma0_from_s0: float
    h: float


def s0_invertibility(zm: ZeroMeanWave, h: float | None = None) -> S0Result:
    """``s₀ = ω - ∂_aβ + 12a ∂_ωβ`` by centered differences; ``σ₀ = 2π/s₀``."""
    from .solver import phi_parameter_derivatives
    der = phi_parameter_derivatives(zm, h)
    s0 = zm.omega - der.d_a_beta + 12.0 * zm.a * der.d_omega_beta
    sig = TWO_PI / s0 if s0 != 0.0 else math.inf
    return S0Result(s0, der.d_omega_beta, der.d_a_beta, sig, der.h)


def derivative_matrix(m: int) -> np.ndarray:
    """``d/dx`` in real coordinates."""
    dim = 2 * m + 1
    d = np.zeros((dim, dim))
    for k in range(1, m + 1):
        d[m + k, k] = -k   # (√2 cos kx)' = -k √2 sin kx
        d[k, m + k] = k    # (√2 sin kx)' = k √2 cos kx
    return d


@dataclass(frozen=True)
class KdvSpectrum:
    """Eigenvalues of ``∂ₓL`` with a summary of their real parts.

    ``scale`` is ``1 + |c| + max|6ψ²|``, the size of the zeroth-order part
    of ``L``; thresholds on real parts are relative to it.
    """

    eigenvalues: np.ndarray
    scale: float
    max_real: float
    positive_real: np.ndarray

    def is_stable(self, rel_tol: float = 1e-6) -> bool:
        return self.max_real < rel_tol * self.scale

    def unstable_count(self, rel_tol: float = 1e-4) -> int:
        return int(np.count_nonzero(self.positive_real > rel_tol * self.scale))

    def hamiltonian_defect(self) -> float:
        """Distance between the spectrum and its reflection ``λ ↦ -conj(λ)``."""
        ev = self.eigenvalues
        refl = -np.conj(ev)
        return float(max(np.min(np.abs(ev - r)) for r in refl))


def _translation_chain(psi: WaveProfile, L: np.ndarray, tol: float = 1e-8) -> np.ndarray | None:
    """Zero-mean coordinates of ``∂ₓψ`` and ``w`` with ``∂ₓL w = ∂ₓψ``.

    ``w`` solves ``L w = ψ + κ`` with zero mean, which needs ``σ₀ ≠ 0``;
    ``None`` is returned when that system is inconsistent or the wave is
    constant.
    """
    v1 = coords(psi.field.derivative())
    if np.linalg.norm(v1) <= 1e-10 * max(1.0, np.linalg.norm(coords(psi.field))):
        return None
    dim = L.shape[0]
    e0 = np.zeros(dim)
    e0[0] = 1.0
    system = np.column_stack([L[:, 1:], -e0])
    rhs = coords(psi.field)
    sol, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if np.linalg.norm(system @ sol - rhs) > tol * max(1.0, np.linalg.norm(rhs)):
        return None
    return np.column_stack([v1[1:], sol[:-1]])


def kdv_spectrum(psi: WaveProfile, L: np.ndarray | None = None) -> KdvSpectrum:
    """Spectrum of ``∂ₓL`` by a dense nonsymmetric eigensolve.

    The mean coordinate is mapped to zero by ``∂ₓ`` so the matrix is block
    triangular; its eigenvalues are ``{0}`` together with those of the
    zero-mean block, which is what is computed.
    """
    L = assemble_L(psi) if L is None else L
    m = psi.n_modes // 2 - 1
    a = derivative_matrix(m)[1:, 1:] @ L[1:, 1:]
    chain = _translation_chain(psi, L)
    try:
        if chain is None:
            ev = linalg.eigvals(a)
        else:
            # the chain spans an invariant subspace on which A is nilpotent, so
            # A is block triangular in the basis [Q, Q⊥] with a zero-eigenvalue
            # corner; solving the 2x2 corner numerically would only show the
            # square root of the solver residual
            q_full, _ = np.linalg.qr(chain, mode="complete")
            q_perp = q_full[:, 2:]
            ev = np.concatenate([np.zeros(2, dtype=complex),
                                 linalg.eigvals(q_perp.T @ a @ q_perp)])
    except linalg.LinAlgError as exc:
        raise DiagnosticsFailure(f"eigensolver failed: {exc}") from exc
    ev = np.concatenate([[0.0 + 0.0j], ev])
    g = psi.field.values
    scale = 1.0 + abs(psi.c) + 6.0 * float(np.max(g * g))
    max_real = float(np.max(np.abs(ev.real)))
    # real eigenvalues: imaginary part negligible relative to the real part
    real_like = ev[(ev.real > 0) & (np.abs(ev.imag) <= 1e-8 * scale + 1e-6 * np.abs(ev.real))]
    return KdvSpectrum(ev, scale, max_real, np.sort(real_like.real)[::-1])
