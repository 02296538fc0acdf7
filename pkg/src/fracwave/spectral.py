"""Fourier representation of real 2π-periodic functions.

A :class:`SpectralField` holds the complex Fourier coefficients of a real
function on ``[-π, π)`` together with its samples on the uniform grid
``x_j = -π + 2πj/N``.  Coefficients are indexed ``-N/2 ... N/2-1`` so that
``u(x) = Σ c_n exp(i n x)``.

Besides the field type the module exposes the low-level machinery the
solvers are built on:

* half spectra ``h_k = c_k`` for ``k = 0..M`` with ``M = N/2 - 1``
  (the Nyquist mode is never used by the solvers),
* real orthonormal coordinates with respect to ``(1/2π)∫ f g dx`` laid out
  as ``[1, √2 cos x .. √2 cos Mx, √2 sin x .. √2 sin Mx]``,
* exact (alias-free) products computed on a grid of ``4(M+1)`` points,
* Galerkin matrices of ``D^α + shift - V(x)`` in the real basis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.linalg import toeplitz

from .errors import DegenerateInput, InvalidParameter

TWO_PI = 2.0 * math.pi

Parity = Literal["even", "odd", "neither"]


def _check_n(n_modes: int) -> int:
    n = int(n_modes)
    if n != n_modes or n < 4 or n % 2:
        raise InvalidParameter(f"n_modes must be an even integer >= 4, got {n_modes!r}")
    return n


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise InvalidParameter(f"alpha must be a positive finite number, got {alpha!r}")
    return alpha


def wavenumbers(n_modes: int) -> np.ndarray:
    """Integer wavenumbers ``-N/2 .. N/2-1`` in storage order."""
    return np.arange(-(n_modes // 2), n_modes // 2)


def grid(n_modes: int) -> np.ndarray:
    """Collocation points ``x_j = -π + 2πj/N``."""
    return -math.pi + TWO_PI * np.arange(n_modes) / n_modes


def _sign(n_modes: int) -> np.ndarray:
    # (-1)^m from the -π grid offset
    return np.where(wavenumbers(n_modes) % 2 == 0, 1.0, -1.0)


def _coeffs_to_values(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.size
    fft_order = np.fft.ifftshift(coeffs * _sign(n))
    return np.real(np.fft.ifft(fft_order)) * n


def _values_to_coeffs(values: np.ndarray) -> np.ndarray:
    n = values.size
    return np.fft.fftshift(np.fft.fft(values)) * _sign(n) / n


def _symmetrize(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.size
    h = n // 2
    out = np.empty(n, dtype=complex)
    # position of mode m is m + h; mode -m sits at h - m
    pos = coeffs[h:]
    neg = coeffs[1:h + 1][::-1]
    avg = 0.5 * (pos + np.conj(neg))
    out[h:] = avg
    out[1:h + 1] = np.conj(avg[:h][::-1]) if h > 0 else out[1:h + 1]
    out[h] = avg[0].real
    out[0] = coeffs[0].real
    return out


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Real 2π-periodic field stored as Fourier coefficients and grid values.

    Use :meth:`from_values`, :meth:`from_coeffs` or :meth:`from_function`
    rather than the raw constructor; they keep both representations
    synchronised.
    """

    coeffs: np.ndarray
    values: np.ndarray = field(repr=False)

    @classmethod
    def from_values(cls, values) -> "SpectralField":
        v = np.asarray(values, dtype=float).copy()
        _check_n(v.size)
        c = _symmetrize(_values_to_coeffs(v))
        v.setflags(write=False)
        c.setflags(write=False)
        return cls(c, v)

    @classmethod
    def from_coeffs(cls, coeffs) -> "SpectralField":
        c = np.asarray(coeffs, dtype=complex)
        _check_n(c.size)
        c = _symmetrize(c)
        v = _coeffs_to_values(c)
        c.setflags(write=False)
        v.setflags(write=False)
        return cls(c, v)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], n_modes: int) -> "SpectralField":
        n = _check_n(n_modes)
        return cls.from_values(np.broadcast_to(f(grid(n)), (n,)))

    @classmethod
    def constant(cls, value: float, n_modes: int) -> "SpectralField":
        return cls.from_values(np.full(_check_n(n_modes), float(value)))

    @classmethod
    def zeros(cls, n_modes: int) -> "SpectralField":
        return cls.constant(0.0, n_modes)

    @property
    def n_modes(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return grid(self.n_modes)

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n_modes)

    def coeff(self, n: int) -> complex:
        """Coefficient of ``exp(i n x)``; zero outside the stored band."""
        h = self.n_modes // 2
        if -h <= n < h:
            return complex(self.coeffs[n + h])
        if n == h:
            return complex(np.conj(self.coeffs[0]))
        return 0j

    # arithmetic -------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, SpectralField):
            if other.n_modes != self.n_modes:
                raise InvalidParameter("fields live on different grids")
            return other.values
        return float(other)

    def __add__(self, other):
        return SpectralField.from_values(self.values + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SpectralField.from_values(self.values - self._lift(other))

    def __rsub__(self, other):
        return SpectralField.from_values(self._lift(other) - self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        return SpectralField.from_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    # quadrature -------------------------------------------------------
    def mean(self) -> float:
        return float(self.coeffs[self.n_modes // 2].real)

    def integral(self) -> float:
        return TWO_PI * self.mean()

    def l2_norm_sq(self) -> float:
        """``∫ u² dx`` by Parseval."""
        return TWO_PI * float(np.sum(np.abs(self.coeffs) ** 2))

    def inner(self, other: "SpectralField") -> float:
        """``∫ u v dx``."""
        return TWO_PI * float(np.real(np.vdot(self.coeffs, other.coeffs)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def derivative(self) -> "SpectralField":
        """Spectral ``d/dx`` (Nyquist mode dropped)."""
        c = 1j * self.k * self.coeffs
        c[0] = 0.0
        return SpectralField.from_coeffs(c)

    def translate(self, shift: float) -> "SpectralField":
        """Return ``x ↦ u(x + shift)``."""
        c = self.coeffs * np.exp(1j * self.k * shift)
        c[0] = self.coeffs[0] * math.cos(self.k[0] * shift)
        return SpectralField.from_coeffs(c)

    def resample(self, n_modes: int) -> "SpectralField":
        """Zero-pad or truncate the spectrum to ``n_modes`` points."""
        n = _check_n(n_modes)
        h_old, h_new = self.n_modes // 2, n // 2
        out = np.zeros(n, dtype=complex)
        m = min(h_old, h_new) - 1
        out[h_new - m:h_new + m + 1] = self.coeffs[h_old - m:h_old + m + 1]
        return SpectralField.from_coeffs(out)

    def evaluate(self, x) -> np.ndarray:
        """Evaluate the trigonometric interpolant at arbitrary points."""
        x = np.asarray(x, dtype=float)
        h = half_spectrum(self)
        k = np.arange(h.size)
        phase = np.exp(1j * np.multiply.outer(x, k[1:]))
        return h[0].real + 2.0 * np.real(phase @ h[1:])

    # serialisation ----------------------------------------------------
    def coefficient_triples(self) -> list[list[float]]:
        return [[int(n), float(c.real), float(c.imag)] for n, c in zip(self.k, self.coeffs)]

    def to_json(self, alpha: float | None = None) -> str:
        return json.dumps({"n_modes": self.n_modes, "alpha": alpha,
                           "coeffs": self.coefficient_triples()})

    @classmethod
    def from_triples(cls, n_modes: int, triples) -> "SpectralField":
        n = _check_n(n_modes)
        c = np.zeros(n, dtype=complex)
        for k, re, im in triples:
            c[int(k) + n // 2] = complex(re, im)
        return cls.from_coeffs(c)

    @classmethod
    def from_json(cls, text: str) -> "SpectralField":
        data = json.loads(text)
        return cls.from_triples(data["n_modes"], data["coeffs"])


# operations on fields ------------------------------------------------------

def apply_fractional_laplacian(u: SpectralField, alpha: float) -> SpectralField:
    """Multiply every coefficient by ``|n|^α`` (the mean mode is annihilated)."""
    alpha = _check_alpha(alpha)
    return SpectralField.from_coeffs(u.coeffs * np.abs(u.k).astype(float) ** alpha)


def project_zero_mean(u: SpectralField) -> SpectralField:
    c = np.array(u.coeffs)
    c[u.n_modes // 2] = 0.0
    return SpectralField.from_coeffs(c)


def _padded_values(coeffs: np.ndarray, n_pad: int) -> np.ndarray:
    n = coeffs.size
    h = n // 2
    full = np.zeros(n_pad, dtype=complex)
    k = wavenumbers(n)
    c = np.array(coeffs)
    nyq = c[0]
    c[0] = 0.0
    full[k % n_pad] = c
    full[h] += 0.5 * nyq
    full[-h] += 0.5 * nyq
    return np.real(np.fft.ifft(full)) * n_pad


def cubic_dealiased(u: SpectralField) -> SpectralField:
    """``u³`` with the retained modes free of aliasing (zero padding to 2N)."""
    n = u.n_modes
    n_pad = 2 * n
    cube = _padded_values(u.coeffs, n_pad) ** 3
    spec = np.fft.fft(cube) / n_pad
    return SpectralField.from_coeffs(spec[u.k % n_pad])


def quartic_integral(u: SpectralField) -> float:
    """``∫ u⁴ dx`` on the padded grid."""
    v = _padded_values(u.coeffs, 2 * u.n_modes)
    return TWO_PI * float(np.mean(v ** 4))


def cubic_integral(u: SpectralField) -> float:
    v = _padded_values(u.coeffs, 2 * u.n_modes)
    return TWO_PI * float(np.mean(v ** 3))


@dataclass(frozen=True)
class Functionals:
    """Conserved quantities of a field plus the quadratic action ``B_c``."""

    energy: float
    momentum: float
    mass: float
    action_quadratic: float


def functionals(u: SpectralField, alpha: float, c: float) -> Functionals:
    alpha = _check_alpha(alpha)
    power = np.abs(u.coeffs) ** 2
    dirichlet = TWO_PI * float(np.sum(np.abs(u.k).astype(float) ** alpha * power))
    l2 = TWO_PI * float(np.sum(power))
    return Functionals(
        energy=0.5 * (dirichlet - quartic_integral(u)),
        momentum=0.5 * l2,
        mass=u.integral(),
        action_quadratic=0.5 * (dirichlet + c * l2),
    )


def reflect(u: SpectralField, center: float) -> SpectralField:
    """Return ``x ↦ u(2·center - x)``."""
    k = u.k
    h = u.n_modes // 2
    c = np.zeros_like(u.coeffs)
    # coefficient of mode m in the reflection is c_{-m} exp(-2 i m center)
    src = np.array([u.coeff(-m) for m in k])
    c[:] = src * np.exp(-2j * k * center)
    c[0] = u.coeffs[0] * math.cos(2 * k[0] * center)
    del h
    return SpectralField.from_coeffs(c)


def parity_check(u: SpectralField, center: float = 0.0, tol: float = 1e-8) -> Parity:
    """Classify ``u`` as even, odd or neither about ``center`` (0 or π/2)."""
    norm = math.sqrt(u.l2_norm_sq())
    if norm == 0.0:
        return "even"
    r = reflect(u, center)
    if math.sqrt((u - r).l2_norm_sq()) <= tol * norm:
        return "even"
    if math.sqrt((u + r).l2_norm_sq()) <= tol * norm:
        return "odd"
    return "neither"


def count_extrema(values: np.ndarray, rel_tol: float = 1e-8) -> tuple[int, int]:
    """Count local maxima and minima of circular samples.

    Differences smaller than ``rel_tol·max|u|`` are treated as plateaus and
    inherit the previous slope sign; extrema closer than two cells are merged.
    """
    v = np.asarray(values, dtype=float)
    scale = float(np.max(np.abs(v)))
    d = np.roll(v, -1) - v
    s = np.sign(d)
    s[np.abs(d) <= rel_tol * scale] = 0
    if not np.any(s):
        return 0, 0
    # fill plateaus with the last nonzero sign, circularly
    start = int(np.flatnonzero(s)[0])
    s = np.roll(s, -start)
    for i in range(1, s.size):
        if s[i] == 0:
            s[i] = s[i - 1]
    changes = np.flatnonzero(s != np.roll(s, 1))
    if changes.size == 0:
        return 0, 0
    # merge sign flips less than two cells apart (noise wiggles)
    keep = []
    for idx in changes:
        if keep and idx - keep[-1] < 2:
            keep.pop()
            continue
        keep.append(int(idx))
    if len(keep) >= 2 and (keep[0] + s.size - keep[-1]) < 2:
        keep = keep[1:-1]
    maxima = sum(1 for i in keep if s[i - 1] > 0)
    return maxima, len(keep) - maxima


def single_lobe_check(u: SpectralField) -> bool:
    """True iff the sampled profile has exactly one maximum and one minimum."""
    if np.ptp(u.values) <= 1e-14 * max(1.0, u.sup_norm()):
        raise DegenerateInput("single-lobe check is undefined for a constant field")
    return count_extrema(u.values) == (1, 1)


# half spectra and real coordinates ----------------------------------------

def half_spectrum(u: SpectralField) -> np.ndarray:
    """Coefficients ``c_0 .. c_M`` with ``M = N/2 - 1``."""
    h = u.n_modes // 2
    return np.array(u.coeffs[h:])


def field_from_half(half: np.ndarray, n_modes: int) -> SpectralField:
    n = _check_n(n_modes)
    c = np.zeros(n, dtype=complex)
    m = min(half.size, n // 2)
    c[n // 2:n // 2 + m] = half[:m]
    c[n // 2 - m + 1:n // 2] = np.conj(half[1:m][::-1])
    return SpectralField.from_coeffs(c)


def coords_from_half(half: np.ndarray) -> np.ndarray:
    m = half.size - 1
    r = np.empty(2 * m + 1)
    r[0] = half[0].real
    r[1:m + 1] = math.sqrt(2.0) * half[1:].real
    r[m + 1:] = -math.sqrt(2.0) * half[1:].imag
    return r


def half_from_coords(r: np.ndarray) -> np.ndarray:
    m = (r.size - 1) // 2
    h = np.empty(m + 1, dtype=complex)
    h[0] = r[0]
    h[1:] = (r[1:m + 1] - 1j * r[m + 1:]) / math.sqrt(2.0)
    return h


def coords(u: SpectralField) -> np.ndarray:
    """Real orthonormal coordinates of ``u`` (Nyquist mode dropped)."""
    return coords_from_half(half_spectrum(u))


def field_from_coords(r: np.ndarray, n_modes: int) -> SpectralField:
    return field_from_half(half_from_coords(np.asarray(r, dtype=float)), n_modes)


def pad_size(m: int) -> int:
    """Grid size for exact products of two or three degree-``m`` polynomials."""
    return 4 * (m + 1)


def half_to_grid(half: np.ndarray, n_pad: int) -> np.ndarray:
    """Samples at ``y_j = 2πj/n_pad`` of the polynomial with half spectrum ``half``."""
    spec = np.zeros(n_pad // 2 + 1, dtype=complex)
    spec[:half.size] = half
    return np.fft.irfft(spec, n=n_pad) * n_pad


def grid_to_half(values: np.ndarray, m: int) -> np.ndarray:
    """Half spectrum up to degree ``m`` of samples on ``y_j = 2πj/n``."""
    return np.fft.rfft(values)[:m + 1] / values.size


SUBSPACES = ("full", "even", "odd", "zero-mean", "even-zero-mean", "odd-pi2", "even-pi2")


def subspace_indices(m: int, kind: str) -> np.ndarray:
    """Indices of real coordinates spanning a symmetry subspace.

    ``odd-pi2``/``even-pi2`` are functions odd/even about ``x = π/2``.
    """
    k = np.arange(1, m + 1)
    cos_idx, sin_idx = k, m + k
    if kind == "full":
        return np.arange(2 * m + 1)
    if kind == "even":
        return np.arange(m + 1)
    if kind == "odd":
        return sin_idx
    if kind == "zero-mean":
        return np.arange(1, 2 * m + 1)
    if kind == "even-zero-mean":
        return cos_idx
    if kind == "odd-pi2":
        return np.concatenate([cos_idx[k % 2 == 1], sin_idx[k % 2 == 0]])
    if kind == "even-pi2":
        return np.concatenate([[0], cos_idx[k % 2 == 0], sin_idx[k % 2 == 1]])
    raise InvalidParameter(f"unknown subspace {kind!r}")


def _real_basis_matrix(m: int) -> np.ndarray:
    """Columns: complex coefficients (modes -m..m) of the real basis functions."""
    dim = 2 * m + 1
    u = np.zeros((dim, dim), dtype=complex)
    s = 1.0 / math.sqrt(2.0)
    u[m, 0] = 1.0
    for k in range(1, m + 1):
        u[m + k, k] = s
        u[m - k, k] = s
        u[m + k, m + k] = -1j * s
        u[m - k, m + k] = 1j * s
    return u


_BASIS_CACHE: dict[int, np.ndarray] = {}


def operator_matrix(potential_half: np.ndarray, alpha: float, shift: float, m: int) -> np.ndarray:
    """Galerkin matrix of ``D^α + shift - V`` in the real orthonormal basis.

    ``potential_half`` holds the coefficients ``V_0 .. V_{2m}`` of the real
    potential ``V``; the matrix is exact for the truncated basis.
    """
    v = np.zeros(2 * m + 1, dtype=complex)
    n_avail = min(potential_half.size, 2 * m + 1)
    v[:n_avail] = potential_half[:n_avail]
    # complex Galerkin block: H[p, q] = (|q|^α + shift) δ - V_{p-q}
    h = -toeplitz(v, np.conj(v))
    modes = np.arange(-m, m + 1)
    h[np.diag_indices_from(h)] += np.abs(modes).astype(float) ** alpha + shift
    basis = _BASIS_CACHE.get(m)
    if basis is None:
        basis = _BASIS_CACHE.setdefault(m, _real_basis_matrix(m))
    t = np.real(basis.conj().T @ h @ basis)
    return 0.5 * (t + t.T)


def symbol_diagonal(alpha: float, m: int) -> np.ndarray:
    """``|k|^α`` for every real coordinate."""
    k = np.arange(1, m + 1, dtype=float) ** alpha
    return np.concatenate([[0.0], k, k])
