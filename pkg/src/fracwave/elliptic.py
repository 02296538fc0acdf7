"""Elliptic integrals, Jacobi functions and exact waves for the local case α = 2.

Everything here uses the modulus ``k`` (not the parameter ``m = k²``).
Complete integrals come from the arithmetic-geometric mean and the Jacobi
functions from the descending Landen (AGM) scheme, so no special-function
library is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidParameter, ModulusTooCloseToOne, ParameterOutOfRange
from .spectral import SpectralField, grid
from .wave import WaveProfile, residual_norm

K_MAX = 1.0 - 1e-12
_AGM_LEVELS = 40

EllipticFamily = Literal["cnoidal", "dnoidal"]


def _check_k(k: float, open_left: bool = False) -> float:
    k = float(k)
    if not math.isfinite(k) or k < 0.0 or (open_left and k == 0.0):
        raise InvalidParameter(f"modulus must lie in {'(0' if open_left else '[0'}, 1), got {k!r}")
    if k > K_MAX:
        raise ModulusTooCloseToOne(f"modulus {k!r} exceeds 1 - 1e-12")
    return k


def _check_family(family: str) -> str:
    if family not in ("cnoidal", "dnoidal"):
        raise InvalidParameter(f"family must be 'cnoidal' or 'dnoidal', got {family!r}")
    return family


@dataclass(frozen=True)
class EllipticModulus:
    k: float
    K: float
    E: float


def complete_integrals(k: float) -> EllipticModulus:
    """Complete elliptic integrals ``K(k)`` and ``E(k)`` by the AGM.

    Uses ``K = π / (2 M(1, k'))`` and
    ``E = K (1 - Σ 2^{n-1} c_n²)`` with ``c_0 = k``.
    """
    k = _check_k(k)
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    acc = 0.5 * c * c
    power = 0.5
    for _ in range(_AGM_LEVELS):
        if abs(c) <= 1e-17 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        power *= 2.0
        acc += power * c * c
    K = math.pi / (2.0 * a)
    return EllipticModulus(k, K, K * (1.0 - acc))


def jacobi(z, k: float):
    """Jacobi elliptic functions ``(sn, cn, dn)`` of argument ``z``.

    Parameters
    ----------
    z : float or array_like
        Argument.
    k : float
        Modulus in ``[0, 1 - 1e-12]``.

    Returns
    -------
    tuple of ndarray or float
        ``sn(z, k)``, ``cn(z, k)``, ``dn(z, k)`` with the shape of ``z``.
    """
    k = _check_k(k)
    z_arr = np.asarray(z, dtype=float)
    if k == 0.0:
        out = (np.sin(z_arr), np.cos(z_arr), np.ones_like(z_arr))
    else:
        a = [1.0]
        c = [k]
        b = math.sqrt((1.0 - k) * (1.0 + k))
        while abs(c[-1]) > 1e-16 * a[-1] and len(a) < _AGM_LEVELS:
            an, bn = a[-1], b
            a.append(0.5 * (an + bn))
            c.append(0.5 * (an - bn))
            b = math.sqrt(an * bn)
        n = len(a) - 1
        phi = (2.0 ** n) * a[n] * z_arr
        phis = [phi]
        for j in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
            phis.append(phi)
        sn, cn = np.sin(phis[-1]), np.cos(phis[-1])
        # dn > 0 for real z; avoids the 0/0 of cn/cos(φ1 - φ0) at odd quarter periods
        dn = np.sqrt((1.0 - k * sn) * (1.0 + k * sn))
        out = (sn, cn, dn)
    if np.ndim(z) == 0:
        return tuple(float(v) for v in out)
    return out


# speed maps ----------------------------------------------------------------

def cnoidal_speed(k: float) -> float:
    m = complete_integrals(k)
    return 4.0 / math.pi ** 2 * m.K ** 2 * (2.0 * k * k - 1.0)


def dnoidal_speed(k: float) -> float:
    m = complete_integrals(k)
    return m.K ** 2 * (2.0 - k * k) / math.pi ** 2


def speed(k: float, family: str) -> float:
    return cnoidal_speed(k) if _check_family(family) == "cnoidal" else dnoidal_speed(k)


def k_from_c(c: float, family: str) -> float:
    """Invert the monotone speed map by bisection to ``|c(k) - c| < 1e-12``."""
    family = _check_family(family)
    lower = -1.0 if family == "cnoidal" else 0.5
    c = float(c)
    if not math.isfinite(c) or c <= lower:
        raise ParameterOutOfRange(f"{family} waves need c > {lower}, got {c!r}")
    if c >= speed(K_MAX, family):
        raise ParameterOutOfRange(f"c = {c!r} needs a modulus beyond 1 - 1e-12")
    lo, hi = 0.0, K_MAX
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = speed(mid, family)
        if abs(val - c) < 1e-12 or hi - lo < 1e-16:
            return mid
        if val < c:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# exact waves ---------------------------------------------------------------

def cnoidal_wave(k: float, n_modes: int = 256) -> WaveProfile:
    """Odd wave ``(2/π) k K cn((2/π) K x - K; k)`` with ``b = 0``."""
    k = _check_k(k, open_left=True)
    m = complete_integrals(k)
    x = grid(n_modes)
    _, cn, _ = jacobi(2.0 / math.pi * m.K * x - m.K, k)
    psi = SpectralField.from_values(2.0 / math.pi * k * m.K * cn)
    c = cnoidal_speed(k)
    return WaveProfile(psi, 2.0, c, 0.0, "odd-b0", residual_norm(psi, 2.0, c, 0.0),
                       {"shift": 0.0, "sign": 1, "source": "cnoidal", "k": k})


def dnoidal_wave(k: float, n_modes: int = 256) -> WaveProfile:
    """Positive even wave ``(1/π) K dn((1/π) K x; k)`` with ``b = 0``."""
    k = _check_k(k, open_left=True)
    m = complete_integrals(k)
    x = grid(n_modes)
    _, _, dn = jacobi(m.K * x / math.pi, k)
    psi = SpectralField.from_values(m.K / math.pi * dn)
    c = dnoidal_speed(k)
    return WaveProfile(psi, 2.0, c, 0.0, "even-b0", residual_norm(psi, 2.0, c, 0.0),
                       {"shift": 0.0, "sign": 1, "source": "dnoidal", "k": k})


def dnoidal_phi_norm_sq(k: float) -> float:
    """``‖ψ - 1/2‖²`` for the dnoidal wave, ``(2/π) K E - π/2``."""
    m = complete_integrals(k)
    return 2.0 / math.pi * m.K * m.E - math.pi / 2.0


# linearization data --------------------------------------------------------

def closed_form_sigma0(k: float, family: str) -> float:
    """``⟨L⁻¹1, 1⟩`` for the normalized (z-variable) operator.

    The sign matches σ₀ of the x-variable operator; see
    :func:`sigma0_scale` for the positive factor between the two.
    """
    family = _check_family(family)
    k = _check_k(k, open_left=True)
    m = complete_integrals(k)
    if family == "cnoidal":
        return -4.0 * (2.0 * m.E - m.K)
    return 2.0 / k ** 4 * ((2.0 - k * k) * m.K - 2.0 * m.E)


def sigma0_scale(k: float, family: str) -> float:
    """Positive factor with ``σ₀ = sigma0_scale · closed_form_sigma0``.

    With ``z = s x + z0`` and ``ψ = s·q(z)``, the operator scales as
    ``L = s² L_z``, the period ``2π`` in ``x`` maps to ``2π s`` in ``z``, so
    ``⟨L⁻¹1, 1⟩_x = s⁻³ ⟨L_z⁻¹1, 1⟩_z`` where the z-integral runs over
    ``4K`` (cnoidal, ``s = 2K/π``) or ``2K`` (dnoidal, ``s = K/π``).
    """
    family = _check_family(family)
    m = complete_integrals(_check_k(k, open_left=True))
    s = 2.0 * m.K / math.pi if family == "cnoidal" else m.K / math.pi
    return s ** -3


@dataclass(frozen=True)
class EllipticSpectrum:
    family: str
    eigenvalues: list[float]
    scale: float

    def x_variable(self) -> list[float]:
        return [self.scale * lam for lam in self.eigenvalues]


def closed_form_spectrum(k: float, family: str) -> EllipticSpectrum:
    """Lowest eigenvalues of the normalized Lamé operator.

    Cnoidal waves give five values ``λ₀ < λ₁ < 0 < λ₃ < λ₄`` (with
    ``λ₂ = 0``); dnoidal waves give three values ``λ₀ < 0 = λ₁ < λ₂``.
    """
    family = _check_family(family)
    k = _check_k(k, open_left=True)
    m = complete_integrals(k)
    k2 = k * k
    root = math.sqrt(1.0 - k2 + k2 * k2)
    if family == "cnoidal":
        lams = [1.0 - 2.0 * k2 - 2.0 * root, -3.0 * k2, 0.0, 3.0 * (1.0 - k2),
                1.0 - 2.0 * k2 + 2.0 * root]
        scale = (2.0 * m.K / math.pi) ** 2
    else:
        lams = [-2.0 + k2 - 2.0 * root, 0.0, -2.0 + k2 + 2.0 * root]
        scale = (m.K / math.pi) ** 2
    return EllipticSpectrum(family, lams, scale)


def cnoidal_momentum(k: float) -> float:
    """``‖ψ‖²`` of the cnoidal wave, ``(8/π) K [E - (1 - k²) K]``."""
    m = complete_integrals(k)
    return 8.0 / math.pi * m.K * (m.E - (1.0 - k * k) * m.K)


def _dK_dk(k: float, m: EllipticModulus) -> float:
    return (m.E - (1.0 - k * k) * m.K) / (k * (1.0 - k * k))


def _dE_dk(k: float, m: EllipticModulus) -> float:
    return (m.E - m.K) / k


def momentum_slope(k: float) -> float:
    """``d/dk`` of :func:`cnoidal_momentum` from the standard derivative rules."""
    k = _check_k(k, open_left=True)
    m = complete_integrals(k)
    K, E = m.K, m.E
    dK, dE = _dK_dk(k, m), _dE_dk(k, m)
    inner = E - (1.0 - k * k) * K
    d_inner = dE + 2.0 * k * K - (1.0 - k * k) * dK
    return 8.0 / math.pi * (dK * inner + K * d_inner)


def cnoidal_speed_slope(k: float) -> float:
    """``dc/dk`` for the cnoidal speed map."""
    k = _check_k(k, open_left=True)
    m = complete_integrals(k)
    dK = _dK_dk(k, m)
    return 4.0 / math.pi ** 2 * (2.0 * m.K * dK * (2.0 * k * k - 1.0) + 4.0 * k * m.K ** 2)


def cnoidal_critical_modulus() -> float:
    """Unique root ``k*`` of ``2E(k) - K(k)`` in ``(0, 1)`` by bisection."""
    lo, hi = 0.5, 0.99
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        m = complete_integrals(mid)
        if 2.0 * m.E - m.K > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def aux_f(k: float) -> float:
    """``(2 - k²)E - 2(1 - k²)K``, positive on ``(0, 1)``."""
    m = complete_integrals(k)
    return (2.0 - k * k) * m.E - 2.0 * (1.0 - k * k) * m.K


def aux_g(k: float) -> float:
    """``K²(1 - k²) - E²``, negative on ``(0, 1)``."""
    m = complete_integrals(k)
    return m.K ** 2 * (1.0 - k * k) - m.E ** 2
