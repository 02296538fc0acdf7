"""Small-amplitude (Stokes) expansions truncated at third order.

Three families are covered: the odd family bifurcating from zero at
``c = -1``, the even family bifurcating from the constant ``√(c/2)`` at
``c = 1/2``, and the general two-parameter family around a constant root
``ψ₀`` of ``b + cψ₀ = 2ψ₀³``.  The fields serve as Newton seeds and as
convergence-order checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateExpansion, InvalidParameter
from .spectral import SpectralField, grid

ALPHA_MIN = 0.5


def _check(A: float, alpha: float) -> tuple[float, float]:
    A, alpha = float(A), float(alpha)
    if not math.isfinite(A) or A < 0.0:
        raise InvalidParameter(f"amplitude must be a finite number >= 0, got {A!r}")
    if not math.isfinite(alpha) or not ALPHA_MIN < alpha <= 2.0:
        raise InvalidParameter(f"alpha must lie in (1/2, 2], got {alpha!r}")
    return A, alpha


@dataclass(frozen=True)
class StokesExpansion:
    """Truncated expansion ``ψ = const + Σ_n h_n trig(n x)``.

    ``harmonics`` maps a wavenumber to the coefficient of ``sin(n x)`` for the
    odd family and of ``cos(n x)`` otherwise.
    """

    family: str
    alpha: float
    amplitude: float
    constant: float
    harmonics: dict = field(default_factory=dict)
    c: float = 0.0
    b: float = 0.0
    speed_coefficient: float = 0.0
    psi0: float | None = None

    def field(self, n_modes: int) -> SpectralField:
        x = grid(n_modes)
        trig = np.sin if self.family == "odd" else np.cos
        v = np.full(n_modes, self.constant)
        for n, h in self.harmonics.items():
            v = v + h * trig(n * x)
        return SpectralField.from_values(v)


def gamma2(alpha: float) -> float:
    """Second-order speed coefficient of the even family."""
    return 7.5 - 4.5 / (2.0 ** alpha - 1.0)


def alpha_critical() -> float:
    """The fractional order at which the even-family speed correction vanishes."""
    return math.log(8.0 / 5.0) / math.log(2.0)


def odd_expansion(A: float, alpha: float) -> StokesExpansion:
    A, alpha = _check(A, alpha)
    h3 = A ** 3 / (2.0 * (1.0 - 3.0 ** alpha))
    return StokesExpansion("odd", alpha, A, 0.0, {1: A, 3: h3}, c=-1.0 + 1.5 * A * A,
                           speed_coefficient=1.5)


def odd_stokes(A: float, alpha: float, n_modes: int = 256) -> tuple[SpectralField, float]:
    """Odd wave ``A sin x + A³ sin 3x / (2(1 - 3^α))`` with ``c = -1 + 3A²/2``."""
    e = odd_expansion(A, alpha)
    return e.field(n_modes), e.c


def even_expansion(A: float, alpha: float) -> StokesExpansion:
    A, alpha = _check(A, alpha)
    p2, p3 = 2.0 ** alpha - 1.0, 3.0 ** alpha - 1.0
    g2 = gamma2(alpha)
    c = 0.5 * (1.0 + g2 * A * A)
    root = math.sqrt(max(c, 0.0) / 2.0)
    harmonics = {
        1: A,
        2: A * A * 1.5 / p2,
        3: A ** 3 * (1.0 + 9.0 / p2) / (2.0 * p3),
    }
    return StokesExpansion("even", alpha, A, root - 1.5 * A * A, harmonics, c=c,
                           speed_coefficient=g2)


def even_stokes(A: float, alpha: float, n_modes: int = 256) -> tuple[SpectralField, float]:
    """Even wave ``√(c/2) + A cos x + A²φ₂ + A³φ₃`` with ``2c = 1 + γ₂A²``."""
    e = even_expansion(A, alpha)
    return e.field(n_modes), e.c


def psi0_root(c: float, b: float) -> float:
    """Root of ``2ψ³ - cψ - b = 0`` continuing the positive root ``√(c/2)`` at ``b = 0``."""
    roots = np.roots([2.0, 0.0, -float(c), -float(b)])
    real = roots[np.abs(roots.imag) < 1e-9].real
    guess = 0.5 * math.sqrt(2.0 * c) + b / (2.0 * c) if c > 0 else 0.0
    return float(real[np.argmin(np.abs(real - guess))])


def general_expansion(A: float, alpha: float, psi0: float) -> StokesExpansion:
    """Expansion around the constant ``ψ₀`` with ``c - 6ψ₀² = -1 + ω₂A²``.

    The returned ``c`` and ``b`` are the parameters implied by ``ψ₀`` and
    ``A``: ``c = 6ψ₀² - 1 + ω₂A²`` and ``b = 2ψ₀³ - cψ₀``.
    """
    A, alpha = _check(A, alpha)
    p2, p3 = 2.0 ** alpha - 1.0, 3.0 ** alpha - 1.0
    q = float(psi0) ** 2
    omega2 = 1.5 - 36.0 * q + 18.0 * q / p2
    c = 6.0 * q - 1.0 + omega2 * A * A
    b = 2.0 * psi0 ** 3 - c * psi0
    harmonics = {
        1: A,
        2: A * A * 3.0 * psi0 / p2,
        3: A ** 3 * (0.5 + 18.0 * q / p2) / p3,
    }
    return StokesExpansion("general", alpha, A, psi0 - 3.0 * psi0 * A * A, harmonics,
                           c=c, b=b, speed_coefficient=omega2, psi0=float(psi0))


def general_stokes_coeffs(alpha: float) -> tuple[float, float, float]:
    """Linear-response coefficients ``(a₁, a₂, γ₂)`` of the mean near ``(c, b) = (1/2, 0)``.

    Raises
    ------
    DegenerateExpansion
        If ``alpha`` is within ``1e-6`` of :func:`alpha_critical`.
    """
    alpha = float(alpha)
    if abs(alpha - alpha_critical()) < 1e-6:
        raise DegenerateExpansion("gamma2 vanishes at the critical fractional order")
    p = 2.0 ** alpha
    g2 = gamma2(alpha)
    a1 = 3.0 / (8.0 * g2) * (4.0 - p) / (p - 1.0)
    a2 = 3.0 / (2.0 * g2) * (2.0 + p) / (p - 1.0)
    return a1, a2, g2


def sigma0_sign_prediction(alpha: float) -> int:
    """Sign of σ₀ on small even waves, equal to ``sign(a₂)``."""
    _, a2, _ = general_stokes_coeffs(alpha)
    return 1 if a2 > 0 else -1


def stokes_slope_prediction(alpha: float) -> float:
    """Small-amplitude limit of ``d‖φ‖²/dω`` along the even family."""
    _, alpha = _check(0.0, alpha)
    p = 2.0 ** alpha
    return 2.0 * math.pi / 3.0 * (p - 1.0) / (p + 2.0)
