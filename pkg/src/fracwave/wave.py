"""Containers for solved waves and their zero-mean decomposition."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .spectral import (
    SpectralField,
    apply_fractional_laplacian,
    cubic_dealiased,
    cubic_integral,
    project_zero_mean,
)

Family = Literal["odd-b0", "even-b0", "asymmetric-bnz", "constant"]
FAMILIES = ("odd-b0", "even-b0", "asymmetric-bnz", "constant")


def stationary_residual(psi: SpectralField, alpha: float, c: float, b: float) -> SpectralField:
    """``D^α ψ + c ψ + b - 2 ψ³``."""
    return apply_fractional_laplacian(psi, alpha) + c * psi + b - 2.0 * cubic_dealiased(psi)


def residual_norm(psi: SpectralField, alpha: float, c: float, b: float) -> float:
    """L² norm over the circle of the stationary residual."""
    return math.sqrt(stationary_residual(psi, alpha, c, b).l2_norm_sq())


@dataclass(frozen=True)
class WaveProfile:
    """A solution ψ of ``D^α ψ + c ψ + b = 2 ψ³``.

    Attributes
    ----------
    field : SpectralField
        The profile ψ in its normalized frame.
    alpha, c, b : float
        Equation parameters.
    family : str
        One of ``odd-b0``, ``even-b0``, ``asymmetric-bnz``, ``constant``.
    residual_l2 : float
        L² norm of the residual at the stored parameters.
    normalization : dict
        Translation and sign applied to reach the normalized frame.
    residual_history : tuple of float
        Newton residual norms, one per iterate.
    """

    field: SpectralField
    alpha: float
    c: float
    b: float
    family: str
    residual_l2: float
    normalization: dict = field(default_factory=dict)
    residual_history: tuple = ()

    @property
    def n_modes(self) -> int:
        return self.field.n_modes

    @property
    def mean(self) -> float:
        return self.field.mean()

    def momentum(self) -> float:
        """``‖ψ‖²`` over the circle."""
        return self.field.l2_norm_sq()

    def with_field(self, psi: SpectralField, **changes) -> "WaveProfile":
        return replace(self, field=psi, **changes)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "c": self.c,
            "b": self.b,
            "family": self.family,
            "residual_l2": self.residual_l2,
            "n_modes": self.n_modes,
            "coeffs": self.field.coefficient_triples(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "WaveProfile":
        psi = SpectralField.from_triples(data["n_modes"], data["coeffs"])
        return cls(psi, float(data["alpha"]), float(data["c"]), float(data["b"]),
                   str(data["family"]), float(data["residual_l2"]))

    @classmethod
    def from_json(cls, text: str) -> "WaveProfile":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ZeroMeanWave:
    """Decomposition ψ = a + φ with ω = c - 6a² and β = b + ca - 2a³."""

    phi: SpectralField
    a: float
    omega: float
    beta: float
    alpha: float

    @property
    def c(self) -> float:
        return self.omega + 6.0 * self.a ** 2

    @property
    def b(self) -> float:
        return self.beta - self.omega * self.a - 4.0 * self.a ** 3

    def beta_from_profile(self) -> float:
        """``(1/π)∫(φ³ + 3aφ²)``, which equals β for a solution."""
        return (cubic_integral(self.phi) + 3.0 * self.a * self.phi.l2_norm_sq()) / math.pi

    def phi_norm_sq(self) -> float:
        return self.phi.l2_norm_sq()


def decompose(psi: WaveProfile) -> ZeroMeanWave:
    a = psi.field.mean()
    phi = project_zero_mean(psi.field)
    omega = psi.c - 6.0 * a * a
    beta = psi.b + psi.c * a - 2.0 * a ** 3
    return ZeroMeanWave(phi, a, omega, beta, psi.alpha)


def recompose(zm: ZeroMeanWave, family: str | None = None) -> WaveProfile:
    psi = zm.phi + zm.a
    c, b = zm.c, zm.b
    if family is None:
        family = "even-b0" if abs(b) <= 1e-10 else "asymmetric-bnz"
        if float(np.max(np.abs(zm.phi.coeffs))) == 0.0:
            family = "constant"
    return WaveProfile(psi, zm.alpha, c, b, family, residual_norm(psi, zm.alpha, c, b))
