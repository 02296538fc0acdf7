"""Periodic traveling waves of the fractional modified KdV equation.

Spectral Newton solver, linearized-operator stability analysis, branch
continuation with bifurcation detection, and a variational oracle.
"""

__version__ = "0.1.0"

from .errors import FracwaveError
from .spectral import SpectralField
from .wave import WaveProfile, ZeroMeanWave, decompose, recompose
from .solver import NewtonOptions, newton_solve
from .linops import spectrum, kdv_spectrum
from .continuation import ContinuationOptions, continue_in_c, trace_family, wave_at_c

__all__ = [
    "FracwaveError",
    "SpectralField",
    "WaveProfile",
    "ZeroMeanWave",
    "decompose",
    "recompose",
    "NewtonOptions",
    "newton_solve",
    "spectrum",
    "kdv_spectrum",
    "ContinuationOptions",
    "continue_in_c",
    "trace_family",
    "wave_at_c",
]
