"""Initial states given by a Bloch vector, and preparation by pre-evolution."""

import math
from dataclasses import dataclass

import numpy as np

from .core import BLOCH_TOL, EnergyConvention, binary_entropy
from .exceptions import UnphysicalStateError
from .twolevel import SteadySpectrum, SystemParams2, evolve

EXCITED = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
GROUND = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class InitialStateReport:
    bloch: np.ndarray
    lambda_minus: float
    lambda_plus: float
    energy_minus: float
    energy_plus: float
    delta_e: float
    s_sys: float
    s_bath: float


def eigen_energies(r, e: EnergyConvention = EnergyConvention()):
    """``(E_-, E_+)``: bare energies of the state's own eigenvectors.

    At ``|r| = 0`` both are ``(E1 + E2)/2``, the limit along any direction
    of approach with ``z = 0``.
    """
    x, y, z = np.asarray(r, float)
    n = math.sqrt(x * x + y * y + z * z)
    if n == 0.0:
        mid = 0.5 * (e.e1 + e.e2)
        return mid, mid
    e_plus = ((n + z) * e.e2 + (n - z) * e.e1) / (2 * n)
    e_minus = ((n - z) * e.e2 + (n + z) * e.e1) / (2 * n)
    return e_minus, e_plus


def characterize_initial(r, spec: SteadySpectrum, e: EnergyConvention = EnergyConvention()) -> InitialStateReport:
    r = np.asarray(r, float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have 3 components")
    n = float(np.linalg.norm(r))
    if n > 1.0 + BLOCH_TOL:
        raise UnphysicalStateError(f"|r| = {n!r} exceeds 1")
    n = min(n, 1.0)
    lam_p, lam_m = 0.5 * (1 + n), 0.5 * (1 - n)
    e_minus, e_plus = eigen_energies(r, e)
    mean_energy = e_plus * lam_p + e_minus * lam_m
    if math.isinf(spec.beta):
        s_bath = -math.copysign(math.inf, mean_energy) if mean_energy != 0 else 0.0
    else:
        s_bath = -spec.beta * mean_energy
    return InitialStateReport(
        bloch=r.copy(),
        lambda_minus=lam_m,
        lambda_plus=lam_p,
        energy_minus=e_minus,
        energy_plus=e_plus,
        delta_e=e_plus - e_minus,
        s_sys=binary_entropy(lam_p),
        s_bath=s_bath,
    )


def bloch_on_slice(z: float, r: float) -> np.ndarray:
    """Bloch vector with ``x = 0`` and ``y = +sqrt(r^2 - z^2)``."""
    if r < 0 or abs(z) > r + BLOCH_TOL or r > 1 + BLOCH_TOL:
        raise UnphysicalStateError(f"no state with |r| = {r}, z = {z}")
    return np.array([0.0, math.sqrt(max(r * r - z * z, 0.0)), z])


def prepare_by_pre_evolution(p: SystemParams2, tau0: float) -> np.ndarray:
    """State reached from ``|2><2|`` after evolving for ``tau0`` under ``p``."""
    if tau0 < 0:
        raise ValueError("tau0 must be >= 0")
    grid = np.array([0.0]) if tau0 == 0 else np.array([0.0, float(tau0)])
    return evolve(EXCITED, p, grid).states[-1]
