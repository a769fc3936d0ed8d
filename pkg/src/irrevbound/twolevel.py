"""Driven, damped two-level system.

``H = Omega sx / 2`` with zero-temperature decay ``|2> -> |1>`` at rate
``Gamma``.  Rates are angular (s^-1); ``SystemParams2.from_lab`` converts a
Rabi frequency quoted as ``Omega/2pi`` in Hz.

Numerical propagation runs on the Bloch vector, where the master equation is
the affine system

    dx/dt = -Gamma x / 2
    dy/dt = -Gamma y / 2 - Omega z
    dz/dt =  Omega y - Gamma (1 + z)
"""

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from . import kernels
from .core import EnergyConvention, densities_from_bloch, bloch_from_density, validate_density
from .exceptions import IntegrationError

TWO_PI = 2.0 * math.pi
# Tight enough to resolve eigenvalues ~1e-10 of nearly pure steady states.
RTOL = 2.5e-14
ATOL = 1e-16


@dataclass(frozen=True)
class SystemParams2:
    omega: float
    gamma: float

    def __post_init__(self):
        if self.omega < 0.0 or self.gamma < 0.0:
            raise ValueError("omega and gamma must be non-negative")
        if self.omega == 0.0 and self.gamma == 0.0:
            raise ValueError("omega and gamma cannot both vanish")

    @classmethod
    def from_lab(cls, omega_hz_over_2pi: float, gamma_per_s: float) -> "SystemParams2":
        return cls(omega=TWO_PI * omega_hz_over_2pi, gamma=gamma_per_s)

    @classmethod
    def from_ratio(cls, ratio: float, gamma: float = 1.0) -> "SystemParams2":
        return cls(omega=ratio * gamma, gamma=gamma)

    @property
    def ddr(self) -> float:
        return self.omega / self.gamma if self.gamma > 0 else math.inf


class Regime(enum.Enum):
    SMALL = "small"
    INTERMEDIATE = "intermediate"
    LARGE = "large"
    ULTRA_LARGE = "ultra-large"


class TimeScales(NamedTuple):
    tau_a: float
    tau_b: float
    tau_c: float


@dataclass(frozen=True)
class SteadySpectrum:
    """Thermal description of the steady state in its own eigenbasis."""

    lambda_minus: float
    lambda_plus: float
    theta_minus: float
    theta_plus: float
    phi_minus: np.ndarray
    phi_plus: np.ndarray
    delta_e: float
    beta: float
    z_g: float
    log_ratio: float  # ln(lambda_minus / lambda_plus) = beta * delta_e
    energies: EnergyConvention = EnergyConvention()

    @property
    def energy_minus(self) -> float:
        e = self.energies
        return math.cos(self.theta_minus) ** 2 * e.e1 + math.sin(self.theta_minus) ** 2 * e.e2

    @property
    def energy_plus(self) -> float:
        e = self.energies
        return math.cos(self.theta_plus) ** 2 * e.e1 + math.sin(self.theta_plus) ** 2 * e.e2

    def effective_hamiltonian(self) -> np.ndarray:
        sz = np.outer(self.phi_plus, self.phi_plus.conj()) - np.outer(self.phi_minus, self.phi_minus.conj())
        return 0.5 * self.delta_e * sz

    def gibbs_state(self) -> np.ndarray:
        if math.isinf(self.beta):
            return np.outer(self.phi_minus, self.phi_minus.conj())
        h = self.beta * self.delta_e / 2.0
        return (
            math.exp(h) * np.outer(self.phi_minus, self.phi_minus.conj())
            + math.exp(-h) * np.outer(self.phi_plus, self.phi_plus.conj())
        ) / self.z_g


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    params: object
    bloch: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self):
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.states.shape[-1]

    def population(self, level: int) -> np.ndarray:
        """Population of ``|level>`` (1-based, as in the level labels)."""
        return self.states[:, level - 1, level - 1].real


def lindblad_rhs(rho, p: SystemParams2) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    om, g = p.omega, p.gamma
    r11, r12, r21, r22 = rho[0, 0], rho[0, 1], rho[1, 0], rho[1, 1]
    d11 = -0.5j * om * (r21 - r12) + g * r22
    d22 = -0.5j * om * (r12 - r21) - g * r22
    d12 = -0.5j * om * (r22 - r11) - 0.5 * g * r12
    d21 = -0.5j * om * (r11 - r22) - 0.5 * g * r21
    return np.array([[d11, d12], [d21, d22]])


def bloch_generator(p: SystemParams2):
    """``(M, c)`` with ``dr/dt = M r + c`` for the Bloch vector ``r``."""
    om, g = p.omega, p.gamma
    M = np.array([[-g / 2, 0.0, 0.0], [0.0, -g / 2, -om], [0.0, om, -g]])
    c = np.array([0.0, 0.0, -g])
    return M, c


def steady_state(p: SystemParams2) -> np.ndarray:
    if p.gamma <= 0.0:
        raise ValueError("no unique steady state without decay (gamma = 0)")
    om, g = p.omega, p.gamma
    d = g * g + 2 * om * om
    return np.array([[g * g + om * om, 1j * om * g], [-1j * om * g, om * om]]) / d


def steady_spectrum(p: SystemParams2, e: EnergyConvention = EnergyConvention()) -> SteadySpectrum:
    if p.gamma <= 0.0:
        raise ValueError("steady spectrum needs gamma > 0")
    om, g = p.omega, p.gamma
    if om == 0.0:
        phi_m = np.array([1j, 0.0])
        phi_p = np.array([0.0, 1.0 + 0j])
        return SteadySpectrum(1.0, 0.0, 0.0, math.pi / 2, phi_m, phi_p, e.gap, math.inf, math.inf, math.inf, e)
    q = math.sqrt(g * g + 4 * om * om)
    d = g * g + 2 * om * om
    # lambda_plus written without the d - g q cancellation.
    lam_p = 2 * om ** 4 / (d * (d + g * q))
    lam_m = (d + g * q) / (2 * d)
    log_ratio = 2.0 * math.log((d + g * q) / (2 * om * om))
    # arcsin(2 om / sqrt(2 (q^2 -+ g q))) rewritten as sqrt((q +- g) / (2 q)).
    th_p = math.asin(math.sqrt((q + g) / (2 * q)))
    th_m = math.asin(math.sqrt((q - g) / (2 * q)))
    phi_p = np.array([-1j * math.cos(th_p), math.sin(th_p)])
    phi_m = np.array([1j * math.cos(th_m), math.sin(th_m)])
    delta_e = (g / q) * e.gap  # (sin^2 th_p - sin^2 th_m) * gap
    beta = log_ratio / delta_e
    z_g = 1.0 / math.sqrt(lam_m * lam_p)
    return SteadySpectrum(lam_m, lam_p, th_m, th_p, phi_m, phi_p, delta_e, beta, z_g, log_ratio, e)


def beta_closed_form(p: SystemParams2, e: EnergyConvention = EnergyConvention()) -> float:
    """Inverse temperature from its direct (Omega, Gamma) expression."""
    om, g = p.omega, p.gamma
    q = math.sqrt(g * g + 4 * om * om)
    return 2.0 / e.gap * q / g * math.log((g * g + 2 * om * om + g * q) / (2 * om * om))


def time_scales(p: SystemParams2) -> TimeScales:
    if p.gamma <= 0.0:
        raise ValueError("time scales need gamma > 0")
    s = np.sqrt(complex(p.gamma ** 2 - 16 * p.omega ** 2))
    tau_a = 4.0 / (3 * p.gamma + s.real)
    tau_b = 4.0 / (3 * p.gamma - s.real)
    tau_c = 4.0 / s.imag if s.imag > 0 else math.inf
    return TimeScales(tau_a, tau_b, tau_c)


def classify_regime(p: SystemParams2) -> Regime:
    if p.gamma <= 0.0:
        raise ValueError("regimes are defined for gamma > 0")
    ratio = p.ddr
    if ratio < 0.15:
        return Regime.SMALL
    if ratio < 6.25:
        return Regime.INTERMEDIATE
    if ratio < 25.0:
        return Regime.LARGE
    return Regime.ULTRA_LARGE


def default_horizon(p: SystemParams2) -> float:
    rates = [v for v in (p.gamma, p.omega) if v > 0]
    return 30.0 / min(rates)


def shortest_time_scale(p: SystemParams2) -> float:
    if p.gamma == 0.0:
        return 1.0 / p.omega
    ts = time_scales(p)
    return min(ts.tau_a, ts.tau_c)


def default_grid(p: SystemParams2, horizon=None, points_per_scale: int = 400) -> np.ndarray:
    """Uniform grid from 0 with ``points_per_scale`` points per shortest time scale."""
    horizon = default_horizon(p) if horizon is None else float(horizon)
    n = int(math.ceil(points_per_scale * horizon / shortest_time_scale(p))) + 1
    return np.linspace(0.0, horizon, max(n, 2))


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("time grid must be a non-empty 1-d array")
    if grid[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("time grid must be ascending")
    return grid


def evolve_bloch(r0, p: SystemParams2, grid, rtol=RTOL, atol=ATOL) -> np.ndarray:
    """Integrate the Bloch equations; returns an ``(n, 3)`` array."""
    grid = _check_grid(grid)
    M, c = bloch_generator(p)
    R, status, worst, _ = kernels.dopri5_affine(M, c, np.asarray(r0, float), grid, rtol, atol)
    if status != kernels.STATUS_OK:
        raise IntegrationError(f"two-level integration failed (status {status})", worst)
    return R


def evolve(rho0, p: SystemParams2, grid, rtol=RTOL, atol=ATOL) -> Trajectory:
    rho0 = validate_density(rho0, dim=2)
    r0 = bloch_from_density(rho0)
    R = evolve_bloch(r0, p, grid, rtol, atol)
    norms = np.linalg.norm(R, axis=1)
    if np.any(norms > 1.0 + 1e-9):
        raise IntegrationError("trajectory left the Bloch ball", float(norms.max() - 1.0))
    states = densities_from_bloch(R)
    states[0] = rho0
    return Trajectory(times=np.asarray(grid, float), states=states, params=p, bloch=R)


def propagate_exact(r0, p: SystemParams2, times) -> np.ndarray:
    """Bloch trajectory from the matrix exponential of the affine generator."""
    M, c = bloch_generator(p)
    A = np.zeros((4, 4))
    A[:3, :3] = M
    A[:3, 3] = c
    v0 = np.r_[np.asarray(r0, float), 1.0]
    return np.array([(expm(A * t) @ v0)[:3] for t in np.atleast_1d(times)])


def analytic_excited_trajectory(p: SystemParams2, t):
    """Closed-form state at time(s) ``t`` for the start ``|2><2|``.

    The square root of ``Gamma^2 - 16 Omega^2`` is taken in complex
    arithmetic so the same expression covers the oscillatory and overdamped
    branches.  Within ``1e-8 Gamma^2`` of critical damping the expression is
    0/0 and the matrix exponential of the generator is used instead.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    om, g = p.omega, p.gamma
    disc = g * g - 16 * om * om
    if g > 0 and abs(disc) < 1e-8 * g * g:
        out = densities_from_bloch(propagate_exact([0.0, 0.0, 1.0], p, t_arr))
        return out if np.ndim(t) else out[0]
    s = np.sqrt(complex(disc))
    d = g * g + 2 * om * om
    # e^{-t(3G+s)/4} and e^{-t(3G-s)/4}: the printed form regrouped so no factor overflows.
    a = np.exp(-t_arr * (3 * g + s) / 4)
    b = np.exp(-t_arr * (3 * g - s) / 4)
    rho22 = ((g * (g * g + 5 * om * om) * (a - b) + (g * g + om * om) * s * (a + b)) / (2 * d * s)).real
    rho22 = rho22 + om * om / d
    rho12 = 1j * om / (2 * d * s) * ((5 * g * g + 4 * om * om) * (a - b) - g * s * (a + b) + 2 * g * s)
    # rho12 is purely imaginary for real parameters; drop round-off real part.
    rho12 = 1j * rho12.imag
    out = np.empty((t_arr.size, 2, 2), dtype=complex)
    out[:, 0, 0] = 1.0 - rho22
    out[:, 1, 1] = rho22
    out[:, 0, 1] = rho12
    out[:, 1, 0] = np.conj(rho12)
    return out if np.ndim(t) else out[0]
