"""Three-level ladder whose middle level is emptied through a fast-decaying one.

``H = (Omega |2><1| + Omega_t |3><2| + h.c.)/2`` with decay ``|3> -> |1>``
at rate ``Gamma_e``.  For ``Gamma_e >> Omega_t >> Omega`` the pair
``(|1>, |2>)`` behaves as a driven two-level system with effective decay
``Gamma = Omega_t^2 / Gamma_e`` and a small population leak into ``|3>``.

The eight-component vector ``(rho11, rho22, rho12, rho21, rho13, rho31,
rho23, rho32)`` obeys ``d/dt vec = A vec - b`` after eliminating ``rho33``.
Propagation uses the equivalent real vector ``(rho11, rho22, Re rho12,
Im rho12, Re rho13, Im rho13, Re rho23, Im rho23)``.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from . import kernels
from .core import EnergyConvention, relative_entropy, validate_density
from .exceptions import IntegrationError
from .twolevel import TWO_PI, SystemParams2, Trajectory, steady_state

VALID_REDUCTION_RATIO = 10.0


@dataclass(frozen=True)
class ThreeLevelParams:
    omega: float
    omega_tilde: float
    gamma_e: float

    def __post_init__(self):
        if min(self.omega, self.omega_tilde, self.gamma_e) < 0:
            raise ValueError("three-level rates must be non-negative")

    @classmethod
    def from_lab(cls, omega_hz_over_2pi, omega_tilde_hz_over_2pi, gamma_e_hz_over_2pi) -> "ThreeLevelParams":
        return cls(TWO_PI * omega_hz_over_2pi, TWO_PI * omega_tilde_hz_over_2pi, TWO_PI * gamma_e_hz_over_2pi)

    @property
    def valid_reduction(self) -> bool:
        return (self.gamma_e >= VALID_REDUCTION_RATIO * self.omega_tilde
                and self.omega_tilde >= VALID_REDUCTION_RATIO * self.omega)

    @property
    def gamma_eff(self) -> float:
        return self.omega_tilde ** 2 / self.gamma_e

    def effective_two_level(self) -> SystemParams2:
        return SystemParams2(omega=self.omega, gamma=self.gamma_eff)


class Liouvillian8(NamedTuple):
    a_matrix: np.ndarray
    b_vector: np.ndarray


def liouvillian(p: ThreeLevelParams) -> Liouvillian8:
    h = 0.5j * p.omega
    ht = 0.5j * p.omega_tilde
    ge = p.gamma_e
    A = np.array(
        [
            [-ge, -ge, h, -h, 0, 0, 0, 0],
            [0, 0, -h, h, 0, 0, ht, -ht],
            [h, -h, 0, 0, ht, 0, 0, 0],
            [-h, h, 0, 0, 0, -ht, 0, 0],
            [0, 0, ht, 0, -ge / 2, 0, -h, 0],
            [0, 0, 0, -ht, 0, -ge / 2, 0, h],
            [ht, 2 * ht, 0, 0, -h, 0, -ge / 2, 0],
            [-ht, -2 * ht, 0, 0, 0, h, 0, -ge / 2],
        ],
        dtype=complex,
    )
    b = np.array([-ge, 0, 0, 0, 0, 0, ht, -ht], dtype=complex)
    return Liouvillian8(A, b)


def vec8_from_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([rho[0, 0], rho[1, 1], rho[0, 1], rho[1, 0], rho[0, 2], rho[2, 0], rho[1, 2], rho[2, 1]])


def density_from_vec8(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.array(
        [
            [v[0], v[2], v[4]],
            [v[3], v[1], v[6]],
            [v[5], v[7], 1.0 - v[0] - v[1]],
        ]
    )


# Real coordinates: complex vec8 = _T @ real8.
_T = np.zeros((8, 8), dtype=complex)
_T[0, 0] = _T[1, 1] = 1.0
for _k, (_row, _col) in enumerate(((2, 3), (4, 5), (6, 7))):
    _T[_row, 2 + 2 * _k] = 1.0
    _T[_row, 3 + 2 * _k] = 1.0j
    _T[_col, 2 + 2 * _k] = 1.0
    _T[_col, 3 + 2 * _k] = -1.0j
_T_INV = np.linalg.inv(_T)


def real_generator(p: ThreeLevelParams):
    """``(M, c)`` with ``dv/dt = M v + c`` in the real coordinates."""
    A, b = liouvillian(p)
    M = _T_INV @ A @ _T
    c = -_T_INV @ b
    return np.ascontiguousarray(M.real), np.ascontiguousarray(c.real)


def real_from_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array(
        [rho[0, 0].real, rho[1, 1].real, rho[0, 1].real, rho[0, 1].imag,
         rho[0, 2].real, rho[0, 2].imag, rho[1, 2].real, rho[1, 2].imag]
    )


def densities_from_real(V) -> np.ndarray:
    V = np.asarray(V, float)
    out = np.empty(V.shape[:-1] + (3, 3), dtype=complex)
    out[..., 0, 0] = V[..., 0]
    out[..., 1, 1] = V[..., 1]
    out[..., 2, 2] = 1.0 - V[..., 0] - V[..., 1]
    for i, j, k in ((0, 1, 2), (0, 2, 4), (1, 2, 6)):
        out[..., i, j] = V[..., k] + 1j * V[..., k + 1]
        out[..., j, i] = V[..., k] - 1j * V[..., k + 1]
    return out


def _check_steady_params(p: ThreeLevelParams):
    if p.gamma_e <= 0:
        raise ValueError("steady state needs gamma_e > 0")
    if p.omega_tilde == 0:
        raise ValueError("steady state is not unique for omega_tilde = 0 (|3> decouples)")


def steady3(p: ThreeLevelParams) -> np.ndarray:
    """Closed-form steady state."""
    _check_steady_params(p)
    om2, ot2, ge = p.omega ** 2, p.omega_tilde ** 2, p.gamma_e
    om, ot = p.omega, p.omega_tilde
    den = 2 * ge * ge * om2 + ot2 * ot2 + 2 * om2 * om2
    r11 = (ge * ge * om2 + ot2 * (ot2 - om2) + om2 * om2) / den
    r22 = (ge * ge * om2 + om2 * om2) / den
    r33 = om2 * ot2 / den
    r12 = 1j * ge * ot2 * om / den
    r13 = ot * om * (om2 - ot2) / den
    r23 = 1j * ge * ot * om2 / den
    return np.array(
        [[r11, r12, r13], [np.conj(r12), r22, r23], [np.conj(r13), np.conj(r23), r33]], dtype=complex
    )


def steady3_linear_solve(p: ThreeLevelParams) -> np.ndarray:
    """Steady state from solving ``A vec = b`` directly."""
    _check_steady_params(p)
    A, b = liouvillian(p)
    return density_from_vec8(np.linalg.solve(A, b))


def _propagate_expm(M, c, v0, grid):
    """Exact affine propagation, one matrix exponential per distinct step."""
    n = M.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = M
    aug[:n, n] = c
    out = np.empty((len(grid), n))
    out[0] = v0
    w = np.r_[v0, 1.0]
    cache = {}
    for k in range(1, len(grid)):
        dt = grid[k] - grid[k - 1]
        key = float(np.float32(dt)) if dt > 0 else 0.0
        P = cache.get(key)
        if P is None or key != dt:
            P = expm(aug * dt)
            if len(cache) < 64:
                cache[key] = P
        w = P @ w
        out[k] = w[:n]
    return out


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] != 0.0 or np.any(np.diff(grid) < 0):
        raise ValueError("time grid must be a non-empty ascending 1-d array starting at 0")
    return grid


def evolve3(rho0, p: ThreeLevelParams, grid, method: str = "expm", rtol=1e-10, atol=1e-12) -> Trajectory:
    """Propagate a three-level state.

    ``method="expm"`` applies the exact propagator and is insensitive to the
    stiffness ``gamma_e >> omega``; ``method="rk"`` uses the adaptive
    Dormand-Prince kernel.
    """
    rho0 = validate_density(rho0, dim=3)
    grid = _check_grid(grid)
    M, c = real_generator(p)
    v0 = real_from_density(rho0)
    if method == "expm":
        V = _propagate_expm(M, c, v0, grid)
    elif method == "rk":
        V, status, worst, _ = kernels.dopri5_affine(M, c, v0, grid, rtol, atol)
        if status != kernels.STATUS_OK:
            raise IntegrationError(f"three-level integration failed (status {status})", worst)
    else:
        raise ValueError(f"unknown method {method!r}")
    states = densities_from_real(V)
    lo = min(float(np.linalg.eigvalsh(s)[0]) for s in states[:: max(1, len(states) // 200)])
    if lo < -1e-8:
        raise IntegrationError("three-level trajectory lost positivity", -lo)
    states[0] = rho0
    return Trajectory(times=grid, states=states, params=p)


def decay_closed_form(p: ThreeLevelParams, t):
    """Populations ``(rho11, rho22, rho33)`` for ``Omega = 0`` from ``|2>``.

    The square root of ``Gamma_e^2 - 4 Omega_t^2`` is taken in complex
    arithmetic, so the underdamped branch is covered too; within ``1e-8``
    (relative) of ``Gamma_e = 2 Omega_t`` the exact propagator is used.
    """
    if p.omega != 0:
        raise ValueError("closed form requires omega = 0")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ge, ot2 = p.gamma_e, p.omega_tilde ** 2
    disc = ge * ge - 4 * ot2
    if abs(disc) < 1e-8 * ge * ge:
        order = np.argsort(t_arr)
        grid = np.r_[0.0, t_arr[order]]
        rho0 = np.zeros((3, 3), complex)
        rho0[1, 1] = 1.0
        st = evolve3(rho0, p, grid).states[1:]
        pops = np.empty((len(t_arr), 3))
        pops[order] = np.real(np.diagonal(st, axis1=1, axis2=2))
        r11, r22, r33 = pops.T
    else:
        s = np.sqrt(complex(disc))
        e_fast = np.exp(-t_arr * (ge + s) / 2)
        e_slow = np.exp(-t_arr * (ge - s) / 2)
        r11 = (8 * ot2 * np.exp(-t_arr * ge / 2) + 2 * s * s + ge * (s - ge) * e_fast
               - ge * (s + ge) * e_slow) / (2 * s * s)
        r33 = ot2 * (np.exp(-t_arr * (ge - s) / 4) - np.exp(-t_arr * (ge + s) / 4)) ** 2 / (s * s)
        r11, r33 = r11.real, r33.real
        r22 = 1.0 - r11 - r33
    if np.ndim(t) == 0:
        return float(r11[0]), float(r22[0]), float(r33[0])
    return r11, r22, r33


def fit_effective_decay(traj: Trajectory) -> float:
    """Rate of the slow exponential decay of ``rho22`` for an ``Omega = 0`` run.

    Fits ``ln rho22`` linearly over ``5/Gamma_e <= t <= 0.5 Gamma_e/Omega_t^2``.
    """
    p = traj.params
    if not isinstance(p, ThreeLevelParams) or traj.dim != 3:
        raise ValueError("fit_effective_decay needs a three-level trajectory")
    if p.omega != 0:
        raise ValueError("fit_effective_decay needs omega = 0")
    if p.omega_tilde <= 0 or p.gamma_e <= 0:
        raise ValueError("fit needs omega_tilde > 0 and gamma_e > 0")
    t = np.asarray(traj.times)
    lo, hi = 5.0 / p.gamma_e, 0.5 * p.gamma_e / p.omega_tilde ** 2
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < 3:
        raise ValueError(f"fit window [{lo:.3g}, {hi:.3g}] holds fewer than 3 grid points")
    pop = traj.population(2)[mask]
    if np.any(pop <= 0) or np.any(np.diff(pop) > 0):
        raise ValueError("rho22 is not monotonically decaying inside the fit window")
    slope, _ = np.polyfit(t[mask], np.log(pop), 1)
    return float(-slope)


@dataclass(frozen=True)
class EffectiveReduction:
    gamma_eff: float
    xi: float
    decay_ratio: float
    lambda_tilde_minus: float
    lambda_tilde_plus: float
    theta_tilde_minus: float
    theta_tilde_plus: float
    beta_tilde: float
    log_ratio: float  # ln(lambda_tilde_minus / lambda_tilde_plus)
    rho_tilde_s: np.ndarray


def effective_reduction(p: ThreeLevelParams, e: EnergyConvention = EnergyConvention()) -> EffectiveReduction:
    if p.gamma_e <= 0 or p.omega_tilde <= 0:
        raise ValueError("effective reduction needs gamma_e > 0 and omega_tilde > 0")
    if p.omega <= 0:
        raise ValueError("effective reduction needs omega > 0")
    om, ge = p.omega, p.gamma_e
    g = p.gamma_eff
    r = g / ge
    om2 = om * om
    xi = om2 * g / (ge * (2 * om2 + g * g))
    G = g * g - r * om2
    R = math.sqrt(4 * g * g * om2 + G * G)
    lam_m = (G + 2 * om2 + R) / (2 * (g * g + 2 * om2))
    lam_p = (G + 2 * om2 - R) / (2 * (g * g + 2 * om2))
    th_p = math.asin(min(1.0, 2 * g * om / math.sqrt(2 * (G * G + 4 * g * g * om2 - G * R))))
    th_m = math.asin(min(1.0, 2 * g * om / math.sqrt(2 * (G * G + 4 * g * g * om2 + G * R))))
    if G == 0.0:
        beta = math.inf  # effective splitting closes at r Omega^2 = Gamma^2
    else:
        beta = 2.0 / e.gap * R / G * math.log((G + 2 * om2 + R) / (2 * (1 - r) * om2))
    log_ratio = math.log(lam_m / lam_p)
    den = 2 * ge * ge * om2 + ge * ge * g * g + 2 * om2 * om2
    rho = np.array(
        [
            [g * g * ge * ge + om2 * ge * (ge - g) + om2 * om2, 1j * ge * ge * g * om],
            [-1j * ge * ge * g * om, ge * ge * om2 + om2 * om2],
        ]
    ) / den
    return EffectiveReduction(g, xi, r, lam_m, lam_p, th_m, th_p, beta, log_ratio, rho)


class SteadyDeviation(NamedTuple):
    t_w: Optional[np.ndarray]
    epsilon_t: np.ndarray


def _steady_for(p):
    if isinstance(p, ThreeLevelParams):
        return steady3(p)
    return steady_state(p)


def steady_deviation(obj, p) -> SteadyDeviation:
    """``D(rho_t || rho_s)`` for a state or for every state of a trajectory."""
    rho_s = _steady_for(p)
    if isinstance(obj, Trajectory):
        eps = np.array([relative_entropy(s, rho_s) for s in obj.states])
        return SteadyDeviation(np.asarray(obj.times), eps)
    return SteadyDeviation(None, np.asarray(relative_entropy(obj, rho_s)))


def waiting_time(gamma: float, eps_target: float) -> float:
    if not 0.0 < eps_target < 1.0:
        raise ValueError("eps_target must lie in (0, 1)")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return -math.log(eps_target) / gamma
