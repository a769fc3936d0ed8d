"""Entropy bookkeeping along a two-level trajectory.

For a trajectory ``rho(t)`` relaxing towards the steady state the ledger holds

    sigma_sys(t)   = S(rho(t)) - S(rho(0))
    sigma_bath(t)  = heat-like term, see ``BathConvention``
    sigma_total(t) = sigma_sys(t) + sigma_bath(t)
    D(t)           = D(rho(0) || rho(t))
    upsilon(t)     = sigma_total(t) - D(t)

A negative ``upsilon`` means the entropy produced over ``[0, t]`` is smaller
than the information-theoretic lower bound ``D``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import EnergyConvention, bloch_from_density, binary_entropy
from .exceptions import RegimeError
from .io import write_csv
from .twolevel import SteadySpectrum, SystemParams2, Trajectory

LEDGER_COLUMNS = ("t", "sigma_sys", "sigma_bath", "sigma_total", "rel_entropy", "upsilon")


class BathConvention(enum.Enum):
    """How the bath entropy change is read off the system state.

    ``BARE_EIGEN_ENERGY``
        ``beta * [E(rho(0)) - E(rho(t))]`` with ``E`` the bare-level energy
        and ``beta`` the steady-state inverse temperature.
    ``EFFECTIVE_BASIS``
        ``ln(lambda_-/lambda_+) * [p_-(t) - p_-(0)]`` with
        ``p_- = <phi_-|rho|phi_->`` the weight on the lower steady eigenvector.
    ``EFFECTIVE_SPACING``
        ``ln(lambda_-/lambda_+) * [rho_11(t) - rho_11(0)]``: bare populations
        paired with the effective level spacing.
    """

    BARE_EIGEN_ENERGY = "bare"
    EFFECTIVE_BASIS = "effective-basis"
    EFFECTIVE_SPACING = "effective-spacing"

    @classmethod
    def parse(cls, value) -> "BathConvention":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        table = {
            "bare": cls.BARE_EIGEN_ENERGY,
            "bareeigenenergy": cls.BARE_EIGEN_ENERGY,
            "effectivebasis": cls.EFFECTIVE_BASIS,
            "effectivespacing": cls.EFFECTIVE_SPACING,
        }
        if key not in table:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown bath convention {value!r}; expected one of {names}")
        return table[key]


DEFAULT_CONVENTION = BathConvention.BARE_EIGEN_ENERGY


@dataclass(frozen=True)
class EntropyLedger:
    times: np.ndarray
    sigma_sys: np.ndarray
    sigma_bath: np.ndarray
    sigma_total: np.ndarray
    rel_entropy: np.ndarray
    upsilon: np.ndarray
    convention: BathConvention = DEFAULT_CONVENTION

    def __len__(self):
        return len(self.times)

    def columns(self):
        return (self.times, self.sigma_sys, self.sigma_bath, self.sigma_total, self.rel_entropy, self.upsilon)

    def to_csv(self, path):
        write_csv(path, LEDGER_COLUMNS, self.columns())


def _scaled(coeff, delta):
    # coeff may be +inf (pure steady state); inf * 0 is taken as 0.
    if not math.isinf(coeff):
        return coeff * delta
    with np.errstate(invalid="ignore"):
        return np.where(delta == 0.0, 0.0, coeff * delta)


def bath_entropy(R, spec: SteadySpectrum, e: EnergyConvention = EnergyConvention(),
                 conv: BathConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """Bath entropy change relative to ``R[0]`` for an ``(n, 3)`` Bloch array."""
    R = np.asarray(R, float)
    conv = BathConvention.parse(conv)
    rho11 = 0.5 * (1.0 - R[:, 2])
    rho22 = 0.5 * (1.0 + R[:, 2])
    if conv is BathConvention.BARE_EIGEN_ENERGY:
        energy = e.e1 * rho11 + e.e2 * rho22
        return _scaled(spec.beta, energy[0] - energy)
    if conv is BathConvention.EFFECTIVE_BASIS:
        c2 = math.cos(spec.theta_minus) ** 2
        s2 = math.sin(spec.theta_minus) ** 2
        p_minus = c2 * rho11 + s2 * rho22 + math.sin(2 * spec.theta_minus) * 0.5 * R[:, 1]
        return _scaled(spec.log_ratio, p_minus - p_minus[0])
    return _scaled(spec.log_ratio, rho11 - rho11[0])


def ledger_from_bloch(times, R, spec: SteadySpectrum, e: EnergyConvention = EnergyConvention(),
                      conv: BathConvention = DEFAULT_CONVENTION) -> EntropyLedger:
    """Ledger for a Bloch-vector trajectory ``R`` sampled at ``times``."""
    R = np.ascontiguousarray(R, dtype=float)
    if R.ndim != 2 or R.shape[1] != 3 or R.shape[0] == 0:
        raise ValueError("expected a non-empty (n, 3) Bloch array")
    conv = BathConvention.parse(conv)
    S, D = kernels.qubit_entropies(R, R[0])
    sigma_sys = S - S[0]
    sigma_bath = bath_entropy(R, spec, e, conv)
    sigma_sys[0] = 0.0
    sigma_bath[0] = 0.0
    D[0] = 0.0
    total = sigma_sys + sigma_bath
    with np.errstate(invalid="ignore"):
        upsilon = total - D
    return EntropyLedger(np.asarray(times, float), sigma_sys, sigma_bath, total, D, upsilon, conv)


def entropy_ledger(traj: Trajectory, spec: SteadySpectrum, e: EnergyConvention = EnergyConvention(),
                   conv: BathConvention = DEFAULT_CONVENTION) -> EntropyLedger:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if traj.dim != 2:
        raise ValueError("the entropy ledger is defined for two-level trajectories")
    R = traj.bloch if traj.bloch is not None else np.array([bloch_from_density(s) for s in traj.states])
    return ledger_from_bloch(traj.times, R, spec, e, conv)


def asymptotic_upsilon_small(p: SystemParams2, t: float) -> float:
    """Short-time balance parameter for a weakly driven ``|2>`` start."""
    if p.gamma <= 0 or p.omega <= 0 or p.ddr >= 0.15:
        raise RegimeError(f"small-DDR form needs 0 < omega/gamma < 0.15, got {p.ddr}")
    gt = p.gamma * t
    if not 0.0 <= gt < 0.2:
        raise RegimeError(f"small-DDR form needs 0 <= gamma t < 0.2, got {gt}")
    return binary_entropy(gt) + 4.0 * gt * math.log(p.gamma / p.omega) - gt


def asymptotic_upsilon_ultralarge(p: SystemParams2, t: float) -> float:
    """Short-time balance parameter for a strongly driven ``|2>`` start."""
    if p.omega <= 0 or p.ddr < 25.0:
        raise RegimeError(f"ultra-large form needs omega/gamma >= 25, got {p.ddr}")
    ot = p.omega * t
    if not 0.0 <= ot < 0.5:
        raise RegimeError(f"ultra-large form needs 0 <= omega t < 0.5, got {ot}")
    if ot == 0.0:
        return 0.0
    om, g = p.omega, p.gamma
    return (2 * g - om * (math.log(4.0) - 1.0 - 2.0 * math.log(ot))) * om * t * t / 4.0


def critical_time(p: SystemParams2) -> float:
    """Zero of the ultra-large short-time balance parameter."""
    if p.omega <= 0 or p.ddr < 25.0:
        raise RegimeError(f"critical time needs omega/gamma >= 25, got {p.ddr}")
    return 2.0 / p.omega * math.exp(-(p.omega + 2 * p.gamma) / (2 * p.omega))


def min_upsilon(ledger: EntropyLedger):
    """Global minimum ``(t_star, value)`` of ``upsilon``, refined by a parabola.

    Non-finite entries are skipped.  The parabola through the grid minimum and
    its two neighbours is used only when it is convex and its vertex lies
    between them.
    """
    u = np.asarray(ledger.upsilon, float)
    t = np.asarray(ledger.times, float)
    finite = np.isfinite(u)
    if not finite.any():
        raise ValueError("no finite upsilon entries")
    k = int(np.argmin(np.where(finite, u, np.inf)))
    t_star, value = float(t[k]), float(u[k])
    if 0 < k < len(u) - 1 and finite[k - 1] and finite[k + 1]:
        t0, t1, t2 = t[k - 1], t[k], t[k + 1]
        u0, u1, u2 = u[k - 1], u[k], u[k + 1]
        denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
        a = (t2 * (u1 - u0) + t1 * (u0 - u2) + t0 * (u2 - u1)) / denom
        b = (t2 * t2 * (u0 - u1) + t1 * t1 * (u2 - u0) + t0 * t0 * (u1 - u2)) / denom
        if a > 0:
            tv = -b / (2 * a)
            if t0 < tv < t2:
                c = u1 - a * t1 * t1 - b * t1
                uv = a * tv * tv + b * tv + c
                if uv < value:
                    t_star, value = float(tv), float(uv)
    return t_star, value


def sign_changes(ledger: EntropyLedger, tol: float = 0.0):
    """Interpolated times where ``upsilon`` changes sign, with direction.

    Entries with ``|upsilon| <= tol`` or non-finite values are treated as
    carrying no sign.  Returns a list of ``(t, +1 | -1)`` where ``+1`` marks a
    crossing from negative to positive.
    """
    u = np.asarray(ledger.upsilon, float)
    t = np.asarray(ledger.times, float)
    out = []
    prev_k = None
    for k in range(1, len(u)):
        if not np.isfinite(u[k]) or abs(u[k]) <= tol:
            continue
        if prev_k is not None and np.sign(u[k]) != np.sign(u[prev_k]):
            tc = t[prev_k] + (t[k] - t[prev_k]) * u[prev_k] / (u[prev_k] - u[k])
            out.append((float(tc), int(np.sign(u[k]))))
        prev_k = k
    return out
