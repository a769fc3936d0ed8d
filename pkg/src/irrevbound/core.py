"""Density matrices, Bloch vectors and entropy functionals.

Basis ordering is ``(|1>, |2>)`` with ``|1>`` the ground and ``|2>`` the
excited level.  A qubit state is

    rho = (I + x sx + y sy + z sz) / 2,   sz = |2><2| - |1><1|,

with the usual spin-up-first Pauli matrices, which in ``(|1>, |2>)`` ordering
reads ``rho_11 = (1 - z)/2``, ``rho_22 = (1 + z)/2`` and
``rho_12 = (x + i y)/2``.  All entropies are in nats.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import UnphysicalStateError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
EIG_FLOOR = 1e-9
BLOCH_TOL = 1e-12


@dataclass(frozen=True)
class EnergyConvention:
    """Bare energies of ``|1>`` and ``|2>``; only ``e2 - e1`` enters physics."""

    e1: float = 0.0
    e2: float = 1.0

    def __post_init__(self):
        if not self.e2 > self.e1:
            raise ValueError(f"need e2 > e1, got e1={self.e1}, e2={self.e2}")

    @property
    def gap(self) -> float:
        return self.e2 - self.e1


class Spectrum2(NamedTuple):
    """Eigen-decomposition of a qubit state.

    ``lambda_plus = (1 + |r|)/2`` pairs with ``eigvec_plus``; each eigenvector
    is ``(a, b)`` in the ``(|1>, |2>)`` basis with ``b`` real and >= 0.
    """

    lambda_minus: float
    lambda_plus: float
    eigvec_minus: np.ndarray
    eigvec_plus: np.ndarray


def validate_density(rho, dim=None):
    """Return ``rho`` as a complex array after checking the state invariants."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 3):
        raise UnphysicalStateError(f"expected a 2x2 or 3x3 matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise UnphysicalStateError(f"expected dimension {dim}, got {rho.shape[0]}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise UnphysicalStateError("matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise UnphysicalStateError(f"trace {np.trace(rho).real!r} differs from 1")
    if np.linalg.eigvalsh(rho)[0] < -EIG_FLOOR:
        raise UnphysicalStateError("matrix has a negative eigenvalue")
    return rho


def density_from_bloch(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError(f"Bloch vector must have 3 components, got shape {r.shape}")
    if np.linalg.norm(r) > 1.0 + BLOCH_TOL:
        raise UnphysicalStateError(f"|r| = {np.linalg.norm(r)!r} exceeds 1")
    x, y, z = r
    return 0.5 * np.array([[1.0 - z, x + 1j * y], [x - 1j * y, 1.0 + z]])


def bloch_from_density(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"Bloch vectors exist for 2x2 states only, got shape {rho.shape}")
    return np.array(
        [2.0 * rho[0, 1].real, 2.0 * rho[0, 1].imag, (rho[1, 1] - rho[0, 0]).real]
    )


def densities_from_bloch(R):
    """Vectorised ``density_from_bloch`` for an ``(n, 3)`` array (no checks)."""
    R = np.asarray(R, dtype=float)
    out = np.empty(R.shape[:-1] + (2, 2), dtype=complex)
    x, y, z = R[..., 0], R[..., 1], R[..., 2]
    out[..., 0, 0] = 0.5 * (1.0 - z)
    out[..., 1, 1] = 0.5 * (1.0 + z)
    out[..., 0, 1] = 0.5 * (x + 1j * y)
    out[..., 1, 0] = 0.5 * (x - 1j * y)
    return out


def _fix_phase(v):
    v = v / np.linalg.norm(v)
    if abs(v[1]) > 1e-15:
        return v * (abs(v[1]) / v[1])
    return np.array([abs(v[0]), 0.0], complex)


def eig2(rho):
    """Closed-form spectrum of a qubit state.

    Eigenvectors follow ``|b_pm|^2 = (|r| pm z)/(2|r|)`` and
    ``a_pm = (pm|r| - z)/(x - i y) b_pm``.  Each is built from whichever
    algebraically equivalent row of the eigen-equation avoids cancellation.
    For ``|r| = 0`` the canonical pair ``(|1>, |2>)`` is returned.
    """
    rho = validate_density(rho, dim=2)
    x, y, z = bloch_from_density(rho)
    n = float(np.sqrt(x * x + y * y + z * z))
    lam_p, lam_m = 0.5 * (1.0 + n), 0.5 * (1.0 - n)
    if n < 1e-15:
        return Spectrum2(lam_m, lam_p, np.array([1.0, 0.0], complex), np.array([0.0, 1.0], complex))
    w = x + 1j * y
    if z >= 0.0:
        v_plus = np.array([w, n + z])
        v_minus = np.array([-(n + z), np.conj(w)])
    else:
        v_plus = np.array([n - z, np.conj(w)])
        v_minus = np.array([w, z - n])
    return Spectrum2(lam_m, lam_p, _fix_phase(v_minus.astype(complex)), _fix_phase(v_plus.astype(complex)))


def _clamped_eigvalsh(rho):
    w = np.linalg.eigvalsh(rho)
    if w[0] < -EIG_FLOOR:
        raise UnphysicalStateError(f"eigenvalue {w[0]!r} below -{EIG_FLOOR}")
    return np.clip(w, 0.0, None)


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0.0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def von_neumann_entropy(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(-np.sum(_xlogx(_clamped_eigvalsh(rho))))


def relative_entropy(rho1, rho2) -> float:
    """``D(rho1 || rho2) = Tr[rho1 (ln rho1 - ln rho2)]``; ``inf`` off support."""
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != rho2.shape:
        raise ValueError(f"dimension mismatch: {rho1.shape} vs {rho2.shape}")
    if np.array_equal(rho1, rho2):
        return 0.0
    p, U = np.linalg.eigh(rho1)
    q, V = np.linalg.eigh(rho2)
    if p[0] < -EIG_FLOOR or q[0] < -EIG_FLOOR:
        raise UnphysicalStateError("negative eigenvalue in relative entropy argument")
    p = np.clip(p, 0.0, None)
    q = np.clip(q, 0.0, None)
    overlap = np.abs(U.conj().T @ V) ** 2  # overlap[i, j] = |<u_i|v_j>|^2
    weight = overlap.T @ p  # weight on each eigenvector of rho2
    if np.any((q == 0.0) & (weight > 1e-14)):
        return float("inf")
    logq = np.where(q > 0.0, np.log(np.where(q > 0.0, q, 1.0)), 0.0)
    d = float(np.sum(_xlogx(p)) - weight @ logq)
    return max(d, 0.0)


def binary_entropy(s) -> float:
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"binary entropy needs s in [0, 1], got {s}")
    return float(-np.sum(_xlogx(np.array([s, 1.0 - s]))))


def bare_energy(rho, energies: EnergyConvention = EnergyConvention()) -> float:
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise ValueError("bare_energy is defined for 2x2 states")
    return float(energies.e1 * rho[0, 0].real + energies.e2 * rho[1, 1].real)
