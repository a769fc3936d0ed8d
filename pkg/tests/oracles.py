"""Reference implementations used only by the tests.

These share no code with the package: the dynamics come from the Lindblad
superoperator built with Kronecker products and propagated with a matrix
exponential, and every entropy is taken from a fresh eigen-decomposition.
"""

import mpmath as mp
import numpy as np
from scipy.linalg import expm, logm

KET1 = np.array([1.0, 0.0])
KET2 = np.array([0.0, 1.0])


def hamiltonian(omega):
    return 0.5 * omega * (np.outer(KET1, KET2) + np.outer(KET2, KET1)).astype(complex)


def jump(gamma):
    return np.sqrt(gamma) * np.outer(KET1, KET2).astype(complex)


def superoperator(H, Ls):
    """Row-major vectorised Lindbladian: ``vec(A X B) = kron(A, B.T) vec(X)``."""
    n = H.shape[0]
    eye = np.eye(n)
    S = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for L in Ls:
        LdL = L.conj().T @ L
        S += np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T)
    return S


def propagate(rho0, omega, gamma, times):
    S = superoperator(hamiltonian(omega), [jump(gamma)])
    v0 = np.asarray(rho0, complex).reshape(-1)
    return np.array([(expm(S * t) @ v0).reshape(2, 2) for t in times])


def steady(omega, gamma):
    S = superoperator(hamiltonian(omega), [jump(gamma)])
    w, V = np.linalg.eig(S)
    k = int(np.argmin(np.abs(w)))
    rho = V[:, k].reshape(2, 2)
    return rho / np.trace(rho)


def entropy(rho):
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    lam = lam[lam > 1e-300]
    return float(-np.sum(lam * np.log(lam)))


def rel_entropy(rho1, rho2):
    return float(np.real(np.trace(rho1 @ (logm(rho1) - logm(rho2)))))


def beta_from_state(rho_s, e1=0.0, e2=1.0):
    """``ln(lambda_big / lambda_small)`` over the bare-energy splitting of the eigenbasis."""
    lam, V = np.linalg.eigh(rho_s)
    H0 = np.diag([e1, e2])
    energies = [float(np.real(V[:, k].conj() @ H0 @ V[:, k])) for k in range(2)]
    return np.log(lam[1] / lam[0]) / (energies[0] - energies[1])


def ledger_bare(rho_t, rho_s, e1=0.0, e2=1.0):
    """``(sigma_sys, sigma_bath, D, upsilon)`` relative to ``rho_t[0]`` (bare energies)."""
    beta = beta_from_state(rho_s, e1, e2)
    H0 = np.diag([e1, e2])
    s0 = entropy(rho_t[0])
    E0 = float(np.real(np.trace(H0 @ rho_t[0])))
    out = []
    for rho in rho_t:
        ss = entropy(rho) - s0
        sb = beta * (E0 - float(np.real(np.trace(H0 @ rho))))
        d = rel_entropy(rho_t[0], rho)
        out.append((ss, sb, d, ss + sb - d))
    return np.array(out)


def mp_excited_rho22(ratio, gamma_t, dps=40):
    """High-precision ``rho_22(t)`` from ``|2><2|`` via the mpmath matrix exponential."""
    with mp.workdps(dps):
        om, g = mp.mpf(ratio), mp.mpf(1)
        M = mp.matrix([[-g / 2, 0, 0], [0, -g / 2, -om], [0, om, -g]])
        c = mp.matrix([0, 0, -g])
        r_inf = -(mp.inverse(M) * c)
        r0 = mp.matrix([0, 0, 1])
        r = r_inf + mp.expm(M * mp.mpf(gamma_t)) * (r0 - r_inf)
        return float((1 + r[2]) / 2)


def mp_steady_beta(ratio, dps=40):
    """High-precision ``beta * gap`` for ``Omega/Gamma = ratio`` with ``Gamma = 1``."""
    with mp.workdps(dps):
        om, g = mp.mpf(ratio), mp.mpf(1)
        d = g * g + 2 * om * om
        rho = mp.matrix([[(g * g + om * om) / d, 1j * om * g / d], [-1j * om * g / d, om * om / d]])
        lam, V = mp.eighe(rho)
        e = [mp.re(V[1, k] * mp.conj(V[1, k])) for k in range(2)]
        return float(mp.log(lam[1] / lam[0]) / (e[0] - e[1]))


def three_level_superoperator(omega, omega_tilde, gamma_e):
    e = np.eye(3)
    H = 0.5 * omega * (np.outer(e[1], e[0]) + np.outer(e[0], e[1]))
    H = H + 0.5 * omega_tilde * (np.outer(e[2], e[1]) + np.outer(e[1], e[2]))
    L = np.sqrt(gamma_e) * np.outer(e[0], e[2])
    return superoperator(H.astype(complex), [L.astype(complex)])


def propagate3(rho0, omega, omega_tilde, gamma_e, times):
    S = three_level_superoperator(omega, omega_tilde, gamma_e)
    v0 = np.asarray(rho0, complex).reshape(-1)
    return np.array([(expm(S * t) @ v0).reshape(3, 3) for t in times])


def steady3(omega, omega_tilde, gamma_e):
    S = three_level_superoperator(omega, omega_tilde, gamma_e)
    w, V = np.linalg.eig(S)
    rho = V[:, int(np.argmin(np.abs(w)))].reshape(3, 3)
    return rho / np.trace(rho)
