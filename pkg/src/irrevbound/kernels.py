"""Hot numerical kernels.

Two kernels dominate runtime in sweeps and heatmaps:

* ``dopri5_affine`` -- adaptive Dormand-Prince 5(4) integration of a real
  affine system ``dy/dt = M y + c`` with dense output on a caller-supplied
  time grid.
* ``qubit_entropies`` -- von Neumann entropy of each Bloch vector on a
  trajectory and its relative entropy from a reference Bloch vector.

Each kernel exists as a plain Python/NumPy function (``*_py``) and, when numba
is importable, a compiled twin (``*_nb``).  The public name points at the
compiled version unless ``IRREVBOUND_NUMBA=0``.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    ]
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Difference between the 5th- and 4th-order weights (7 stages, FSAL).
_E = np.array(
    [
        71 / 57600,
        0.0,
        -71 / 16695,
        71 / 1920,
        -17253 / 339200,
        22 / 525,
        -1 / 40,
    ]
)
# Shampine's quartic continuous extension: y(t + th*h) = y + h * K^T P [th, th^2, th^3, th^4].
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


def _dopri5_affine_py(M, c, y0, t_eval, rtol, atol, max_steps, h_max):
    n_eval = t_eval.shape[0]
    dim = y0.shape[0]
    out = np.empty((n_eval, dim))
    out[0, :] = y0
    t_end = t_eval[n_eval - 1]
    worst = 0.0
    if n_eval == 1 or t_end <= t_eval[0]:
        for j in range(1, n_eval):
            out[j, :] = y0
        return out, STATUS_OK, worst, 0

    K = np.zeros((7, dim))
    y = y0.copy()
    t = t_eval[0]
    K[0, :] = M @ y + c

    # Initial step from the scaled derivative norm.
    scale = atol + rtol * np.abs(y)
    d0 = math.sqrt(np.mean((y / scale) ** 2))
    d1 = math.sqrt(np.mean((K[0] / scale) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6 * (t_end - t)
    else:
        h = 0.01 * d0 / d1
    h = min(h, h_max, t_end - t)

    j = 1
    n_steps = 0
    while j < n_eval:
        if n_steps >= max_steps:
            return out, STATUS_MAX_STEPS, worst, n_steps
        if t + h > t_end:
            h = t_end - t
        for s in range(1, 6):
            ys = y.copy()
            for q in range(s):
                ys += h * _A[s, q] * K[q]
            K[s, :] = M @ ys + c
        y_new = y.copy()
        for q in range(6):
            y_new += h * _B[q] * K[q]
        K[6, :] = M @ y_new + c

        err_vec = np.zeros(dim)
        for q in range(7):
            err_vec += h * _E[q] * K[q]
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(np.mean((err_vec / scale) ** 2))
        n_steps += 1

        if err <= 1.0:
            t_new = t + h
            if err > worst:
                worst = err
            # Dense output for every grid time covered by this step.
            while j < n_eval and t_eval[j] <= t_new:
                theta = (t_eval[j] - t) / h
                powers = np.array([theta, theta * theta, theta ** 3, theta ** 4])
                coeff = _P @ powers
                val = y.copy()
                for q in range(7):
                    val += h * coeff[q] * K[q]
                out[j, :] = val
                j += 1
            t = t_new
            y = y_new
            K[0, :] = K[6, :]
            if err == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, 0.9 * err ** -0.2)
            h = min(h * factor, h_max)
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
            # Only a rejected step can underflow; a tiny first guess just grows.
            if h < 1e-14 * max(abs(t), t_end - t_eval[0]):
                return out, STATUS_STEP_UNDERFLOW, worst, n_steps
    return out, STATUS_OK, worst, n_steps


def _qubit_entropies_py(R, r0):
    """Vectorised NumPy path: returns ``(S(r_k), D(r0 || r_k))`` arrays."""
    n = np.sqrt(np.sum(R * R, axis=1))
    n = np.minimum(n, 1.0)
    lam_hi = 0.5 * (1.0 + n)
    lam_lo = 0.5 * (1.0 - n)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = -(lam_hi * np.log(lam_hi)) - np.where(lam_lo > 0.0, lam_lo * np.log(lam_lo), 0.0)

        n0 = min(math.sqrt(float(r0 @ r0)), 1.0)
        s0 = _h2((1.0 + n0) / 2.0)
        proj = np.where(n > 0.0, (R @ r0) / np.where(n > 0.0, n, 1.0), 0.0)
        w_hi = 0.5 * (1.0 + proj)
        w_lo = 0.5 * (1.0 - proj)
        w_lo = np.where(w_lo < 1e-14, 0.0, w_lo)
        cross_lo = np.where(
            w_lo > 0.0,
            np.where(lam_lo > 0.0, -w_lo * np.log(np.where(lam_lo > 0.0, lam_lo, 1.0)), np.inf),
            0.0,
        )
        d = -s0 - w_hi * np.log(lam_hi) + cross_lo
    d = np.where(np.isinf(d), d, np.maximum(d, 0.0))
    return s, d


def _h2(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)


def _qubit_entropies_loop(R, r0):
    m = R.shape[0]
    s = np.empty(m)
    d = np.empty(m)
    n0 = math.sqrt(r0[0] ** 2 + r0[1] ** 2 + r0[2] ** 2)
    if n0 > 1.0:
        n0 = 1.0
    p0 = 0.5 * (1.0 + n0)
    s0 = 0.0
    if 0.0 < p0 < 1.0:
        s0 = -p0 * math.log(p0) - (1.0 - p0) * math.log(1.0 - p0)
    for k in range(m):
        x = R[k, 0]
        y = R[k, 1]
        z = R[k, 2]
        n = math.sqrt(x * x + y * y + z * z)
        if n > 1.0:
            n = 1.0
        lam_hi = 0.5 * (1.0 + n)
        lam_lo = 0.5 * (1.0 - n)
        sk = -lam_hi * math.log(lam_hi)
        if lam_lo > 0.0:
            sk -= lam_lo * math.log(lam_lo)
        s[k] = sk
        if n > 0.0:
            proj = (x * r0[0] + y * r0[1] + z * r0[2]) / n
        else:
            proj = 0.0
        w_hi = 0.5 * (1.0 + proj)
        w_lo = 0.5 * (1.0 - proj)
        if w_lo < 1e-14:
            w_lo = 0.0
        dk = -s0 - w_hi * math.log(lam_hi)
        if w_lo > 0.0:
            if lam_lo > 0.0:
                dk -= w_lo * math.log(lam_lo)
            else:
                dk = math.inf
        if dk < 0.0:
            dk = 0.0
        d[k] = dk
    return s, d


_dopri5_affine_nb = njit(nogil=True, cache=True)(_dopri5_affine_py)
_qubit_entropies_nb = njit(nogil=True, cache=True)(_qubit_entropies_loop)

if USE_NUMBA:
    _dopri5_impl = _dopri5_affine_nb
    _entropies_impl = _qubit_entropies_nb
else:
    _dopri5_impl = _dopri5_affine_py
    _entropies_impl = _qubit_entropies_py


def dopri5_affine(M, c, y0, t_eval, rtol=1e-10, atol=1e-12, max_steps=5_000_000, h_max=np.inf, impl=None):
    """Integrate ``dy/dt = M y + c`` and sample the solution at ``t_eval``.

    ``t_eval`` must be ascending and start at the initial time.  Returns
    ``(Y, status, worst_error, n_steps)``; ``worst_error`` is the largest
    accepted scaled local error (<= 1 on success).
    """
    M = np.ascontiguousarray(M, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    t_eval = np.ascontiguousarray(t_eval, dtype=np.float64)
    fn = _dopri5_impl if impl is None else impl
    return fn(M, c, y0, t_eval, float(rtol), float(atol), int(max_steps), float(h_max))


def qubit_entropies(R, r0, impl=None):
    """Entropy ``S(r_k)`` and relative entropy ``D(r0 || r_k)`` in nats.

    ``R`` is an ``(n, 3)`` array of Bloch vectors.  ``D`` is ``inf`` where the
    support condition fails.
    """
    R = np.ascontiguousarray(R, dtype=np.float64)
    r0 = np.ascontiguousarray(r0, dtype=np.float64)
    fn = _entropies_impl if impl is None else impl
    return fn(R, r0)
