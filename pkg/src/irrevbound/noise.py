"""Measurement error model and synthetic tomography shot noise."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import EnergyConvention, densities_from_bloch
from .io import write_csv
from .ledger import DEFAULT_CONVENTION, LEDGER_COLUMNS, BathConvention, EntropyLedger, ledger_from_bloch
from .twolevel import SteadySpectrum, Trajectory

ERROR_COLUMNS = tuple(f"{c}_err" for c in LEDGER_COLUMNS[1:])


@dataclass(frozen=True)
class NoiseModel:
    n_shots: int = 10000
    eps_exp: float = 0.01

    def __post_init__(self):
        if int(self.n_shots) != self.n_shots or self.n_shots < 1:
            raise ValueError("n_shots must be a positive integer")
        if self.eps_exp < 0:
            raise ValueError("eps_exp must be >= 0")


def projection_noise(p: float, n: int) -> float:
    """Binomial standard error of a population estimated from ``n`` shots."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(p * (1.0 - p) / n)


def entropy_error(p_g: float, n: int) -> float:
    """Propagated projection-noise error of the entropy of ``diag(p_g, 1 - p_g)``."""
    if p_g in (0.0, 1.0):
        return 0.0
    if not 0.0 < p_g < 1.0:
        raise ValueError(f"p_g must lie in [0, 1], got {p_g}")
    eps = projection_noise(p_g, n)
    return eps * math.sqrt((1.0 + math.log(p_g)) ** 2 + (1.0 + math.log1p(-p_g)) ** 2)


def entropy_error_floor(p_g: float, eps_exp: float, n: int = NoiseModel.n_shots) -> float:
    """Entropy error including a systematic population floor ``eps_exp``.

    The floor term ``eps_exp ln(1/min(p_g, 1 - p_g))`` is added in quadrature
    to the projection-noise error.
    """
    if not 0.0 < p_g < 1.0:
        raise ValueError(f"p_g must lie in (0, 1), got {p_g}")
    floor = eps_exp * math.log(1.0 / min(p_g, 1.0 - p_g))
    return math.hypot(entropy_error(p_g, n), floor)


def error_model_curves(p_grid, n: int, eps_exp: float):
    """``(theoretical, floor)`` entropy-error curves over ``p_grid``."""
    p_grid = np.asarray(p_grid, float)
    theo = np.array([entropy_error(p, n) for p in p_grid])
    floor = np.array([entropy_error_floor(p, eps_exp, n) for p in p_grid])
    return theo, floor


@dataclass(frozen=True)
class NoisyEstimate:
    times: np.ndarray
    bloch: np.ndarray
    bloch_err: np.ndarray
    populations: np.ndarray  # rho_22 estimates
    populations_err: np.ndarray

    @property
    def states(self):
        return densities_from_bloch(self.bloch)


def _clamp_to_ball(R):
    n = np.linalg.norm(R, axis=-1, keepdims=True)
    return np.where(n > 1.0, R / np.where(n > 0, n, 1.0), R)


def _tomography(R, n_shots, rng):
    """Three-axis projective tomography of Bloch vectors ``R``."""
    prob = np.clip(0.5 * (1.0 + R), 0.0, 1.0)
    counts = rng.binomial(n_shots, prob)
    phat = counts / n_shots
    est = _clamp_to_ball(2.0 * phat - 1.0)
    err = 2.0 * np.sqrt(phat * (1.0 - phat) / n_shots)
    return est, err, phat


def simulate_shots(traj: Trajectory, model: NoiseModel = NoiseModel(), seed: int = 0) -> NoisyEstimate:
    """Noisy Bloch-vector estimates with ``n_shots`` per axis and time point."""
    if traj.dim != 2:
        raise ValueError("shot simulation is defined for two-level trajectories")
    R = traj.bloch if traj.bloch is not None else np.array(
        [[2 * s[0, 1].real, 2 * s[0, 1].imag, (s[1, 1] - s[0, 0]).real] for s in traj.states])
    rng = np.random.default_rng(seed)
    est, err, phat = _tomography(np.asarray(R, float), int(model.n_shots), rng)
    pop = phat[:, 2]
    pop_err = np.sqrt(pop * (1 - pop) / model.n_shots)
    return NoisyEstimate(np.asarray(traj.times, float), est, err, pop, pop_err)


@dataclass(frozen=True)
class NoisyLedger:
    ledger: EntropyLedger
    errors: dict

    def to_csv(self, path):
        header = LEDGER_COLUMNS + ERROR_COLUMNS
        cols = self.ledger.columns() + tuple(self.errors[c] for c in ERROR_COLUMNS)
        write_csv(path, header, cols)


def noisy_ledger(traj: Trajectory, spec: SteadySpectrum, model: NoiseModel = NoiseModel(), seed: int = 0,
                 e: EnergyConvention = EnergyConvention(), conv: BathConvention = DEFAULT_CONVENTION,
                 n_boot: int = 200) -> NoisyLedger:
    """Ledger of the simulated estimates with parametric-bootstrap errors.

    Each bootstrap replica redraws all tomography counts from the estimated
    probabilities; the ``*_err`` columns are the replica standard deviations
    (non-finite replicas skipped).
    """
    est = simulate_shots(traj, model, seed)
    base = ledger_from_bloch(est.times, est.bloch, spec, e, conv)
    rng = np.random.default_rng([seed, 1])
    prob = np.clip(0.5 * (1.0 + est.bloch), 0.0, 1.0)
    reps = {c: [] for c in LEDGER_COLUMNS[1:]}
    for _ in range(n_boot):
        counts = rng.binomial(int(model.n_shots), prob)
        Rb = _clamp_to_ball(2.0 * counts / model.n_shots - 1.0)
        lb = ledger_from_bloch(est.times, Rb, spec, e, conv)
        for name, col in zip(LEDGER_COLUMNS[1:], lb.columns()[1:]):
            reps[name].append(col)
    errors = {}
    for name in LEDGER_COLUMNS[1:]:
        arr = np.array(reps[name])
        arr = np.where(np.isfinite(arr), arr, np.nan)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            std = np.nanstd(arr, axis=0, ddof=1) if n_boot > 1 else np.zeros(arr.shape[1])
        errors[f"{name}_err"] = np.where(np.isnan(std), np.inf, std)
    return NoisyLedger(base, errors)
