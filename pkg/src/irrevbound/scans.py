"""Parameter sweeps over the drive-to-decay ratio and over initial Bloch vectors."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import kernels
from .core import EnergyConvention, bloch_from_density, validate_density
from .exceptions import BracketError, IntegrationError
from .initial import bloch_on_slice
from .io import write_csv, write_json
from .ledger import DEFAULT_CONVENTION, BathConvention, bath_entropy
from .twolevel import ATOL, RTOL, SystemParams2, bloch_generator, shortest_time_scale, steady_spectrum

DEFAULT_HORIZON_FACTOR = 30.0
DEFAULT_POINTS_PER_SCALE = 400
DEFAULT_SWEEP_POINTS = 61
DEFAULT_GRID_SIZE = 41
CONTOUR_TOL = 1e-4
VIOLATION_TOL = 1e-9
_CHUNK = 200_000


@dataclass(frozen=True)
class SweepResult:
    axis: np.ndarray
    min_upsilon: np.ndarray
    t_star: np.ndarray
    failed: Tuple[int, ...] = ()

    def to_csv(self, path):
        write_csv(path, ("ratio", "min_upsilon", "t_star"), (self.axis, self.min_upsilon, self.t_star))


@dataclass(frozen=True)
class HeatmapResult:
    z_grid: np.ndarray
    r_grid: np.ndarray
    min_upsilon: np.ndarray  # shape (len(z_grid), len(r_grid)); nan where |z| > r
    zero_contour: List[Tuple[float, float]] = field(default_factory=list)
    params: Optional[SystemParams2] = None
    convention: BathConvention = DEFAULT_CONVENTION
    contour_tol: float = CONTOUR_TOL

    def valid_cells(self):
        """Iterate ``(z, r, min_upsilon)`` over cells holding a physical state."""
        for i, z in enumerate(self.z_grid):
            for j, r in enumerate(self.r_grid):
                v = self.min_upsilon[i, j]
                if not np.isnan(v):
                    yield float(z), float(r), float(v)

    def write(self, csv_path, json_path):
        cells = list(self.valid_cells())
        write_csv(csv_path, ("z", "r", "min_upsilon"), tuple(np.array(c) for c in zip(*cells)) if cells else ([], [], []))
        meta = {
            "z_grid": [float(v) for v in self.z_grid],
            "r_grid": [float(v) for v in self.r_grid],
            "convention": self.convention.value,
            "contour_tol": self.contour_tol,
            "zero_contour": [[float(a), float(b)] for a, b in self.zero_contour],
        }
        if self.params is not None:
            meta["omega"] = self.params.omega
            meta["gamma"] = self.params.gamma
        write_json(json_path, meta)


def horizon_for(p: SystemParams2, horizon_factor: float = DEFAULT_HORIZON_FACTOR) -> float:
    rates = [v for v in (p.gamma, p.omega) if v > 0]
    return horizon_factor / min(rates)


def sweep_grid(p: SystemParams2, horizon_factor=DEFAULT_HORIZON_FACTOR,
               points_per_scale=DEFAULT_POINTS_PER_SCALE) -> np.ndarray:
    horizon = horizon_for(p, horizon_factor)
    n = int(math.ceil(points_per_scale * horizon / shortest_time_scale(p))) + 1
    return np.linspace(0.0, horizon, n)


def _min_upsilon_streaming(r0, p, grid, conv, e):
    """Grid minimum of upsilon for the start ``r0``, integrating chunk by chunk."""
    spec = steady_spectrum(p, e)
    M, c = bloch_generator(p)
    r0 = np.asarray(r0, float)
    S0 = kernels.qubit_entropies(r0[None, :], r0)[0][0]
    best_t, best_u = 0.0, 0.0
    start = 0
    y = r0.copy()
    while start < len(grid) - 1:
        stop = min(start + _CHUNK, len(grid) - 1)
        t_chunk = grid[start:stop + 1]
        R, status, worst, _ = kernels.dopri5_affine(M, c, y, t_chunk - t_chunk[0], RTOL, ATOL)
        if status != kernels.STATUS_OK:
            raise IntegrationError(f"integration failed (status {status})", worst)
        S, D = kernels.qubit_entropies(R[1:], r0)
        bath = bath_entropy(np.vstack([r0, R[1:]]), spec, e, conv)[1:]
        with np.errstate(invalid="ignore"):
            u = (S - S0) + bath - D
        u = np.where(np.isfinite(u), u, np.inf)
        k = int(np.argmin(u))
        if u[k] < best_u:
            best_u, best_t = float(u[k]), float(t_chunk[k + 1])
        y = R[-1].copy()
        start = stop
    return best_t, best_u


def _parallel_map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def ddr_sweep(initial, ratios=None, horizon_factor: float = DEFAULT_HORIZON_FACTOR,
              conv: BathConvention = DEFAULT_CONVENTION, e: EnergyConvention = EnergyConvention(),
              points_per_scale: int = DEFAULT_POINTS_PER_SCALE, gamma: float = 1.0,
              threads: int = 1) -> SweepResult:
    """Minimum balance parameter versus ``Omega/Gamma`` for a fixed start.

    Points whose integration fails are reported in ``failed`` and carry
    ``nan``; they do not abort the sweep.
    """
    if ratios is None:
        ratios = np.logspace(-2, 2, DEFAULT_SWEEP_POINTS)
    ratios = np.asarray(ratios, float)
    if ratios.ndim != 1 or ratios.size == 0:
        raise ValueError("ratios must be a non-empty 1-d grid")
    if np.any(ratios < 1e-3) or np.any(ratios > 1e3):
        raise ValueError("ratios must lie in [1e-3, 1e3]")
    if horizon_factor < 20:
        raise ValueError("horizon_factor must be at least 20 relaxation times")
    r0 = bloch_from_density(validate_density(initial, dim=2))
    conv = BathConvention.parse(conv)

    def work(ratio):
        p = SystemParams2.from_ratio(float(ratio), gamma)
        try:
            return _min_upsilon_streaming(r0, p, sweep_grid(p, horizon_factor, points_per_scale), conv, e)
        except IntegrationError:
            return None

    results = _parallel_map(work, ratios, threads)
    failed = tuple(i for i, res in enumerate(results) if res is None)
    t_star = np.array([np.nan if res is None else res[0] for res in results])
    mins = np.array([np.nan if res is None else res[1] for res in results])
    return SweepResult(ratios, mins, t_star, failed)


def min_upsilon_at(initial, ratio: float, **kwargs) -> float:
    return float(ddr_sweep(initial, [ratio], **kwargs).min_upsilon[0])


def find_violation_threshold(initial, bracket=(1.0, 1e3), rel_tol: float = 1e-3,
                             tol: float = VIOLATION_TOL, **kwargs) -> float:
    """Smallest ``Omega/Gamma`` in ``bracket`` at which ``min upsilon < -tol``.

    Bisects in ``log(Omega/Gamma)``; requires the bound to hold at the lower
    end and fail at the upper end.
    """
    lo, hi = float(bracket[0]), float(bracket[1])

    def violated(ratio):
        return min_upsilon_at(initial, ratio, **kwargs) < -tol

    if violated(lo):
        raise BracketError(f"bound already violated at omega/gamma = {lo}")
    if not violated(hi):
        raise BracketError(f"bound holds across the bracket [{lo}, {hi}]")
    while hi / lo > 1.0 + rel_tol:
        mid = math.sqrt(lo * hi)
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return math.sqrt(lo * hi)


def affine_basis(p: SystemParams2, grid):
    """``(U, Phi)`` with ``r(t) = U(t) + Phi(t) r0`` for every start ``r0``."""
    M, c = bloch_generator(p)
    U, status, worst, _ = kernels.dopri5_affine(M, c, np.zeros(3), grid, RTOL, ATOL)
    if status != kernels.STATUS_OK:
        raise IntegrationError(f"integration failed (status {status})", worst)
    Phi = np.empty((len(grid), 3, 3))
    zero = np.zeros(3)
    for k in range(3):
        col, status, worst, _ = kernels.dopri5_affine(M, zero, np.eye(3)[k], grid, RTOL, ATOL)
        if status != kernels.STATUS_OK:
            raise IntegrationError(f"integration failed (status {status})", worst)
        Phi[:, :, k] = col
    return U, Phi


def bloch_grid_scan(p: SystemParams2, z_grid=None, r_grid=None, conv: BathConvention = DEFAULT_CONVENTION,
                    e: EnergyConvention = EnergyConvention(), horizon_factor: float = DEFAULT_HORIZON_FACTOR,
                    points_per_scale: int = DEFAULT_POINTS_PER_SCALE, contour_tol: float = CONTOUR_TOL,
                    threads: int = 1) -> HeatmapResult:
    """Minimum balance parameter over starts ``(0, +sqrt(r^2 - z^2), z)``.

    The dynamics are affine in the initial Bloch vector, so four integrations
    give every cell's trajectory by superposition.
    """
    z_grid = np.linspace(-1, 1, DEFAULT_GRID_SIZE) if z_grid is None else np.asarray(z_grid, float)
    r_grid = np.linspace(0, 1, DEFAULT_GRID_SIZE) if r_grid is None else np.asarray(r_grid, float)
    if np.any(np.abs(z_grid) > 1) or np.any(r_grid < 0) or np.any(r_grid > 1):
        raise ValueError("grids must lie in [-1, 1] x [0, 1]")
    conv = BathConvention.parse(conv)
    spec = steady_spectrum(p, e)
    grid = sweep_grid(p, horizon_factor, points_per_scale)
    U, Phi = affine_basis(p, grid)

    cells = [(i, j) for i, z in enumerate(z_grid) for j, r in enumerate(r_grid) if abs(z) <= r + 1e-12]

    def work(cell):
        i, j = cell
        r0 = bloch_on_slice(min(max(z_grid[i], -r_grid[j]), r_grid[j]), r_grid[j])
        R = U + Phi @ r0
        R[0] = r0
        S, D = kernels.qubit_entropies(R, r0)
        bath = bath_entropy(R, spec, e, conv)
        with np.errstate(invalid="ignore"):
            u = (S - S[0]) + bath - D
        u[0] = 0.0
        return float(np.min(np.where(np.isfinite(u), u, np.inf)))

    values = _parallel_map(work, cells, threads)
    mat = np.full((len(z_grid), len(r_grid)), np.nan)
    for (i, j), v in zip(cells, values):
        mat[i, j] = v
    contour = zero_contour(z_grid, r_grid, mat, level=-contour_tol)
    return HeatmapResult(z_grid, r_grid, mat, contour, p, conv, contour_tol)


def zero_contour(z_grid, r_grid, mat, level: float = -CONTOUR_TOL):
    """Points where the piecewise-linear interpolant of ``mat`` crosses ``level``.

    Marches over every horizontal and vertical grid edge with two valid
    endpoints on opposite sides of ``level``; returns ``(z, r)`` pairs sorted
    by ``z`` then ``r``.
    """
    pts = []
    nz, nr = mat.shape
    for i in range(nz):
        for j in range(nr):
            a = mat[i, j]
            if np.isnan(a):
                continue
            for di, dj in ((1, 0), (0, 1)):
                ii, jj = i + di, j + dj
                if ii >= nz or jj >= nr or np.isnan(mat[ii, jj]):
                    continue
                b = mat[ii, jj]
                if (a >= level) != (b >= level):
                    f = (level - a) / (b - a)
                    pts.append((float(z_grid[i] + f * (z_grid[ii] - z_grid[i])),
                                float(r_grid[j] + f * (r_grid[jj] - r_grid[j]))))
    return sorted(pts)
