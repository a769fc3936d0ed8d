"""Scenario configuration files.

A scenario is a flat TOML document.  Every rate carries its unit in the key
name (``omega_hz_over_2pi``, ``omega_rad_per_s``, ``gamma_per_s`` ...); there
are no defaults for rates.  Keys not recognised for the selected ``mode``
are rejected so that typos surface as configuration errors.
"""

import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .core import EnergyConvention
from .exceptions import ConfigError
from .ledger import BathConvention
from .noise import NoiseModel
from .threelevel import ThreeLevelParams
from .twolevel import TWO_PI, SystemParams2

MODES = (
    "evolve",
    "ledger",
    "ddr-sweep",
    "bloch-scan",
    "three-level",
    "fit-decay",
    "noise",
    "error-model",
    "beta-curve",
    "leakage",
    "waiting-time",
    "asymptotics",
)

_COMMON = {"mode", "title", "seed", "convention", "e1", "e2"}
_RATES2 = {"omega_hz_over_2pi", "omega_rad_per_s", "gamma_per_s", "gamma_hz_over_2pi", "ddr"}
_RATES3 = {"omega_hz_over_2pi", "omega_tilde_hz_over_2pi", "gamma_e_hz_over_2pi"}
_TIME = {"t_end_us", "t_end_s", "horizon_factor", "n_points", "points_per_scale"}
_INITIAL = {"initial", "initial_bloch", "initial_z", "initial_r", "initial_pre_evolve_us"}
_DDR_AXIS = {"ddr_min", "ddr_max", "ddr_points"}

MODE_KEYS = {
    "evolve": _RATES2 | _TIME | _INITIAL,
    "ledger": _RATES2 | _TIME | _INITIAL,
    "noise": _RATES2 | _TIME | _INITIAL | {"n_shots", "eps_exp", "n_boot"},
    "ddr-sweep": _DDR_AXIS | _INITIAL | {"horizon_factor", "points_per_scale", "threshold",
                                         "threshold_min", "threshold_max", "ledger_ddr"},
    "bloch-scan": _RATES2 | _INITIAL | {"horizon_factor", "points_per_scale", "z_points", "r_points",
                                        "contour_tol"},
    "three-level": _RATES3 | {"t_end_us", "t_end_s", "n_points", "initial"},
    "fit-decay": {"omega_tilde_hz_over_2pi", "gamma_e_hz_over_2pi", "n_points"},
    "error-model": {"n_shots", "eps_exp", "p_min", "p_max", "p_points"},
    "beta-curve": _DDR_AXIS,
    "leakage": _DDR_AXIS | {"gamma_e_over_gamma"},
    "waiting-time": _RATES2 | {"t_w_over_gamma", "eps_target", "n_points"},
    "asymptotics": {"ddr", "gamma_per_s", "n_points", "points_per_scale"},
}

_REQUIRED = {
    "ddr-sweep": {"ddr_min", "ddr_max", "ddr_points"},
    "fit-decay": {"omega_tilde_hz_over_2pi", "gamma_e_hz_over_2pi"},
    "error-model": {"n_shots", "eps_exp"},
    "beta-curve": {"ddr_min", "ddr_max", "ddr_points"},
    "leakage": {"ddr_min", "ddr_max", "ddr_points", "gamma_e_over_gamma"},
    "three-level": {"omega_hz_over_2pi", "omega_tilde_hz_over_2pi", "gamma_e_hz_over_2pi"},
    "asymptotics": {"ddr", "gamma_per_s"},
}


@dataclass
class ScenarioConfig:
    mode: str
    values: Dict[str, Any]
    source: str = ""
    title: str = ""
    seed: int = 0
    convention: BathConvention = BathConvention.BARE_EIGEN_ENERGY
    energies: EnergyConvention = field(default_factory=EnergyConvention)
    systems: List[SystemParams2] = field(default_factory=list)
    three_level: Any = None

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise ConfigError(f"mode {self.mode!r} needs key {key!r}")
        return self.values[key]

    @property
    def noise_model(self) -> NoiseModel:
        return NoiseModel(int(self.get("n_shots", NoiseModel.n_shots)), float(self.get("eps_exp", NoiseModel.eps_exp)))


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _number(cfg, key, positive=False, allow_zero=True):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{key!r} must be finite")
    if positive and (v < 0 or (v == 0 and not allow_zero)):
        raise ConfigError(f"{key!r} must be {'>=' if allow_zero else '>'} 0, got {v}")
    return v


def _numbers(cfg, key):
    vals = _as_list(cfg[key])
    if not vals:
        raise ConfigError(f"{key!r} must not be empty")
    out = []
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
            raise ConfigError(f"{key!r} entries must be finite non-negative numbers, got {v!r}")
        out.append(float(v))
    return out


def _systems(cfg) -> List[SystemParams2]:
    """Two-level parameter sets; list-valued keys give several cases."""
    has_omega = [k for k in ("omega_hz_over_2pi", "omega_rad_per_s", "ddr") if k in cfg]
    has_gamma = [k for k in ("gamma_per_s", "gamma_hz_over_2pi") if k in cfg]
    if len(has_omega) != 1:
        raise ConfigError("give exactly one of omega_hz_over_2pi, omega_rad_per_s, ddr")
    if len(has_gamma) != 1:
        raise ConfigError("give exactly one of gamma_per_s, gamma_hz_over_2pi")
    okey, gkey = has_omega[0], has_gamma[0]
    om, ga = _numbers(cfg, okey), _numbers(cfg, gkey)
    n = max(len(om), len(ga))
    if len(om) not in (1, n) or len(ga) not in (1, n):
        raise ConfigError(f"{okey!r} and {gkey!r} lists must have equal length")
    om, ga = om * (n // len(om)), ga * (n // len(ga))
    out = []
    for o, g in zip(om, ga):
        gamma = g if gkey == "gamma_per_s" else TWO_PI * g
        if okey == "omega_hz_over_2pi":
            omega = TWO_PI * o
        elif okey == "omega_rad_per_s":
            omega = o
        else:
            omega = o * gamma
        try:
            out.append(SystemParams2(omega, gamma))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return out


def _check_time(cfg):
    if "t_end_us" in cfg and "t_end_s" in cfg:
        raise ConfigError("give at most one of t_end_us, t_end_s")
    for key in ("t_end_us", "t_end_s", "horizon_factor"):
        if key in cfg:
            _number(cfg, key, positive=True, allow_zero=False)
    for key in ("n_points", "points_per_scale", "z_points", "r_points", "ddr_points", "p_points", "n_boot"):
        if key in cfg:
            v = cfg[key]
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{key!r} must be a positive integer, got {v!r}")
    if cfg.get("n_points") == 1:
        raise ConfigError("n_points must be at least 2")
    if cfg.get("ddr_points") == 1 and cfg.get("ddr_min") != cfg.get("ddr_max"):
        raise ConfigError("ddr_points = 1 needs ddr_min == ddr_max")


def _check_initial(cfg):
    keys = [k for k in ("initial", "initial_bloch", "initial_pre_evolve_us") if k in cfg]
    if ("initial_z" in cfg) != ("initial_r" in cfg):
        raise ConfigError("initial_z and initial_r must be given together")
    if "initial_z" in cfg:
        keys.append("initial_z")
    if len(keys) > 1:
        raise ConfigError(f"conflicting initial-state keys: {keys}")
    if "initial" in cfg and cfg["initial"] not in ("excited", "ground", "steady", "mixed"):
        raise ConfigError(f"initial must be excited, ground, steady or mixed, got {cfg['initial']!r}")
    if "initial_bloch" in cfg:
        b = cfg["initial_bloch"]
        if not isinstance(b, list) or len(b) != 3:
            raise ConfigError("initial_bloch must be a list of 3 numbers")
        if math.sqrt(sum(float(x) ** 2 for x in b)) > 1 + 1e-12:
            raise ConfigError("initial_bloch lies outside the Bloch ball")
    if "initial_z" in cfg:
        z, r = _number(cfg, "initial_z"), _number(cfg, "initial_r", positive=True)
        if r > 1 or abs(z) > r:
            raise ConfigError("need |initial_z| <= initial_r <= 1")
    if "initial_pre_evolve_us" in cfg:
        _number(cfg, "initial_pre_evolve_us", positive=True)


def build_config(raw: Dict[str, Any], source: str = "") -> ScenarioConfig:
    if "mode" not in raw:
        raise ConfigError("missing 'mode'")
    mode = raw["mode"]
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigError(f"nested table {key!r} not allowed; keep the document flat")
    unknown = sorted(set(raw) - _COMMON - MODE_KEYS[mode])
    if unknown:
        raise ConfigError(f"keys not valid for mode {mode!r}: {', '.join(unknown)}")
    missing = sorted(_REQUIRED.get(mode, set()) - set(raw))
    if missing:
        raise ConfigError(f"mode {mode!r} needs keys: {', '.join(missing)}")
    _check_time(raw)
    _check_initial(raw)

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    try:
        conv = BathConvention.parse(raw.get("convention", "bare"))
        energies = EnergyConvention(float(raw.get("e1", 0.0)), float(raw.get("e2", 1.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    cfg = ScenarioConfig(mode=mode, values=dict(raw), source=source, title=str(raw.get("title", "")),
                         seed=seed, convention=conv, energies=energies)
    if mode in ("evolve", "ledger", "noise", "bloch-scan", "waiting-time"):
        cfg.systems = _systems(raw)
        if mode in ("bloch-scan", "waiting-time") and len(cfg.systems) != 1:
            raise ConfigError(f"mode {mode!r} takes a single parameter set")
        if mode in ("ledger", "noise", "bloch-scan", "waiting-time") and any(p.gamma == 0 for p in cfg.systems):
            raise ConfigError("ledger-type modes need gamma > 0")
    if mode == "three-level":
        try:
            cfg.three_level = ThreeLevelParams.from_lab(
                _number(raw, "omega_hz_over_2pi", True), _number(raw, "omega_tilde_hz_over_2pi", True),
                _number(raw, "gamma_e_hz_over_2pi", True))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if cfg.three_level.gamma_e <= 0:
            raise ConfigError("gamma_e_hz_over_2pi must be > 0")
        if raw.get("initial", "excited") not in ("excited", "ground"):
            raise ConfigError("three-level initial must be excited or ground")
    if mode == "fit-decay":
        _numbers(raw, "omega_tilde_hz_over_2pi")
        if _number(raw, "gamma_e_hz_over_2pi", True) <= 0:
            raise ConfigError("gamma_e_hz_over_2pi must be > 0")
    if mode in ("ddr-sweep", "beta-curve", "leakage"):
        lo, hi = _number(raw, "ddr_min", True, False), _number(raw, "ddr_max", True, False)
        if hi < lo:
            raise ConfigError("ddr_max must be >= ddr_min")
        if mode == "ddr-sweep" and (lo < 1e-3 or hi > 1e3):
            raise ConfigError("ddr-sweep ratios must lie in [1e-3, 1e3]")
    if mode == "ddr-sweep" and raw.get("horizon_factor", 30.0) < 20:
        raise ConfigError("horizon_factor must be >= 20 for sweeps")
    if mode in ("noise", "error-model"):
        try:
            NoiseModel(raw.get("n_shots", NoiseModel.n_shots), raw.get("eps_exp", NoiseModel.eps_exp))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if mode == "error-model":
        pmin, pmax = float(raw.get("p_min", 1e-4)), float(raw.get("p_max", 0.5))
        if not 0 < pmin < pmax < 1:
            raise ConfigError("need 0 < p_min < p_max < 1")
    if mode == "waiting-time" and "eps_target" in raw:
        if not 0 < _number(raw, "eps_target") < 1:
            raise ConfigError("eps_target must lie in (0, 1)")
    if mode == "asymptotics":
        _numbers(raw, "ddr")
        _number(raw, "gamma_per_s", True, False)
    return cfg


def load_config(path) -> ScenarioConfig:
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return build_config(raw, source=path)


def time_grid(cfg: ScenarioConfig, p: SystemParams2) -> np.ndarray:
    """Grid from ``t_end_*`` or ``horizon_factor`` and ``n_points``/``points_per_scale``."""
    from .twolevel import default_horizon, shortest_time_scale

    if "t_end_us" in cfg.values:
        t_end = cfg.values["t_end_us"] * 1e-6
    elif "t_end_s" in cfg.values:
        t_end = float(cfg.values["t_end_s"])
    elif "horizon_factor" in cfg.values:
        t_end = default_horizon(p) * cfg.values["horizon_factor"] / 30.0
    else:
        t_end = default_horizon(p)
    if "n_points" in cfg.values:
        return np.linspace(0.0, t_end, int(cfg.values["n_points"]))
    pts = int(cfg.get("points_per_scale", 400))
    n = int(math.ceil(pts * t_end / shortest_time_scale(p))) + 1
    return np.linspace(0.0, t_end, max(n, 2))
