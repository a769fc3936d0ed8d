"""Scenario execution: turns a validated config into artifact files and a summary."""

import math
import os

import numpy as np

from .config import ScenarioConfig, time_grid
from .core import density_from_bloch
from .exceptions import ConfigError
from .initial import EXCITED, GROUND, bloch_on_slice, prepare_by_pre_evolution
from .io import format_float, write_csv, write_json
from .ledger import (
    asymptotic_upsilon_small,
    asymptotic_upsilon_ultralarge,
    critical_time,
    entropy_ledger,
    min_upsilon,
    sign_changes,
)
from .noise import error_model_curves, noisy_ledger, simulate_shots
from .scans import bloch_grid_scan, ddr_sweep, find_violation_threshold
from .threelevel import (
    ThreeLevelParams,
    effective_reduction,
    evolve3,
    fit_effective_decay,
    steady_deviation,
    waiting_time,
)
from .twolevel import (
    TWO_PI,
    SystemParams2,
    beta_closed_form,
    classify_regime,
    evolve,
    steady_spectrum,
    steady_state,
)


def resolve_initial(cfg: ScenarioConfig, p: SystemParams2):
    v = cfg.values
    if "initial_bloch" in v:
        return density_from_bloch([float(x) for x in v["initial_bloch"]])
    if "initial_z" in v:
        return density_from_bloch(bloch_on_slice(float(v["initial_z"]), float(v["initial_r"])))
    if "initial_pre_evolve_us" in v:
        return prepare_by_pre_evolution(p, float(v["initial_pre_evolve_us"]) * 1e-6)
    name = v.get("initial", "excited")
    if name == "excited":
        return EXCITED.copy()
    if name == "ground":
        return GROUND.copy()
    if name == "mixed":
        return 0.5 * np.eye(2, dtype=complex)
    return steady_state(p)


def _suffix(k, n):
    return "" if n == 1 else f"_{k}"


def _write_trajectory(path, traj):
    s = traj.states
    write_csv(
        path,
        ("t", "rho11", "rho22", "re_rho12", "im_rho12"),
        (traj.times, s[:, 0, 0].real, s[:, 1, 1].real, s[:, 0, 1].real, s[:, 0, 1].imag),
    )


def _case_summary(p: SystemParams2):
    out = {"omega": p.omega, "gamma": p.gamma, "ddr": p.ddr}
    if p.gamma > 0:
        out["regime"] = classify_regime(p).value
    return out


def run_evolve(cfg, out):
    cases = []
    for k, p in enumerate(cfg.systems):
        traj = evolve(resolve_initial(cfg, p), p, time_grid(cfg, p))
        _write_trajectory(os.path.join(out, f"trajectory{_suffix(k, len(cfg.systems))}.csv"), traj)
        case = _case_summary(p)
        case["rho22_final"] = float(traj.states[-1, 1, 1].real)
        cases.append(case)
    return {"cases": cases}


def run_ledger(cfg, out):
    cases = []
    for k, p in enumerate(cfg.systems):
        sfx = _suffix(k, len(cfg.systems))
        traj = evolve(resolve_initial(cfg, p), p, time_grid(cfg, p))
        spec = steady_spectrum(p, cfg.energies)
        led = entropy_ledger(traj, spec, cfg.energies, cfg.convention)
        _write_trajectory(os.path.join(out, f"trajectory{sfx}.csv"), traj)
        led.to_csv(os.path.join(out, f"ledger{sfx}.csv"))
        t_star, u_min = min_upsilon(led)
        case = _case_summary(p)
        case.update(
            beta_gap=spec.beta * cfg.energies.gap,
            min_upsilon=u_min,
            t_star=t_star,
            rho22_final=float(traj.states[-1, 1, 1].real),
            sign_changes=[[t, d] for t, d in sign_changes(led)][:10],
        )
        cases.append(case)
    return {"convention": cfg.convention.value, "cases": cases}


def run_noise(cfg, out):
    cases = []
    model = cfg.noise_model
    for k, p in enumerate(cfg.systems):
        sfx = _suffix(k, len(cfg.systems))
        traj = evolve(resolve_initial(cfg, p), p, time_grid(cfg, p))
        spec = steady_spectrum(p, cfg.energies)
        est = simulate_shots(traj, model, cfg.seed)
        write_csv(
            os.path.join(out, f"shots{sfx}.csv"),
            ("t", "x", "y", "z", "x_err", "y_err", "z_err", "rho22", "rho22_err"),
            (est.times, *est.bloch.T, *est.bloch_err.T, est.populations, est.populations_err),
        )
        nl = noisy_ledger(traj, spec, model, cfg.seed, cfg.energies, cfg.convention, int(cfg.get("n_boot", 200)))
        nl.to_csv(os.path.join(out, f"noisy_ledger{sfx}.csv"))
        t_star, u_min = min_upsilon(nl.ledger)
        case = _case_summary(p)
        case.update(min_upsilon=u_min, t_star=t_star)
        cases.append(case)
    return {"seed": cfg.seed, "n_shots": model.n_shots, "eps_exp": model.eps_exp, "cases": cases}


def _ddr_axis(cfg):
    lo, hi, n = float(cfg.get("ddr_min")), float(cfg.get("ddr_max")), int(cfg.get("ddr_points"))
    return np.logspace(math.log10(lo), math.log10(hi), n)


def run_ddr_sweep(cfg, out, threads=1):
    unit = SystemParams2(1.0, 1.0)
    rho0 = resolve_initial(cfg, unit)
    kw = dict(horizon_factor=float(cfg.get("horizon_factor", 30.0)), conv=cfg.convention, e=cfg.energies,
              points_per_scale=int(cfg.get("points_per_scale", 400)))
    res = ddr_sweep(rho0, _ddr_axis(cfg), threads=threads, **kw)
    res.to_csv(os.path.join(out, "sweep.csv"))
    summary = {"convention": cfg.convention.value, "failed_points": list(res.failed),
               "n_violating": int(np.sum(res.min_upsilon < -1e-9))}
    if cfg.get("threshold", False):
        bracket = (float(cfg.get("threshold_min", 1.0)), float(cfg.get("threshold_max", 1e3)))
        summary["threshold"] = find_violation_threshold(rho0, bracket, **kw)
    for ratio in cfg.get("ledger_ddr", []):
        p = SystemParams2.from_ratio(float(ratio))
        led = entropy_ledger(evolve(rho0, p, time_grid(cfg, p)), steady_spectrum(p, cfg.energies),
                             cfg.energies, cfg.convention)
        led.to_csv(os.path.join(out, f"ledger_ddr_{format_float(ratio)}.csv"))
    return summary


def run_bloch_scan(cfg, out, threads=1):
    p = cfg.systems[0]
    zn, rn = int(cfg.get("z_points", 41)), int(cfg.get("r_points", 41))
    res = bloch_grid_scan(p, np.linspace(-1, 1, zn), np.linspace(0, 1, rn), cfg.convention, cfg.energies,
                          float(cfg.get("horizon_factor", 30.0)), int(cfg.get("points_per_scale", 400)),
                          float(cfg.get("contour_tol", 1e-4)), threads)
    res.write(os.path.join(out, "heatmap.csv"), os.path.join(out, "heatmap.json"))
    vals = np.array([v for _, _, v in res.valid_cells()])
    summary = _case_summary(p)
    summary.update(convention=cfg.convention.value, n_cells=int(vals.size),
                   n_violating=int(np.sum(vals < -res.contour_tol)), contour_points=len(res.zero_contour))
    if any(k in cfg.values for k in ("initial", "initial_bloch", "initial_z", "initial_pre_evolve_us")):
        rho0 = resolve_initial(cfg, p)
        grid = time_grid(cfg, p)
        traj = evolve(rho0, p, grid)
        led = entropy_ledger(traj, steady_spectrum(p, cfg.energies), cfg.energies, cfg.convention)
        _write_trajectory(os.path.join(out, "trajectory.csv"), traj)
        led.to_csv(os.path.join(out, "ledger.csv"))
        t_star, u_min = min_upsilon(led)
        r = traj.bloch[0]
        summary.update(initial_bloch=[float(v) for v in r], initial_r=float(np.linalg.norm(r)),
                       initial_min_upsilon=u_min, initial_t_star=t_star,
                       initial_max_upsilon_after_0=float(np.max(led.upsilon[1:])))
    return summary


def _grid_3(cfg, p: ThreeLevelParams):
    if "t_end_us" in cfg.values:
        t_end = cfg.values["t_end_us"] * 1e-6
    elif "t_end_s" in cfg.values:
        t_end = float(cfg.values["t_end_s"])
    else:
        t_end = 30.0 / p.gamma_eff
    return np.linspace(0.0, t_end, int(cfg.get("n_points", 2001)))


def run_three_level(cfg, out):
    p = cfg.three_level
    rho0 = np.zeros((3, 3), complex)
    rho0[(1, 1) if cfg.get("initial", "excited") == "excited" else (0, 0)] = 1.0
    grid = _grid_3(cfg, p)
    traj = evolve3(rho0, p, grid)
    s = traj.states
    cols = [traj.times] + [s[:, i, i].real for i in range(3)]
    names = ["t", "rho11", "rho22", "rho33"]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        cols += [s[:, i, j].real, s[:, i, j].imag]
        names += [f"re_rho{i + 1}{j + 1}", f"im_rho{i + 1}{j + 1}"]
    summary = {"omega": p.omega, "omega_tilde": p.omega_tilde, "gamma_e": p.gamma_e,
               "gamma_eff": p.gamma_eff, "valid_reduction": p.valid_reduction}
    if p.gamma_eff > 0:
        q = p.effective_two_level()
        eff = evolve(rho0[:2, :2], q, grid)
        cols.append(eff.states[:, 1, 1].real)
        names.append("rho22_effective")
        summary["max_rho22_deviation"] = float(np.max(np.abs(eff.states[:, 1, 1].real - s[:, 1, 1].real)))
    write_csv(os.path.join(out, "trajectory3.csv"), names, cols)
    return summary


def run_fit_decay(cfg, out):
    ge = TWO_PI * float(cfg.get("gamma_e_hz_over_2pi"))
    rows = []
    for ot_hz in [float(v) for v in np.atleast_1d(cfg.get("omega_tilde_hz_over_2pi"))]:
        p = ThreeLevelParams(0.0, TWO_PI * ot_hz, ge)
        grid = np.linspace(0.0, 0.6 * ge / p.omega_tilde ** 2, int(cfg.get("n_points", 4001)))
        rho0 = np.zeros((3, 3), complex)
        rho0[1, 1] = 1.0
        fit = fit_effective_decay(evolve3(rho0, p, grid))
        rows.append((ot_hz, fit, p.gamma_eff, fit / p.gamma_eff - 1.0))
    cols = [np.array(c) for c in zip(*rows)]
    write_csv(os.path.join(out, "fit.csv"), ("omega_tilde_hz_over_2pi", "gamma_fit", "gamma_formula", "rel_err"), cols)
    return {"fits": [{"omega_tilde_hz_over_2pi": r[0], "gamma_fit": r[1], "gamma_formula": r[2], "rel_err": r[3]}
                     for r in rows]}


def run_error_model(cfg, out):
    model = cfg.noise_model
    p = np.logspace(math.log10(float(cfg.get("p_min", 1e-4))), math.log10(float(cfg.get("p_max", 0.5))),
                    int(cfg.get("p_points", 200)))
    theo, floor = error_model_curves(p, model.n_shots, model.eps_exp)
    write_csv(os.path.join(out, "error_model.csv"), ("p_g", "theoretical", "floor"), (p, theo, floor))
    at = error_model_curves([1e-3], model.n_shots, model.eps_exp)[1][0]
    return {"n_shots": model.n_shots, "eps_exp": model.eps_exp, "floor_at_1e-3": float(at),
            "floor_above_theoretical": bool(np.all(floor >= theo))}


def run_beta_curve(cfg, out):
    ratios = _ddr_axis(cfg)
    rows = []
    for r in ratios:
        p = SystemParams2.from_ratio(float(r))
        spec = steady_spectrum(p, cfg.energies)
        rows.append((r, spec.beta * cfg.energies.gap, beta_closed_form(p, cfg.energies) * cfg.energies.gap,
                     4.0 * math.log(1.0 / r), 4.0))
    write_csv(os.path.join(out, "beta.csv"), ("ratio", "beta_gap", "beta_gap_closed_form", "small_ddr_limit",
                                              "large_ddr_limit"), [np.array(c) for c in zip(*rows)])
    return {"beta_gap_first": rows[0][1], "beta_gap_last": rows[-1][1]}


def run_leakage(cfg, out):
    ratio_e = float(cfg.get("gamma_e_over_gamma"))
    rows = []
    for r in _ddr_axis(cfg):
        p = ThreeLevelParams(omega=float(r), omega_tilde=math.sqrt(ratio_e), gamma_e=ratio_e)
        red = effective_reduction(p, cfg.energies)
        beta2 = steady_spectrum(SystemParams2.from_ratio(float(r)), cfg.energies).beta
        rows.append((r, red.xi, r * r / ratio_e, 1.0 / (2 * ratio_e), beta2 * cfg.energies.gap,
                     red.beta_tilde * cfg.energies.gap))
    names = ("ratio", "xi", "xi_small_ddr", "xi_large_ddr", "beta_gap", "beta_tilde_gap")
    write_csv(os.path.join(out, "leakage.csv"), names, [np.array(c) for c in zip(*rows)])
    return {"gamma_e_over_gamma": ratio_e}


def run_waiting_time(cfg, out):
    p = cfg.systems[0]
    tws = [float(v) for v in np.atleast_1d(cfg.get("t_w_over_gamma", [7.0, 10.0, 15.0]))]
    grid = np.linspace(0.0, max(tws) / p.gamma, int(cfg.get("n_points", 3001)))
    traj = evolve(EXCITED, p, np.unique(np.concatenate([grid, np.array(tws) / p.gamma])))
    dev = steady_deviation(traj, p)
    write_csv(os.path.join(out, "deviation.csv"), ("t_w_gamma", "epsilon_t"), (dev.t_w * p.gamma, dev.epsilon_t))
    table = {}
    for tw in tws:
        k = int(np.argmin(np.abs(dev.t_w * p.gamma - tw)))
        table[format_float(tw)] = float(dev.epsilon_t[k])
    eps_target = float(cfg.get("eps_target", 1e-3))
    return {"epsilon_at_t_w": table, "eps_target": eps_target,
            "t_w_gamma_for_target": waiting_time(p.gamma, eps_target) * p.gamma, **_case_summary(p)}


def run_asymptotics(cfg, out):
    gamma = float(cfg.get("gamma_per_s"))
    cases = []
    ratios = [float(v) for v in np.atleast_1d(cfg.get("ddr"))]
    for k, r in enumerate(ratios):
        p = SystemParams2.from_ratio(r, gamma)
        case = _case_summary(p)
        if r < 0.15:
            t_end, fn = 0.199 / p.gamma, asymptotic_upsilon_small
        elif r >= 25:
            t_end, fn = 0.499 / p.omega, asymptotic_upsilon_ultralarge
            case["t_c"] = critical_time(p)
        else:
            raise ConfigError(f"asymptotics mode needs ddr < 0.15 or >= 25, got {r}")
        grid = np.linspace(0.0, t_end, int(cfg.get("n_points", 2001)))
        led = entropy_ledger(evolve(EXCITED, p, grid), steady_spectrum(p, cfg.energies), cfg.energies,
                             cfg.convention)
        asym = np.array([fn(p, t) for t in grid])
        write_csv(os.path.join(out, f"asymptotics{_suffix(k, len(ratios))}.csv"),
                  ("t", "sigma_total", "rel_entropy", "upsilon", "upsilon_asymptotic"),
                  (grid, led.sigma_total, led.rel_entropy, led.upsilon, asym))
        cases.append(case)
    return {"convention": cfg.convention.value, "cases": cases}


_RUNNERS = {
    "evolve": run_evolve,
    "ledger": run_ledger,
    "noise": run_noise,
    "ddr-sweep": run_ddr_sweep,
    "bloch-scan": run_bloch_scan,
    "three-level": run_three_level,
    "fit-decay": run_fit_decay,
    "error-model": run_error_model,
    "beta-curve": run_beta_curve,
    "leakage": run_leakage,
    "waiting-time": run_waiting_time,
    "asymptotics": run_asymptotics,
}

_THREADED = {"ddr-sweep", "bloch-scan"}


def run_scenario(cfg: ScenarioConfig, out_dir, threads: int = 1) -> dict:
    """Run ``cfg``, write artifacts plus ``summary.json`` into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    fn = _RUNNERS[cfg.mode]
    body = fn(cfg, out_dir, threads) if cfg.mode in _THREADED else fn(cfg, out_dir)
    summary = {"mode": cfg.mode, "title": cfg.title, **body}
    write_json(os.path.join(out_dir, "summary.json"), _plain(summary))
    return summary


def _plain(obj):
    """Convert numpy scalars for JSON; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else format_float(v)
    return obj
