"""Driven-dissipative qubit thermodynamics: dynamics, entropy ledgers and scans."""

from .core import (EnergyConvention, Spectrum2, bare_energy, binary_entropy, bloch_from_density,
                   densities_from_bloch, density_from_bloch, eig2, relative_entropy, validate_density,
                   von_neumann_entropy)
from .exceptions import BracketError, ConfigError, IntegrationError, RegimeError, UnphysicalStateError
from .initial import (EXCITED, GROUND, InitialStateReport, bloch_on_slice, characterize_initial,
                      eigen_energies, prepare_by_pre_evolution)
from .ledger import (DEFAULT_CONVENTION, BathConvention, EntropyLedger, asymptotic_upsilon_small,
                     asymptotic_upsilon_ultralarge, bath_entropy, critical_time, entropy_ledger,
                     ledger_from_bloch, min_upsilon, sign_changes)
from .noise import (NoiseModel, NoisyLedger, entropy_error, entropy_error_floor, error_model_curves,
                    noisy_ledger, projection_noise, simulate_shots)
from .scans import (HeatmapResult, SweepResult, bloch_grid_scan, ddr_sweep, find_violation_threshold,
                    min_upsilon_at, zero_contour)
from .threelevel import (EffectiveReduction, ThreeLevelParams, decay_closed_form, effective_reduction,
                         evolve3, fit_effective_decay, liouvillian, steady3, steady3_linear_solve,
                         steady_deviation, waiting_time)
from .twolevel import (Regime, SteadySpectrum, SystemParams2, Trajectory, analytic_excited_trajectory,
                       beta_closed_form, bloch_generator, classify_regime, default_grid, evolve,
                       lindblad_rhs, propagate_exact, steady_spectrum, steady_state, time_scales)

__version__ = "0.1.0"
