"""Radially symmetric numerical laboratory for a two-species cross-attraction
degenerate chemotaxis system: finite-volume dynamics, energy and virial
diagnostics, variational constants and blow-up condition checks."""

from .errors import (ChemosimError, GridMismatchError, InvalidParameterError,
                     MissingConstantError, NoZeroCrossingError,
                     NumericalFailureError, OutOfRangeError, PositivityError,
                     TruncationError)
from .radial import (RadialField, RadialGrid, SystemState, lp_norm, mass,
                     newtonian_constant, read_field_csv, rescale, second_moment,
                     sphere_surface_area, write_field_csv)
from .regimes import (ModelParams, Regime, RegimeTag, ScalingExponents, classify,
                      critical_exponent, l1_partner, regime_slacks, scaling_map)
from .potential import (Normalization, PotentialField, enclosed_mass,
                        interaction_energy, solve_potential)
from .energy import (DiagnosticsRecord, combined_second_moment, diagnostics,
                     dissipation, free_energy, virial_rate, write_series_csv)
from .stepper import (DiagnosticsSeries, RunOutcome, RunStatus, SolverConfig,
                      adaptive_dt, run, step)
from .initdata import (CompactPolynomial, ConditionReport, Gaussian,
                       LaneEmdenMinimizer, TableData, blowup_number,
                       build_blowup_pair, build_field, check_blowup_condition,
                       iota_exponents)
from .variational import (ConstantEstimates, LaneEmdenProfile, ProbeReport,
                          cauchy_schwarz_slack, critical_mass_crossing,
                          critical_masses, estimate_Cc, estimate_hls_constant,
                          estimate_line_constant, inequality_probe,
                          interaction_ratio, lane_emden_solve, line_ratio,
                          minimizer_profile)
from .harness import (ConfigError, GridConfig, RunConfig, SweepConfig,
                      constants_report, load_run_config, load_sweep_config,
                      parse_run_config, parse_sweep_config, plot_series,
                      simulate, sweep)

__version__ = "0.1.0"
