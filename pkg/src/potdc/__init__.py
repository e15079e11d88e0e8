"""Robust adaptive beamforming for general-rank scattered sources.

Minimizes the diagonally-loaded output power subject to a worst-case
distortionless-response constraint over a Frobenius mismatch ball on the
signal covariance factor.  The nonconvex problem is handled by iteratively
linearizing its single concave term; each inner subproblem is solved exactly
through a two-multiplier dual, and a subsector relaxation certifies a global
lower bound.
"""

from .arraymodel import (ArrayConfig, GaussianDensity, ScatteredSource,
                         TruncatedLaplacianDensity, UniformDensity,
                         covariance_from_density, generate_snapshots,
                         output_sinr, sample_covariance, steering)
from .baselines import BaselineResult, dc_iteration, shahram_closed_form, smi_mvdr
from .errors import (BranchError, ConfigError, Infeasible, InvalidInput,
                     NotPositiveSemidefinite, PotdcError, RecoveryError)
from .experiments import (ExperimentConfig, TrialRecord, example1_config,
                          example2_config, example3_config, load_config,
                          run_example1, run_example2, run_example3,
                          run_experiment, write_csv)
from .inner import (InnerProblem, InnerSolution, inner_value,
                    linearized_value, minimize_linearized, recover_weights,
                    trace_bound)
from .kernels import BACKEND
from .linalg import psd_sqrt_factor
from .selftest import run_selftest
from .settings import DEFAULT_SETTINGS, SolverSettings
from .solver import (ConvexityReport, PotdcResult, convexity_check,
                     exhaustive_search, lower_bound, potdc_solve)
from .worstcase import (AlphaInterval, RobustConfig, alpha_bounds,
                        feasible_start, lagrange_mu, worst_case_delta,
                        worst_case_signal_power)

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig", "GaussianDensity", "UniformDensity",
    "TruncatedLaplacianDensity", "ScatteredSource", "steering",
    "covariance_from_density", "generate_snapshots", "sample_covariance",
    "output_sinr",
    "BaselineResult", "smi_mvdr", "shahram_closed_form", "dc_iteration",
    "PotdcError", "InvalidInput", "NotPositiveSemidefinite", "ConfigError",
    "Infeasible", "BranchError", "RecoveryError",
    "ExperimentConfig", "TrialRecord", "example1_config", "example2_config",
    "example3_config", "load_config", "run_experiment", "run_example1",
    "run_example2", "run_example3", "write_csv",
    "InnerProblem", "InnerSolution", "inner_value", "linearized_value",
    "minimize_linearized", "recover_weights", "trace_bound",
    "BACKEND", "psd_sqrt_factor",
    "run_selftest",
    "SolverSettings", "DEFAULT_SETTINGS",
    "PotdcResult", "ConvexityReport", "potdc_solve", "exhaustive_search",
    "lower_bound", "convexity_check",
    "RobustConfig", "AlphaInterval", "worst_case_signal_power",
    "worst_case_delta", "lagrange_mu", "feasible_start", "alpha_bounds",
    "__version__",
]
