"""Monte-Carlo experiment runner: scenario construction, method comparison,
deterministic seeding and CSV emission.

Three stock studies are provided:

* example1 - scattered Gaussian desired source vs. a uniform-sector
  interferer, presumed density slightly off in both center and spread.
* example2 - same but with a truncated, randomly-distorted Laplacian actual
  desired density.
* example3 - iteration-count sweep over array sizes at low SNR with random
  initial points.
"""

import configparser
import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .arraymodel import (ArrayConfig, GaussianDensity, ScatteredSource,
                         TruncatedLaplacianDensity, UniformDensity,
                         covariance_from_density, generate_snapshots,
                         output_sinr, sample_covariance)
from .baselines import dc_iteration, shahram_closed_form, smi_mvdr
from .errors import ConfigError, Infeasible, PotdcError
from .inner import InnerProblem
from .linalg import psd_sqrt_factor
from .solver import lower_bound, potdc_solve

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "CSV_COLUMNS",
    "example1_config",
    "example2_config",
    "example3_config",
    "load_config",
    "run_experiment",
    "run_example1",
    "run_example2",
    "run_example3",
    "write_csv",
    "write_sinr_svg",
]

CSV_COLUMNS = ["method", "M", "snr_db", "trial", "sinr_db", "objective",
               "lower_bound", "iterations", "converged", "wall_time_ms",
               "seed"]

DEFAULT_SNR_GRID = tuple(range(-10, 31, 5))


@dataclass(frozen=True)
class ExperimentConfig:
    example: str = "custom"
    array_sizes: tuple = (10,)
    snapshots: int = 20
    num_trials: int = 100
    master_seed: int = 20240901
    snr_db: tuple = DEFAULT_SNR_GRID
    inr_db: float = 10.0
    gamma: float = 10.0
    eta_rule: str = "presumed"   # "presumed" | "actual" | a numeric literal
    eta_scale: float = 0.3
    epsilon_rule: str = "eta"    # "eta" | "matched" | a numeric literal
    zeta_term: float = 1e-6
    alpha0_rule: str = "midpoint"  # "midpoint" | "random"
    lower_bound_sectors: int = 32
    compute_lower_bound: bool = True
    grid_points: int = 721
    record_timing: bool = False
    methods: tuple = ("potdc", "closed_form", "dc", "smi")
    desired_density: object = field(default_factory=lambda: GaussianDensity(30.0, 4.0))
    interference_density: object = field(default_factory=lambda: UniformDensity(10.0, 4.0))
    presumed_density: object = field(default_factory=lambda: GaussianDensity(32.0, 1.0))

    def __post_init__(self):
        if self.snapshots < 1:
            raise ConfigError("experiment.snapshots must be positive")
        if self.num_trials < 1:
            raise ConfigError("experiment.num_trials must be positive")
        if not self.snr_db:
            raise ConfigError("experiment.snr_db must be non-empty")
        if not self.array_sizes or any(m < 2 for m in self.array_sizes):
            raise ConfigError("experiment.array_sizes must all be >= 2")
        if self.gamma <= 0:
            raise ConfigError("robust.gamma must be positive")
        if self.zeta_term <= 0:
            raise ConfigError("robust.zeta_term must be positive")
        if self.lower_bound_sectors < 1:
            raise ConfigError("experiment.lower_bound_sectors must be positive")
        if self.alpha0_rule not in ("midpoint", "random"):
            raise ConfigError("robust.alpha0_rule must be 'midpoint' or 'random'")
        unknown = set(self.methods) - {"potdc", "closed_form", "dc", "smi"}
        if unknown:
            raise ConfigError(f"experiment.methods has unknown entries {sorted(unknown)}")


@dataclass(frozen=True)
class TrialRecord:
    method: str
    M: int
    snr_db: float
    trial: int
    sinr_db: float
    objective: float
    lower_bound: float  # nan when not computed
    iterations: int
    converged: bool
    wall_time_ms: float
    seed: int


def example1_config(**overrides):
    return ExperimentConfig(example="example1", **overrides)


def example2_config(**overrides):
    overrides.setdefault("desired_density", TruncatedLaplacianDensity(30.0, 0.1))
    return ExperimentConfig(example="example2", **overrides)


def example3_config(**overrides):
    overrides.setdefault("array_sizes", tuple(range(8, 21, 2)))
    overrides.setdefault("snr_db", (-10.0,))
    overrides.setdefault("num_trials", 200)
    overrides.setdefault("alpha0_rule", "random")
    overrides.setdefault("compute_lower_bound", False)
    overrides.setdefault("record_timing", True)
    overrides.setdefault("methods", ("potdc", "dc"))
    return ExperimentConfig(example="example3", **overrides)


_DENSITY_SECTIONS = ("desired", "interference", "presumed")


def _parse_density(section, name):
    kind = section.get("kind", "").strip().lower()
    try:
        if kind == "gaussian":
            return GaussianDensity(section.getfloat("center_deg"),
                                   section.getfloat("spread_deg"))
        if kind == "uniform":
            return UniformDensity(section.getfloat("center_deg"),
                                  section.getfloat("width_deg"))
        if kind == "laplacian":
            return TruncatedLaplacianDensity(
                section.getfloat("center_deg"),
                section.getfloat("scale"),
                support_deg=(section.getfloat("support_lo_deg", 15.0),
                             section.getfloat("support_hi_deg", 45.0)),
                fluctuation_seed=section.getint("fluctuation_seed", 7),
                fluctuation_strength=section.getfloat("fluctuation_strength", 0.9),
            )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name}: invalid density parameters ({e})") from None
    raise ConfigError(
        f"{name}.kind must be gaussian, uniform or laplacian, got {kind!r}")


def _parse_tuple(raw, cast, name):
    try:
        vals = tuple(cast(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None
    if not vals:
        raise ConfigError(f"{name}: empty list")
    return vals


def load_config(path):
    """Parse an INI-style experiment config.  Unset keys fall back to the
    stock defaults of the named example."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    exp = parser["experiment"] if parser.has_section("experiment") else {}
    example = (exp.get("example", "custom") or "custom").strip().lower()
    factory = {"example1": example1_config, "example2": example2_config,
               "example3": example3_config, "custom": ExperimentConfig}
    if example not in factory:
        raise ConfigError(f"experiment.example must be one of {sorted(factory)}")

    overrides = {}
    if parser.has_section("experiment"):
        sec = parser["experiment"]
        for key, conv in (("snapshots", sec.getint), ("num_trials", sec.getint),
                          ("master_seed", sec.getint), ("inr_db", sec.getfloat),
                          ("lower_bound_sectors", sec.getint),
                          ("grid_points", sec.getint),
                          ("compute_lower_bound", sec.getboolean),
                          ("record_timing", sec.getboolean)):
            try:
                if key in sec:
                    overrides[key] = conv(key)
            except ValueError as e:
                raise ConfigError(f"experiment.{key}: {e}") from None
        if "array_sizes" in sec:
            overrides["array_sizes"] = _parse_tuple(sec["array_sizes"], int,
                                                    "experiment.array_sizes")
        if "snr_db" in sec:
            overrides["snr_db"] = _parse_tuple(sec["snr_db"], float,
                                               "experiment.snr_db")
        if "methods" in sec:
            overrides["methods"] = _parse_tuple(sec["methods"], str,
                                                "experiment.methods")
    if parser.has_section("robust"):
        sec = parser["robust"]
        for key, conv in (("gamma", sec.getfloat), ("eta_scale", sec.getfloat),
                          ("zeta_term", sec.getfloat)):
            try:
                if key in sec:
                    overrides[key] = conv(key)
            except ValueError as e:
                raise ConfigError(f"robust.{key}: {e}") from None
        for key in ("eta_rule", "epsilon_rule", "alpha0_rule"):
            if key in sec:
                overrides[key] = sec[key].strip()
    for name in _DENSITY_SECTIONS:
        if parser.has_section(name):
            overrides[f"{name}_density"] = _parse_density(parser[name], name)

    if example == "custom":
        return ExperimentConfig(example="custom", **overrides)
    return factory[example](**overrides)


def _resolve_eta(cfg, R_s_presumed, R_s_true):
    rule = cfg.eta_rule.strip().lower()
    if rule == "presumed":
        return cfg.eta_scale * float(np.sqrt(np.real(np.trace(R_s_presumed))))
    if rule == "actual":
        return cfg.eta_scale * float(np.sqrt(np.real(np.trace(R_s_true))))
    try:
        return float(rule)
    except ValueError:
        raise ConfigError(
            f"robust.eta_rule must be 'presumed', 'actual' or a number, got {cfg.eta_rule!r}"
        ) from None


def _resolve_epsilon(cfg, eta, Q):
    rule = cfg.epsilon_rule.strip().lower()
    if rule == "matched":
        # covariance-level mismatch radius induced by the factor-level ball
        # ||D||_F <= eta:  ||(Q+D)^H(Q+D) - Q^H Q||_F <= 2 eta ||Q||_2 + eta^2,
        # so the closed-form baseline guards the same uncertainty set
        spec_norm = float(np.linalg.norm(Q, 2))
        return 2.0 * eta * spec_norm + eta * eta
    if rule == "eta":
        return eta
    try:
        return float(rule)
    except ValueError:
        raise ConfigError(
            f"robust.epsilon_rule must be 'matched', 'eta' or a number, "
            f"got {cfg.epsilon_rule!r}"
        ) from None


def _trial_seed(master_seed, M, snr_idx, trial):
    ss = np.random.SeedSequence([int(master_seed), int(M), int(snr_idx), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _random_feasible_start(Q, eta, rng, tries=100):
    """Random strictly feasible weight vector: a random direction rescaled so
    the worst-case response equals one."""
    M = Q.shape[1]
    for _ in range(tries):
        u = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        margin = np.linalg.norm(Q @ u) - eta * np.linalg.norm(u)
        if margin > 1e-6 * np.linalg.norm(u):
            return u / margin
    raise Infeasible("could not sample a feasible initial point")


class _Scenario:
    """Per-(M, SNR) immutable data shared by all trials."""

    def __init__(self, cfg, M, snr_db):
        array = ArrayConfig(M)
        sigma_s = 10.0 ** (snr_db / 10.0)
        sigma_i = 10.0 ** (cfg.inr_db / 10.0)
        gp = cfg.grid_points
        self.R_s_true = covariance_from_density(
            array, ScatteredSource(cfg.desired_density, sigma_s), gp)
        R_int = covariance_from_density(
            array, ScatteredSource(cfg.interference_density, sigma_i), gp)
        self.R_in_true = R_int + np.eye(M)
        self.R_int = R_int
        # the presumed model mismatches the true source in shape, center and
        # spread only; it tracks the true signal power (the distortionless
        # normalization makes every method except the closed-form shift
        # invariant to this scale anyway)
        self.R_s_presumed = covariance_from_density(
            array, ScatteredSource(cfg.presumed_density, sigma_s), gp)
        self.Q = psd_sqrt_factor(self.R_s_presumed)
        self.eta = _resolve_eta(cfg, self.R_s_presumed, self.R_s_true)
        self.epsilon = _resolve_epsilon(cfg, self.eta, self.Q)


def _clock(cfg):
    return time.perf_counter() if cfg.record_timing else 0.0


def _elapsed_ms(cfg, t0):
    return (time.perf_counter() - t0) * 1e3 if cfg.record_timing else 0.0


def _run_trial(cfg, scn, M, snr_db, snr_idx, trial):
    seed = _trial_seed(cfg.master_seed, M, snr_idx, trial)
    X = generate_snapshots(scn.R_s_true, scn.R_int, 1.0, cfg.snapshots, seed)
    R_hat = sample_covariance(X)
    rng = np.random.default_rng(seed + 1)
    records = []

    problem = None
    if "potdc" in cfg.methods or "dc" in cfg.methods:
        problem = InnerProblem(R_hat, cfg.gamma, scn.Q, scn.eta)

    if "potdc" in cfg.methods:
        if cfg.alpha0_rule == "random":
            iv = problem.interval
            alpha0 = rng.uniform(iv.lower, iv.upper)
        else:
            alpha0 = None
        t0 = _clock(cfg)
        res = potdc_solve(None, cfg.gamma, None, scn.eta, alpha0=alpha0,
                          zeta_term=cfg.zeta_term, problem=problem)
        lb = np.nan
        if cfg.compute_lower_bound:
            lb = lower_bound(problem=problem,
                             num_sectors=cfg.lower_bound_sectors)
        wall = _elapsed_ms(cfg, t0)
        records.append(TrialRecord(
            "potdc", M, snr_db, trial,
            output_sinr(res.w, scn.R_s_true, scn.R_in_true),
            res.objective, lb, res.iterations, res.converged, wall, seed))

    if "closed_form" in cfg.methods:
        t0 = _clock(cfg)
        res = shahram_closed_form(R_hat, cfg.gamma, scn.R_s_presumed,
                                  scn.epsilon)
        wall = _elapsed_ms(cfg, t0)
        records.append(TrialRecord(
            "closed_form", M, snr_db, trial,
            output_sinr(res.w, scn.R_s_true, scn.R_in_true),
            res.objective, np.nan, res.iterations, res.converged, wall, seed))

    if "dc" in cfg.methods:
        if cfg.alpha0_rule == "random":
            w_init = _random_feasible_start(scn.Q, scn.eta, rng)
        else:
            w_init = problem.w0
        t0 = _clock(cfg)
        res = dc_iteration(R_hat, cfg.gamma, scn.Q, scn.eta, w_init,
                           zeta_term=cfg.zeta_term)
        wall = _elapsed_ms(cfg, t0)
        records.append(TrialRecord(
            "dc", M, snr_db, trial,
            output_sinr(res.w, scn.R_s_true, scn.R_in_true),
            res.objective, np.nan, res.iterations, res.converged, wall, seed))

    if "smi" in cfg.methods:
        t0 = _clock(cfg)
        res = smi_mvdr(R_hat, scn.R_s_presumed)
        wall = _elapsed_ms(cfg, t0)
        records.append(TrialRecord(
            "smi", M, snr_db, trial,
            output_sinr(res.w, scn.R_s_true, scn.R_in_true),
            res.objective, np.nan, res.iterations, res.converged, wall, seed))
    return records


def run_experiment(cfg, progress=None):
    """Run all (M, SNR, trial) cells of a configuration; returns the list of
    TrialRecord rows in deterministic order."""
    records = []
    for M in cfg.array_sizes:
        for snr_idx, snr_db in enumerate(cfg.snr_db):
            scn = _Scenario(cfg, M, float(snr_db))
            for trial in range(cfg.num_trials):
                records.extend(
                    _run_trial(cfg, scn, M, float(snr_db), snr_idx, trial))
            if progress is not None:
                progress(M, snr_db)
    return records


def run_example1(cfg=None, **overrides):
    return run_experiment(cfg if cfg is not None else example1_config(**overrides))


def run_example2(cfg=None, **overrides):
    return run_experiment(cfg if cfg is not None else example2_config(**overrides))


def run_example3(cfg=None, **overrides):
    return run_experiment(cfg if cfg is not None else example3_config(**overrides))


def _fmt(x):
    if isinstance(x, float):
        if np.isnan(x):
            return ""
        return format(x, ".12g")
    if isinstance(x, bool):
        return "1" if x else "0"
    return str(x)


def write_csv(records, path):
    """Emit the fixed-schema CSV; field order is the package contract."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([_fmt(getattr(r, col)) for col in CSV_COLUMNS])


def mean_by(records, key_fields, value_field):
    """Mean of a record field grouped by key fields, via compensated
    summation; returns {key_tuple: mean}."""
    sums, errs, counts = {}, {}, {}
    for r in records:
        k = tuple(getattr(r, f) for f in key_fields)
        v = float(getattr(r, value_field))
        if np.isnan(v):
            continue
        s = sums.get(k, 0.0)
        c = errs.get(k, 0.0)
        y = v - c
        t = s + y
        errs[k] = (t - s) - y
        sums[k] = t
        counts[k] = counts.get(k, 0) + 1
    return {k: sums[k] / counts[k] for k in sums}


def write_sinr_svg(records, path, width=640, height=420):
    """Minimal static SVG line chart: mean output SINR vs. SNR per method."""
    means = mean_by(records, ("method", "snr_db"), "sinr_db")
    methods = sorted({k[0] for k in means})
    snrs = sorted({k[1] for k in means})
    if not methods or len(snrs) < 2:
        raise PotdcError("need at least two SNR points to plot")
    ys = [means[(m, s)] for m in methods for s in snrs if (m, s) in means]
    y_lo, y_hi = min(ys), max(ys)
    if y_hi - y_lo < 1e-9:
        y_hi = y_lo + 1.0
    pad = 50
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]

    def px(s):
        return pad + (s - snrs[0]) / (snrs[-1] - snrs[0]) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y_lo) / (y_hi - y_lo) * (height - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height-pad}" x2="{width-pad}" y2="{height-pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height-pad}" stroke="black"/>',
             f'<text x="{width//2}" y="{height-10}" text-anchor="middle" font-size="12">SNR (dB)</text>',
             f'<text x="14" y="{height//2}" font-size="12" transform="rotate(-90 14 {height//2})" text-anchor="middle">mean output SINR (dB)</text>']
    for s in snrs:
        parts.append(f'<text x="{px(s):.1f}" y="{height-pad+16}" text-anchor="middle" font-size="10">{s:g}</text>')
    for i, m in enumerate(methods):
        pts = " ".join(f"{px(s):.1f},{py(means[(m, s)]):.1f}"
                       for s in snrs if (m, s) in means)
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{width-pad+4}" y="{pad+14*i}" font-size="11" fill="{color}">{m}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
