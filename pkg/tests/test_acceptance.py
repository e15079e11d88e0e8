"""Acceptance suite: nine numbered criteria, one test (and one printed
pass/fail line) per criterion.

The criteria check the solver stack against independent oracles, provable
properties of the optimization landscape, the published qualitative behavior
of the Monte-Carlo studies, and the determinism contract of the CSV harness.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from potdc import kernels
from potdc.experiments import (_Scenario, _trial_seed, example1_config,
                               example2_config, mean_by, run_experiment,
                               run_example3)
from potdc.arraymodel import generate_snapshots, sample_covariance
from potdc.inner import (InnerProblem, dual_value, inner_value,
                         linearized_bound_coeffs, feasible_alpha_range,
                         trace_bound)
from potdc.oracles import (qcqp_min_oracle, worst_case_power_pg,
                           worst_case_power_sampled)
from potdc.selftest import random_instance
from potdc.solver import convexity_check, exhaustive_search, lower_bound, potdc_solve
from potdc.worstcase import worst_case_signal_power

ARTIFACTS = Path(__file__).parent / "_artifacts"


def _report(num, name, passed, detail):
    print(f"\n[criterion {num}] {'PASS' if passed else 'FAIL'} - {name}: {detail}")
    assert passed, f"criterion {num} ({name}): {detail}"


class StudyData:
    """One full Monte-Carlo study plus per-instance global-optimality and
    convexity evidence, shared by criteria 5, 7 and 8."""

    def __init__(self, cfg):
        self.cfg = cfg
        t0 = time.perf_counter()
        self.records = run_experiment(cfg)
        self.exhaustive = {}          # (M, snr_db, trial) -> grid minimum
        self.conv_margin = np.inf     # min (second difference - threshold)
        self.conv_failures = []
        conv_seconds = 0.0
        for M in cfg.array_sizes:
            for snr_idx, snr_db in enumerate(cfg.snr_db):
                scn = _Scenario(cfg, M, float(snr_db))
                for trial in range(cfg.num_trials):
                    seed = _trial_seed(cfg.master_seed, M, snr_idx, trial)
                    X = generate_snapshots(scn.R_s_true, scn.R_int, 1.0,
                                           cfg.snapshots, seed)
                    problem = InnerProblem(sample_covariance(X), cfg.gamma,
                                           scn.Q, scn.eta)
                    _, v = exhaustive_search(problem=problem, grid_size=2000)
                    self.exhaustive[(M, float(snr_db), trial)] = v
                    tc = time.perf_counter()
                    rep = convexity_check(problem=problem, grid_size=200)
                    conv_seconds += time.perf_counter() - tc
                    self.conv_margin = min(
                        self.conv_margin,
                        rep.min_second_difference - rep.threshold)
                    if not rep.convex_consistent:
                        self.conv_failures.append(
                            (problem, M, float(snr_db), trial, rep))
        # convexity evidence is budgeted separately from the sandwich check
        self.seconds = time.perf_counter() - t0 - conv_seconds

    def rows(self, method):
        return [r for r in self.records if r.method == method]


@pytest.fixture(scope="session")
def study1():
    return StudyData(example1_config())


@pytest.fixture(scope="session")
def study2():
    return StudyData(example2_config())


@pytest.fixture(scope="session")
def study3_records():
    return run_example3()


def test_criterion_1_worst_case_power_oracle():
    """Closed-form worst-case signal power vs. projected-gradient and
    sampling oracles over the mismatch ball."""
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(500):
        M = int(rng.integers(2, 9))
        r = int(rng.integers(2, 9))
        Q = rng.standard_normal((r, M)) + 1j * rng.standard_normal((r, M))
        w = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        eta = float(rng.uniform(0.05, 1.5))
        closed = worst_case_signal_power(Q, w, eta)
        pg = worst_case_power_pg(Q, w, eta, seed=i)
        scale = 1.0 + abs(closed)
        worst = max(worst, abs(closed - pg) / scale)
        sampled = worst_case_power_sampled(Q, w, eta, num_samples=100_000,
                                           seed=i)
        # no sampled feasible mismatch may beat the closed form
        worst = max(worst, max(0.0, closed - sampled) / scale)
    dt = time.perf_counter() - t0
    passed = worst <= 1e-6 and dt <= 120.0
    _report(1, "worst-case power oracle", passed,
            f"worst residual {worst:.3e} over 500 instances in {dt:.1f}s")


def test_criterion_2_inner_duality_and_recovery():
    """Dual-based inner values vs. an independent NLP primal oracle, plus
    rank-one recovery quality."""
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    worst_gap = worst_val = worst_con = 0.0
    for i in range(500):
        M = int(rng.integers(2, 6))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        problem = InnerProblem(R_hat, gamma, Q, eta)
        iv = problem.interval
        for a in np.linspace(iv.lower, iv.upper, 20):
            a = float(a)
            bound = trace_bound(a, eta)
            sol = inner_value(problem, a)
            try:
                prim, _ = qcqp_min_oracle(problem.C, problem.B, a, bound,
                                          seed=i, n_starts=2)
            except RuntimeError:
                prim = np.inf
            if abs(sol.value - prim) > 1e-5 * (1.0 + abs(sol.value)):
                # the cheap oracle can sit in a local minimum; retry harder
                prim, _ = qcqp_min_oracle(problem.C, problem.B, a, bound,
                                          seed=i + 1, n_starts=8)
            worst_gap = max(worst_gap,
                            abs(sol.value - prim) / (1.0 + abs(prim)))
            w = sol.w
            wCw = float(np.real(w.conj() @ problem.C @ w))
            worst_val = max(worst_val,
                            abs(wCw - sol.value) / (1.0 + abs(sol.value)))
            wBw = float(np.real(w.conj() @ problem.B @ w))
            worst_con = max(worst_con, abs(wBw - a) / (1.0 + a))
            worst_con = max(worst_con,
                            max(0.0, np.linalg.norm(w) ** 2 - bound)
                            / (1.0 + bound))
    dt = time.perf_counter() - t0
    passed = (worst_gap <= 1e-5 and worst_val <= 1e-6 and worst_con <= 1e-7
              and dt <= 300.0)
    _report(2, "inner strong duality + rank-one recovery", passed,
            f"duality gap {worst_gap:.3e}, value residual {worst_val:.3e}, "
            f"constraint residual {worst_con:.3e} over 500x20 points in {dt:.1f}s")


def test_criterion_3_tangent_bound_and_slopes():
    """The linearized value dominates the exact one, touches it at the
    linearization point, and its analytic envelope slope matches finite
    differences at smooth points."""
    rng = np.random.default_rng(303)
    worst_dom = worst_tan = worst_slope = 0.0
    smooth = skipped = 0
    for _ in range(100):
        M = int(rng.integers(2, 9))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        problem = InnerProblem(R_hat, gamma, Q, eta)
        iv = problem.interval
        span = iv.upper - iv.lower
        a_c = float(rng.uniform(iv.lower + 0.1 * span, iv.upper - 0.1 * span))
        p, q = linearized_bound_coeffs(a_c, eta)
        rng_lin = feasible_alpha_range(problem, p, q, iv.lower, iv.upper)
        lo, hi = rng_lin
        alphas = np.linspace(lo, hi, 200)
        exact, _, _, st_e = kernels.grid_dual_values(
            alphas, trace_bound(alphas, eta), *problem._kernel_args())
        lin, _, _, st_l = kernels.grid_dual_values(
            alphas, p + q * alphas, *problem._kernel_args())
        ok = (st_e != kernels.STATUS_INFEASIBLE) & (st_l != kernels.STATUS_INFEASIBLE)
        worst_dom = max(worst_dom, float(np.max(
            np.where(ok, (exact - lin) / (1.0 + np.abs(exact)), -np.inf))))

        # tangency at the linearization point
        v_e, dual, bnd = dual_value(problem, a_c, trace_bound(a_c, eta))
        v_l, _, _ = dual_value(problem, a_c, p + q * a_c)
        worst_tan = max(worst_tan, abs(v_e - v_l) / (1.0 + abs(v_e)))

        # envelope slope vs. central finite difference, skipping kinks
        if bnd:
            skipped += 1
            continue
        h = 1e-5 * span
        vm, _, bm = dual_value(problem, a_c - h, trace_bound(a_c - h, eta))
        vp, _, bp = dual_value(problem, a_c + h, trace_bound(a_c + h, eta))
        if bm or bp:
            skipped += 1
            continue
        s_left = (v_e - vm) / h
        s_right = (vp - v_e) / h
        if abs(s_right - s_left) > 1e-3 * (1.0 + abs(s_left) + abs(s_right)):
            skipped += 1  # multiplier kink: one-sided slopes differ
            continue
        smooth += 1
        db = (1.0 - 1.0 / np.sqrt(a_c)) / eta**2
        analytic = dual.tau - dual.psi * db
        fd = 0.5 * (s_left + s_right)
        worst_slope = max(worst_slope, abs(analytic - fd) / (1.0 + abs(fd)))
    passed = (worst_dom <= 1e-8 and worst_tan <= 1e-8
              and worst_slope <= 1e-4 and smooth >= 50)
    _report(3, "tangent upper bound + slope agreement", passed,
            f"domination residual {worst_dom:.3e}, tangency {worst_tan:.3e}, "
            f"slope residual {worst_slope:.3e} ({smooth} smooth / {skipped} kink points)")


def test_criterion_4_descent_convergence_kkt():
    """Every run has a non-increasing objective trace, converges under the
    iteration cap, and ends at an approximate KKT point."""
    rng = np.random.default_rng(404)
    worst_inc = worst_kkt = 0.0
    n_converged = 0
    for _ in range(1000):
        M = int(rng.integers(4, 21))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        res = potdc_solve(R_hat, gamma, Q, eta, zeta_term=1e-6, max_iter=50)
        objs = res.trace.objectives()
        worst_inc = max(worst_inc, max(
            (objs[i + 1] - objs[i] for i in range(len(objs) - 1)), default=0.0))
        n_converged += res.converged and res.iterations <= 50
        worst_kkt = max(worst_kkt, res.kkt_residual / (1.0 + res.objective))
    passed = worst_inc <= 1e-9 and n_converged == 1000 and worst_kkt <= 1e-5
    _report(4, "monotone descent + convergence + KKT", passed,
            f"worst increase {worst_inc:.3e}, {n_converged}/1000 converged, "
            f"worst scaled KKT residual {worst_kkt:.3e}")


def _sandwich(study):
    worst_lb = worst_ub = worst_rel = 0.0
    for r in study.rows("potdc"):
        exh = study.exhaustive[(r.M, r.snr_db, r.trial)]
        worst_lb = max(worst_lb, (r.lower_bound - r.objective)
                       / (1.0 + abs(r.objective)))
        worst_ub = max(worst_ub, r.objective - exh - 1e-6)
    mean_obj = mean_by(study.records, ("method", "snr_db"), "objective")
    mean_lb = mean_by(study.records, ("method", "snr_db"), "lower_bound")
    for snr in study.cfg.snr_db:
        o = mean_obj[("potdc", float(snr))]
        lb = mean_lb[("potdc", float(snr))]
        worst_rel = max(worst_rel, (o - lb) / abs(o))
    return worst_lb, worst_ub, worst_rel


def test_criterion_5_global_optimality_sandwich(study1, study2):
    """Solver objective between the certified lower bound and the dense-grid
    minimum on both stock studies, with a tight relative gap."""
    details = []
    passed = True
    for name, study in (("study1", study1), ("study2", study2)):
        wl, wu, wr = _sandwich(study)
        details.append(f"{name}: lb violation {wl:.2e}, grid violation {wu:.2e}, "
                       f"relative gap {wr:.2%}, {study.seconds:.0f}s")
        passed = passed and wl <= 1e-9 and wu <= 0.0 and wr <= 0.01
    total = study1.seconds + study2.seconds
    passed = passed and total <= 900.0
    _report(5, "global-optimality sandwich", passed,
            "; ".join(details) + f"; total {total:.0f}s")


def test_criterion_6_iteration_scaling(study3_records):
    """Iteration counts: flat for the relinearization solver, growing for the
    constraint-linearization baseline, which is also slower per trial."""
    cfg_sizes = tuple(range(8, 21, 2))
    iters = mean_by(study3_records, ("method", "M"), "iterations")
    p = [iters[("potdc", M)] for M in cfg_sizes]
    d = [iters[("dc", M)] for M in cfg_sizes]
    walls = mean_by(study3_records, ("method", "M"), "wall_time_ms")
    wall_ratio = np.mean([walls[("dc", M)] / walls[("potdc", M)]
                          for M in cfg_sizes])
    flat = max(p) <= 5.0 and max(p) / min(p) <= 1.5
    monotone = all(d[i + 1] >= d[i] for i in range(len(d) - 1))
    growing = d[-1] / d[0] >= 1.8
    passed = flat and monotone and growing and wall_ratio > 1.0
    _report(6, "iteration-count scaling", passed,
            f"solver iterations {min(p):.2f}..{max(p):.2f}, baseline "
            f"{d[0]:.2f}->{d[-1]:.2f} (ratio {d[-1]/d[0]:.2f}), "
            f"mean wall-time ratio {wall_ratio:.2f}")


def test_criterion_7_sinr_ordering(study1, study2):
    """Mean output SINR of the solver dominates both iterative and
    closed-form robust baselines at every SNR point of both studies."""
    details = []
    passed = True
    for name, study in (("study1", study1), ("study2", study2)):
        means = mean_by(study.records, ("method", "snr_db"), "sinr_db")
        margin, where = np.inf, ""
        for snr in study.cfg.snr_db:
            s = float(snr)
            for other in ("closed_form", "dc"):
                d = means[("potdc", s)] - means[(other, s)]
                if d < margin:
                    margin, where = d, f"vs {other} at {s:g} dB"
        details.append(f"{name}: min margin {margin:+.3f} dB ({where})")
        # the iterative baseline converges to the same optimum, so its curve
        # ties the solver's up to termination-level noise; a 1e-3 dB band
        # distinguishes a numerical tie from a genuine ordering violation
        passed = passed and margin >= -1e-3
    _report(7, "mean output SINR ordering", passed, "; ".join(details))


def test_criterion_8_convexity_evidence(study1, study2):
    """Discrete convexity of the inner value function on random instances and
    on every study instance; counterexamples are dumped as artifacts."""
    rng = np.random.default_rng(808)
    worst = np.inf
    failures = 0
    for i in range(100):
        M = int(rng.integers(3, 11))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        rep = convexity_check(R_hat, gamma, Q, eta, grid_size=200)
        worst = min(worst, rep.min_second_difference - rep.threshold)
        if not rep.convex_consistent:
            failures += 1
            ARTIFACTS.mkdir(exist_ok=True)
            np.savez(ARTIFACTS / f"convexity_counterexample_random_{i}.npz",
                     R_hat=R_hat, gamma=gamma, Q=Q, eta=eta,
                     alphas=rep.alphas, values=rep.values)
    for name, study in (("study1", study1), ("study2", study2)):
        worst = min(worst, study.conv_margin)
        for problem, M, snr, trial, rep in study.conv_failures:
            failures += 1
            ARTIFACTS.mkdir(exist_ok=True)
            np.savez(ARTIFACTS / f"convexity_counterexample_{name}_{M}_{snr}_{trial}.npz",
                     C=problem.C, B=problem.B, eta=problem.eta,
                     alphas=rep.alphas, values=rep.values)
    passed = failures == 0
    _report(8, "convexity evidence", passed,
            f"{failures} violations, worst margin above threshold {worst:.3e}")


def test_criterion_9_csv_determinism(tmp_path):
    """Identical config and seed produce byte-identical CSV output through
    the real command-line entry point."""
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        subprocess.run(
            [sys.executable, "-m", "potdc.cli", "example1", "--trials", "2",
             "--output", str(out), "--quiet"],
            check=True, capture_output=True)
        outs.append(out.read_bytes())
    passed = outs[0] == outs[1] and len(outs[0]) > 0
    _report(9, "byte-identical CSV determinism", passed,
            f"{len(outs[0])} bytes, identical={outs[0] == outs[1]}")
