"""Built-in verification suites: each suite checks a pillar of the solver
against an independent oracle or a provable property, on seeded random
instances.  The CLI `selftest` subcommand and the test suite both route
through :func:`run_selftest`.
"""

from dataclasses import dataclass

import numpy as np

from .arraymodel import (ArrayConfig, GaussianDensity, ScatteredSource,
                         UniformDensity, covariance_from_density,
                         generate_snapshots, sample_covariance)
from .inner import InnerProblem, inner_value, linearized_value, trace_bound
from .linalg import psd_sqrt_factor
from .oracles import qcqp_min_oracle, worst_case_power_pg, worst_case_power_sampled
from .solver import convexity_check, exhaustive_search, lower_bound, potdc_solve
from .worstcase import worst_case_signal_power

__all__ = ["SuiteResult", "SUITES", "run_selftest"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst_residual: float
    detail: str


def random_instance(rng, M, factor_rows=None):
    """Seeded random problem data (R_hat, gamma, Q, eta) with a guaranteed
    feasible mismatch bound."""
    r = factor_rows or M
    Q = (rng.standard_normal((r, M)) + 1j * rng.standard_normal((r, M))) / np.sqrt(r)
    X = (rng.standard_normal((2 * M, M)) + 1j * rng.standard_normal((2 * M, M)))
    R_hat = X.conj().T @ X / (2 * M)
    R_hat = 0.5 * (R_hat + R_hat.conj().T)
    gamma = float(rng.uniform(0.5, 5.0))
    lam = float(np.linalg.eigvalsh(Q.conj().T @ Q)[-1])
    eta = float(rng.uniform(0.1, 0.6)) * np.sqrt(lam)
    return R_hat, gamma, Q, eta


def _suite_worst_case(rng, n, samples, tol):
    worst = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 9))
        r = int(rng.integers(2, 9))
        Q = rng.standard_normal((r, M)) + 1j * rng.standard_normal((r, M))
        w = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        eta = float(rng.uniform(0.05, 1.5))
        closed = worst_case_signal_power(Q, w, eta)
        oracle = worst_case_power_pg(Q, w, eta, seed=int(rng.integers(1 << 31)))
        scale = 1.0 + abs(closed)
        worst = max(worst, abs(closed - oracle) / scale)
        sampled = worst_case_power_sampled(
            Q, w, eta, num_samples=samples, seed=int(rng.integers(1 << 31)))
        worst = max(worst, max(0.0, closed - sampled) / scale)
    return worst, worst <= tol


def _suite_duality(rng, n, n_alpha, tol):
    worst = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 7))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        problem = InnerProblem(R_hat, gamma, Q, eta)
        iv = problem.interval
        for a in np.linspace(iv.lower, iv.upper, n_alpha):
            sol = inner_value(problem, float(a))
            prim, _ = qcqp_min_oracle(problem.C, problem.B, float(a),
                                      trace_bound(float(a), eta),
                                      seed=int(rng.integers(1 << 31)))
            worst = max(worst, abs(sol.value - prim) / (1.0 + abs(prim)))
    return worst, worst <= tol


def _suite_tangency(rng, n, grid, tol):
    worst = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 7))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        problem = InnerProblem(R_hat, gamma, Q, eta)
        iv = problem.interval
        a_c = float(rng.uniform(iv.lower, iv.upper))
        tang = linearized_value(problem, a_c, a_c)
        exact = inner_value(problem, a_c)
        scale = 1.0 + abs(exact.value)
        worst = max(worst, abs(tang.value - exact.value) / scale)
        for a in np.linspace(iv.lower, iv.upper, grid):
            lin_bound = trace_bound(a_c, eta) \
                + (1.0 - 1.0 / np.sqrt(a_c)) / eta**2 * (float(a) - a_c)
            # the tangent bound is tighter than the exact one, so its feasible
            # alpha range is smaller; skip points outside it
            if lin_bound < 0 or lin_bound * problem.lam_b < float(a):
                continue
            lin = linearized_value(problem, float(a), a_c)
            ex = inner_value(problem, float(a))
            worst = max(worst, max(0.0, ex.value - lin.value) / (1.0 + abs(ex.value)))
    return worst, worst <= tol


def _suite_descent(rng, n, tol):
    worst = 0.0
    ok = True
    for _ in range(n):
        M = int(rng.integers(3, 11))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        res = potdc_solve(R_hat, gamma, Q, eta)
        objs = res.trace.objectives()
        inc = max((objs[i + 1] - objs[i] for i in range(len(objs) - 1)),
                  default=0.0)
        worst = max(worst, inc)
        ok = ok and res.converged and inc <= tol
        ok = ok and res.kkt_residual <= 1e-5 * (1.0 + res.objective)
        worst = max(worst, res.kkt_residual / (1.0 + res.objective))
    return worst, ok


def _suite_sandwich(rng, n, tol):
    worst = 0.0
    ok = True
    for _ in range(n):
        M = int(rng.integers(3, 9))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        problem = InnerProblem(R_hat, gamma, Q, eta)
        res = potdc_solve(None, gamma, None, eta, problem=problem)
        lb = lower_bound(problem=problem, num_sectors=32)
        _, ub = exhaustive_search(problem=problem, grid_size=400)
        scale = 1.0 + abs(res.objective)
        worst = max(worst, max(0.0, lb - res.objective) / scale)
        worst = max(worst, max(0.0, res.objective - ub - 1e-6) / scale)
        ok = ok and (res.objective - lb) / scale <= tol
    return worst, ok and worst <= 1e-7


def _example_covariances(M=10, snr_db=0.0, inr_db=10.0, seed=0, K=20):
    array = ArrayConfig(M)
    R_s = covariance_from_density(
        array, ScatteredSource(GaussianDensity(30.0, 4.0), 10 ** (snr_db / 10)))
    R_int = covariance_from_density(
        array, ScatteredSource(UniformDensity(10.0, 4.0), 10 ** (inr_db / 10)))
    X = generate_snapshots(R_s, R_int, 1.0, K, seed)
    R_tilde = covariance_from_density(
        array, ScatteredSource(GaussianDensity(32.0, 1.0), 1.0))
    return sample_covariance(X), R_tilde


def _suite_convexity(rng, n, grid, tol_factor):
    worst = 0.0
    ok = True
    for _ in range(n):
        M = int(rng.integers(3, 9))
        R_hat, gamma, Q, eta = random_instance(rng, M)
        rep = convexity_check(R_hat, gamma, Q, eta, grid_size=grid,
                              tol_factor=tol_factor)
        ok = ok and rep.convex_consistent
        worst = max(worst, max(0.0, rep.threshold - rep.min_second_difference))
    R_hat, R_tilde = _example_covariances(seed=int(rng.integers(1 << 31)))
    Q = psd_sqrt_factor(R_tilde)
    eta = 0.3 * float(np.sqrt(np.real(np.trace(R_tilde))))
    rep = convexity_check(R_hat, 10.0, Q, eta, grid_size=grid,
                          tol_factor=tol_factor)
    ok = ok and rep.convex_consistent
    worst = max(worst, max(0.0, rep.threshold - rep.min_second_difference))
    return worst, ok


SUITES = ("worst_case", "duality", "tangency", "descent", "sandwich",
          "convexity")


def run_selftest(level="quick", seed=1234, fault=None):
    """Run the verification suites.

    level - "quick" (small instance counts, < ~1 min) or "full".
    fault - name of a suite whose tolerance is deliberately broken; used to
            verify that the harness reports failures.
    Returns a list of SuiteResult.
    """
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    q = level == "quick"
    sizes = {
        "worst_case": (10 if q else 100, 2000 if q else 20000, 1e-6),
        "duality": (4 if q else 40, 4 if q else 10, 1e-5),
        "tangency": (4 if q else 30, 8 if q else 25, 1e-7),
        "descent": (10 if q else 100, 1e-9),
        "sandwich": (3 if q else 20, 0.01),
        "convexity": (6 if q else 60, 60 if q else 200, 1e-6),
    }
    if fault is not None:
        if fault not in sizes:
            raise ValueError(f"unknown suite {fault!r}")
        params = list(sizes[fault])
        params[-1] = -1.0  # impossible tolerance: the suite must now fail
        sizes[fault] = tuple(params)

    runners = {
        "worst_case": _suite_worst_case,
        "duality": _suite_duality,
        "tangency": _suite_tangency,
        "descent": _suite_descent,
        "sandwich": _suite_sandwich,
        "convexity": _suite_convexity,
    }
    results = []
    for i, name in enumerate(SUITES):
        rng = np.random.default_rng([seed, i])
        worst, passed = runners[name](rng, *sizes[name])
        results.append(SuiteResult(
            name=name, passed=bool(passed), worst_residual=float(worst),
            detail=f"worst residual {worst:.3e}"))
    return results
