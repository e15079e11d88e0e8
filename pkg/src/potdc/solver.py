"""Outer solver: iterative linearization over the auxiliary variable, the
exhaustive-grid benchmark, the subsector convex-hull lower bound and the
numerical convexity checker for the inner value function.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import Infeasible
from .inner import (InnerProblem, dual_value, inner_value,
                    linearized_bound_coeffs, minimize_linearized, trace_bound)
from .settings import DEFAULT_SETTINGS

__all__ = [
    "PotdcTrace",
    "PotdcResult",
    "ConvexityReport",
    "potdc_solve",
    "exhaustive_search",
    "lower_bound",
    "convexity_check",
]


@dataclass
class PotdcTrace:
    """Per-iteration record: (index, linearization point, minimizer,
    objective, dual point, rank of the recovered matrix)."""
    iterations: list = field(default_factory=list)

    def append(self, i, alpha_ref, alpha_opt, objective, dual, rank):
        self.iterations.append((i, alpha_ref, alpha_opt, objective, dual, rank))

    def objectives(self):
        return [row[3] for row in self.iterations]

    def __len__(self):
        return len(self.iterations)


@dataclass
class PotdcResult:
    w: np.ndarray
    objective: float
    alpha: float
    trace: PotdcTrace
    converged: bool
    kkt_residual: float
    iterations: int
    interval: object


def _kkt_residual(problem, sol):
    """Lagrangian-gradient norm in (W, alpha) at the final primal/dual pair,
    plus complementary-slackness and feasibility violations.

    Components: projected envelope derivative tau - psi*b'(alpha) (projected
    onto the interval's tangent cone at endpoints), the W-stationarity /
    slackness term ||Z W||_F with Z = C - tau B + psi I, dual feasibility
    (negative part of Z), the slackness of the trace bound and the primal
    constraint violations.
    """
    alpha, w, dual = sol.alpha, sol.w, sol.dual
    lo, hi = problem.interval.lower, problem.interval.upper
    db = (1.0 - 1.0 / np.sqrt(alpha)) / problem.eta**2
    dk = dual.tau - dual.psi * db
    if alpha - lo <= 1e-9 * (1.0 + lo):
        r = max(0.0, -dk)
    elif hi - alpha <= 1e-9 * (1.0 + hi):
        r = max(0.0, dk)
    else:
        r = abs(dk)

    Z = problem.C - dual.tau * problem.B + dual.psi * np.eye(problem.dim)
    Z = 0.5 * (Z + Z.conj().T)
    nw = np.linalg.norm(w)
    r = max(r, float(np.linalg.norm(Z @ w) * nw))
    if not sol.boundary:
        r = max(r, max(0.0, -float(np.linalg.eigvalsh(Z)[0])))

    wBw = float(np.real(w.conj() @ problem.B @ w))
    wIw = float(nw**2)
    b = trace_bound(alpha, problem.eta)
    r = max(r, abs(wBw - alpha))
    r = max(r, max(0.0, wIw - b))
    r = max(r, dual.psi * abs(wIw - b) if not sol.boundary else 0.0)
    return r


def _exact_slope(problem, alpha):
    """Derivative of the exact inner value function at alpha via the envelope
    theorem; tight-trace-bound points report a descent direction."""
    bound = trace_bound(alpha, problem.eta)
    _, dual, boundary = dual_value(problem, alpha, bound)
    if boundary:
        return -1.0
    db = (1.0 - 1.0 / np.sqrt(alpha)) / problem.eta**2
    return dual.tau - dual.psi * db


def _polish_alpha(problem, sol):
    """Local stationarity polish after the relinearization loop: root-find the
    exact envelope derivative in a bracket around the final iterate, then
    re-solve the inner problem there.  Never worsens the objective."""
    iv = problem.interval
    span = iv.upper - iv.lower
    if span <= 1e-12 * (1.0 + iv.upper):
        return sol
    a = sol.alpha
    try:
        d_a = _exact_slope(problem, a)
        step = 1e-4 * span
        if d_a > 0.0:
            lo, hi, d_hi = None, a, d_a
            while step <= span:
                cand = max(a - step, iv.lower)
                d_c = _exact_slope(problem, cand)
                if d_c <= 0.0:
                    lo, d_lo = cand, d_c
                    break
                hi, d_hi = cand, d_c
                if cand == iv.lower:
                    # slope positive down to the endpoint: project onto it
                    polished = inner_value(problem, iv.lower)
                    return polished if polished.value <= sol.value else sol
                step *= 4.0
            else:
                return sol
        elif d_a < 0.0:
            lo, d_lo = a, d_a
            hi = None
            while step <= span:
                cand = min(a + step, iv.upper)
                d_c = _exact_slope(problem, cand)
                if d_c >= 0.0:
                    hi, d_hi = cand, d_c
                    break
                lo, d_lo = cand, d_c
                if cand == iv.upper:
                    polished = inner_value(problem, iv.upper)
                    return polished if polished.value <= sol.value else sol
                step *= 4.0
            else:
                return sol
        else:
            return sol
        if lo is None or hi is None or hi <= lo:
            return sol
        root = brentq(lambda x: _exact_slope(problem, x), lo, hi,
                      xtol=1e-12 * (1.0 + a), rtol=8.9e-16)
        polished = inner_value(problem, float(root))
    except (Infeasible, ValueError):
        return sol
    return polished if polished.value <= sol.value else sol


def potdc_solve(R_hat, gamma, Q, eta, alpha0=None, zeta_term=1e-6,
                max_iter=50, settings=DEFAULT_SETTINGS, problem=None):
    """Iteratively minimize the inner value function by relinearizing the
    concave sqrt term at the previous minimizer.

    Stops once the objective decrease falls to zeta_term (from the second
    iteration on) or the iteration cap is reached.
    """
    if problem is None:
        problem = InnerProblem(R_hat, gamma, Q, eta, settings=settings)
    interval = problem.interval
    alpha_ref = interval.midpoint if alpha0 is None else float(alpha0)
    if not (interval.lower - 1e-9 <= alpha_ref <= interval.upper + 1e-9):
        raise Infeasible(
            f"initial point {alpha_ref} outside [{interval.lower}, {interval.upper}]")
    alpha_ref = min(max(alpha_ref, interval.lower), interval.upper)

    trace = PotdcTrace()
    sol = None
    prev_obj = None
    converged = False
    for i in range(1, max_iter + 1):
        sol = minimize_linearized(problem, alpha_ref)
        trace.append(i, alpha_ref, sol.alpha, sol.value, sol.dual, sol.rank)
        if prev_obj is not None and prev_obj - sol.value <= zeta_term:
            converged = True
            break
        prev_obj = sol.value
        alpha_ref = sol.alpha

    sol = _polish_alpha(problem, sol)
    objective = float(np.real(sol.w.conj() @ problem.C @ sol.w))
    return PotdcResult(
        w=sol.w,
        objective=objective,
        alpha=sol.alpha,
        trace=trace,
        converged=converged,
        kkt_residual=_kkt_residual(problem, sol),
        iterations=len(trace),
        interval=interval,
    )


def exhaustive_search(R_hat=None, gamma=None, Q=None, eta=None, grid_size=2000,
                      problem=None):
    """Benchmark: minimum of the inner value function over a uniform alpha
    grid on the feasible interval.  Returns (alpha, value)."""
    if problem is None:
        problem = InnerProblem(R_hat, gamma, Q, eta)
    if grid_size < 2:
        raise ValueError("grid size must be at least 2")
    interval = problem.interval
    alphas = np.linspace(interval.lower, interval.upper, grid_size)
    bounds = trace_bound(alphas, problem.eta)
    values, _, _, statuses = kernels.grid_dual_values(
        alphas, bounds, *problem._kernel_args())
    ok = statuses != kernels.STATUS_INFEASIBLE
    if not np.any(ok):
        raise Infeasible("no feasible grid point")
    j = int(np.argmin(np.where(ok, values, np.inf)))
    return float(alphas[j]), float(values[j])


def lower_bound(R_hat=None, gamma=None, Q=None, eta=None, num_sectors=32,
                problem=None):
    """Certified lower bound on the optimal objective.

    The feasible alpha interval is split into uniform subsectors; on each the
    convex trace-bound curve is replaced by its chord (the convex hull of the
    constraint region over that subsector), the relaxed problem is minimized
    by 1-D convex search, and the smallest subsector value is returned.
    """
    if problem is None:
        problem = InnerProblem(R_hat, gamma, Q, eta)
    if num_sectors < 1:
        raise ValueError("need at least one subsector")
    interval = problem.interval
    lo, hi = interval.lower, interval.upper
    if hi - lo <= 1e-12 * (1.0 + hi):
        return inner_value(problem, lo).value
    edges = np.linspace(lo, hi, num_sectors + 1)
    best = np.inf
    f = lambda a: trace_bound(a, problem.eta)
    for a, b in zip(edges[:-1], edges[1:]):
        q = (f(b) - f(a)) / (b - a)
        p = f(a) - q * a
        _, val, _, _, status = kernels.minimize_linear_bound(
            float(p), float(q), float(a), float(b),
            problem.settings.alpha_tol, *problem._kernel_args())
        if status != kernels.STATUS_INFEASIBLE and val < best:
            best = float(val)
    if not np.isfinite(best):
        raise Infeasible("all subsectors infeasible")
    return best


@dataclass
class ConvexityReport:
    min_second_difference: float
    threshold: float
    convex_consistent: bool
    alphas: np.ndarray
    values: np.ndarray


def convexity_check(R_hat=None, gamma=None, Q=None, eta=None, grid_size=200,
                    tol_factor=1e-6, problem=None, values=None):
    """Evidence check that the inner value function is convex on its interval:
    reports the minimum discrete second difference over a uniform grid."""
    if problem is None and values is None:
        problem = InnerProblem(R_hat, gamma, Q, eta)
    if grid_size < 3:
        raise ValueError("need at least 3 grid points")
    if values is None:
        interval = problem.interval
        alphas = np.linspace(interval.lower, interval.upper, grid_size)
        bounds = trace_bound(alphas, problem.eta)
        values, _, _, statuses = kernels.grid_dual_values(
            alphas, bounds, *problem._kernel_args())
        if np.any(statuses == kernels.STATUS_INFEASIBLE):
            raise Infeasible("grid point infeasible inside the interval")
    else:
        values = np.asarray(values, dtype=float)
        alphas = np.linspace(0.0, 1.0, values.size)
    second = values[:-2] - 2.0 * values[1:-1] + values[2:]
    scale = float(np.max(np.abs(values))) or 1.0
    thresh = -tol_factor * scale
    mn = float(np.min(second)) if second.size else 0.0
    return ConvexityReport(
        min_second_difference=mn,
        threshold=thresh,
        convex_consistent=mn >= thresh,
        alphas=alphas,
        values=np.asarray(values, dtype=float),
    )
