"""Inner convex subproblem: optimal value functions over the auxiliary
variable and rank-one primal recovery.

An :class:`InnerProblem` bundles the immutable instance data
(C = R_hat + gamma I, the factor Q, B = Q^H Q and the mismatch bound eta)
together with precomputed spectral quantities used by the kernels.  Value
queries:

* ``inner_value``      - relaxed inner problem with the exact trace bound
                         (sqrt(alpha)-1)^2 / eta^2
* ``linearized_value`` - same with the bound linearized around a reference
                         point (convex upper bound, tangent at the reference)
* ``minimize_linearized`` - 1-D convex minimization of the linearized value
                         over the feasible alpha interval (one outer-solver
                         step)
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .errors import Infeasible, RecoveryError
from .linalg import _whitened
from .settings import DEFAULT_SETTINGS, SolverSettings
from .worstcase import AlphaInterval, alpha_bounds, feasible_start

__all__ = [
    "DualPoint",
    "InnerSolution",
    "InnerProblem",
    "trace_bound",
    "dual_value",
    "inner_value",
    "linearized_value",
    "linearized_bound_coeffs",
    "minimize_linearized",
    "recover_weights",
]


@dataclass(frozen=True)
class DualPoint:
    tau: float
    psi: float  # multiplier of the trace bound, >= 0


@dataclass(frozen=True)
class InnerSolution:
    value: float
    alpha: float
    w: np.ndarray
    W: np.ndarray
    dual: DualPoint
    rank: int
    boundary: bool = False


class InnerProblem:
    """Immutable instance data for the inner subproblems."""

    def __init__(self, R_hat, gamma, Q, eta, settings: SolverSettings = DEFAULT_SETTINGS):
        Q = np.ascontiguousarray(np.asarray(Q, dtype=np.complex128))
        M = Q.shape[1]
        C = np.asarray(R_hat, dtype=np.complex128) + gamma * np.eye(M)
        C = np.ascontiguousarray(0.5 * (C + C.conj().T))
        B = Q.conj().T @ Q
        B = np.ascontiguousarray(0.5 * (B + B.conj().T))
        eig_C = np.linalg.eigvalsh(C)
        if eig_C[0] <= 0:
            raise Infeasible("loaded covariance must be positive definite")
        eig_B = np.linalg.eigvalsh(B)
        self.C = C
        self.B = B
        self.Q = Q
        self.eta = float(eta)
        self.gamma = float(gamma)
        self.dim = M
        self.lam_b = float(eig_B[-1])
        self.settings = settings
        # smallest dual multiplier at which the PSD constraint bites, and the
        # largest B-form over its null directions (slack-bound shortcut data)
        L, W = _whitened(C, B)
        mvals, mvecs = np.linalg.eigh(W)
        mu_max = float(mvals[-1])
        if mu_max <= 0:
            raise Infeasible("Q^H Q must have a positive eigenvalue")
        self.tau0 = 1.0 / mu_max
        keep = mvals >= mu_max - 1e-10 * (abs(mu_max) + 1.0)
        V = scipy.linalg.solve_triangular(L.conj().T, mvecs[:, keep],
                                          lower=False)
        Vq, _ = np.linalg.qr(V)
        Bt = Vq.conj().T @ B @ Vq
        self.s0 = float(np.linalg.eigvalsh(0.5 * (Bt + Bt.conj().T))[-1])
        # initial bracket endpoint before geometric expansion; the maximizer
        # always lies at or above tau0
        self.tau_hi0 = 2.0 * self.tau0
        if self.lam_b <= eta**2:
            raise Infeasible(
                "problem infeasible: largest eigenvalue of Q^H Q does not exceed eta^2")
        self.w0 = feasible_start(Q, eta)
        self.interval = alpha_bounds(R_hat, gamma, Q, eta, w0=self.w0)

    def _kernel_args(self, gap_tol=None):
        s = self.settings
        return (self.C, self.B, self.lam_b, self.tau0, self.s0, self.tau_hi0,
                s.tau_tol, s.boundary_margin, float(s.max_expand),
                s.search_gap_tol if gap_tol is None else gap_tol)


def trace_bound(alpha, eta):
    """Exact trace bound (sqrt(alpha)-1)^2 / eta^2 of the inner problem."""
    return (np.sqrt(alpha) - 1.0) ** 2 / eta**2


def linearized_bound_coeffs(alpha_ref, eta):
    """Coefficients (p, q) of the linearized trace bound b(alpha) = p + q*alpha
    obtained by replacing sqrt(alpha) with its tangent at alpha_ref."""
    r = np.sqrt(alpha_ref)
    q = (1.0 - 1.0 / r) / eta**2
    p = -(r - 1.0) / eta**2
    return p, q


def dual_value(problem, alpha, bound):
    """Optimal value of the inner problem (via its dual) for an explicit
    trace bound; returns (value, DualPoint, boundary_flag).

    Runs the multiplier search to full width tolerance (no early value stop)
    since the dual point also drives rank-one recovery.
    """
    if bound < 0:
        raise Infeasible(f"trace bound {bound:.3e} is negative at alpha={alpha}")
    val, tau, psi, status = kernels.dual_solve(float(alpha), float(bound),
                                               *problem._kernel_args(gap_tol=0.0))
    if status == kernels.STATUS_INFEASIBLE:
        raise Infeasible(
            f"inner problem infeasible: alpha={alpha} exceeds bound*lam_max(B)")
    return float(val), DualPoint(float(tau), float(psi)), status == kernels.STATUS_BOUNDARY


def _solution(problem, alpha, bound, value, dual, boundary):
    w, W = recover_weights(problem, dual, alpha, bound, value, boundary)
    return InnerSolution(value=value, alpha=float(alpha), w=w, W=W, dual=dual,
                         rank=1, boundary=boundary)


def inner_value(problem, alpha):
    """Relaxed inner value function at alpha (exact trace bound)."""
    bound = trace_bound(alpha, problem.eta)
    value, dual, boundary = dual_value(problem, alpha, bound)
    return _solution(problem, alpha, bound, value, dual, boundary)


def linearized_value(problem, alpha, alpha_ref):
    """Linearized inner value at alpha with linearization point alpha_ref."""
    p, q = linearized_bound_coeffs(alpha_ref, problem.eta)
    bound = p + q * alpha
    value, dual, boundary = dual_value(problem, alpha, bound)
    return _solution(problem, alpha, bound, value, dual, boundary)


def feasible_alpha_range(problem, p, q, a_lo, a_hi):
    """Sub-interval of [a_lo, a_hi] on which the linear trace bound p+q*alpha
    keeps the inner problem feasible (bound >= 0 and bound*lam_max(B) >= alpha)."""
    lo, hi = float(a_lo), float(a_hi)
    if q > 0:
        lo = max(lo, -p / q)
    elif p < 0:
        return None
    coef = q * problem.lam_b - 1.0
    rhs = -p * problem.lam_b
    if coef > 0:
        lo = max(lo, rhs / coef)
    elif coef < 0:
        hi = min(hi, rhs / coef)
    elif rhs > 0:
        return None
    if lo > hi:
        return None
    return lo, hi


def minimize_linearized(problem, alpha_ref, interval=None):
    """One outer-solver step: minimize the linearized value over the feasible
    alpha interval.  Returns an InnerSolution whose alpha is the minimizer."""
    if interval is None:
        interval = problem.interval
    p, q = linearized_bound_coeffs(alpha_ref, problem.eta)
    rng = feasible_alpha_range(problem, p, q, interval.lower, interval.upper)
    if rng is None:
        raise Infeasible("linearized subproblem infeasible over the interval")
    lo, hi = rng
    a, val, tau, psi, status = kernels.minimize_linear_bound(
        float(p), float(q), lo, hi, problem.settings.alpha_tol,
        *problem._kernel_args())
    if status == kernels.STATUS_INFEASIBLE:
        raise Infeasible("linearized subproblem infeasible")
    # re-solve the dual at the minimizer to full precision; recovery quality
    # depends on the accuracy of the final multipliers
    bound = p + q * a
    val, dual, boundary = dual_value(problem, float(a), float(bound))
    return _solution(problem, float(a), bound, float(val), dual, boundary)


def _boundary_recover(problem, alpha, bound):
    """Recovery when the trace bound is tight against the top eigenspace of B:
    w = sqrt(bound) * u with u minimizing the compressed quadratic form."""
    vals, vecs = np.linalg.eigh(problem.B)
    lam = vals[-1]
    keep = vals >= lam - 1e-9 * (abs(lam) + 1.0)
    V = vecs[:, keep]
    Ct = V.conj().T @ problem.C @ V
    Ct = 0.5 * (Ct + Ct.conj().T)
    cw, cv = np.linalg.eigh(Ct)
    u = V @ cv[:, 0]
    return np.sqrt(bound) * u / np.linalg.norm(u)


def recover_weights(problem, dual, alpha, bound, value=None, boundary=False):
    """Rank-one primal recovery from an optimal dual point.

    Interior case: w lies in the near-null eigenspace of
    Z = C - tau B + psi I, scaled so w^H B w = alpha; a degenerate eigenspace
    is resolved by mixing its extreme B-directions so the trace constraint is
    met simultaneously.  Falls back to a penalized descent solve if the
    residuals exceed the recovery tolerance.
    """
    s = problem.settings
    if boundary:
        w = _boundary_recover(problem, alpha, bound)
    else:
        Z = problem.C - dual.tau * problem.B + dual.psi * np.eye(problem.dim)
        Z = 0.5 * (Z + Z.conj().T)
        zvals, zvecs = np.linalg.eigh(Z)
        zscale = max(abs(zvals[-1]), abs(zvals[0]), 1e-300)
        keep = zvals <= zvals[0] + s.degenerate_tol * zscale
        V = zvecs[:, keep]
        w = _mix_in_subspace(problem, V, alpha, bound, dual)
    w = _check_or_fallback(problem, w, alpha, bound, value, dual)
    return w, np.outer(w, w.conj())


def _mix_in_subspace(problem, V, alpha, bound, dual):
    Bt = V.conj().T @ problem.B @ V
    Bt = 0.5 * (Bt + Bt.conj().T)
    if V.shape[1] == 1:
        d = float(np.real(Bt[0, 0]))
        if d <= 0:
            return V[:, 0] * 0.0
        return np.sqrt(alpha / d) * V[:, 0]
    dvals, dvecs = np.linalg.eigh(Bt)
    d_min, d_max = float(dvals[0]), float(dvals[-1])
    target = alpha / bound if bound > 0 else d_max
    if dual.psi <= 1e-12 * (1.0 + abs(dual.tau)) or target > d_max:
        # trace bound slack (or unreachable ratio): use the extreme direction
        u = V @ dvecs[:, -1]
        return np.sqrt(alpha / d_max) * u if d_max > 0 else u * 0.0
    target = min(max(target, d_min), d_max)
    if d_max - d_min < 1e-15 * max(abs(d_max), 1.0):
        t = 0.0
    else:
        t = np.sqrt((target - d_min) / (d_max - d_min))
    c = np.sqrt(1.0 - t**2) * dvecs[:, 0] + t * dvecs[:, -1]
    u = V @ c
    return np.sqrt(bound) * u / np.linalg.norm(u)


def _check_or_fallback(problem, w, alpha, bound, value, dual):
    res = _residuals(problem, w, alpha, bound, value)
    if res <= problem.settings.recovery_tol:
        return w
    from .oracles import primal_descent  # local import to avoid cycle

    w_fb = primal_descent(problem.C, problem.B, alpha, bound, seed=0)
    if _residuals(problem, w_fb, alpha, bound, value) <= problem.settings.recovery_tol:
        return w_fb
    raise RecoveryError(
        f"rank-one recovery residual {res:.3e} exceeds tolerance at alpha={alpha}")


def _residuals(problem, w, alpha, bound, value):
    wBw = float(np.real(w.conj() @ problem.B @ w))
    wIw = float(np.real(w.conj() @ w))
    wCw = float(np.real(w.conj() @ problem.C @ w))
    scale = 1.0 + abs(alpha)
    r = abs(wBw - alpha) / scale
    r = max(r, max(0.0, wIw - bound) / (1.0 + abs(bound)))
    if value is not None:
        r = max(r, abs(wCw - value) / (1.0 + abs(value)))
    return r
