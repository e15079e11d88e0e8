"""Hot numeric kernels behind the dual-based inner solver.

The inner convex subproblem

    min_W  tr{C W}   s.t.  tr{B W} = alpha,  tr{W} <= b,  W PSD

with ``C`` positive definite and ``B`` PSD is solved through its
two-multiplier dual

    max_{tau, psi >= 0}  tau * alpha - b * psi
    s.t.                 C - tau * B + psi * I  PSD.

For fixed ``tau`` the optimal ``psi`` is ``max(0, lam_max(tau*B - C))``, so
the dual reduces to maximizing the concave scalar function

    g(tau) = tau * alpha - b * max(0, lam_max(tau*B - C))

whose (sub)derivative is ``alpha - b * u^H B u`` with ``u`` the top
eigenvector of ``tau*B - C``.  The kernels below locate the maximizer by a
safeguarded secant/bisection search on that derivative.

Everything in this module is written so the same source runs either
numba-jitted (default) or as plain numpy.  Select the fallback with the
environment variable ``POTDC_BACKEND=numpy``.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "STATUS_OK",
    "STATUS_BOUNDARY",
    "STATUS_INFEASIBLE",
    "dual_solve",
    "minimize_linear_bound",
    "grid_dual_values",
]

_env = os.environ.get("POTDC_BACKEND", "").strip().lower()
if _env == "numpy":
    BACKEND = "numpy"
else:
    try:
        import numba  # noqa: F401

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        BACKEND = "numpy"


def _jit(fn):
    if BACKEND == "numba":
        import numba

        return numba.njit(cache=True)(fn)
    return fn


STATUS_OK = 0
STATUS_BOUNDARY = 1
STATUS_INFEASIBLE = 2

_BIG_SLOPE = 1e300


@_jit
def _g_slope(tau, alpha, b, C, B):
    """Dual objective g(tau), a subgradient of it, and lam_max(tau*B - C)."""
    w, v = np.linalg.eigh(tau * B - C)
    lam = w[-1]
    if lam <= 0.0:
        # trace-bound multiplier inactive
        return tau * alpha, alpha, lam
    u = np.ascontiguousarray(v[:, -1])
    s = np.real(np.vdot(u, np.dot(B, u)))
    return tau * alpha - b * lam, alpha - b * s, lam


@_jit
def _boundary_value(b, C, B):
    """Dual value when the trace bound is exactly tight (b*lam_max(B)=alpha).

    The feasible directions collapse to the top eigenspace of B; the value is
    b times the smallest eigenvalue of C compressed onto that eigenspace.
    """
    m = B.shape[0]
    wb, vb = np.linalg.eigh(B)
    lam_b = wb[-1]
    thresh = lam_b - 1e-9 * (abs(lam_b) + 1.0)
    k = 0
    for i in range(m):
        if wb[i] >= thresh:
            k += 1
    V = np.ascontiguousarray(vb[:, m - k:])
    Vh = np.ascontiguousarray(V.conj().T)
    Ct = np.dot(Vh, np.dot(C, V))
    Ct = 0.5 * (Ct + Ct.conj().T)
    wc = np.linalg.eigvalsh(np.ascontiguousarray(Ct))
    return b * wc[0]


@_jit
def dual_solve(alpha, b, C, B, lam_b, tau0, s0, tau_hi0, tau_tol,
               boundary_margin, max_expand, gap_tol):
    """Maximize g(tau) over tau >= 0.

    ``tau0 = 1/lam_max(C^{-1}B)`` is the smallest tau at which the PSD
    constraint bites and ``s0`` the largest u^H B u over its null directions:
    whenever ``alpha <= b*s0`` the trace bound is slack and the maximizer is
    exactly tau0 with value tau0*alpha.

    Returns ``(value, tau, psi, status)``.  ``status`` is one of the module
    STATUS_* codes; for STATUS_BOUNDARY the value comes from the eigenspace
    compression and (tau, psi) form a feasible dual point evaluated at a
    large multiplier.  For STATUS_INFEASIBLE the other outputs are zeros.
    """
    scale = abs(alpha) + 1.0
    margin = b * lam_b - alpha
    if margin < -1e-12 * scale:
        return 0.0, 0.0, 0.0, STATUS_INFEASIBLE
    if margin <= boundary_margin * scale:
        val = _boundary_value(b, C, B)
        tau_s = 1e9 * (tau_hi0 + 1.0)
        _, _, lam = _g_slope(tau_s, alpha, b, C, B)
        psi_s = lam if lam > 0.0 else 0.0
        return val, tau_s, psi_s, STATUS_BOUNDARY

    # g(tau) = tau*alpha for tau <= tau0; if the one-sided slope at tau0+ is
    # already non-positive the trace-bound multiplier stays at zero.
    if alpha <= b * s0:
        return tau0 * alpha, tau0, 0.0, STATUS_OK

    # otherwise expand beyond tau0 until the subgradient turns non-positive
    lo = tau0
    s_lo = alpha - b * s0
    best_g = tau0 * alpha
    best_tau = tau0
    best_psi = 0.0

    hi = tau_hi0
    if hi <= tau0:
        hi = 2.0 * tau0
    g_hi, s_hi, lam_hi = _g_slope(hi, alpha, b, C, B)
    n_exp = 0
    while s_hi > 0.0 and n_exp < max_expand:
        if g_hi > best_g:
            best_g = g_hi
            best_tau = hi
            best_psi = lam_hi if lam_hi > 0.0 else 0.0
        lo = hi
        s_lo = s_hi
        hi *= 2.0
        g_hi, s_hi, lam_hi = _g_slope(hi, alpha, b, C, B)
        n_exp += 1
    if s_hi > 0.0:
        # could not bracket: numerically indistinguishable from the tight case
        val = _boundary_value(b, C, B)
        psi_s = lam_hi if lam_hi > 0.0 else 0.0
        return val, hi, psi_s, STATUS_BOUNDARY
    if g_hi > best_g:
        best_g = g_hi
        best_tau = hi
        best_psi = lam_hi if lam_hi > 0.0 else 0.0

    # Illinois false position on the subgradient; f_lo/f_hi are the (possibly
    # down-weighted) interpolation values, s_lo/s_hi the true slopes used in
    # the suboptimality bound.
    f_lo = s_lo
    f_hi = s_hi
    side = 0
    it = 0
    while hi - lo > tau_tol * (hi + 1.0) and it < 200:
        # concavity bounds the remaining suboptimality by the chord of the
        # bracketing slopes; stop once it is negligible on the value scale
        denom0 = s_lo - s_hi
        if denom0 > 0.0:
            gap = (hi - lo) * s_lo * (-s_hi) / denom0
            if gap_tol > 0.0 and gap <= gap_tol * (abs(best_g) + 1.0):
                break
        it += 1
        width = hi - lo
        denom = f_lo - f_hi
        if denom <= 0.0:
            t = lo + 0.5 * width
        else:
            t = lo + f_lo * width / denom
            if t < lo + 0.001 * width:
                t = lo + 0.001 * width
            elif t > hi - 0.001 * width:
                t = hi - 0.001 * width
        g_t, s_t, lam_t = _g_slope(t, alpha, b, C, B)
        if g_t > best_g:
            best_g = g_t
            best_tau = t
            best_psi = lam_t if lam_t > 0.0 else 0.0
        if s_t > 0.0:
            lo = t
            s_lo = s_t
            f_lo = s_t
            if side == 1:
                f_hi *= 0.5
            side = 1
        else:
            hi = t
            s_hi = s_t
            f_hi = s_t
            if side == -1:
                f_lo *= 0.5
            side = -1
    return best_g, best_tau, best_psi, STATUS_OK


@_jit
def _value_and_alpha_slope(alpha, p, q, C, B, lam_b, tau0, s0, tau_hi0,
                           tau_tol, boundary_margin, max_expand, gap_tol):
    """Value of the inner problem with trace bound p+q*alpha, and the
    derivative of that value with respect to alpha (envelope theorem)."""
    b = p + q * alpha
    val, tau, psi, status = dual_solve(alpha, b, C, B, lam_b, tau0, s0,
                                       tau_hi0, tau_tol, boundary_margin,
                                       max_expand, gap_tol)
    if status == STATUS_OK:
        slope = tau - psi * q
    else:
        # at a tight trace bound the one-sided derivative blows up; its sign
        # follows from whether the feasibility margin grows with alpha
        slope = -_BIG_SLOPE if q * lam_b - 1.0 > 0.0 else _BIG_SLOPE
    return val, slope, tau, psi, status


@_jit
def minimize_linear_bound(p, q, a_lo, a_hi, alpha_tol, C, B, lam_b, tau0, s0,
                          tau_hi0, tau_tol, boundary_margin, max_expand,
                          gap_tol):
    """Minimize the inner value over alpha in [a_lo, a_hi] for the linear
    trace bound b(alpha) = p + q*alpha.

    The value function is convex in alpha (joint convexity of the underlying
    problem), so a safeguarded secant/bisection on its derivative suffices.
    Returns ``(alpha, value, tau, psi, status)``.
    """
    if a_hi <= a_lo:
        v, tau, psi, st = dual_solve(a_lo, p + q * a_lo, C, B, lam_b, tau0,
                                     s0, tau_hi0, tau_tol, boundary_margin,
                                     max_expand, gap_tol)
        return a_lo, v, tau, psi, st

    v_lo, s_lo, t_lo, ps_lo, st_lo = _value_and_alpha_slope(
        a_lo, p, q, C, B, lam_b, tau0, s0, tau_hi0, tau_tol, boundary_margin,
        max_expand, gap_tol)
    if s_lo >= 0.0:
        return a_lo, v_lo, t_lo, ps_lo, st_lo
    v_hi, s_hi, t_hi, ps_hi, st_hi = _value_and_alpha_slope(
        a_hi, p, q, C, B, lam_b, tau0, s0, tau_hi0, tau_tol, boundary_margin,
        max_expand, gap_tol)
    if s_hi <= 0.0:
        return a_hi, v_hi, t_hi, ps_hi, st_hi

    best_v = v_lo
    best_a = a_lo
    best_t = t_lo
    best_ps = ps_lo
    best_st = st_lo
    if v_hi < best_v:
        best_v, best_a, best_t, best_ps, best_st = v_hi, a_hi, t_hi, ps_hi, st_hi

    lo, hi = a_lo, a_hi
    f_lo = s_lo
    f_hi = s_hi
    hint = tau_hi0
    side = 0
    it = 0
    while hi - lo > alpha_tol * (hi + 1.0) and it < 200:
        # convexity bounds the remaining suboptimality by the chord of the
        # bracketing slopes (finite slopes only; boundary statuses carry
        # sentinel slopes)
        if np.isfinite(s_lo) and np.isfinite(s_hi) and s_hi > s_lo:
            gap = (hi - lo) * (-s_lo) * s_hi / (s_hi - s_lo)
            if gap <= 1e-9 * (abs(best_v) + 1.0):
                break
        it += 1
        width = hi - lo
        denom = f_hi - f_lo
        if denom <= 0.0 or abs(s_lo) >= _BIG_SLOPE or abs(s_hi) >= _BIG_SLOPE:
            # sentinel slopes from tight-bound statuses: fall back to bisection
            t = lo + 0.5 * width
        else:
            t = lo - f_lo * width / denom
            if t < lo + 0.001 * width:
                t = lo + 0.001 * width
            elif t > hi - 0.001 * width:
                t = hi - 0.001 * width
        v_t, s_t, tau_t, psi_t, st_t = _value_and_alpha_slope(
            t, p, q, C, B, lam_b, tau0, s0, hint, tau_tol, boundary_margin,
            max_expand, gap_tol)
        if st_t == STATUS_OK and tau_t > 0.0:
            # nearby alpha values have nearby multiplier maximizers; reuse as
            # the initial bracket endpoint of the next inner search
            hint = 1.05 * tau_t
        if v_t < best_v:
            best_v, best_a, best_t, best_ps, best_st = v_t, t, tau_t, psi_t, st_t
        if s_t < 0.0:
            lo = t
            s_lo = s_t
            f_lo = s_t
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi = t
            s_hi = s_t
            f_hi = s_t
            if side == 1:
                f_lo *= 0.5
            side = 1
    return best_a, best_v, best_t, best_ps, best_st


@_jit
def grid_dual_values(alphas, bounds, C, B, lam_b, tau0, s0, tau_hi0, tau_tol,
                     boundary_margin, max_expand, gap_tol):
    """Inner values on a grid of (alpha, trace bound) pairs."""
    n = alphas.shape[0]
    values = np.empty(n)
    taus = np.empty(n)
    psis = np.empty(n)
    statuses = np.empty(n, dtype=np.int64)
    hint = tau_hi0
    for i in range(n):
        v, tau, psi, st = dual_solve(alphas[i], bounds[i], C, B, lam_b, tau0,
                                     s0, hint, tau_tol, boundary_margin,
                                     max_expand, gap_tol)
        values[i] = v
        taus[i] = tau
        psis[i] = psi
        statuses[i] = st
        if st == STATUS_OK and tau > 0.0:
            # neighboring grid points have nearby maximizers; reuse as the
            # initial bracket endpoint
            hint = 1.05 * tau
    return values, taus, psis, statuses
