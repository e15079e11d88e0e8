"""Independent numerical oracles used by the self-tests and the acceptance
suite, plus the descent fallback for rank-one recovery.

These deliberately avoid the closed forms and the dual machinery of the main
code paths: the worst-case-power oracle runs projected gradient over the full
mismatch matrix ball, the quadratic-program oracle runs a general NLP solver
on the real embedding, and the principal-eigenvector oracle is a shifted power
iteration.
"""

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "worst_case_power_pg",
    "worst_case_power_sampled",
    "qcqp_min_oracle",
    "primal_descent",
    "power_iteration_principal",
]


def worst_case_power_pg(Q, w, eta, iters=300, restarts=3, seed=0):
    """min ||(Q + D) w||^2 over ||D||_F <= eta by projected gradient descent
    on the full matrix variable D."""
    Q = np.asarray(Q, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    nw = np.linalg.norm(w)
    lip = 2.0 * max(nw**2, 1e-300)  # gradient Lipschitz constant in D
    step = 1.0 / lip
    best = float(np.linalg.norm(Q @ w) ** 2)
    for r in range(restarts):
        if r == 0:
            D = np.zeros_like(Q)
        else:
            D = rng.standard_normal(Q.shape) + 1j * rng.standard_normal(Q.shape)
            D *= eta / max(np.linalg.norm(D), 1e-300)
        for _ in range(iters):
            resid = (Q + D) @ w
            D = D - step * 2.0 * np.outer(resid, w.conj())
            nrm = np.linalg.norm(D)
            if nrm > eta:
                D = D * (eta / nrm)
        val = float(np.linalg.norm((Q + D) @ w) ** 2)
        best = min(best, val)
    return best


def worst_case_power_sampled(Q, w, eta, num_samples=100_000, seed=0,
                             chunk=5000):
    """Smallest ||(Q + D) w||^2 over random mismatches drawn on the Frobenius
    sphere of radius eta (surface draws minimize the power for fixed
    direction less often than interior ones only when the unperturbed power is
    tiny, so both are sampled)."""
    Q = np.asarray(Q, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    qw = Q @ w
    best = float(np.linalg.norm(qw) ** 2)
    n, m = Q.shape
    done = 0
    while done < num_samples:
        k = min(chunk, num_samples - done)
        D = rng.standard_normal((k, n, m)) + 1j * rng.standard_normal((k, n, m))
        nrm = np.linalg.norm(D.reshape(k, -1), axis=1)
        radius = np.where(rng.random(k) < 0.5, eta,
                          eta * rng.random(k) ** (1.0 / (2 * n * m)))
        D *= (radius / nrm)[:, None, None]
        vals = np.linalg.norm(qw[None, :] + D @ w, axis=1) ** 2
        best = min(best, float(vals.min()))
        done += k
    return best


def _real_embed(A):
    """Real 2M x 2M representation of a complex Hermitian quadratic form."""
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def _split(x):
    m = x.size // 2
    return x[:m] + 1j * x[m:]


def qcqp_min_oracle(C, B, alpha, bound, seed=0, n_starts=6):
    """min w^H C w  s.t.  w^H B w = alpha, ||w||^2 <= bound, by a general
    NLP solver (SLSQP) on the real embedding with multiple deterministic
    starts.  Returns (value, w)."""
    C = np.asarray(C, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    M = C.shape[0]
    Cr, Br = _real_embed(C), _real_embed(B)
    rng = np.random.default_rng(seed)

    fun = lambda x: float(x @ Cr @ x)
    jac = lambda x: 2.0 * (Cr @ x)
    cons = [
        {"type": "eq", "fun": lambda x: float(x @ Br @ x) - alpha,
         "jac": lambda x: 2.0 * (Br @ x)},
        {"type": "ineq", "fun": lambda x: bound - float(x @ x),
         "jac": lambda x: -2.0 * x},
    ]

    bvals, bvecs = np.linalg.eigh(B)
    starts = []
    if bvals[-1] > 0:
        v = bvecs[:, -1] * np.sqrt(alpha / bvals[-1])
        starts.append(np.concatenate([v.real, v.imag]))
    for _ in range(n_starts - len(starts)):
        x = rng.standard_normal(2 * M)
        xB = float(x @ Br @ x)
        if xB > 1e-12:
            x *= np.sqrt(alpha / xB)
        starts.append(x)

    best_val, best_w = np.inf, None
    for x0 in starts:
        res = minimize(fun, x0, jac=jac, constraints=cons, method="SLSQP",
                       options={"maxiter": 400, "ftol": 1e-14})
        if res.success or res.status == 8:  # 8: iteration cap with feasible x
            x = res.x
            feas_eq = abs(float(x @ Br @ x) - alpha) / (1.0 + alpha)
            feas_in = max(0.0, float(x @ x) - bound) / (1.0 + bound)
            if feas_eq < 1e-7 and feas_in < 1e-7 and res.fun < best_val:
                best_val, best_w = float(res.fun), _split(x)
    if best_w is None:
        raise RuntimeError("QCQP oracle failed to find a feasible point")
    return best_val, best_w


def primal_descent(C, B, alpha, bound, seed=0):
    """Descent fallback for rank-one recovery: same constrained program as
    qcqp_min_oracle, returning only the weight vector."""
    _, w = qcqp_min_oracle(C, B, alpha, bound, seed=seed, n_starts=8)
    return w


def power_iteration_principal(A, iters=5000, tol=1e-14):
    """Unit eigenvector of the algebraically largest eigenvalue of a Hermitian
    matrix via power iteration on a positively shifted copy."""
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    shift = float(np.linalg.norm(A, 1)) + 1.0
    S = A + shift * np.eye(n)
    v = np.ones(n, dtype=np.complex128) / np.sqrt(n)
    # deterministic tie-free start: add a tiny graded perturbation
    v += 1e-3 * np.arange(1, n + 1) / n
    v /= np.linalg.norm(v)
    for _ in range(iters):
        nxt = S @ v
        nxt /= np.linalg.norm(nxt)
        if np.linalg.norm(nxt - v * np.vdot(v, nxt) / abs(np.vdot(v, nxt))) < tol:
            v = nxt
            break
        v = nxt
    idx = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    ph = v[idx[0]] / abs(v[idx[0]])
    return v / ph
