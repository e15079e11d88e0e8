"""Comparison beamformers: SMI-MVDR, the closed-form worst-case robust
beamformer, and the iterative constraint-linearization (DC) method.
"""

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, InvalidInput
from .linalg import gen_principal_eigvec, require_hermitian

__all__ = [
    "BaselineResult",
    "smi_mvdr",
    "shahram_closed_form",
    "dc_iteration",
]


@dataclass(frozen=True)
class BaselineResult:
    w: np.ndarray
    iterations: int
    objective: float
    converged: bool


def smi_mvdr(R_hat, R_s):
    """Sample-matrix-inversion MVDR for a general-rank source: principal
    eigenvector of R_hat^{-1} R_s.  A singular sample covariance (K < M) is
    diagonally loaded by 1e-8 * trace so the inverse exists."""
    R_hat = require_hermitian(R_hat, name="R_hat")
    R_s = require_hermitian(R_s, name="R_s")
    tr = float(np.real(np.trace(R_hat)))
    if tr <= 0:
        raise InvalidInput("sample covariance must have positive trace")
    if np.linalg.eigvalsh(R_hat)[0] <= 1e-12 * tr:
        R_hat = R_hat + 1e-8 * tr * np.eye(R_hat.shape[0])
    w = gen_principal_eigvec(R_hat, R_s)
    obj = float(np.real(w.conj() @ R_hat @ w))
    return BaselineResult(w=w, iterations=1, objective=obj, converged=True)


def shahram_closed_form(R_hat, gamma, R_s_presumed, epsilon):
    """Closed-form worst-case robust beamformer: principal eigenvector of
    (R_hat + gamma I)^{-1} (R_s_presumed - epsilon I).

    The shifted source matrix may be indefinite; the whitened Hermitian
    eigenproblem takes the algebraically largest eigenvalue regardless.
    """
    if gamma <= 0:
        raise InvalidInput("diagonal load gamma must be positive")
    R_hat = require_hermitian(R_hat, name="R_hat")
    R_s_presumed = require_hermitian(R_s_presumed, name="R_s_presumed")
    M = R_hat.shape[0]
    C = R_hat + gamma * np.eye(M)
    w = gen_principal_eigvec(C, R_s_presumed - epsilon * np.eye(M))
    obj = float(np.real(w.conj() @ C @ w))
    return BaselineResult(w=w, iterations=1, objective=obj, converged=True)


def _embed_matrix(C):
    """Real 2M x 2M symmetric embedding of a Hermitian matrix: w^H C w equals
    z^T H z for z = [Re w; Im w]."""
    return np.block([[C.real, -C.imag], [C.imag, C.real]])


def _embed_vec(w):
    return np.concatenate([w.real, w.imag])


def _unembed_vec(z):
    M = z.shape[0] // 2
    return z[:M] + 1j * z[M:]


def _cone_margin(c2, eta, z):
    return float(c2 @ z) - eta * float(np.linalg.norm(z)) - 1.0


def _cone_subproblem(H2, c2, eta, z0, tol=1e-9):
    """Damped barrier-Newton minimizer of  z^T H2 z  subject to the cone
    constraint  c2^T z - eta ||z|| >= 1  on the real embedding.

    Follows the log-barrier central path, increasing the barrier weight t
    until the single-constraint duality gap 1/t falls to `tol` (scaled by the
    current objective), with damped (backtracked) Newton centering at each
    stage.  z0 must be strictly feasible.
    """
    z = np.asarray(z0, dtype=np.float64).copy()
    m = _cone_margin(c2, eta, z)
    if m <= 0.0:
        raise Infeasible("cone-constraint start is not strictly interior")
    n = z.shape[0]
    eye = np.eye(n)
    t = 1.0
    while True:
        for _ in range(100):
            nz = float(np.linalg.norm(z))
            m = _cone_margin(c2, eta, z)
            g_m = c2 - eta * z / nz
            Hz = H2 @ z
            grad = 2.0 * t * Hz - g_m / m
            hess = 2.0 * t * H2 + np.outer(g_m, g_m) / (m * m)
            if eta > 0.0:
                hess = hess + (eta / (m * nz)) * (eye - np.outer(z, z) / (nz * nz))
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                raise Infeasible("cone-constraint Newton system is singular")
            decrement = float(-grad @ step)
            if decrement <= 2.0 * 1e-12:
                break
            f0 = t * float(z @ Hz) - np.log(m)
            slope = float(grad @ step)
            a = 1.0
            while a > 1e-14:
                zn = z + a * step
                mn = _cone_margin(c2, eta, zn)
                if mn > 0.0:
                    fn = t * float(zn @ (H2 @ zn)) - np.log(mn)
                    if fn <= f0 + 0.25 * a * slope:
                        break
                a *= 0.5
            z = z + a * step
            if a <= 1e-14:
                break
        obj = float(z @ (H2 @ z))
        if 1.0 / t <= tol * (1.0 + abs(obj)):
            return z
        t *= 10.0


def dc_iteration(R_hat, gamma, Q, eta, w_init, zeta_term=1e-6, max_iter=500):
    """Iterative beamformer that linearizes ||Q w|| around the current iterate.

    Each step solves  min w^H (R_hat + gamma I) w  subject to
    Re(b_k^H w) - eta ||w|| >= 1  with b_k = Q^H Q w_k / ||Q w_k||, via the
    damped barrier-Newton cone solver above.  Stops when the objective
    decrease falls to zeta_term.
    """
    if zeta_term <= 0:
        raise InvalidInput("termination threshold must be positive")
    Q = np.asarray(Q, dtype=np.complex128)
    M = Q.shape[1]
    C = require_hermitian(R_hat, name="R_hat") + gamma * np.eye(M)
    B = Q.conj().T @ Q
    B = 0.5 * (B + B.conj().T)
    if np.linalg.eigvalsh(C)[0] <= 0:
        raise InvalidInput("loaded covariance must be positive definite")
    H2 = _embed_matrix(C)

    w = np.asarray(w_init, dtype=np.complex128)
    if np.linalg.norm(Q @ w) - eta * np.linalg.norm(w) < 1.0 - 1e-9:
        raise InvalidInput("initial point is not feasible")
    prev = float(np.real(w.conj() @ C @ w))
    iterations = 0
    converged = False
    for _ in range(max_iter):
        nqw = np.linalg.norm(Q @ w)
        b = (B @ w) / nqw
        if np.linalg.norm(b) <= eta:
            break
        c2 = _embed_vec(b)
        # the current iterate satisfies c2.z - eta||z|| = ||Qw|| - eta||w||
        # >= 1; a slight radial inflation makes it strictly interior
        z0 = _embed_vec(w) * (1.0 + 1e-3)
        try:
            z = _cone_subproblem(H2, c2, eta, z0)
        except Infeasible:
            break
        iterations += 1
        w_new = _unembed_vec(z)
        obj = float(np.real(w_new.conj() @ C @ w_new))
        w = w_new
        if prev - obj <= zeta_term:
            converged = True
            prev = obj
            break
        prev = obj
    return BaselineResult(w=w, iterations=max(iterations, 1), objective=prev,
                          converged=converged)
