"""Closed-form worst-case mismatch machinery and the feasible interval of the
auxiliary variable.

For a factor mismatch ball ||D||_F <= eta around Q, the worst-case signal
power for fixed weights w has the closed form

    (||Q w|| - eta ||w||)^2   if ||Q w|| >= eta ||w||,  else 0,

attained by an explicit rank-one mismatch.  The distortionless-response
constraint then becomes  ||Q w|| - eta ||w|| >= 1,  and after substituting
alpha = ||Q w||^2 the optimal alpha is confined to a closed interval
[alpha_lo, alpha_hi].
"""

from dataclasses import dataclass

import numpy as np

from .errors import BranchError, Infeasible, InvalidInput
from .linalg import max_gen_eig, phase_fix, require_hermitian

__all__ = [
    "RobustConfig",
    "AlphaInterval",
    "worst_case_signal_power",
    "worst_case_delta",
    "lagrange_mu",
    "feasible_start",
    "alpha_bounds",
]


@dataclass(frozen=True)
class RobustConfig:
    """Robustness and termination parameters.

    gamma    - diagonal load on the sample covariance (linear scale)
    eta      - factor mismatch bound
    epsilon  - covariance mismatch bound used by the closed-form baseline
    zeta_term - termination threshold of the iterative solvers
    """
    gamma: float = 10.0
    eta: float = 0.0
    epsilon: float = 0.0
    zeta_term: float = 1e-6

    def __post_init__(self):
        if self.gamma < 0 or self.eta < 0 or self.epsilon < 0:
            raise InvalidInput("gamma, eta and epsilon must be nonnegative")
        if self.zeta_term <= 0:
            raise InvalidInput("termination threshold must be positive")


@dataclass(frozen=True)
class AlphaInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if not (1.0 <= self.lower <= self.upper * (1 + 1e-12) + 1e-12):
            raise InvalidInput(
                f"invalid alpha interval [{self.lower}, {self.upper}]")

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)


def worst_case_signal_power(Q, w, eta):
    """min over ||D||_F <= eta of  || (Q + D) w ||^2."""
    if eta < 0:
        raise InvalidInput("eta must be nonnegative")
    nqw = np.linalg.norm(Q @ w)
    nw = np.linalg.norm(w)
    if nqw >= eta * nw:
        return float((nqw - eta * nw) ** 2)
    return 0.0


def worst_case_delta(Q, w, eta):
    """Minimizing mismatch of the worst-case signal power problem."""
    w = np.asarray(w, dtype=np.complex128)
    nw = np.linalg.norm(w)
    if nw == 0:
        raise InvalidInput("weights must be nonzero")
    qw = Q @ w
    nqw = np.linalg.norm(qw)
    outer = np.outer(qw, w.conj())
    if nqw >= eta * nw:
        if nqw == 0.0:
            return np.zeros_like(outer)
        return -eta * outer / (nqw * nw)
    return -outer / nw**2


def lagrange_mu(Q, w, eta):
    """Multiplier of the active mismatch-ball constraint,
    mu = (||w||/eta) (||Q w|| - eta ||w||); requires ||Q w|| > eta ||w|| > 0."""
    nw = np.linalg.norm(w)
    nqw = np.linalg.norm(Q @ w)
    if not (nqw > eta * nw > 0):
        raise BranchError("active-constraint branch requires ||Qw|| > eta||w|| > 0")
    return float(nw / eta * (nqw - eta * nw))


def feasible_start(Q, eta):
    """Deterministic strictly scaled feasible point: the principal direction
    of Q^H Q scaled so that ||Q w0|| - eta ||w0|| = 1."""
    Q = np.asarray(Q, dtype=np.complex128)
    B = require_hermitian(Q.conj().T @ Q, name="Q^H Q")
    vals, vecs = np.linalg.eigh(B)
    lam = vals[-1]
    if lam <= eta**2:
        raise Infeasible(
            "problem infeasible: largest eigenvalue of Q^H Q does not exceed eta^2")
    v = phase_fix(vecs[:, -1])
    c = 1.0 / (np.sqrt(lam) - eta)
    return c * v


def alpha_bounds(R_hat, gamma, Q, eta, w0=None):
    """Closed interval containing the optimal auxiliary variable.

    Lower endpoint is the feasibility edge 1/(1 - eta/sqrt(lam_max(Q^H Q)))^2;
    the upper endpoint is lam_max((R_hat+gamma I)^{-1} Q^H Q) * w0^H
    (R_hat+gamma I) w0 for a feasible w0 (by default the deterministic
    feasible start).
    """
    Q = np.asarray(Q, dtype=np.complex128)
    B = require_hermitian(Q.conj().T @ Q, name="Q^H Q")
    lam = float(np.linalg.eigvalsh(B)[-1])
    if lam <= eta**2:
        raise Infeasible(
            "problem infeasible: largest eigenvalue of Q^H Q does not exceed eta^2")
    if w0 is None:
        w0 = feasible_start(Q, eta)
    C = require_hermitian(R_hat, name="R_hat") + gamma * np.eye(Q.shape[1])
    lo = 1.0 / (1.0 - eta / np.sqrt(lam)) ** 2
    hi = max_gen_eig(C, B) * float(np.real(w0.conj() @ C @ w0))
    return AlphaInterval(lower=lo, upper=hi)
