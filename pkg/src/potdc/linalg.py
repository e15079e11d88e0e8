"""Dense complex-Hermitian linear algebra helpers.

Sizes of interest are small (M <= ~64); everything routes through LAPACK via
numpy with validation and a deterministic phase/tie convention layered on top.
"""

import numpy as np
import scipy.linalg

from .errors import InvalidInput, NotPositiveSemidefinite

__all__ = [
    "require_hermitian",
    "phase_fix",
    "eig_hermitian",
    "principal_eigvec",
    "psd_sqrt_factor",
    "max_gen_eig",
    "gen_principal_eigvec",
]

_HERM_TOL = 1e-12


def require_hermitian(A, tol=_HERM_TOL, name="matrix"):
    """Validate Hermitian symmetry within a relative tolerance and return the
    symmetrized matrix."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A.view(np.float64))):
        raise InvalidInput(f"{name} has non-finite entries")
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.conj().T) > tol * max(scale, 1.0):
        raise InvalidInput(f"{name} is not Hermitian within tolerance {tol}")
    return 0.5 * (A + A.conj().T)


def phase_fix(v):
    """Rotate a vector so its first significantly nonzero entry is real
    positive.  Makes eigenvector choices deterministic up to LAPACK output."""
    v = np.asarray(v, dtype=np.complex128)
    idx = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    if idx.size == 0:
        return v
    ph = v[idx[0]] / abs(v[idx[0]])
    return v / ph


def eig_hermitian(A):
    """Full eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector matrix with eigenvectors as
    columns).
    """
    A = require_hermitian(A)
    vals, vecs = np.linalg.eigh(A)
    return vals, vecs


def principal_eigvec(A):
    """Unit-norm eigenvector of the largest eigenvalue.

    Tie convention: among eigenvalues within a relative 1e-12 window of the
    maximum, the first column in ascending eigenvalue order is taken (the
    identity matrix therefore yields e_1).  The phase is fixed so the first
    nonzero entry is real positive.
    """
    vals, vecs = eig_hermitian(A)
    lam = vals[-1]
    window = 1e-12 * max(abs(lam), 1e-300)
    first = int(np.searchsorted(vals, lam - window))
    return phase_fix(vecs[:, first])


def psd_sqrt_factor(R):
    """Factor a PSD matrix R as Q^H Q with Q = diag(sqrt(lam)) V^H.

    Eigenvalues below -1e-6*||R|| raise; small negatives (sample-covariance
    roundoff) are clipped to zero so the factorization is total for singular
    inputs such as undersampled covariances.
    """
    R = require_hermitian(R, name="R")
    vals, vecs = np.linalg.eigh(R)
    scale = max(abs(vals[0]), abs(vals[-1]), 1e-300)
    if vals[0] < -1e-6 * scale:
        raise NotPositiveSemidefinite(
            f"matrix has eigenvalue {vals[0]:.3e} below -1e-6*||R||")
    vals = np.clip(vals, 0.0, None)
    return (np.sqrt(vals)[:, None] * vecs.conj().T)


def _whitened(A, B):
    """L^{-1} B L^{-H} for A = L L^H; raises if A is not positive definite."""
    A = require_hermitian(A, name="A")
    B = require_hermitian(B, name="B")
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise InvalidInput("matrix A is not positive definite") from None
    Y = scipy.linalg.solve_triangular(L, B, lower=True)
    M = scipy.linalg.solve_triangular(L, Y.conj().T, lower=True).conj().T
    return L, 0.5 * (M + M.conj().T)


def max_gen_eig(A, B):
    """Largest eigenvalue of A^{-1} B for positive definite A.

    Computed by whitening A (Cholesky) and taking the algebraically largest
    eigenvalue of the resulting Hermitian matrix, so an indefinite B is
    handled as well; for PSD B the result is nonnegative.
    """
    _, M = _whitened(A, B)
    return float(np.linalg.eigvalsh(M)[-1])


def gen_principal_eigvec(A, B):
    """Principal eigenvector of A^{-1} B (unit norm, phase fixed), for
    positive definite A and Hermitian B."""
    L, M = _whitened(A, B)
    y = principal_eigvec(M)
    w = scipy.linalg.solve_triangular(L.conj().T, y, lower=False)
    w = w / np.linalg.norm(w)
    return phase_fix(w)
