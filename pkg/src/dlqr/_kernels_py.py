"""Pure NumPy implementations of the numeric kernels.

Same call signatures as the compiled module `dlqr._kernels`; used as the
fallback backend when the extension is unavailable or deselected. Failure
to converge inside an eigenvalue iteration is reported as NaN rather than
an exception so callers can handle both backends uniformly.
"""

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

BACKEND_NAME = "python"


def spectral_abscissa(M):
    """Largest real part over the eigenvalues of a square matrix."""
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError:
        return float("nan")
    return float(w.real.max())


def spectral_abscissa_batch(Ms):
    """Spectral abscissa of each matrix in a stacked (N, n, n) array."""
    Ms = np.ascontiguousarray(Ms, dtype=np.float64)
    try:
        w = np.linalg.eigvals(Ms)
    except np.linalg.LinAlgError:
        # one bad matrix poisons the batched LAPACK call; fall back per-item
        return np.array([spectral_abscissa(M) for M in Ms])
    return w.real.max(axis=1)


def closed_loop_abscissa_grid(A, B, C, rows, cols, points, chunk=65536):
    """Spectral abscissae of A - B K C over many sparse gains.

    Each gain has nonzeros only at (rows[j], cols[j]); row i of `points`
    supplies the values for gain i. Returns an (N,) array.
    """
    A = np.asarray(A, dtype=np.float64)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = A.shape[0]
    # rank-one slices of B K C: one per free entry
    P = np.asarray(B, dtype=np.float64)[:, rows]        # n x d
    Q = np.asarray(C, dtype=np.float64)[cols, :]        # d x n
    N = points.shape[0]
    out = np.empty(N)
    for lo in range(0, N, chunk):
        hi = min(lo + chunk, N)
        T = np.einsum("kj,nj,jl->nkl", P, points[lo:hi], Q)
        out[lo:hi] = spectral_abscissa_batch(A[None, :, :] - T)
    return out


def lyap_solve(M, Q):
    """Solve M^T X + X M = -Q by dense LU on the Kronecker form.

    Returns (X, cond_estimate) where the condition estimate is the ratio
    of extreme |U_ii| magnitudes from the LU factor; np.inf flags an
    exactly singular system.
    """
    M = np.asarray(M, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    n = M.shape[0]
    eye = np.eye(n)
    G = np.kron(eye, M.T) + np.kron(M.T, eye)
    with warnings.catch_warnings():
        # exact singularity is reported through cond_estimate instead
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(G, check_finite=False)
    d = np.abs(np.diag(lu))
    dmin = d.min()
    cond_est = float("inf") if dmin == 0.0 else float(d.max() / dmin)
    if not np.isfinite(cond_est):
        return np.full_like(Q, np.nan), cond_est
    x = lu_solve((lu, piv), -Q.reshape(-1, order="F"), check_finite=False)
    X = x.reshape((n, n), order="F")
    X = 0.5 * (X + X.T)
    return X, cond_est
