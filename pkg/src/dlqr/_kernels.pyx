# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numeric kernels.

Spectral abscissas come from an in-place Householder Hessenberg reduction
followed by Francis double-shift QR iteration with a 100*n sweep cap
(non-convergence is reported as NaN, mirroring the NumPy backend).
Only eigenvalue real parts are extracted: a deflated 2x2 block with
negative discriminant contributes trace/2. The Lyapunov solver assembles
the Kronecker system and factors it with partial-pivoting LU, returning
the |U_ii| ratio as a cheap condition estimate.
"""

from libc.math cimport fabs, sqrt, NAN
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double DBL_EPS = 2.220446049250313e-16
cdef double TINY = 1e-300


cdef inline double _dmax(double a, double b) noexcept nogil:
    return a if a > b else b


cdef void _hessenberg(double* H, int n, double* v) noexcept nogil:
    """In-place Householder reduction to upper Hessenberg form."""
    cdef int k, i, j, ln
    cdef double scale, alpha, beta, tau, x0
    for k in range(n - 2):
        ln = n - k - 1  # length of the column piece below the diagonal
        scale = 0.0
        for i in range(ln):
            scale = _dmax(scale, fabs(H[(k + 1 + i) * n + k]))
        if scale == 0.0:
            continue
        for i in range(ln):
            v[i] = H[(k + 1 + i) * n + k] / scale
        x0 = v[0]
        alpha = 0.0
        for i in range(ln):
            alpha += v[i] * v[i]
        alpha = sqrt(alpha)
        if x0 >= 0:
            alpha = -alpha
        v[0] = x0 - alpha
        beta = -alpha * v[0]  # v^T v / 2 for this construction
        if beta <= 0.0:
            continue
        # P = I - v v^T / beta ; apply from the left to rows k+1..n-1
        for j in range(k, n):
            tau = 0.0
            for i in range(ln):
                tau += v[i] * H[(k + 1 + i) * n + j]
            tau /= beta
            for i in range(ln):
                H[(k + 1 + i) * n + j] -= tau * v[i]
        # and from the right to columns k+1..n-1
        for i in range(n):
            tau = 0.0
            for j in range(ln):
                tau += H[i * n + (k + 1 + j)] * v[j]
            tau /= beta
            for j in range(ln):
                H[i * n + (k + 1 + j)] -= tau * v[j]
        H[(k + 1) * n + k] = alpha * scale
        for i in range(k + 2, n):
            H[i * n + k] = 0.0


cdef inline void _house3(double x, double y, double z, double* w, double* beta) noexcept nogil:
    """Householder P = I - beta w w^T sending (x, y, z) to a multiple of e1."""
    cdef double scale = _dmax(fabs(x), _dmax(fabs(y), fabs(z)))
    cdef double alpha, nrm
    if scale == 0.0:
        beta[0] = 0.0
        w[0] = 1.0; w[1] = 0.0; w[2] = 0.0
        return
    x /= scale; y /= scale; z /= scale
    nrm = sqrt(x * x + y * y + z * z)
    alpha = -nrm if x >= 0 else nrm
    w[0] = x - alpha
    w[1] = y
    w[2] = z
    cdef double vtv = w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
    beta[0] = 2.0 / vtv if vtv > 0 else 0.0


cdef double _qr_real_parts_max(double* H, int n) noexcept nogil:
    """Max eigenvalue real part of an upper Hessenberg matrix, NaN on failure."""
    cdef int hi = n - 1
    cdef int lo, l, k, its, total, i, j, r, q, cap
    cdef double tst, sub, a, b, c, d, tr2, disc
    cdef double s_sum, t_prod, x, y, z, h11, h12, h21, h22, ex
    cdef double w[3]
    cdef double beta, tau
    cdef double best = -1e308
    cap = 100 * n
    total = 0
    its = 0
    while hi >= 0:
        if hi == 0:
            best = _dmax(best, H[0])
            break
        # scan for a negligible subdiagonal entry above hi
        lo = hi
        while lo > 0:
            tst = fabs(H[(lo - 1) * n + (lo - 1)]) + fabs(H[lo * n + lo])
            if tst == 0.0:
                tst = 1.0
            sub = fabs(H[lo * n + (lo - 1)])
            if sub <= DBL_EPS * tst + TINY:
                H[lo * n + (lo - 1)] = 0.0
                break
            lo -= 1
        if lo == hi:
            best = _dmax(best, H[hi * n + hi])
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            a = H[lo * n + lo]; b = H[lo * n + hi]
            c = H[hi * n + lo]; d = H[hi * n + hi]
            tr2 = 0.5 * (a + d)
            disc = 0.25 * (a - d) * (a - d) + b * c
            if disc >= 0.0:
                disc = sqrt(disc)
                best = _dmax(best, tr2 + disc)
                best = _dmax(best, tr2 - disc)
            else:
                best = _dmax(best, tr2)
            hi -= 2
            its = 0
            continue
        total += 1
        its += 1
        if total > cap:
            return NAN
        # shift pair (as the trailing 2x2, or an exceptional surrogate)
        if its == 10 or its == 20:
            if its == 10:
                ex = fabs(H[(lo + 1) * n + lo]) + fabs(H[(lo + 2) * n + (lo + 1)])
                h11 = 0.75 * ex + H[lo * n + lo]
            else:
                ex = fabs(H[hi * n + (hi - 1)]) + fabs(H[(hi - 1) * n + (hi - 2)])
                h11 = 0.75 * ex + H[hi * n + hi]
            h12 = -0.4375 * ex
            h21 = ex
            h22 = h11
        else:
            h11 = H[(hi - 1) * n + (hi - 1)]
            h12 = H[(hi - 1) * n + hi]
            h21 = H[hi * n + (hi - 1)]
            h22 = H[hi * n + hi]
        s_sum = h11 + h22
        t_prod = h11 * h22 - h12 * h21
        # first column of (H - a)(H - b) on the active block
        x = H[lo * n + lo] * H[lo * n + lo] \
            + H[lo * n + (lo + 1)] * H[(lo + 1) * n + lo] \
            - s_sum * H[lo * n + lo] + t_prod
        y = H[(lo + 1) * n + lo] * (H[lo * n + lo] + H[(lo + 1) * n + (lo + 1)] - s_sum)
        z = H[(lo + 1) * n + lo] * H[(lo + 2) * n + (lo + 1)]
        # chase the bulge down the block
        for k in range(lo, hi - 1):
            _house3(x, y, z, w, &beta)
            if beta != 0.0:
                q = k - 1 if k - 1 > lo else lo
                for j in range(q, hi + 1):
                    tau = w[0] * H[k * n + j] + w[1] * H[(k + 1) * n + j]
                    if k + 2 <= hi:
                        tau += w[2] * H[(k + 2) * n + j]
                    tau *= beta
                    H[k * n + j] -= tau * w[0]
                    H[(k + 1) * n + j] -= tau * w[1]
                    if k + 2 <= hi:
                        H[(k + 2) * n + j] -= tau * w[2]
                r = k + 3 if k + 3 < hi else hi
                for i in range(lo, r + 1):
                    tau = w[0] * H[i * n + k] + w[1] * H[i * n + (k + 1)]
                    if k + 2 <= hi:
                        tau += w[2] * H[i * n + (k + 2)]
                    tau *= beta
                    H[i * n + k] -= tau * w[0]
                    H[i * n + (k + 1)] -= tau * w[1]
                    if k + 2 <= hi:
                        H[i * n + (k + 2)] -= tau * w[2]
            if k + 1 <= hi - 1:
                x = H[(k + 1) * n + k]
                y = H[(k + 2) * n + k]
                z = H[(k + 3) * n + k] if k + 3 <= hi else 0.0
        # final 2-vector reflector on rows (hi-1, hi): kills the last bulge entry
        _house3(x, y, 0.0, w, &beta)
        if beta != 0.0:
            q = hi - 2 if hi - 2 > lo else lo
            for j in range(q, hi + 1):
                tau = beta * (w[0] * H[(hi - 1) * n + j] + w[1] * H[hi * n + j])
                H[(hi - 1) * n + j] -= tau * w[0]
                H[hi * n + j] -= tau * w[1]
            for i in range(lo, hi + 1):
                tau = beta * (w[0] * H[i * n + (hi - 1)] + w[1] * H[i * n + hi])
                H[i * n + (hi - 1)] -= tau * w[0]
                H[i * n + hi] -= tau * w[1]
        # clear the roundoff left strictly below the subdiagonal of the block
        for i in range(lo + 2, hi + 1):
            for j in range(lo, i - 1):
                H[i * n + j] = 0.0
    return best


cdef double _abscissa_impl(double* H, int n, double* v) noexcept nogil:
    if n == 1:
        return H[0]
    _hessenberg(H, n, v)
    return _qr_real_parts_max(H, n)


def spectral_abscissa(M):
    """Largest real part over the eigenvalues of a square matrix."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] A = np.ascontiguousarray(M, dtype=np.float64)
    cdef int n = A.shape[0]
    if A.shape[1] != n or n < 1:
        raise ValueError("matrix must be square and non-empty")
    cdef double* H = <double*> malloc(n * n * sizeof(double))
    cdef double* v = <double*> malloc(n * sizeof(double))
    if H == NULL or v == NULL:
        free(H); free(v)
        raise MemoryError()
    cdef double out
    try:
        memcpy(H, <double*> A.data, n * n * sizeof(double))
        with nogil:
            out = _abscissa_impl(H, n, v)
    finally:
        free(H)
        free(v)
    return float(out)


def spectral_abscissa_batch(Ms):
    """Spectral abscissa of each matrix in a stacked (N, n, n) array."""
    cdef cnp.ndarray[double, ndim=3, mode="c"] A = np.ascontiguousarray(Ms, dtype=np.float64)
    cdef Py_ssize_t N = A.shape[0]
    cdef int n = A.shape[1]
    if A.shape[2] != n or n < 1:
        raise ValueError("matrices must be square and non-empty")
    cdef cnp.ndarray[double, ndim=1] out = np.empty(N, dtype=np.float64)
    cdef double* H = <double*> malloc(n * n * sizeof(double))
    cdef double* v = <double*> malloc(n * sizeof(double))
    if H == NULL or v == NULL:
        free(H); free(v)
        raise MemoryError()
    cdef Py_ssize_t t
    cdef double* src = <double*> A.data
    cdef double* dst = <double*> out.data
    try:
        with nogil:
            for t in range(N):
                memcpy(H, src + t * n * n, n * n * sizeof(double))
                dst[t] = _abscissa_impl(H, n, v)
    finally:
        free(H)
        free(v)
    return out


def closed_loop_abscissa_grid(A, B, C, rows, cols, points):
    """Spectral abscissae of A - B K C over many sparse gains.

    Gain i has value points[i, j] at entry (rows[j], cols[j]) and zeros
    elsewhere. Precomputes the rank-one slices (B e_r)(e_c^T C) so each
    closed loop assembles in O(d n^2).
    """
    cdef cnp.ndarray[double, ndim=2, mode="c"] An = np.ascontiguousarray(A, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Bn = np.ascontiguousarray(B, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Cn = np.ascontiguousarray(C, dtype=np.float64)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] rn = np.ascontiguousarray(rows, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] cn = np.ascontiguousarray(cols, dtype=np.intp)
    cdef cnp.ndarray[double, ndim=2, mode="c"] P = np.ascontiguousarray(
        np.atleast_2d(points), dtype=np.float64)
    cdef int n = An.shape[0]
    cdef int d = rn.shape[0]
    cdef Py_ssize_t N = P.shape[0]
    if P.shape[1] != d:
        raise ValueError(f"points must have {d} columns")
    # slabs[j] = outer(B[:, rows[j]], C[cols[j], :]), flattened row-major
    cdef cnp.ndarray[double, ndim=3, mode="c"] slabs = np.empty((d, n, n), dtype=np.float64)
    cdef int j, i, k
    for j in range(d):
        for i in range(n):
            for k in range(n):
                slabs[j, i, k] = Bn[i, rn[j]] * Cn[cn[j], k]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(N, dtype=np.float64)
    cdef double* H = <double*> malloc(n * n * sizeof(double))
    cdef double* v = <double*> malloc(n * sizeof(double))
    if H == NULL or v == NULL:
        free(H); free(v)
        raise MemoryError()
    cdef double* a0 = <double*> An.data
    cdef double* sl = <double*> slabs.data
    cdef double* pp = <double*> P.data
    cdef double* dst = <double*> out.data
    cdef Py_ssize_t t
    cdef int e
    cdef double coef
    try:
        with nogil:
            for t in range(N):
                memcpy(H, a0, n * n * sizeof(double))
                for j in range(d):
                    coef = pp[t * d + j]
                    if coef != 0.0:
                        for e in range(n * n):
                            H[e] -= coef * sl[j * n * n + e]
                dst[t] = _abscissa_impl(H, n, v)
    finally:
        free(H)
        free(v)
    return out


cdef int _lu_factor(double* G, int N, int* piv, double* cond_est) noexcept nogil:
    """Partial-pivoting LU in place. Returns 0, or -1 when singular."""
    cdef int k, i, j, p
    cdef double amax, tmp, umin, umax, u
    umin = 1e308
    umax = 0.0
    for k in range(N):
        p = k
        amax = fabs(G[k * N + k])
        for i in range(k + 1, N):
            tmp = fabs(G[i * N + k])
            if tmp > amax:
                amax = tmp
                p = i
        piv[k] = p
        if amax == 0.0:
            cond_est[0] = 1e308
            return -1
        if p != k:
            for j in range(N):
                tmp = G[k * N + j]
                G[k * N + j] = G[p * N + j]
                G[p * N + j] = tmp
        u = fabs(G[k * N + k])
        if u < umin:
            umin = u
        if u > umax:
            umax = u
        for i in range(k + 1, N):
            tmp = G[i * N + k] / G[k * N + k]
            G[i * N + k] = tmp
            if tmp != 0.0:
                for j in range(k + 1, N):
                    G[i * N + j] -= tmp * G[k * N + j]
    cond_est[0] = umax / umin if umin > 0.0 else 1e308
    return 0


cdef void _lu_solve(double* G, int N, int* piv, double* b) noexcept nogil:
    cdef int k, i
    cdef double tmp
    for k in range(N):
        if piv[k] != k:
            tmp = b[k]; b[k] = b[piv[k]]; b[piv[k]] = tmp
    for k in range(N):
        for i in range(k):
            b[k] -= G[k * N + i] * b[i]
    for k in range(N - 1, -1, -1):
        for i in range(k + 1, N):
            b[k] -= G[k * N + i] * b[i]
        b[k] /= G[k * N + k]


def lyap_solve(M, Q):
    """Solve M^T X + X M = -Q via the Kronecker form with LU.

    Returns (X, cond_estimate); the estimate is max|U_ii| / min|U_ii|
    from the LU factor, np.inf when exactly singular (X is then NaN).
    """
    cdef cnp.ndarray[double, ndim=2, mode="c"] Mn = np.ascontiguousarray(M, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Qn = np.ascontiguousarray(Q, dtype=np.float64)
    cdef int n = Mn.shape[0]
    if Mn.shape[1] != n or Qn.shape[0] != n or Qn.shape[1] != n:
        raise ValueError("M and Q must be square with matching shape")
    cdef int N = n * n
    cdef double* G = <double*> malloc(<size_t> N * N * sizeof(double))
    cdef double* b = <double*> malloc(N * sizeof(double))
    cdef int* piv = <int*> malloc(N * sizeof(int))
    if G == NULL or b == NULL or piv == NULL:
        free(G); free(b); free(piv)
        raise MemoryError()
    cdef cnp.ndarray[double, ndim=2, mode="c"] X = np.empty((n, n), dtype=np.float64)
    cdef double cond_est = 0.0
    cdef int i, j, k, l, r, status
    cdef double* xd = <double*> X.data
    try:
        with nogil:
            # row r = i + n*j, col c = k + n*l of (I (x) M^T + M^T (x) I)
            # under column-major vec: entry = d_jl M[k,i] + d_ik M[l,j]
            for i in range(N * N):
                G[i] = 0.0
            for j in range(n):
                for i in range(n):
                    r = i + n * j
                    for k in range(n):
                        G[r * N + (k + n * j)] += Mn[k, i]
                    for l in range(n):
                        G[r * N + (i + n * l)] += Mn[l, j]
                    b[r] = -Qn[i, j]
            status = _lu_factor(G, N, piv, &cond_est)
            if status == 0:
                _lu_solve(G, N, piv, b)
                for i in range(n):
                    for j in range(n):
                        xd[i * n + j] = 0.5 * (b[i + n * j] + b[j + n * i])
    finally:
        free(G)
        free(b)
        free(piv)
    if status != 0:
        return np.full((n, n), np.nan), float("inf")
    return X, float(cond_est)
