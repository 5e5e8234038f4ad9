"""Problem data: plant, cost weights, structure masks, benchmark families.

The decentralized LQR problem is specified by an LTI plant (A, B, C) with
initial-state covariance D0, quadratic weights (R1, R12, R2), and a binary
structure mask selecting which entries of the output-feedback gain K are
free. Chain-family benchmark systems and inverse-optimal weight
construction (which plants a known global optimum with zero cost) live
here as well.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, qr

from .errors import InvalidParameterError

__all__ = [
    "LtiSystem",
    "PerformanceWeights",
    "StructureMask",
    "ChainFamilyParams",
    "build_chain_system",
    "default_chain_params",
    "inverse_optimal_weights",
    "alm_case_study",
    "problem_to_json",
    "problem_from_json",
]


def _as_matrix(x, name, shape=None):
    M = np.asarray(x, dtype=np.float64)
    if M.ndim != 2:
        raise InvalidParameterError(f"{name} must be a 2-d array, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise InvalidParameterError(f"{name} contains non-finite entries")
    if shape is not None and M.shape != shape:
        raise InvalidParameterError(f"{name} must have shape {shape}, got {M.shape}")
    M = M.copy()
    M.setflags(write=False)
    return M


def _check_symmetric(M, name, tol=1e-10):
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > tol * scale:
        raise InvalidParameterError(f"{name} must be symmetric")


@dataclass(frozen=True)
class LtiSystem:
    """Plant matrices and initial-state covariance.

    A is n x n, B is n x m, C is p x n, D0 is n x n symmetric positive
    definite. Instances are immutable.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D0: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise InvalidParameterError(f"A must be square, got {A.shape}")
        B = _as_matrix(self.B, "B")
        if B.shape[0] != n:
            raise InvalidParameterError(f"B must have {n} rows, got {B.shape}")
        C = _as_matrix(self.C, "C")
        if C.shape[1] != n:
            raise InvalidParameterError(f"C must have {n} columns, got {C.shape}")
        D0 = _as_matrix(self.D0, "D0", (n, n))
        _check_symmetric(D0, "D0")
        try:
            cholesky(D0, lower=True)
        except np.linalg.LinAlgError:
            raise InvalidParameterError("D0 must be positive definite") from None
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D0", 0.5 * (D0 + D0.T))
        self.D0.setflags(write=False)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    def c_has_full_row_rank(self, tol=None):
        """Whether C has full row rank, via a pivoted QR factorization.

        Coercivity arguments need this; it is checked on demand, not at
        construction.
        """
        R = qr(self.C.T, mode="r", pivoting=True)[0]
        d = np.abs(np.diag(R))
        if d.size == 0:
            return False
        if tol is None:
            tol = max(self.C.shape) * np.finfo(np.float64).eps * d.max()
        return int((d > tol).sum()) == self.p


@dataclass(frozen=True)
class PerformanceWeights:
    """Quadratic cost weights R1 (n x n), R12 (n x m), R2 (m x m).

    R2 must be positive definite and the stacked block
    [[R1, R12], [R12^T, R2]] positive semi-definite.
    """

    R1: np.ndarray
    R12: np.ndarray
    R2: np.ndarray

    def __post_init__(self):
        R1 = _as_matrix(self.R1, "R1")
        n = R1.shape[0]
        if R1.shape != (n, n):
            raise InvalidParameterError(f"R1 must be square, got {R1.shape}")
        _check_symmetric(R1, "R1")
        R12 = _as_matrix(self.R12, "R12")
        if R12.shape[0] != n:
            raise InvalidParameterError(f"R12 must have {n} rows, got {R12.shape}")
        m = R12.shape[1]
        R2 = _as_matrix(self.R2, "R2", (m, m))
        _check_symmetric(R2, "R2")
        try:
            cholesky(R2, lower=True)
        except np.linalg.LinAlgError:
            raise InvalidParameterError("R2 must be positive definite") from None
        block = np.block([[R1, R12], [R12.T, R2]])
        w = np.linalg.eigvalsh(0.5 * (block + block.T))
        scale = max(1.0, float(np.abs(block).max()))
        if w.min() < -1e-10 * scale:
            raise InvalidParameterError(
                f"[[R1,R12],[R12^T,R2]] must be PSD (min eigenvalue {w.min():.3g})"
            )
        object.__setattr__(self, "R1", 0.5 * (R1 + R1.T))
        object.__setattr__(self, "R12", R12)
        object.__setattr__(self, "R2", 0.5 * (R2 + R2.T))
        self.R1.setflags(write=False)
        self.R2.setflags(write=False)

    @property
    def n(self):
        return self.R1.shape[0]

    @property
    def m(self):
        return self.R2.shape[0]


@dataclass(frozen=True)
class StructureMask:
    """Binary m x p pattern of free gain entries.

    project(K) zeroes the constrained entries, project_complement(K)
    zeroes the free ones; the two always sum to K.
    """

    pattern: np.ndarray

    def __post_init__(self):
        P = _as_matrix(self.pattern, "mask pattern")
        vals = np.unique(P)
        if not np.all(np.isin(vals, (0.0, 1.0))):
            raise InvalidParameterError("mask entries must be 0 or 1")
        object.__setattr__(self, "pattern", P)

    @property
    def m(self):
        return self.pattern.shape[0]

    @property
    def p(self):
        return self.pattern.shape[1]

    @property
    def complement(self):
        Q = 1.0 - self.pattern
        Q.setflags(write=False)
        return Q

    @property
    def n_free(self):
        return int(self.pattern.sum())

    def free_indices(self):
        """Row and column index arrays of the free entries, row-major order."""
        rows, cols = np.nonzero(self.pattern)
        return rows, cols

    def project(self, K):
        return np.asarray(K, dtype=np.float64) * self.pattern

    def project_complement(self, K):
        return np.asarray(K, dtype=np.float64) * self.complement

    def is_structured(self, K, tol=0.0):
        K = np.asarray(K, dtype=np.float64)
        off = K * self.complement
        return np.abs(off).max(initial=0.0) <= tol

    @staticmethod
    def identity(m):
        return StructureMask(np.eye(m))

    @staticmethod
    def full(m, p):
        return StructureMask(np.ones((m, p)))


@dataclass(frozen=True)
class ChainFamilyParams:
    """Parameters of the tridiagonal chain benchmark family.

    f holds f_1..f_n. h holds h_2..h_n; a leading placeholder is accepted
    and ignored, mirroring the 1-based indexing of the construction (h_1
    never appears). Requires f_1 < 0 and the alternating sign condition
    (-1)^i (f_i - h_{i+1}) > 0 for i = 2..n-1; the i = n term would
    reference the nonexistent h_{n+1} and is not checked.
    """

    n: int
    f: tuple = field()
    h: tuple = field()
    eps: float = 0.0

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise InvalidParameterError(f"chain family needs n >= 2, got {n}")
        f = tuple(float(v) for v in np.asarray(self.f, dtype=np.float64).ravel())
        if len(f) != n:
            raise InvalidParameterError(f"f must have {n} entries f_1..f_n, got {len(f)}")
        h_raw = np.asarray(self.h, dtype=np.float64).ravel()
        if h_raw.size == n:
            h_raw = h_raw[1:]  # leading h_1 placeholder, ignored
        if h_raw.size != n - 1:
            raise InvalidParameterError(
                f"h must have {n - 1} entries h_2..h_n (or {n} with a placeholder first)"
            )
        h = (float("nan"),) + tuple(float(v) for v in h_raw)  # h[i-1] is h_i
        eps = float(self.eps)
        if not np.isfinite(eps) or eps < 0:
            raise InvalidParameterError(f"eps must be a nonnegative finite scalar, got {eps}")
        if not all(np.isfinite(f)) or not all(np.isfinite(h[1:])):
            raise InvalidParameterError("f and h must be finite")
        if f[0] >= 0:
            raise InvalidParameterError(f"need f_1 < 0, got f_1 = {f[0]}")
        for i in range(2, n):  # 1-based i = 2..n-1; h_{i+1} = h[i]
            if (-1.0) ** i * (f[i - 1] - h[i]) <= 0:
                raise InvalidParameterError(
                    f"sign condition (-1)^i (f_i - h_(i+1)) > 0 fails at i = {i}: "
                    f"f_{i} = {f[i - 1]}, h_{i + 1} = {h[i]}"
                )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "eps", eps)


def default_chain_params(n, eps=0.0, big=10.0, small=1.0):
    """Chain parameters generalizing the 3-state benchmark to any order.

    f_1 = -1 and, for i >= 2, f_i = h_i alternating between `big` (even i)
    and `small` (odd i). The alternation satisfies the sign condition for
    any n.
    """
    f = [-1.0] + [big if i % 2 == 0 else small for i in range(2, n + 1)]
    h = [big if i % 2 == 0 else small for i in range(2, n + 1)]
    return ChainFamilyParams(n=n, f=tuple(f), h=tuple(h), eps=eps)


def build_chain_system(params):
    """Construct the tridiagonal chain plant for the given parameters.

    A has eps on the diagonal (f_1 + eps in the corner), f_2..f_n on the
    superdiagonal and -h_2..-h_n on the subdiagonal. B carries +1 on the
    superdiagonal and -1 on the subdiagonal. C and D0 are identity; the
    intended structure mask for this family is diagonal
    (StructureMask.identity(n)).

    eps = 0 is accepted but warned about, since the components of the
    stabilizing set are then not strictly separated.
    """
    if not isinstance(params, ChainFamilyParams):
        params = ChainFamilyParams(**params)
    n, f, h, eps = params.n, params.f, params.h, params.eps
    if eps == 0.0:
        warnings.warn(
            "chain family with eps = 0: components touch at the boundary, "
            "no strict separation margin",
            UserWarning,
            stacklevel=2,
        )
    A = np.zeros((n, n))
    A[np.diag_indices(n)] = eps
    A[0, 0] += f[0]
    for i in range(2, n + 1):
        A[i - 2, i - 1] = f[i - 1]
        A[i - 1, i - 2] = -h[i - 1]
    B = np.zeros((n, n))
    for i in range(n - 1):
        B[i, i + 1] = 1.0
        B[i + 1, i] = -1.0
    return LtiSystem(A=A, B=B, C=np.eye(n), D0=np.eye(n))


def inverse_optimal_weights(sys, K_opt, R2):
    """Cost weights that make K_opt the global optimum with J(K_opt) = 0.

    R1 = C^T K_opt^T R2 K_opt C and R12 = C^T K_opt^T R2; then
    R_hat(K) = C^T (K - K_opt)^T R2 (K - K_opt) C is PSD everywhere and
    vanishes exactly at K_opt.
    """
    K_opt = _as_matrix(K_opt, "K_opt", (sys.m, sys.p))
    R2 = _as_matrix(R2, "R2", (sys.m, sys.m))
    KC = K_opt @ sys.C
    R12 = KC.T @ R2
    R1 = R12 @ KC
    return PerformanceWeights(R1=0.5 * (R1 + R1.T), R12=R12, R2=R2)


def alm_case_study():
    """The 3-state chain instance used for the augmented Lagrangian study.

    Returns (system, weights, mask) with f_1 = -1, f_2 = h_2 = 2,
    f_3 = h_3 = 1, eps = 0, R2 = I, and weights built so the dense gain

        K_c = [[6, -10, 0], [0, 2, -10], [4, 0, 0]]

    is the global optimum over unstructured gains.
    """
    params = ChainFamilyParams(n=3, f=(-1.0, 2.0, 1.0), h=(2.0, 1.0), eps=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        sys = build_chain_system(params)
    K_c = np.array([[6.0, -10.0, 0.0], [0.0, 2.0, -10.0], [4.0, 0.0, 0.0]])
    weights = inverse_optimal_weights(sys, K_c, np.eye(3))
    return sys, weights, StructureMask.identity(3)


_JSON_KEYS = ("A", "B", "C", "D0", "mask", "R1", "R12", "R2")


def problem_to_json(sys, weights, mask, indent=None):
    """Serialize (system, weights, mask) to a JSON document string."""
    doc = {
        "A": sys.A.tolist(),
        "B": sys.B.tolist(),
        "C": sys.C.tolist(),
        "D0": sys.D0.tolist(),
        "mask": mask.pattern.tolist(),
        "R1": weights.R1.tolist(),
        "R12": weights.R12.tolist(),
        "R2": weights.R2.tolist(),
    }
    return json.dumps(doc, indent=indent)


def problem_from_json(text):
    """Parse a problem JSON document (string or parsed dict).

    Expects exactly the keys {A, B, C, D0, mask, R1, R12, R2} holding
    row-major nested arrays of finite numbers. Returns
    (system, weights, mask).
    """
    doc = json.loads(text) if isinstance(text, (str, bytes)) else text
    if not isinstance(doc, dict):
        raise InvalidParameterError("problem document must be a JSON object")
    missing = [k for k in _JSON_KEYS if k not in doc]
    extra = [k for k in doc if k not in _JSON_KEYS]
    if missing:
        raise InvalidParameterError(f"problem document missing keys: {missing}")
    if extra:
        raise InvalidParameterError(f"problem document has unknown keys: {extra}")
    sys = LtiSystem(A=doc["A"], B=doc["B"], C=doc["C"], D0=doc["D0"])
    weights = PerformanceWeights(R1=doc["R1"], R12=doc["R12"], R2=doc["R2"])
    mask = StructureMask(doc["mask"])
    if weights.n != sys.n or weights.m != sys.m:
        raise InvalidParameterError("weights dimensions do not match the system")
    if mask.pattern.shape != (sys.m, sys.p):
        raise InvalidParameterError(
            f"mask must be {sys.m} x {sys.p}, got {mask.pattern.shape}"
        )
    return sys, weights, mask
