"""Dense complex linear algebra used throughout the package.

Every operator is a square ``numpy`` array of dtype ``complex128``.  Functions
take plain arrays (anything ``np.asarray`` accepts) and never mutate their
inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .errors import InputFormatError, NotHermitian, NotPsd, SpectraOverlap

DEFAULT_TOL = 1e-9


def as_matrix(M, square: bool = False) -> np.ndarray:
    """Return ``M`` as a finite 2-d complex array (a copy is made only if needed)."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def adjoint(M) -> np.ndarray:
    return np.conj(np.asarray(M, dtype=complex)).T


def operator_norm(M) -> float:
    """Largest singular value."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def spectral_radius(M) -> float:
    M = as_matrix(M, square=True)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def hermitian_part(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    return 0.5 * (H + adjoint(H))


def _require_hermitian(H, tol):
    H = as_matrix(H, square=True)
    skew = operator_norm(H - adjoint(H))
    if skew > tol * operator_norm(H):
        raise NotHermitian(f"matrix is not Hermitian: |H - H*| = {skew:.3e}")
    return hermitian_part(H)


@dataclass(frozen=True)
class HermitianEig:
    """Eigenvalues in ascending order and a unitary matrix of eigenvectors."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ adjoint(self.basis)


def hermitian_eig(H, tol: float = DEFAULT_TOL) -> HermitianEig:
    H = _require_hermitian(H, tol)
    w, V = np.linalg.eigh(H)
    return HermitianEig(w, V)


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    min_eigenvalue: float
    witness: np.ndarray
    threshold: float


def is_psd(H, tol: float = DEFAULT_TOL, scale: float | None = None) -> PsdVerdict:
    """Decide ``H >= 0`` up to tolerance.

    ``H`` passes when its smallest eigenvalue is at least ``-tol * (1 + |H|)``.
    Callers that know the natural magnitude of the quantity being tested
    (e.g. the norms of the terms of a difference) pass it as ``scale``; the
    threshold is then ``-tol * scale``.
    """
    eig = hermitian_eig(H, tol)
    if eig.eigenvalues.size == 0:
        return PsdVerdict(True, 0.0, np.zeros(0, dtype=complex), 0.0)
    lam = float(eig.eigenvalues[0])
    if scale is None:
        scale = 1.0 + float(np.max(np.abs(eig.eigenvalues)))
    threshold = -tol * scale
    return PsdVerdict(lam >= threshold, lam, eig.basis[:, 0].copy(), threshold)


def psd_power(H, r: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Fractional power ``H**r`` of a positive semidefinite matrix.

    Eigenvalues in ``(-tol*|H|, 0)`` are roundoff and are treated as zero.

    Raises
    ------
    NotPsd
        If an eigenvalue lies below ``-tol * |H|``.
    """
    if r <= 0:
        raise ValueError("exponent must be positive")
    eig = hermitian_eig(H, tol)
    w = eig.eigenvalues
    if w.size == 0:
        return np.zeros((0, 0), dtype=complex)
    norm = float(np.max(np.abs(w)))
    if w[0] < -tol * norm:
        raise NotPsd(f"matrix has eigenvalue {w[0]:.3e} < 0")
    w = np.clip(w, 0.0, None) ** r
    out = (eig.basis * w) @ adjoint(eig.basis)
    return hermitian_part(out)


def _svd_rank(s, tol, scale=None):
    ref = float(s[0]) if scale is None and s.size else (scale or 0.0)
    if ref == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * ref))


def orthonormal_range(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the range of ``M``.

    Rank is the number of singular values above ``tol * sigma_max``.
    """
    M = as_matrix(M)
    U, s, _ = np.linalg.svd(M)
    return U[:, : _svd_rank(s, tol)]


def null_space_of_adjoint(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``ker M*``, the orthogonal complement of the range."""
    M = as_matrix(M)
    U, s, _ = np.linalg.svd(M)
    return U[:, _svd_rank(s, tol):]


def null_space(M, tol: float = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of ``ker M``.

    Singular values at or below ``tol * scale`` count as zero; ``scale``
    defaults to ``sigma_max(M)``.
    """
    M = as_matrix(M)
    _, s, Vh = np.linalg.svd(M)
    r = _svd_rank(s, tol, scale)
    return adjoint(Vh[r:])


def kernel_chain(M, tol: float = DEFAULT_TOL, max_power: int | None = None) -> list[int]:
    """Dimensions of ``ker M, ker M^2, ..., ker M^max_power``.

    Uses ``ker M^(j+1) = ker((I - P_j) M)`` with ``P_j`` the projection on
    ``ker M^j`` instead of forming powers, so nilpotent and normal parts with
    very different magnitudes do not swamp each other.
    """
    M = as_matrix(M, square=True)
    d = M.shape[0]
    if max_power is None:
        max_power = d
    ref = operator_norm(M)
    dims: list[int] = []
    K = np.zeros((d, 0), dtype=complex)
    eye = np.eye(d, dtype=complex)
    for _ in range(max_power):
        if dims and (dims[-1] == d or (len(dims) >= 2 and dims[-1] == dims[-2])):
            dims.append(dims[-1])
            continue
        proj = eye - K @ adjoint(K)
        K = null_space(proj @ M, tol, scale=ref)
        dims.append(K.shape[1])
    return dims


def generalized_kernel(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the stabilized kernel chain of ``M``."""
    M = as_matrix(M, square=True)
    d = M.shape[0]
    ref = operator_norm(M)
    K = np.zeros((d, 0), dtype=complex)
    eye = np.eye(d, dtype=complex)
    while True:
        K_next = null_space((eye - K @ adjoint(K)) @ M, tol, scale=ref)
        if K_next.shape[1] <= K.shape[1]:
            return K
        K = K_next


def solve_sylvester(A, C, B, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve ``A S - S C = B`` by the dense Kronecker linearization.

    ``A`` is p-by-p, ``C`` is q-by-q and ``B`` is p-by-q.  With column-major
    vectorization the equation reads ``(I_q kron A - C^T kron I_p) vec S = vec B``.

    Raises
    ------
    SpectraOverlap
        If an eigenvalue of ``A`` is within ``tol * max(1, |A|, |C|)`` of an
        eigenvalue of ``C``.
    """
    A = as_matrix(A, square=True)
    C = as_matrix(C, square=True)
    B = as_matrix(B)
    p, q = A.shape[0], C.shape[0]
    if B.shape != (p, q):
        raise ValueError(f"B has shape {B.shape}, expected {(p, q)}")
    if p == 0 or q == 0:
        return np.zeros((p, q), dtype=complex)
    gap = np.min(np.abs(np.linalg.eigvals(A)[:, None] - np.linalg.eigvals(C)[None, :]))
    if gap < tol * max(1.0, operator_norm(A), operator_norm(C)):
        raise SpectraOverlap(f"spectra of A and C are {gap:.3e} apart")
    L = np.kron(np.eye(q), A) - np.kron(C.T, np.eye(p))
    x = sla.solve(L, B.reshape(-1, order="F"))
    return x.reshape((p, q), order="F")


# -- JSON ------------------------------------------------------------------


def matrix_to_json(M) -> dict:
    M = as_matrix(M)
    rows, cols = M.shape
    return {
        "rows": rows,
        "cols": cols,
        "data": [[float(z.real), float(z.imag)] for z in M.reshape(-1)],
    }


def matrix_from_json(obj, path=None) -> np.ndarray:
    """Parse the ``{"rows", "cols", "data": [[re, im], ...]}`` matrix format."""
    if not isinstance(obj, dict):
        raise InputFormatError("matrix must be a JSON object", path)
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise InputFormatError("missing field", path, key)
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    for key, val in (("rows", rows), ("cols", cols)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise InputFormatError("must be a positive integer", path, key)
    if not isinstance(data, list) or len(data) != rows * cols:
        raise InputFormatError(f"must be a list of {rows * cols} [re, im] pairs", path, "data")
    out = np.empty(rows * cols, dtype=complex)
    for i, entry in enumerate(data):
        field = f"data[{i}]"
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
        ):
            raise InputFormatError("entry must be [re, im] with two numbers", path, field)
        z = complex(entry[0], entry[1])
        if not np.isfinite(z):
            raise InputFormatError("entry is not finite", path, field)
        out[i] = z
    return out.reshape(rows, cols)


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON ({exc})", path) from exc
    return matrix_from_json(obj, path)
