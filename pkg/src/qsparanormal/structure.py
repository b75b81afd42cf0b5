"""Block structure: the range/kernel decomposition, restrictions, and block-diagonal similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInvariant, NotInvertible, NotNilpotent
from .linalg import (
    DEFAULT_TOL,
    adjoint,
    as_matrix,
    matrix_to_json,
    null_space_of_adjoint,
    operator_norm,
    orthonormal_range,
    solve_sylvester,
)
from .spectral import eigenvalue_clusters


def _multiset(M, tol):
    return [(e.value, e.radius) for e in eigenvalue_clusters(M, tol) for _ in range(e.multiplicity)]


def spectra_match(M, parts, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``sigma(M)`` equals the union of ``sigma(P)`` over ``parts`` as multisets.

    Greedy nearest-neighbour matching; two eigenvalues match when they are
    within ``tol * (1 + |M|)`` plus the roundoff radii of their clusters.
    """
    mag = 1.0 + operator_norm(M)
    left = _multiset(M, tol)
    right = [item for P in parts if P.shape[0] for item in _multiset(P, tol)]
    if len(left) != len(right):
        return False
    used = np.zeros(len(right), dtype=bool)
    for lam, r in left:
        best, best_d = -1, np.inf
        for j, (mu, s) in enumerate(right):
            d = abs(lam - mu)
            if not used[j] and d <= tol * mag + r + s and d < best_d:
                best, best_d = j, d
        if best < 0:
            return False
        used[best] = True
    return True


@dataclass
class Decomposition:
    """``basis* T basis = [[T1, T2], [0, T3]]`` with the first block spanning ``range T^k``."""

    k: int
    basis: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    residual: float
    t3_power_norm: float
    t3_nilpotent: bool
    spectrum_match: bool

    @property
    def split(self) -> int:
        return self.T1.shape[0]

    def to_json(self) -> dict:
        def mat(M):
            return matrix_to_json(M) if M.size else None

        return {
            "k": self.k,
            "basis": matrix_to_json(self.basis),
            "T1": mat(self.T1),
            "T2": mat(self.T2),
            "T3": mat(self.T3),
            "range_dim": int(self.T1.shape[0]),
            "kernel_dim": int(self.T3.shape[0]),
            "residual": float(self.residual),
            "t3_power_norm": float(self.t3_power_norm),
            "t3_nilpotent": bool(self.t3_nilpotent),
            "spectrum_match": bool(self.spectrum_match),
        }


def decompose(T, k: int, tol: float = DEFAULT_TOL) -> Decomposition:
    """Split the space as ``closure(range T^k) + ker T*^k``.

    The lower-left block vanishes exactly in exact arithmetic (the range of
    ``T^k`` is invariant); ``residual`` is its computed norm.  For ``k = 0``
    the second block is empty.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    T = as_matrix(T, square=True)
    d = T.shape[0]
    if k == 0:
        R = np.eye(d, dtype=complex)
        K = np.zeros((d, 0), dtype=complex)
    else:
        Tk = np.linalg.matrix_power(T, k)
        R = orthonormal_range(Tk, tol)
        K = null_space_of_adjoint(Tk, tol)
    basis = np.hstack([R, K])
    M = adjoint(basis) @ T @ basis
    r = R.shape[1]
    T1, T2, T3 = M[:r, :r], M[:r, r:], M[r:, r:]
    residual = operator_norm(M[r:, :r])
    t3k = operator_norm(np.linalg.matrix_power(T3, k)) if T3.size else 0.0
    nil = all(e.value == 0 for e in eigenvalue_clusters(T3, tol)) if T3.size else True
    match = spectra_match(T, [T1, T3], tol)
    return Decomposition(k, basis, T1, T2, T3, residual, t3k, nil, match)


def restrict(T, V, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Matrix ``V* T V`` of ``T`` on ``span V``.

    Raises
    ------
    NotInvariant
        If ``|(I - V V*) T V| > tol * |T|``.
    """
    T = as_matrix(T, square=True)
    V = as_matrix(V)
    if V.shape[0] != T.shape[0]:
        raise ValueError(f"V has {V.shape[0]} rows, T is {T.shape[0]}-dimensional")
    if operator_norm(adjoint(V) @ V - np.eye(V.shape[1])) > tol * max(1, V.shape[1]) * 10:
        raise ValueError("columns of V are not orthonormal")
    TV = T @ V
    leak = operator_norm(TV - V @ (adjoint(V) @ TV))
    if leak > tol * operator_norm(T):
        raise NotInvariant(f"span(V) is not invariant: leakage {leak:.3e}")
    return adjoint(V) @ TV


@dataclass
class SimilarityResult:
    """``W T W^-1 = R`` for ``T = [[A, B], [0, C]]``, ``W = [[I, S], [0, I]]``, ``R = A (+) C``."""

    S: np.ndarray
    W: np.ndarray
    W_inv: np.ndarray
    R: np.ndarray
    T: np.ndarray
    sylvester_residual: float
    intertwining_residual: float
    similarity_residual: float

    def to_json(self) -> dict:
        return {
            "S": matrix_to_json(self.S),
            "W": matrix_to_json(self.W),
            "W_inv": matrix_to_json(self.W_inv),
            "R": matrix_to_json(self.R),
            "T": matrix_to_json(self.T),
            "sylvester_residual": self.sylvester_residual,
            "intertwining_residual": self.intertwining_residual,
            "similarity_residual": self.similarity_residual,
        }


def build_similarity(A, B, C, k: int, tol: float = DEFAULT_TOL) -> SimilarityResult:
    """Solve ``A S - S C = B`` and assemble the similarity of ``[[A, B], [0, C]]`` to ``A (+) C``.

    Raises
    ------
    NotInvertible
        If ``sigma_min(A) <= tol * max(1, |A|)``.
    NotNilpotent
        If ``|C^k| > tol * max(1, |C|)^k``.
    """
    A = as_matrix(A, square=True)
    C = as_matrix(C, square=True)
    B = as_matrix(B)
    p, q = A.shape[0], C.shape[0]
    if B.shape != (p, q):
        raise ValueError(f"B has shape {B.shape}, expected {(p, q)}")
    if k < 1:
        raise ValueError("k must be at least 1")
    smin = np.linalg.svd(A, compute_uv=False)[-1] if p else np.inf
    if smin <= tol * max(1.0, operator_norm(A)):
        raise NotInvertible(f"A is singular (smallest singular value {smin:.3e})")
    ck = operator_norm(np.linalg.matrix_power(C, k)) if q else 0.0
    if ck > tol * max(1.0, operator_norm(C)) ** k:
        raise NotNilpotent(f"|C^{k}| = {ck:.3e}")
    S = solve_sylvester(A, C, B, tol)
    I_p, I_q = np.eye(p), np.eye(q)
    Z = np.zeros((q, p))
    W = np.block([[I_p, S], [Z, I_q]])
    W_inv = np.block([[I_p, -S], [Z, I_q]])
    T = np.block([[A, B], [Z, C]])
    R = np.block([[A, np.zeros((p, q))], [Z, C]])
    return SimilarityResult(
        S,
        W,
        W_inv,
        R,
        T,
        operator_norm(A @ S - S @ C - B),
        operator_norm(W @ T - R @ W),
        operator_norm(W @ T @ W_inv - R),
    )
