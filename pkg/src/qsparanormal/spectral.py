"""Point spectrum, joint point spectrum and kernel-based consequences of membership.

Eigenvalues of non-normal matrices are perturbation sensitive: a Jordan
block of size d perturbed by roundoff ``u`` has its eigenvalues spread on a
circle of radius about ``u^(1/d)``.  :func:`eigenvalue_clusters` therefore
groups computed eigenvalues into clusters whose centroid is a validated
eigenvalue of the right algebraic multiplicity before any kernel is formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, adjoint, as_matrix, generalized_kernel, matrix_to_json, null_space, operator_norm


@dataclass(frozen=True)
class EigenCluster:
    value: complex
    multiplicity: int
    radius: float  # largest distance from a member to the centroid


def _mag(T):
    return 1.0 + operator_norm(T)


def _generalized_dim(T, lam, tol):
    M = T - lam * np.eye(T.shape[0])
    # cheap rejection: no kernel at all
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] > tol * max(s[0], 1.0):
        return 0
    return generalized_kernel(M, tol).shape[1]


def eigenvalue_clusters(T, tol: float = DEFAULT_TOL) -> list[EigenCluster]:
    """Group the computed eigenvalues of ``T`` into validated clusters.

    Builds the single-linkage tree of the computed eigenvalues.  A merge at
    distance at most ``tol * (1 + |T|)`` is always accepted.  A wider merge
    producing a group of size m is accepted when the group's diameter is
    within the roundoff spread of an m-fold eigenvalue and the generalized
    kernel of ``T - centroid`` has dimension at least m.  The clusters are
    the largest accepted groups.  Centroids within ``tol * (1 + |T|)`` of
    zero are snapped to 0.
    """
    T = as_matrix(T, square=True)
    d = T.shape[0]
    if d == 0:
        return []
    w = np.linalg.eigvals(T)
    mag = _mag(T)
    merge_r = tol * mag

    # node ids: 0..d-1 leaves, then one node per merge
    parent = list(range(d))
    node_of = list(range(d))  # union-find root -> current tree node
    children: dict[int, tuple[int, int]] = {}
    leaves: dict[int, list[int]] = {i: [i] for i in range(d)}
    valid: dict[int, bool] = {i: True for i in range(d)}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    iu, ju = np.triu_indices(d, 1)
    dist = np.abs(w[iu] - w[ju])
    for p in np.argsort(dist, kind="stable"):
        ri, rj = find(int(iu[p])), find(int(ju[p]))
        if ri == rj:
            continue
        a, b = node_of[ri], node_of[rj]
        nid = len(leaves)
        group = leaves[a] + leaves[b]
        m = len(group)
        if dist[p] <= merge_r:
            ok = valid[a] and valid[b]
        else:
            diameter = float(np.max(np.abs(w[group][:, None] - w[group][None, :])))
            ok = diameter <= 4.0 * (1e-13 * mag) ** (1.0 / m) and _generalized_dim(T, complex(np.mean(w[group])), tol) >= m
        parent[rj] = ri
        node_of[ri] = nid
        children[nid] = (a, b)
        leaves[nid] = group
        valid[nid] = ok

    groups = []
    stack = [node_of[r] for r in {find(i) for i in range(d)}]
    while stack:
        node = stack.pop()
        if valid[node]:
            groups.append(leaves[node])
        else:
            stack.extend(children[node])

    out = []
    for group in groups:
        c = complex(np.mean(w[group]))
        radius = float(np.max(np.abs(w[group] - c)))
        if abs(c) <= merge_r:
            c = 0j
        out.append(EigenCluster(c, len(group), radius))
    out.sort(key=lambda e: (round(e.value.real, 12), round(e.value.imag, 12)))
    return out


def point_spectrum(T, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues with algebraic multiplicity (cluster centroids, repeated)."""
    return np.array([e.value for e in eigenvalue_clusters(T, tol) for _ in range(e.multiplicity)], dtype=complex)


def distinct_eigenvalues(T, tol: float = DEFAULT_TOL) -> list[complex]:
    return [e.value for e in eigenvalue_clusters(T, tol)]


def kernel(T, lam: complex = 0.0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``ker(T - lam)``; singular values below ``tol * (1 + |T|)`` count as zero."""
    T = as_matrix(T, square=True)
    return null_space(T - lam * np.eye(T.shape[0]), tol, scale=_mag(T))


def _intersection(K1, K2):
    """Top singular triple of ``K1* K2``: (cosine, unit vector in span K1)."""
    if K1.shape[1] == 0 or K2.shape[1] == 0:
        return 0.0, None
    U, s, _ = np.linalg.svd(adjoint(K1) @ K2)
    return float(s[0]), K1 @ U[:, 0]


def joint_eigenvectors(T, tol: float = DEFAULT_TOL) -> list[tuple[complex, np.ndarray]]:
    """Pairs ``(lam, x)`` with ``T x = lam x`` and ``T* x = conj(lam) x``."""
    T = as_matrix(T, square=True)
    Ts = adjoint(T)
    out = []
    for lam in distinct_eigenvalues(T, tol):
        cos, x = _intersection(kernel(T, lam, tol), kernel(Ts, np.conj(lam), tol))
        if x is not None and cos >= 1.0 - tol:
            out.append((lam, x / np.linalg.norm(x)))
    return out


def joint_point_spectrum(T, tol: float = DEFAULT_TOL) -> list[complex]:
    """Distinct ``lam`` for which ``ker(T - lam)`` and ``ker(T* - conj(lam))`` intersect."""
    return [lam for lam, _ in joint_eigenvectors(T, tol)]


# -- consequences of membership --------------------------------------------


@dataclass
class Violation:
    check: str
    lam: complex
    residual: float
    witness: np.ndarray | None = None
    other: complex | None = None

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "lambda": [self.lam.real, self.lam.imag],
            "residual": float(self.residual),
            "witness": None
            if self.witness is None
            else [[float(z.real), float(z.imag)] for z in np.asarray(self.witness).reshape(-1)],
        }
        if self.other is not None:
            out["other"] = [self.other.real, self.other.imag]
        return out


def _nonzero(lams, mag, tol):
    return [lam for lam in lams if abs(lam) > tol * mag]


def check_kernel_containment(T, tol: float = DEFAULT_TOL) -> list[Violation]:
    """Report kernel directions of nonzero eigenvalues that ``T* - conj(lam)`` does not annihilate.

    With K an orthonormal basis of ``ker(T - lam)``, each singular value of
    ``(T* - conj(lam)) K`` above ``tol * (1 + |T|)`` is one violation; its
    witness is the corresponding unit kernel vector.
    """
    T = as_matrix(T, square=True)
    mag = _mag(T)
    Ts = adjoint(T)
    out = []
    for lam in _nonzero(distinct_eigenvalues(T, tol), mag, tol):
        K = kernel(T, lam, tol)
        if K.shape[1] == 0:
            continue
        R = (Ts - np.conj(lam) * np.eye(T.shape[0])) @ K
        _, s, Vh = np.linalg.svd(R, full_matrices=False)
        # one entry per offending kernel direction (right singular vectors)
        for sigma, v in zip(s, Vh):
            if sigma > tol * mag:
                out.append(Violation("kernel-containment", lam, float(sigma), K @ np.conj(v)))
    return out


def check_eigenspace_orthogonality(T, tol: float = DEFAULT_TOL) -> list[Violation]:
    """Report pairs of distinct eigenvalues (not both zero) with non-orthogonal eigenspaces."""
    T = as_matrix(T, square=True)
    mag = _mag(T)
    lams = distinct_eigenvalues(T, tol)
    kers = [kernel(T, lam, tol) for lam in lams]
    out = []
    for i in range(len(lams)):
        for j in range(i + 1, len(lams)):
            if abs(lams[i]) <= tol * mag and abs(lams[j]) <= tol * mag:
                continue
            cos, x = _intersection(kers[i], kers[j])
            if cos > tol * mag:
                out.append(Violation("eigenspace-orthogonality", lams[i], cos, x, other=lams[j]))
    return out


def _ascent_gap(M, power, tol, scale):
    """Compare ``ker M^power`` with ``ker M^(power+1)``; return (gap, witness)."""
    d = M.shape[0]
    eye = np.eye(d, dtype=complex)
    K = np.zeros((d, 0), dtype=complex)
    dims = []
    for _ in range(power + 1):
        K_prev = K
        K = null_space((eye - K @ adjoint(K)) @ M, tol, scale=scale)
        dims.append(K.shape[1])
    gap = dims[-1] - (dims[-2] if power >= 1 else 0)
    if power == 0:
        return gap, None
    if gap <= 0:
        return 0, None
    # a vector of the larger kernel orthogonal to the smaller one
    X = (eye - K_prev @ adjoint(K_prev)) @ K
    _, _, Vh = np.linalg.svd(X)
    x = X @ np.conj(Vh[0])
    return gap, x / np.linalg.norm(x)


def check_kernel_stabilization(T, k: int = 0, tol: float = DEFAULT_TOL) -> list[Violation]:
    """Report ``ker T^(1+k) != ker T^(2+k)`` (at lam = 0) and ``ker(T - lam) != ker(T - lam)^2`` for lam != 0."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    T = as_matrix(T, square=True)
    mag = _mag(T)
    d = T.shape[0]
    out = []
    gap, x = _ascent_gap(T, k + 1, tol, mag)
    if gap > 0:
        out.append(Violation("kernel-stabilization", 0j, float(gap), x))
    for lam in _nonzero(distinct_eigenvalues(T, tol), mag, tol):
        gap, x = _ascent_gap(T - lam * np.eye(d), 1, tol, mag)
        if gap > 0:
            out.append(Violation("kernel-stabilization", lam, float(gap), x))
    return out


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    clusters: list[EigenCluster]
    joint_eigenvalues: list[complex]
    kernels: list[tuple[complex, np.ndarray]]
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]

        return {
            "eigenvalues": [c(z) for z in self.eigenvalues],
            "clusters": [{"value": c(e.value), "multiplicity": e.multiplicity, "radius": e.radius} for e in self.clusters],
            "joint_eigenvalues": [c(z) for z in self.joint_eigenvalues],
            "kernels": [{"lambda": c(lam), "basis": matrix_to_json(K) if K.shape[1] else None} for lam, K in self.kernels],
            "violations": [v.to_json() for v in self.violations],
        }


def spectral_report(T, k: int = 0, tol: float = DEFAULT_TOL) -> SpectralReport:
    """All spectral data of ``T`` plus the violations of the three kernel checks."""
    T = as_matrix(T, square=True)
    clusters = eigenvalue_clusters(T, tol)
    kernels = [(e.value, kernel(T, e.value, tol)) for e in clusters]
    viol = check_kernel_containment(T, tol) + check_eigenspace_orthogonality(T, tol) + check_kernel_stabilization(T, k, tol)
    return SpectralReport(
        point_spectrum(T, tol),
        clusters,
        joint_point_spectrum(T, tol),
        kernels,
        viol,
    )
