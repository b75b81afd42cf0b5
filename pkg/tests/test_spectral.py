import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import conjugated_normal, diagonal_normal, gaussian, jordan, normal_plus_nilpotent, unitary
from qsparanormal.classes import ClassId
from qsparanormal.gallery import SWEEP_K, SWEEP_N, build_4_4, rank_one_corner
from qsparanormal.linalg import adjoint
from qsparanormal.membership import SearchConfig, check_direct
from qsparanormal.spectral import (
    check_eigenspace_orthogonality,
    check_kernel_containment,
    check_kernel_stabilization,
    distinct_eigenvalues,
    eigenvalue_clusters,
    joint_eigenvectors,
    joint_point_spectrum,
    kernel,
    point_spectrum,
    spectral_report,
)

seeds = st.integers(0, 2**32 - 1)


def _contains(values, lam, atol=1e-8):
    return any(abs(v - lam) <= atol for v in values)


def test_diagonal_spectrum():
    T = np.diag([1.0, 2.0])
    assert sorted(np.real(point_spectrum(T))) == pytest.approx([1, 2])
    K = kernel(T, 1)
    assert K.shape[1] == 1
    np.testing.assert_allclose(np.abs(K[:, 0]), [1, 0], atol=1e-12)


def test_jordan_spectrum():
    J = jordan(2)
    np.testing.assert_allclose(point_spectrum(J), [0, 0], atol=1e-12)
    assert [e.multiplicity for e in eigenvalue_clusters(J)] == [2]
    K = kernel(J, 0)
    assert K.shape[1] == 1
    np.testing.assert_allclose(np.abs(K[:, 0]), [1, 0], atol=1e-12)
    assert joint_point_spectrum(J) == []


def test_rank_one_corner_spectrum():
    T = rank_one_corner(0.125, 16)
    assert _contains(point_spectrum(T), 1)
    K = kernel(T, 1)
    e1 = np.zeros(T.shape[0])
    e1[0] = 1
    # e1 lies in the computed kernel
    assert np.linalg.norm(e1 - K @ (adjoint(K) @ e1)) <= 1e-10
    assert not _contains(joint_point_spectrum(T), 1)


def test_rank_one_corner_containment_residual():
    T = rank_one_corner(0.125, 16)
    viol = [v for v in check_kernel_containment(T) if abs(v.lam - 1) < 1e-8]
    assert any(abs(v.residual - 0.125) <= 1e-8 for v in viol)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 6))
def test_normal_joint_equals_point(seed, d):
    T = conjugated_normal(np.random.default_rng(seed), d)
    pts = distinct_eigenvalues(T)
    joint = joint_point_spectrum(T)
    assert len(joint) == len(pts)
    for lam in pts:
        assert _contains(joint, lam)
    assert check_kernel_containment(T) == []
    assert check_eigenspace_orthogonality(T) == []
    assert check_kernel_stabilization(T, 0) == []


def test_nonorthogonal_eigenspaces():
    T = np.array([[1.0, 1.0], [0.0, 2.0]])
    viol = check_eigenspace_orthogonality(T)
    assert len(viol) == 1
    assert viol[0].residual == pytest.approx(1 / np.sqrt(2))
    assert check_eigenspace_orthogonality(np.diag([1.0, 2.0, 2.0])) == []


def test_hermitian_orthogonal():
    G = gaussian(np.random.default_rng(3), 5)
    assert check_eigenspace_orthogonality(G + adjoint(G)) == []


def test_jordan_stabilization_gap():
    v = check_kernel_stabilization(jordan(2), 0)
    assert len(v) == 1 and v[0].lam == 0 and v[0].residual == 1
    # J^2 = 0 so the chain is stable from power 2 on
    assert check_kernel_stabilization(jordan(2), 1) == []
    with pytest.raises(ValueError):
        check_kernel_stabilization(jordan(2), -1)


def test_nonzero_eigenvalue_ascent():
    T = np.array([[2.0, 1.0], [0.0, 2.0]])
    v = check_kernel_stabilization(T, 3)
    assert len(v) == 1 and v[0].lam == pytest.approx(2)


def test_diagonalizable_no_gaps():
    rng = np.random.default_rng(0)
    S = gaussian(rng, 4) + 4 * np.eye(4)
    T = S @ np.diag([1.0, 2.0, 0.0, 0.0]) @ np.linalg.inv(S)
    for k in range(3):
        assert check_kernel_stabilization(T, k) == []


def test_clusters_survive_conjugation():
    # a 12-fold Jordan eigenvalue spreads widely in floating point
    rng = np.random.default_rng(11)
    J = 0.5 * np.eye(12) + jordan(12)
    Q = unitary(rng, 12)
    T = Q @ J @ adjoint(Q)
    cl = eigenvalue_clusters(T)
    assert len(cl) == 1
    assert cl[0].multiplicity == 12 and abs(cl[0].value - 0.5) < 1e-8
    assert kernel(T, cl[0].value).shape[1] == 1


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 6))
def test_joint_subset_of_point(seed, d):
    rng = np.random.default_rng(seed)
    T = [gaussian, normal_plus_nilpotent, conjugated_normal][seed % 3](rng, d)
    pts = distinct_eigenvalues(T)
    for lam in joint_point_spectrum(T):
        assert _contains(pts, lam, 1e-9 * (1 + np.abs(T).sum()))
    for lam, x in joint_eigenvectors(T):
        assert np.linalg.norm(x) == pytest.approx(1)
        assert np.linalg.norm(T @ x - lam * x) <= 1e-8
        assert np.linalg.norm(adjoint(T) @ x - np.conj(lam) * x) <= 1e-8


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 6))
def test_violation_counts_are_unitarily_invariant(seed, d):
    rng = np.random.default_rng(seed)
    T = normal_plus_nilpotent(rng, d, conjugate=False)
    Q = unitary(rng, d)
    U = Q @ T @ adjoint(Q)
    for f in (check_kernel_containment, check_eigenspace_orthogonality):
        assert len(f(T)) == len(f(U))
    assert len(check_kernel_stabilization(T, 1)) == len(check_kernel_stabilization(U, 1))


def test_containment_contrapositive():
    # a containment failure at a nonzero eigenvalue excludes every class of the sweep
    T = build_4_4().matrix
    assert any(abs(v.lam) > 1e-9 for v in check_kernel_containment(T))
    cfg = SearchConfig(restarts=16, samples=2000)
    for n in SWEEP_N:
        for k in SWEEP_K:
            assert check_direct(T, ClassId.qsp(n, k), cfg).is_non_member


@settings(max_examples=10, deadline=None)
@given(seeds, st.integers(2, 5))
def test_containment_contrapositive_random(seed, d):
    T = gaussian(np.random.default_rng(seed), d)
    if not any(abs(v.lam) > 1e-6 for v in check_kernel_containment(T)):
        return
    cfg = SearchConfig(restarts=16, samples=2000)
    for n in range(3):
        for k in range(3):
            assert not check_direct(T, ClassId.qsp(n, k), cfg).is_member


def test_report_json():
    rep = spectral_report(np.array([[1.0, 1.0], [0.0, 2.0]]))
    assert not rep.ok
    j = json.loads(json.dumps(rep.to_json()))
    assert {v["check"] for v in j["violations"]} == {"kernel-containment", "eigenspace-orthogonality"}
    assert len(j["eigenvalues"]) == 2 and len(j["kernels"]) == 2
    assert spectral_report(diagonal_normal(np.random.default_rng(0), 3)).ok
