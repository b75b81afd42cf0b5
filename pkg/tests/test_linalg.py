import json

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from qsparanormal.errors import InputFormatError, NotHermitian, NotPsd, SpectraOverlap
from qsparanormal.linalg import (
    adjoint,
    generalized_kernel,
    hermitian_eig,
    is_psd,
    kernel_chain,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    null_space,
    null_space_of_adjoint,
    operator_norm,
    orthonormal_range,
    psd_power,
    solve_sylvester,
    spectral_radius,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 6)


def _rand(seed, d, cols=None):
    rng = np.random.default_rng(seed)
    cols = d if cols is None else cols
    return rng.standard_normal((d, cols)) + 1j * rng.standard_normal((d, cols))


def test_hermitian_eig_reconstructs():
    G = _rand(0, 5)
    H = G @ adjoint(G)
    eig = hermitian_eig(H)
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    np.testing.assert_allclose(eig.reconstruct(), H, atol=1e-12)


def test_hermitian_eig_rejects_skew():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_is_psd_witness():
    v = is_psd(np.diag([2.0, -1.0, 3.0]))
    assert not v.is_psd
    assert v.min_eigenvalue == pytest.approx(-1.0)
    np.testing.assert_allclose(np.abs(v.witness), [0, 1, 0], atol=1e-12)
    assert is_psd(np.diag([1.0, 0.0])).is_psd


def test_is_psd_roundoff_tolerated():
    assert is_psd(np.diag([1.0, -1e-14])).is_psd


@settings(max_examples=40, deadline=None)
@given(seeds, dims, st.sampled_from([0.5, 0.25, 1 / 3, 2.0]))
def test_psd_power_inverts_integer_power(seed, d, r):
    G = _rand(seed, d)
    H = G @ adjoint(G)
    P = psd_power(H, r)
    np.testing.assert_allclose(P, adjoint(P), atol=1e-12)
    if r < 1:
        back = np.linalg.matrix_power(P, round(1 / r))
        np.testing.assert_allclose(back, H, atol=1e-9 * (1 + operator_norm(H)))


def test_psd_power_clamps_and_rejects():
    P = psd_power(np.diag([4.0, -1e-13]), 0.5)
    np.testing.assert_allclose(P, np.diag([2.0, 0.0]), atol=1e-12)
    with pytest.raises(NotPsd):
        psd_power(np.diag([1.0, -0.5]), 0.5)


def test_block_shift_roots():
    A = psd_power(np.array([[1, 1], [1, 2]]), 0.5)
    B = psd_power(np.array([[1, 2], [2, 8]]), 0.25)
    assert operator_norm(A @ A - [[1, 1], [1, 2]]) <= 1e-10
    assert operator_norm(np.linalg.matrix_power(B, 4) - [[1, 2], [2, 8]]) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds, dims, st.integers(1, 6))
def test_range_and_cokernel_are_complementary(seed, d, r):
    r = min(r, d)
    M = _rand(seed, d, r) @ _rand(seed + 1, r, d)
    R, K = orthonormal_range(M), null_space_of_adjoint(M)
    assert R.shape[1] + K.shape[1] == d
    Q = np.hstack([R, K])
    np.testing.assert_allclose(adjoint(Q) @ Q, np.eye(d), atol=1e-10)
    np.testing.assert_allclose(adjoint(K) @ M, 0, atol=1e-9 * (1 + operator_norm(M)))


def test_null_space_examples():
    K = null_space(np.array([[0, 1], [0, 0]]))
    np.testing.assert_allclose(np.abs(K[:, 0]), [1, 0])
    assert null_space(np.eye(3)).shape == (3, 0)
    assert null_space(np.zeros((2, 2))).shape == (2, 2)


def test_kernel_chain_jordan():
    J = np.diag(np.ones(3), 1)
    assert kernel_chain(J, max_power=5) == [1, 2, 3, 4, 4]
    # nilpotent part hidden next to a large normal part
    M = np.zeros((4, 4))
    M[0, 0] = 1e6
    M[1:, 1:] = np.diag(np.ones(2), 1)
    assert kernel_chain(M, max_power=4) == [1, 2, 3, 3]
    assert generalized_kernel(M).shape[1] == 3


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 5), st.integers(1, 5))
def test_sylvester_matches_scipy(seed, p, q):
    rng = np.random.default_rng(seed)
    A = np.diag(rng.uniform(1, 3, p)) + np.triu(_rand(seed, p), 1) * 0.3
    C = np.triu(_rand(seed + 1, q), 1) * 0.5
    B = _rand(seed + 2, p, q)
    S = solve_sylvester(A, C, B)
    np.testing.assert_allclose(S, sla.solve_sylvester(A, -C, B), atol=1e-9)
    assert operator_norm(A @ S - S @ C - B) <= 1e-9


def test_sylvester_overlap():
    with pytest.raises(SpectraOverlap):
        solve_sylvester(np.eye(2), np.eye(2), np.ones((2, 2)))


def test_sylvester_vectorized_oracle():
    A = 2 * np.eye(2)
    C = np.array([[0, 1], [0, 0]])
    S = solve_sylvester(A, C, np.eye(2))
    # 2S - SC = I: first column S e1 = e1/2, second 2 S e2 = e2 + S e1
    np.testing.assert_allclose(S, [[0.5, 0.25], [0, 0.5]], atol=1e-14)


def test_norm_and_radius():
    J = np.array([[0, 1], [0, 0]])
    assert operator_norm(J) == pytest.approx(1)
    assert spectral_radius(J) == 0
    assert operator_norm(np.zeros((0, 0))) == 0


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_matrix_json_round_trip(seed, r, c):
    M = _rand(seed, r, c)
    obj = json.loads(json.dumps(matrix_to_json(M)))
    np.testing.assert_array_equal(matrix_from_json(obj), M)


@pytest.mark.parametrize(
    "obj, field",
    [
        ({"cols": 1, "data": [[1, 0]]}, "rows"),
        ({"rows": 0, "cols": 1, "data": []}, "rows"),
        ({"rows": 1, "cols": 2, "data": [[1, 0]]}, "data"),
        ({"rows": 1, "cols": 2, "data": [[1, 0], [1]]}, "data[1]"),
        ({"rows": 1, "cols": 1, "data": [["a", 0]]}, "data[0]"),
        ({"rows": True, "cols": 1, "data": [[1, 0]]}, "rows"),
    ],
)
def test_matrix_json_errors_name_field(obj, field):
    with pytest.raises(InputFormatError) as info:
        matrix_from_json(obj, "m.json")
    assert info.value.field == field
    assert "m.json" in str(info.value)


def test_load_matrix_bad_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    with pytest.raises(InputFormatError) as info:
        load_matrix(p)
    assert str(p) in str(info.value)
