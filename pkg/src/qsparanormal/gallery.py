"""Concrete operators with known verdicts, runnable as regression checks.

Each builder returns a :class:`GalleryEntry` holding the matrix (a finite
section where the operator is infinite dimensional), its parameters, and a
list of expectations.  ``entry.run()`` evaluates every expectation from
scratch.

Expectation kinds: ``"stated"`` outcomes are the claims made for the
operator itself; ``"consequence"`` outcomes follow from those by a short
argument (recorded in the description); ``"section"`` outcomes concern the
finite section rather than the infinite operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .classes import ClassId, definitional_residual, pencil
from .errors import NotInvertible, ParameterError
from .linalg import DEFAULT_TOL, adjoint, matrix_to_json, operator_norm, psd_power
from .membership import SearchConfig, check_direct, check_normaloid, check_pencil, check_quasi_star_class_a
from .shifts import (
    WeightSequence,
    boundary_width,
    interior_support,
    shift_criterion,
    shift_is_normaloid,
    shift_norm,
    shift_spectral_radius,
    truncate,
)
from .spectral import check_kernel_containment, joint_point_spectrum, kernel, point_spectrum
from .structure import build_similarity

SWEEP_N = range(0, 3)
SWEEP_K = range(0, 4)


@dataclass
class Expectation:
    """``check(cfg)`` returns ``(passed, observed)``; ``refutes`` marks a NonMember/violation outcome."""

    description: str
    expected: str
    kind: str
    check: Callable[[SearchConfig], tuple[bool, Any]]
    refutes: bool = False


@dataclass
class ExpectationResult:
    description: str
    expected: str
    kind: str
    passed: bool
    observed: Any
    refutes: bool

    def to_json(self) -> dict:
        return {
            "description": self.description,
            "expected": self.expected,
            "kind": self.kind,
            "passed": self.passed,
            "observed": self.observed,
            "refutes": self.refutes,
        }


@dataclass
class GalleryEntry:
    id: str
    title: str
    params: dict
    matrix: np.ndarray
    expectations: list[Expectation] = field(default_factory=list)
    weights: WeightSequence | None = None

    def run(self, cfg: SearchConfig | None = None) -> list[ExpectationResult]:
        cfg = cfg or SearchConfig()
        out = []
        for e in self.expectations:
            passed, observed = e.check(cfg)
            out.append(ExpectationResult(e.description, e.expected, e.kind, bool(passed), observed, e.refutes))
        return out

    def to_json(self, results: list[ExpectationResult] | None = None) -> dict:
        out = {
            "id": self.id,
            "title": self.title,
            "params": self.params,
            "matrix": matrix_to_json(self.matrix),
        }
        if self.weights is not None:
            out["weights"] = self.weights.to_json()
        if results is not None:
            out["expectations"] = [r.to_json() for r in results]
        return out


def _status(v):
    return v.status.value


def _direct_expect(T, cls, want, support=None, kind="stated", note=""):
    def run(cfg):
        v = check_direct(T, cls, cfg, support)
        return _status(v) == want, {"status": _status(v), "margin": v.margin}

    desc = f"check_direct {cls}" + (f" ({note})" if note else "")
    return Expectation(desc, want, kind, run, refutes=want == "NonMember")


# -- block operator with A = [[1,1],[1,2]]^(1/2), B = [[1,2],[2,8]]^(1/4) ----------


def block_roots(tol: float = DEFAULT_TOL):
    A = psd_power(np.array([[1, 1], [1, 2]], dtype=complex), 0.5, tol)
    B = psd_power(np.array([[1, 2], [2, 8]], dtype=complex), 0.25, tol)
    return A, B


def build_2_3_1(num_blocks: int = 6, samples: int = 10_000, seed: int = 0) -> GalleryEntry:
    """Section of the block shift with ``A`` in block (2, 1) and ``B`` below the diagonal after it."""
    if num_blocks < 4:
        raise ParameterError("num_blocks must be at least 4")
    A, B = block_roots()
    d = 2 * num_blocks
    T = np.zeros((d, d), dtype=complex)
    T[2:4, 0:2] = A
    for j in range(1, num_blocks - 1):
        T[2 * j + 2 : 2 * j + 4, 2 * j : 2 * j + 2] = B
    interior = 2 * (num_blocks - 2)
    star_paranormal = ClassId.qsp(1, 0)

    def roots_a(cfg):
        err = operator_norm(A @ A - np.array([[1, 1], [1, 2]]))
        return err <= 1e-10, err

    def roots_b(cfg):
        err = operator_norm(np.linalg.matrix_power(B, 4) - np.array([[1, 2], [2, 8]]))
        return err <= 1e-10, err

    def not_class_a(cfg):
        v = check_quasi_star_class_a(T, 0, cfg.tol)
        return v.is_non_member, {"status": _status(v), "margin": v.margin}

    def sampled_interior(cfg):
        rng = np.random.default_rng([seed, 231])
        Z = rng.standard_normal((samples, interior)) + 1j * rng.standard_normal((samples, interior))
        X = np.zeros((samples, d), dtype=complex)
        X[:, :interior] = Z / np.linalg.norm(Z, axis=1, keepdims=True)
        worst = min(definitional_residual(star_paranormal, T, x, cfg.tol) for x in X)
        return worst >= -cfg.tol, worst

    return GalleryEntry(
        "ex-2.3.1",
        "*-paranormal block shift that is not *-class A",
        {"num_blocks": num_blocks},
        T,
        [
            Expectation("A^2 reconstructs [[1,1],[1,2]]", "error <= 1e-10", "stated", roots_a),
            Expectation("B^4 reconstructs [[1,2],[2,8]]", "error <= 1e-10", "stated", roots_b),
            Expectation("check_quasi_star_class_a k=0", "NonMember", "stated", not_class_a, refutes=True),
            Expectation(
                f"*-paranormal residual on {samples} sampled unit vectors in the first {interior} coordinates",
                ">= -tol",
                "section",
                sampled_interior,
            ),
        ],
    )


# -- [[1, alpha e1 (x) e1], [0, U + 1]] ---------------------------------------------


def rank_one_corner(alpha: float = 0.125, N: int = 16) -> np.ndarray:
    """``[[1, alpha e1 (x) e1], [0, U + 1]]`` on ``C + C^N`` with ``U`` the truncated unilateral shift."""
    if not 0 < alpha < 0.25:
        raise ParameterError("alpha must lie in (0, 1/4)")
    if N < 4:
        raise ParameterError("N must be at least 4")
    T = np.zeros((N + 1, N + 1), dtype=complex)
    T[0, 0] = 1.0
    T[0, 1] = alpha
    T[1:, 1:] = np.eye(N) + np.diag(np.ones(N - 1), -1)
    return T


def _build_rank_one_corner(entry_id, alpha, N):
    T = rank_one_corner(alpha, N)
    d = N + 1
    e1 = np.zeros(d, dtype=complex)
    e1[0] = 1.0

    def in_kernel(cfg):
        K = kernel(T, 1.0, cfg.tol)
        captured = float(np.linalg.norm(adjoint(K) @ e1))
        return abs(captured - 1.0) <= cfg.tol, captured

    def adjoint_image(cfg):
        want = e1.copy()
        want[1] = alpha
        err = float(np.linalg.norm(adjoint(T) @ e1 - want))
        return err <= cfg.tol, err

    def containment(cfg):
        hits = [v for v in check_kernel_containment(T, cfg.tol) if abs(v.lam - 1) <= 1e-8 and abs(v.witness[0]) > 0.99]
        obs = [v.residual for v in hits]
        return len(hits) == 1 and abs(hits[0].residual - alpha) <= 1e-8, obs

    def point_not_joint(cfg):
        in_p = bool(np.any(np.abs(point_spectrum(T, cfg.tol) - 1) <= 1e-8))
        in_jp = any(abs(z - 1) <= 1e-8 for z in joint_point_spectrum(T, cfg.tol))
        return in_p and not in_jp, {"in_point": in_p, "in_joint": in_jp}

    exps = [
        Expectation("e1 + 0 lies in ker(T - 1)", "projection norm 1", "stated", in_kernel),
        Expectation("T*(e1 + 0) = e1 + alpha e1", "exact", "stated", adjoint_image),
        Expectation(
            "kernel containment fails at 1 along e1 + 0",
            "residual = alpha", "stated", containment, refutes=True
        ),
        Expectation("1 is in the point spectrum but not the joint point spectrum", "true", "stated", point_not_joint),
    ]
    for n in SWEEP_N:
        for k in SWEEP_K:
            exps.append(
                _direct_expect(T, ClassId.qsp(n, k), "NonMember", kind="consequence", note="kernel containment fails")
            )
    return GalleryEntry(
        entry_id,
        "paranormal operator whose eigenspace at 1 does not reduce it",
        {"alpha": alpha, "N": N},
        T,
        exps,
    )


def build_2_3_2(alpha: float = 0.125, N: int = 16) -> GalleryEntry:
    return _build_rank_one_corner("ex-2.3.2", alpha, N)


def build_4_4(alpha: float = 0.125, N: int = 16) -> GalleryEntry:
    return _build_rank_one_corner("ex-4.4", alpha, N)


# -- weighted shifts ---------------------------------------------------------------


def step_down_weights(k: int) -> WeightSequence:
    """``w_k = 2`` and every other weight 1."""
    return WeightSequence(tuple([1] * (k - 1) + [2]), (1,))


def _truncation_expect(ws, N, cls, want):
    T = truncate(ws, N)
    V = interior_support(N, boundary_width(cls))
    return _direct_expect(T, cls, want, V, kind="section", note=f"first {V.shape[1]} of {N} coordinates")


def build_2_3_3(n: int = 1, k: int = 1, N: int = 16) -> GalleryEntry:
    if k < 1:
        raise ParameterError("k must be at least 1")
    if n < 0:
        raise ParameterError("n must be nonnegative")
    ws = step_down_weights(k)

    def fails(cfg):
        r = shift_criterion(ws, n, k)
        return (not r.holds) and r.first_violation == k, {"holds": r.holds, "first_violation": r.first_violation}

    def holds_next(cfg):
        r = shift_criterion(ws, n, k + 1)
        return r.holds, {"holds": r.holds}

    return GalleryEntry(
        "ex-2.3.3",
        "weighted shift in qsp(n, k+1) but not qsp(n, k)",
        {"n": n, "k": k, "N": N},
        truncate(ws, N),
        [
            Expectation(f"shift criterion at ({n},{k})", f"fails at m = {k}", "stated", fails, refutes=True),
            Expectation(f"shift criterion at ({n},{k + 1})", "holds", "stated", holds_next),
            _truncation_expect(ws, N, ClassId.qsp(n, k), "NonMember"),
            _truncation_expect(ws, N, ClassId.qsp(n, k + 1), "Member"),
        ],
        weights=ws,
    )


def power_radius(T, m: int) -> float:
    """``|T^m|^(1/m)``."""
    return operator_norm(np.linalg.matrix_power(T, m)) ** (1.0 / m)


def build_2_3_4(n: int = 1, k: int = 2, N: int = 64, m: int = 32) -> GalleryEntry:
    if k < 2:
        raise ParameterError("k must be at least 2")
    if n < 0:
        raise ParameterError("n must be nonnegative")
    ws = WeightSequence((2,), (1,))
    T = truncate(ws, N)

    def holds(cfg):
        r = shift_criterion(ws, n, k)
        return r.holds, {"holds": r.holds}

    def norm_radius(cfg):
        nrm, rad = shift_norm(ws), shift_spectral_radius(ws)
        return nrm == 2 and rad == 1 and not shift_is_normaloid(ws), {
            "norm": str(nrm),
            "spectral_radius": str(rad),
        }

    def limit(cfg):
        r = power_radius(T, m)
        return abs(r - 1.0) <= 0.05, r

    return GalleryEntry(
        "ex-2.3.4",
        "weighted shift in qsp(n, k) for k >= 2 that is not normaloid",
        {"n": n, "k": k, "N": N, "m": m},
        T,
        [
            Expectation(f"shift criterion at ({n},{k})", "holds", "stated", holds),
            Expectation("norm 2, spectral radius 1, not normaloid", "exact", "stated", norm_radius, refutes=True),
            Expectation(f"|T_N^{m}|^(1/{m}) with N = {N}", "within 0.05 of 1", "stated", limit),
            _truncation_expect(ws, min(N, 16), ClassId.qsp(n, k), "Member"),
        ],
        weights=ws,
    )


# -- diag(1, S) with S e_(2l-1) = e_(2l), S e_(2l) = 0 -----------------------------


def build_2_3_5(N: int = 16) -> GalleryEntry:
    if N < 4 or N % 2:
        raise ParameterError("N must be even and at least 4")
    d = N + 1
    T = np.zeros((d, d), dtype=complex)
    T[0, 0] = 1.0
    for l in range(N // 2):
        T[2 + 2 * l, 1 + 2 * l] = 1.0
    corner = np.zeros((d, d))
    corner[0, 0] = 1.0

    def powers(cfg):
        norms = [operator_norm(np.linalg.matrix_power(T, m)) for m in range(1, 5)]
        return all(abs(x - 1) <= cfg.tol for x in norms), norms

    def idempotent_tail(cfg):
        err = max(operator_norm(np.linalg.matrix_power(T, m) - corner) for m in range(2, 6))
        return err <= cfg.tol, err

    def normaloid(cfg):
        v = check_normaloid(T, cfg.tol)
        return v.is_member, {"status": _status(v), "margin": v.margin}

    exps = [
        Expectation("|T^m| = 1 for m = 1..4", "1", "stated", powers),
        Expectation("T^m = 1 (+) 0 for m = 2..5", "exact", "stated", idempotent_tail),
        Expectation("check_normaloid", "Member", "stated", normaloid),
    ]
    for n in SWEEP_N:

        def qmin(cfg, n=n):
            lam = float(np.linalg.eigvalsh(pencil(T, n, 1, 1.0))[0])
            return abs(lam + 1) <= 1e-9, lam

        def pen(cfg, n=n):
            v = check_pencil(T, n, 1, cfg)
            return v.is_non_member, {"status": _status(v), "mu": v.mu, "margin": v.margin}

        exps.append(Expectation(f"lambda_min Q(1) for ({n},1)", "-1", "stated", qmin, refutes=True))
        exps.append(Expectation(f"check_pencil ({n},1)", "NonMember", "stated", pen, refutes=True))
    return GalleryEntry("ex-2.3.5", "normaloid operator outside every qsp(n, 1)", {"N": N}, T, exps)


# -- [[0, I], [0, 0]] -------------------------------------------------------------


def build_3_4(m: int = 4) -> GalleryEntry:
    """``[[0, I], [0, 0]]`` on ``C^m + C^m``.

    ``T^2 = 0``, so for ``k >= 2`` every ``T^k x`` vanishes and each class
    condition holds trivially; the refutation lives at ``k = 1`` with
    ``x = 0 + e1`` (so that ``T x = e1 + 0``).
    """
    if m < 1:
        raise ParameterError("m must be at least 1")
    d = 2 * m
    T = np.zeros((d, d), dtype=complex)
    T[:m, m:] = np.eye(m)
    e1 = np.zeros(d, dtype=complex)
    e1[0] = 1.0
    f1 = np.zeros(d, dtype=complex)
    f1[m] = 1.0

    def adjoint_norm(cfg):
        val = float(np.linalg.norm(adjoint(T) @ e1))
        return abs(val - 1) <= cfg.tol, val

    def right_side(cfg):
        vals = [float(np.linalg.norm(np.linalg.matrix_power(T, 1 + n + k) @ e1)) for n in SWEEP_N for k in range(1, 4)]
        return max(vals) == 0.0, max(vals)

    def residual_at(cfg):
        vals = [definitional_residual(ClassId.qsp(n, 1), T, f1, cfg.tol) for n in SWEEP_N]
        return all(abs(v + 1) <= cfg.tol for v in vals), vals

    def class_a(cfg, k):
        v = check_quasi_star_class_a(T, k, cfg.tol)
        return _status(v) == ("NonMember" if k == 1 else "Member"), {"status": _status(v), "margin": v.margin}

    def similarity(cfg):
        A, B, C = T[:m, :m], T[:m, m:], T[m:, m:]
        try:
            build_similarity(A, B, C, 1, cfg.tol)
        except NotInvertible as exc:
            return True, f"NotInvertible: {exc}"
        return False, "no error"

    exps = [
        Expectation("|T*(e1 + 0)|", "1", "stated", adjoint_norm),
        Expectation("|T^(1+n+k)(e1 + 0)| for n <= 2, 1 <= k <= 3", "0", "stated", right_side),
        Expectation("residual of qsp(n,1) at 0 + e1", "-1", "stated", residual_at, refutes=True),
    ]
    for n in SWEEP_N:
        exps.append(_direct_expect(T, ClassId.qsp(n, 1), "NonMember"))
        for k in (2, 3):
            exps.append(_direct_expect(T, ClassId.qsp(n, k), "Member", kind="consequence", note="T^k = 0"))
    exps.append(Expectation("check_quasi_star_class_a k=1", "NonMember", "stated", lambda c: class_a(c, 1), refutes=True))
    for k in (2, 3):
        exps.append(
            Expectation(f"check_quasi_star_class_a k={k} (T^k = 0)", "Member", "consequence", lambda c, k=k: class_a(c, k))
        )
    exps.append(Expectation("build_similarity with A = 0", "NotInvertible", "consequence", similarity))
    return GalleryEntry("ex-3.4", "upper triangular block matrix outside qsp(n, 1)", {"m": m}, T, exps)


BUILDERS: dict[str, Callable[..., GalleryEntry]] = {
    "ex-2.3.1": build_2_3_1,
    "ex-2.3.2": build_2_3_2,
    "ex-2.3.3": build_2_3_3,
    "ex-2.3.4": build_2_3_4,
    "ex-2.3.5": build_2_3_5,
    "ex-3.4": build_3_4,
    "ex-4.4": build_4_4,
}


def get(entry_id: str, **params) -> GalleryEntry:
    try:
        builder = BUILDERS[entry_id]
    except KeyError:
        raise KeyError(f"unknown gallery entry {entry_id!r}; known: {', '.join(BUILDERS)}") from None
    return builder(**params)


def entries() -> list[GalleryEntry]:
    return [b() for b in BUILDERS.values()]
