"""Registry of operator classes and the quadratic forms that define them.

Every per-vector class handled here has the shape

    |T^(1+n) y|^(1/(1+n)) |y|^(n/(1+n)) >= |X y|   for all y = T^k x

with ``X = T*`` for the quasi-*-paranormal family and ``X = T`` for the
quasiparanormal family.  Squaring and raising to the power ``n + 1`` turns it
into the polynomial inequality ``a * c**n >= b**(n+1)`` in the three quadratic
forms ``a = |T^(1+n+k) x|^2``, ``b = |X T^k x|^2`` and ``c = |T^k x|^2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NonPositiveMu, UnsupportedClass
from .linalg import DEFAULT_TOL, adjoint, as_matrix, hermitian_part, operator_norm, psd_power


class Family(str, Enum):
    QUASI_STAR_PARANORMAL = "qsp"
    QUASI_PARANORMAL = "qp"
    QUASI_STAR_CLASS_A = "qsa"
    QUASI_HYPONORMAL = "qh"
    NORMALOID = "normaloid"


_NEEDS_N = {Family.QUASI_STAR_PARANORMAL, Family.QUASI_PARANORMAL}
_NEEDS_K = _NEEDS_N | {Family.QUASI_STAR_CLASS_A, Family.QUASI_HYPONORMAL}


@dataclass(frozen=True)
class ClassId:
    """One operator class, e.g. ``ClassId.qsp(1, 2)``.

    ``n`` and ``k`` are present exactly when the family uses them.
    """

    family: Family
    n: int | None = None
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        for name, needed in (("n", self.family in _NEEDS_N), ("k", self.family in _NEEDS_K)):
            val = getattr(self, name)
            if needed:
                if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < 0:
                    raise ValueError(f"{self.family.value} requires a nonnegative integer {name}")
                object.__setattr__(self, name, int(val))
            elif val is not None:
                raise ValueError(f"{self.family.value} takes no parameter {name}")

    @classmethod
    def qsp(cls, n: int, k: int) -> ClassId:
        return cls(Family.QUASI_STAR_PARANORMAL, n, k)

    @classmethod
    def qp(cls, n: int, k: int) -> ClassId:
        return cls(Family.QUASI_PARANORMAL, n, k)

    @classmethod
    def qsa(cls, k: int) -> ClassId:
        return cls(Family.QUASI_STAR_CLASS_A, None, k)

    @classmethod
    def qh(cls, k: int) -> ClassId:
        return cls(Family.QUASI_HYPONORMAL, None, k)

    @classmethod
    def normaloid(cls) -> ClassId:
        return cls(Family.NORMALOID)

    @property
    def per_vector(self) -> bool:
        return self.family is not Family.NORMALOID

    @property
    def exponent(self) -> int:
        """The ``n`` of the polynomial form (0 for k-quasihyponormal)."""
        if self.family is Family.QUASI_HYPONORMAL:
            return 0
        if self.family in _NEEDS_N:
            return self.n
        raise UnsupportedClass(f"{self} has no power form")

    def canonical(self) -> ClassId:
        """Rewrite ``qh(k)`` as the identical class ``qsp(0, k)``."""
        if self.family is Family.QUASI_HYPONORMAL:
            return ClassId.qsp(0, self.k)
        return self

    def __str__(self):
        f = self.family
        if f in _NEEDS_N:
            return f"{f.value}({self.n},{self.k})"
        if f in _NEEDS_K:
            return f"{f.value}({self.k})"
        return f.value

    @classmethod
    def parse(cls, text: str) -> ClassId:
        """Inverse of ``str``: ``"qsp(1,2)"``, ``"qsa(0)"``, ``"normaloid"``."""
        s = text.replace(" ", "")
        if s == "normaloid":
            return cls.normaloid()
        m = re.fullmatch(r"(qsp|qp)\((\d+),(\d+)\)", s)
        if m:
            return cls(Family(m.group(1)), int(m.group(2)), int(m.group(3)))
        m = re.fullmatch(r"(qsa|qh)\((\d+)\)", s)
        if m:
            return cls(Family(m.group(1)), None, int(m.group(2)))
        raise ValueError(f"cannot parse class id {text!r}")

    @property
    def name(self) -> str:
        """Conventional name, using the classical special cases."""
        f, n, k = self.family, self.n, self.k
        if f is Family.QUASI_HYPONORMAL:
            return ClassId.qsp(0, k).name
        if f is Family.QUASI_STAR_PARANORMAL:
            if n == 0:
                return {0: "hyponormal", 1: "quasihyponormal"}.get(k, f"{k}-quasihyponormal")
            if k == 0:
                return "*-paranormal" if n == 1 else f"{n}-*-paranormal"
            if n == 1:
                return "quasi-*-paranormal" if k == 1 else f"{k}-quasi-*-paranormal"
            return f"({n},{k})-quasi-*-paranormal"
        if f is Family.QUASI_PARANORMAL:
            if k == 0:
                return "paranormal" if n == 1 else f"{n}-paranormal"
            return f"({n},{k})-quasiparanormal"
        if f is Family.QUASI_STAR_CLASS_A:
            return {0: "*-class A", 1: "quasi-*-class A"}.get(k, f"{k}-quasi-*-class A")
        return "normaloid"


@dataclass(frozen=True)
class FormTriplet:
    """Hermitian coefficients of ``a = <Ax,x>``, ``b = <Bx,x>``, ``c = <Cx,x>``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


def form_factors(T, n: int, k: int, family: Family = Family.QUASI_STAR_PARANORMAL):
    """Matrices ``G_A, G_B, G_C`` with ``a = |G_A x|^2`` and so on."""
    T = as_matrix(T, square=True)
    family = Family(family)
    if family is Family.QUASI_HYPONORMAL:
        family, n = Family.QUASI_STAR_PARANORMAL, 0
    if family not in _NEEDS_N:
        raise UnsupportedClass(f"{family.value} has no power form")
    Tk = np.linalg.matrix_power(T, k)
    GA = np.linalg.matrix_power(T, 1 + n) @ Tk
    GB = (adjoint(T) if family is Family.QUASI_STAR_PARANORMAL else T) @ Tk
    return GA, GB, Tk


def _gram(G):
    return adjoint(G) @ G


def form_triplet(T, n: int, k: int, family: Family = Family.QUASI_STAR_PARANORMAL) -> FormTriplet:
    """``A = T*^k T*^(1+n) T^(1+n) T^k``, ``B = T*^k T T* T^k``, ``C = T*^k T^k``.

    For the quasiparanormal family ``B = T*^(k+1) T^(k+1)``.
    """
    GA, GB, GC = form_factors(T, n, k, family)
    return FormTriplet(_gram(GA), _gram(GB), _gram(GC))


def pencil(T, n: int, k: int, mu: float, family: Family = Family.QUASI_STAR_PARANORMAL) -> np.ndarray:
    """``Q(mu) = A - (1+n) mu^n B + n mu^(1+n) C``.

    The class holds iff ``Q(mu) >= 0`` for every ``mu > 0``.
    """
    if not mu > 0:
        raise NonPositiveMu(f"mu must be positive, got {mu}")
    f = form_triplet(T, n, k, family)
    return pencil_from_triplet(f, n, mu)


def pencil_from_triplet(f: FormTriplet, n: int, mu: float) -> np.ndarray:
    if not mu > 0:
        raise NonPositiveMu(f"mu must be positive, got {mu}")
    Q = f.A - (1 + n) * mu**n * f.B + n * mu ** (1 + n) * f.C
    return hermitian_part(Q)


def star_class_a_terms(T, k: int, tol: float = DEFAULT_TOL):
    """``(T*^k |T^2| T^k, T*^k |T*|^2 T^k)``, the two sides of k-quasi-*-class A."""
    T = as_matrix(T, square=True)
    Tk = np.linalg.matrix_power(T, k)
    T2 = T @ T
    abs_T2 = psd_power(adjoint(T2) @ T2, 0.5, tol)
    lhs = hermitian_part(adjoint(Tk) @ abs_T2 @ Tk)
    rhs = hermitian_part(adjoint(Tk) @ T @ adjoint(T) @ Tk)
    return lhs, rhs


def power_residual(a, b, c, n: int):
    """``a c^n - b^(n+1)`` elementwise, defined as 0 where ``c = 0``."""
    a, b, c = np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)
    out = a * c**n - b ** (n + 1)
    return np.where(c > 0, out, 0.0)


def _check_unit(x, tol):
    x = np.asarray(x, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(x) - 1.0) > max(tol, 1e-12):
        raise ValueError("x must be a unit vector")
    return x


def definitional_residual(cls: ClassId, T, x, tol: float = DEFAULT_TOL) -> float:
    """Residual of the defining inequality at the unit vector ``x``.

    For the power families this is ``a c^n - b^(n+1)``; for k-quasi-*-class A
    it is ``<T*^k (|T^2| - |T*|^2) T^k x, x>``.  Nonnegative for every unit
    ``x`` iff ``T`` belongs to the class.
    """
    if not cls.per_vector:
        raise UnsupportedClass(f"{cls} is not defined by a per-vector inequality")
    T = as_matrix(T, square=True)
    x = _check_unit(x, tol)
    if cls.family is Family.QUASI_STAR_CLASS_A:
        lhs, rhs = star_class_a_terms(T, cls.k, tol)
        return float(np.real(np.vdot(x, (lhs - rhs) @ x)))
    GA, GB, GC = form_factors(T, cls.exponent, cls.k, cls.family)
    a, b, c = (float(np.linalg.norm(G @ x) ** 2) for G in (GA, GB, GC))
    return float(power_residual(a, b, c, cls.exponent))


def definition_sides(T, n: int, k: int, x, family: Family = Family.QUASI_STAR_PARANORMAL):
    """Both sides of the unsquared inequality at ``x``.

    Returns ``(left, right)`` with ``left = |T^(1+n) T^k x|^(1/(1+n)) |T^k x|^(n/(1+n))``
    and ``right = |T* T^k x|`` (``|T T^k x|`` for the quasiparanormal family).
    """
    GA, GB, GC = form_factors(T, n, k, family)
    x = np.asarray(x, dtype=complex).reshape(-1)
    left = np.linalg.norm(GA @ x) ** (1 / (1 + n)) * np.linalg.norm(GC @ x) ** (n / (1 + n))
    return float(left), float(np.linalg.norm(GB @ x))


class ResidualForm:
    """Vectorized residual and gradient over the unit sphere of a subspace.

    ``support`` (orthonormal columns ``V``) restricts the search to vectors
    ``x = V z``; values and gradients are then expressed in ``z``.
    """

    def __init__(self, cls: ClassId, T, support=None, tol: float = DEFAULT_TOL):
        if not cls.per_vector:
            raise UnsupportedClass(f"{cls} is not defined by a per-vector inequality")
        T = as_matrix(T, square=True)
        V = np.eye(T.shape[0], dtype=complex) if support is None else as_matrix(support)
        self.cls = cls
        self.support = V
        self.dim = V.shape[1]
        if cls.family is Family.QUASI_STAR_CLASS_A:
            lhs, rhs = star_class_a_terms(T, cls.k, tol)
            lhs, rhs = adjoint(V) @ lhs @ V, adjoint(V) @ rhs @ V
            self.quadratic = hermitian_part(lhs - rhs)
            self.n = None
            self.scale = operator_norm(lhs) + operator_norm(rhs)
        else:
            self.n = cls.exponent
            G = [g @ V for g in form_factors(T, self.n, cls.k, cls.family)]
            self.factors = G
            self.A, self.B, self.C = (_gram(g) for g in G)
            nA, nB, nC = (operator_norm(M) for M in (self.A, self.B, self.C))
            self.scale = nA * nC**self.n + nB ** (self.n + 1)

    def _forms(self, X):
        return [np.sum(np.abs(X @ g.T) ** 2, axis=1) for g in self.factors]

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.n is None:
            return np.real(np.sum(np.conj(X) * (X @ self.quadratic.T), axis=1))
        a, b, c = self._forms(X)
        return power_residual(a, b, c, self.n)

    def value_and_grad(self, X):
        """Values and the conjugate-Wirtinger gradient (one row per vector)."""
        X = np.atleast_2d(X)
        if self.n is None:
            HX = X @ self.quadratic.T
            return np.real(np.sum(np.conj(X) * HX, axis=1)), HX
        n = self.n
        a, b, c = self._forms(X)
        AX, BX, CX = X @ self.A.T, X @ self.B.T, X @ self.C.T
        if n == 0:
            G = AX - BX
        else:
            G = (c**n)[:, None] * AX + (n * a * c ** (n - 1))[:, None] * CX - ((n + 1) * b**n)[:, None] * BX
        return power_residual(a, b, c, n), G
