"""Unilateral weighted right shifts ``T e_m = w_m e_(m+1)`` with eventually periodic weights.

For these operators all the forms ``T*^k T^k``, ``T*^k T T* T^k`` and
``T*^(1+n+k) T^(1+n+k)`` are diagonal, so class membership reduces to one
scalar inequality per index and can be decided exactly in rational
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .classes import ClassId, Family
from .errors import InputFormatError, UnsupportedClass
from .membership import Engine, MembershipVerdict, Status


def _to_fraction(value, path=None, field=None) -> Fraction:
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, bool):
        raise InputFormatError("weight must be a number or rational string", path, field)
    elif isinstance(value, (int, float, str)):
        try:
            q = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputFormatError(f"cannot parse weight {value!r}", path, field) from exc
    else:
        raise InputFormatError("weight must be a number or rational string", path, field)
    if q <= 0:
        raise InputFormatError(f"weight {value!r} is not positive", path, field)
    return q


@dataclass(frozen=True)
class WeightSequence:
    """Weights ``w_1 .. w_L`` followed by ``tail`` repeated forever."""

    prefix: tuple
    tail: tuple

    def __post_init__(self):
        prefix = tuple(_to_fraction(w, field=f"prefix[{i}]") for i, w in enumerate(self.prefix))
        tail = tuple(_to_fraction(w, field=f"tail[{i}]") for i, w in enumerate(self.tail))
        if not tail:
            raise InputFormatError("tail must contain at least one weight", field="tail")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def constant(cls, c=1) -> WeightSequence:
        return cls((), (c,))

    @property
    def prefix_length(self) -> int:
        return len(self.prefix)

    @property
    def period(self) -> int:
        return len(self.tail)

    def weight(self, m: int) -> Fraction:
        """``w_m`` for ``m >= 1``."""
        if m < 1:
            raise IndexError("weights are indexed from 1")
        L = len(self.prefix)
        if m <= L:
            return self.prefix[m - 1]
        return self.tail[(m - L - 1) % len(self.tail)]

    def product(self, start: int, stop: int) -> Fraction:
        """``w_start * ... * w_stop`` (empty product is 1)."""
        out = Fraction(1)
        for j in range(start, stop + 1):
            out *= self.weight(j)
        return out

    def to_json(self) -> dict:
        return {"prefix": [str(w) for w in self.prefix], "tail": [str(w) for w in self.tail]}

    @classmethod
    def from_json(cls, obj, path=None) -> WeightSequence:
        if not isinstance(obj, dict):
            raise InputFormatError("weight sequence must be a JSON object", path)
        for key in ("prefix", "tail"):
            if key not in obj:
                raise InputFormatError("missing field", path, key)
            if not isinstance(obj[key], list):
                raise InputFormatError("must be a list", path, key)
        prefix = [_to_fraction(w, path, f"prefix[{i}]") for i, w in enumerate(obj["prefix"])]
        tail = [_to_fraction(w, path, f"tail[{i}]") for i, w in enumerate(obj["tail"])]
        if not tail:
            raise InputFormatError("tail must contain at least one weight", path, "tail")
        return cls(tuple(prefix), tuple(tail))


class ShiftCriterion(NamedTuple):
    holds: bool
    first_violation: int | None
    lhs: Fraction | None
    rhs: Fraction | None
    checked: range


def _index_range(ws, start, width):
    # inequality at index m involves w_m .. w_(m+width); past the prefix it
    # depends on m only through m mod P, so one full period suffices
    stop = max(ws.prefix_length + ws.period + width, start + ws.period - 1)
    return range(start, stop + 1)


def shift_criterion(ws: WeightSequence, n: int, k: int) -> ShiftCriterion:
    """Exact test of ``w_m^(n+1) <= w_(m+1) ... w_(m+n+1)`` for every ``m >= max(k, 1)``.

    This characterizes (n, k)-quasi-*-paranormality of the shift.  The
    inequality at ``m = 0`` would involve the undefined ``w_0``; there the
    vector ``T* e_1 = 0`` makes the condition empty.
    """
    checked = _index_range(ws, max(k, 1), n + 1)
    for m in checked:
        lhs = ws.weight(m) ** (n + 1)
        rhs = ws.product(m + 1, m + n + 1)
        if lhs > rhs:
            return ShiftCriterion(False, m, lhs, rhs, checked)
    return ShiftCriterion(True, None, None, None, checked)


def quasiparanormal_shift_criterion(ws: WeightSequence, n: int, k: int) -> ShiftCriterion:
    """Exact test of ``w_j^n <= w_(j+1) ... w_(j+n)`` for every ``j >= k + 1``.

    This characterizes (n, k)-quasiparanormality of the shift.
    """
    checked = _index_range(ws, k + 1, n)
    for j in checked:
        lhs = ws.weight(j) ** n
        rhs = ws.product(j + 1, j + n)
        if lhs > rhs:
            return ShiftCriterion(False, j, lhs, rhs, checked)
    return ShiftCriterion(True, None, None, None, checked)


def shift_verdict(ws: WeightSequence, cls: ClassId) -> MembershipVerdict:
    """Exact membership verdict for the power families."""
    fam = cls.family
    if fam in (Family.QUASI_STAR_PARANORMAL, Family.QUASI_HYPONORMAL):
        res = shift_criterion(ws, cls.exponent, cls.k)
    elif fam is Family.QUASI_PARANORMAL:
        res = quasiparanormal_shift_criterion(ws, cls.n, cls.k)
    else:
        raise UnsupportedClass(f"no exact shift criterion for {cls}")
    details = {"checked": [res.checked.start, res.checked.stop - 1], "weights": ws.to_json()}
    if res.holds:
        return MembershipVerdict(cls, Status.MEMBER, 0.0, Engine.EXACT_SHIFT, details=details)
    details.update(first_violation=res.first_violation, lhs=str(res.lhs), rhs=str(res.rhs))
    return MembershipVerdict(cls, Status.NON_MEMBER, float(res.rhs - res.lhs), Engine.EXACT_SHIFT, details=details)


def shift_norm(ws: WeightSequence) -> Fraction:
    return max(ws.prefix + ws.tail)


def _rational_root(q: Fraction, p: int) -> Fraction | None:
    def iroot(x):
        r = round(x ** (1.0 / p)) if x < 2**1000 else int(math.exp(math.log(x) / p))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**p == x:
                return c
        return None

    num, den = iroot(q.numerator), iroot(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def shift_spectral_radius(ws: WeightSequence):
    """Geometric mean of one tail period.

    Returned as a ``Fraction`` when that mean is rational, else as a float.
    """
    prod = ws.product(ws.prefix_length + 1, ws.prefix_length + ws.period)
    root = _rational_root(prod, ws.period)
    if root is not None:
        return root
    return math.exp(sum(math.log(w) for w in ws.tail) / ws.period)


def shift_is_normaloid(ws: WeightSequence) -> bool:
    """Exact ``|T| = r(T)``, compared as ``|T|^P = w_(L+1) ... w_(L+P)``."""
    prod = ws.product(ws.prefix_length + 1, ws.prefix_length + ws.period)
    return shift_norm(ws) ** ws.period == prod


def truncate(ws: WeightSequence, N: int) -> np.ndarray:
    """The N-by-N finite section: ``T e_m = w_m e_(m+1)`` for ``m < N`` and ``T e_N = 0``."""
    if N < 2:
        raise ValueError("truncation dimension must be at least 2")
    T = np.zeros((N, N), dtype=complex)
    for m in range(1, N):
        T[m, m - 1] = float(ws.weight(m))
    return T


def boundary_width(cls: ClassId) -> int:
    """How many trailing basis vectors of a truncation see the cut ``T e_N = 0``."""
    if cls.family is Family.QUASI_STAR_CLASS_A:
        return cls.k + 2
    if cls.family is Family.NORMALOID:
        raise UnsupportedClass("normaloid has no per-vector boundary")
    return cls.exponent + cls.k + 1


def interior_support(N: int, width: int) -> np.ndarray:
    """Columns ``e_1 .. e_(N - width)``: where a truncation agrees with the infinite shift."""
    if width >= N:
        raise ValueError(f"truncation of size {N} has no interior for boundary width {width}")
    return np.eye(N, dtype=complex)[:, : N - width]
