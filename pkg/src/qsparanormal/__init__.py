"""Computational checks for (n, k)-quasi-*-paranormal operators and their relatives."""

from .classes import ClassId, Family, definitional_residual, form_triplet, pencil
from .linalg import DEFAULT_TOL
from .membership import (
    Engine,
    MembershipVerdict,
    SearchConfig,
    Status,
    check,
    check_direct,
    check_normaloid,
    check_pencil,
    check_quasi_star_class_a,
    classify,
)

__all__ = [
    "ClassId",
    "DEFAULT_TOL",
    "Engine",
    "Family",
    "MembershipVerdict",
    "SearchConfig",
    "Status",
    "check",
    "check_direct",
    "check_normaloid",
    "check_pencil",
    "check_quasi_star_class_a",
    "classify",
    "definitional_residual",
    "form_triplet",
    "pencil",
]
