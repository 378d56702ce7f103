"""Checkers for the complemented Brunn-Minkowski inequality and the
coconvex Minkowski first inequality, with equality detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CFullBody,
    _check_same_cone,
    canonicalize,
    co_sum,
    coconvex_volume,
    integrate_support,
    scale,
    surface_area_measure,
)
from .exceptions import LambdaOutOfRange

TOL_INEQ = 1e-9
TOL_EQ = 1e-8


@dataclass(frozen=True)
class InequalityVerdict:
    """Outcome of ``lhs <= rhs``.

    ``tol_ineq`` and ``tol_eq`` are absolute here (already multiplied by
    ``rhs``). ``homothetic`` is the independent check of ``A0 = alpha * A1``
    on canonical Wulff data.
    """

    lhs: float
    rhs: float
    slack: float
    holds: bool
    equality: bool
    tol_eq: float
    tol_ineq: float
    homothetic: bool | None = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _verdict(lhs, rhs, rtol_ineq, rtol_eq, homothetic=None) -> InequalityVerdict:
    slack = rhs - lhs
    tol_ineq = rtol_ineq * abs(rhs)
    tol_eq = rtol_eq * abs(rhs)
    holds = slack >= -tol_ineq
    equality = bool(holds and abs(slack) <= tol_eq)
    return InequalityVerdict(
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(slack),
        holds=bool(holds),
        equality=equality,
        tol_eq=tol_eq,
        tol_ineq=tol_ineq,
        homothetic=homothetic,
    )


def is_homothetic(a0: CFullBody, a1: CFullBody, rtol: float = 1e-8) -> bool:
    """Whether ``A0 = alpha * A1`` with ``alpha = (V(A0) / V(A1))^(1/n)``.

    Compares the canonical constraint sets directly: same directions, and
    offsets proportional with that ratio.
    """
    _check_same_cone(a0, a1)
    n = a0.dim
    alpha = (coconvex_volume(a0) / coconvex_volume(a1)) ** (1.0 / n)
    c0, c1 = canonicalize(a0), canonicalize(a1)
    if len(c0) != len(c1):
        return False
    for u, f in zip(c0.directions, c0.offsets):
        d = np.abs(c1.directions - u).max(axis=1)
        j = int(np.argmin(d))
        if d[j] > 1e-8 or abs(f - alpha * c1.offsets[j]) > rtol * f:
            return False
    return True


def bm_check(
    a0: CFullBody, a1: CFullBody, lam: float, rtol_ineq: float = TOL_INEQ, rtol_eq: float = TOL_EQ
) -> InequalityVerdict:
    """``V((1-lam) A0 (+) lam A1)^(1/n) <= (1-lam) V(A0)^(1/n) + lam V(A1)^(1/n)``.

    Note the direction: co-sums make the coconvex volume *sub*-linear in the
    n-th root.
    """
    _check_same_cone(a0, a1)
    if not 0.0 < lam < 1.0:
        raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {lam!r}")
    n = a0.dim
    mix = co_sum(scale(a0, 1.0 - lam), scale(a1, lam))
    lhs = coconvex_volume(mix) ** (1.0 / n)
    rhs = (1.0 - lam) * coconvex_volume(a0) ** (1.0 / n) + lam * coconvex_volume(a1) ** (1.0 / n)
    return _verdict(lhs, rhs, rtol_ineq, rtol_eq, is_homothetic(a0, a1))


def mixed_volume_first(a0: CFullBody, a1: CFullBody) -> float:
    """``V(A0, ..., A0, A1)``: support of ``A1`` integrated against ``S(A0)``."""
    _check_same_cone(a0, a1)
    return integrate_support(a1, surface_area_measure(a0))


def minkowski_first_check(
    a0: CFullBody, a1: CFullBody, rtol_ineq: float = TOL_INEQ, rtol_eq: float = TOL_EQ
) -> InequalityVerdict:
    """``V(A0, ..., A0, A1)^n <= V(A0)^(n-1) V(A1)``."""
    n = a0.dim
    lhs = mixed_volume_first(a0, a1) ** n
    rhs = coconvex_volume(a0) ** (n - 1) * coconvex_volume(a1)
    return _verdict(lhs, rhs, rtol_ineq, rtol_eq, is_homothetic(a0, a1))
