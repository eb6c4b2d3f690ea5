"""Power divergence of a table from independence of its margins.

For ``-1 <= lam <= 1``::

    D_lam = 1 / (lam (lam + 1)) * sum_ij p_ij [(p_ij / (p_i. p_.j))**lam - 1]

with the KL limit at ``lam = 0`` and the reverse-KL limit at ``lam = -1``.
Natural logarithms throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidLambdaError, ZeroCellError
from .tables import ProbabilityTable

LIMIT_TOL = 1e-9
INDEPENDENCE_TOL = 1e-14

FREEMAN_TUKEY = -0.5
KULLBACK_LEIBLER = 0.0
CRESSIE_READ = 2.0 / 3.0
PEARSON = 1.0


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not math.isfinite(lam) or not -1.0 <= lam <= 1.0:
        raise InvalidLambdaError(f"lambda must lie in [-1, 1], got {lam!r}")
    return lam


def is_kl(lam: float) -> bool:
    return abs(lam) < LIMIT_TOL


def is_reverse_kl(lam: float) -> bool:
    return lam <= -1.0 + LIMIT_TOL


def requires_positive_cells(lam: float) -> bool:
    """Negative lambdas need positive cells for the gradient; -1 also for the value."""
    return lam < 0.0


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    lam: float
    zero_cells: int

    def __float__(self) -> float:
        return self.value


def is_independent(p: np.ndarray, q: np.ndarray | None = None) -> bool:
    """True when every cell matches the product of its margins within 1e-14."""
    if q is None:
        q = np.outer(p.sum(axis=1), p.sum(axis=0))
    return bool(np.max(np.abs(p - q)) <= INDEPENDENCE_TOL)


def _fsum(a: np.ndarray) -> float:
    # exactly rounded, independent of summation order
    return math.fsum(a.tolist())


def power_divergence_array(p: np.ndarray, lam: float) -> float:
    """Core of :func:`power_divergence` on a raw grid with positive margins.

    The zero-cell convention ``0 * f(0 / q) = 0`` applies for ``lam > -1``.
    """
    a = p.sum(axis=1)
    b = p.sum(axis=0)
    q = np.outer(a, b)
    if is_independent(p, q):
        return 0.0
    pos = p > 0
    pp = p[pos]
    qq = q[pos]
    logx = np.log(pp) - np.log(qq)

    if is_kl(lam):
        return max(_fsum(pp * logx), 0.0)
    if is_reverse_kl(lam):
        if not pos.all():
            raise ZeroCellError("reverse KL (lambda = -1) is infinite with zero cells")
        return max(-_fsum(qq * logx), 0.0)
    if lam < -0.5:
        # p * x**lam == q * x**(lam + 1); expanding around lam = -1 keeps the
        # small factor (lam + 1) explicit instead of cancelling it.
        eps = lam + 1.0
        s = _fsum(qq * np.expm1(eps * logx)) - _fsum(q[~pos])
    else:
        s = _fsum(pp * np.expm1(lam * logx))
    return max(s / (lam * (lam + 1.0)), 0.0)


def power_divergence(pt: ProbabilityTable, lam: float) -> DivergenceValue:
    """Power divergence ``D_lam`` between ``pt`` and the product of its margins.

    Raises
    ------
    InvalidLambdaError
        If ``lam`` is outside ``[-1, 1]``.
    ZeroCellError
        At ``lam = -1`` when a cell is zero.
    """
    lam = check_lambda(lam)
    p = np.asarray(pt.p)
    value = power_divergence_array(p, lam)
    return DivergenceValue(value, lam, int(np.count_nonzero(p == 0)))


def kl_divergence(pt: ProbabilityTable) -> DivergenceValue:
    """Mutual information ``sum p log(p / (p_i. p_.j))``."""
    p = np.asarray(pt.p)
    if is_independent(p, pt.independence):
        return DivergenceValue(0.0, 0.0, int(np.count_nonzero(p == 0)))
    pos = p > 0
    q = pt.independence[pos]
    value = max(_fsum(p[pos] * (np.log(p[pos]) - np.log(q))), 0.0)
    return DivergenceValue(value, 0.0, int(np.count_nonzero(~pos)))


def pearson_divergence(pt: ProbabilityTable) -> DivergenceValue:
    """Half the chi-squared distance ``sum (p - q)**2 / q / 2``."""
    p = np.asarray(pt.p)
    q = pt.independence
    if is_independent(p, q):
        return DivergenceValue(0.0, 1.0, int(np.count_nonzero(p == 0)))
    value = 0.5 * _fsum(((p - q) ** 2 / q).ravel())
    return DivergenceValue(value, 1.0, int(np.count_nonzero(p == 0)))


def margin_entropy(margin) -> float:
    """Shannon entropy in nats with ``0 log 0 = 0``."""
    m = np.asarray(margin, dtype=float)
    m = m[m > 0]
    return max(-_fsum(m * np.log(m)), 0.0)
