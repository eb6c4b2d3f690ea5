"""Inversion of the divergence/correlation relation.

Under bivariate normality the power divergence of a table is approximately::

    I_lam(t) = ((1 - t)**(-lam/2) * (1 - lam**2 t)**(-1/2) - 1) / (lam (lam + 1))

with ``t = rho**2``.  ``I_lam`` is strictly increasing on ``[0, 1)`` with
``I_lam(0) = 0``, so ``I_lam(t) = D`` has exactly one root; it is found by
Newton's method started from the second-order series inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .divergence import check_lambda, is_kl, is_reverse_kl, power_divergence
from .exceptions import (
    NonFiniteInputError,
    OutOfDomainError,
    TOutOfRangeError,
    UnsupportedLambdaError,
)
from .tables import check_table


@dataclass(frozen=True)
class SolveConfig:
    """Newton settings.

    ``delta`` is the step tolerance, ``epsilon`` keeps iterates inside
    ``[0, 1 - epsilon]``.
    """

    delta: float = 1e-8
    epsilon: float = 1e-12
    max_iter: int = 100

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not 0.0 < self.epsilon < 1e-3:
            raise ValueError(f"epsilon must lie in (0, 1e-3), got {self.epsilon!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")


DEFAULT_CONFIG = SolveConfig()
RESIDUAL_STOP = 1e-12
RESIDUAL_ACCEPT = 1e-10


@dataclass(frozen=True)
class SolveResult:
    t: float
    rho: float
    iterations: int
    converged: bool
    residual: float
    divergence: float
    lam: float


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise TOutOfRangeError(f"t must lie in [0, 1), got {t!r}")
    return t


def _log_s(t: float, lam: float) -> float:
    """``log S_lam(t)`` with the factors of ``lam`` and ``lam + 1`` kept explicit."""
    log1mt = math.log1p(-t)
    if lam < -0.5:
        eps = lam + 1.0
        return -0.5 * (eps * log1mt + math.log1p(eps * (2.0 - eps) * t / (1.0 - t)))
    return -0.5 * (lam * log1mt + math.log1p(-lam * lam * t))


def i_of_t(t: float, lam: float) -> float:
    """Divergence implied by squared latent correlation ``t``."""
    t = _check_t(t)
    lam = check_lambda(lam)
    if is_kl(lam):
        return -0.5 * math.log1p(-t)
    if is_reverse_kl(lam):
        return 0.5 * math.log1p(-t) + t / (1.0 - t)
    return math.expm1(_log_s(t, lam)) / (lam * (lam + 1.0))


def i_prime(t: float, lam: float) -> float:
    """Derivative of :func:`i_of_t` in ``t``.

    ``S (1/(1-t) + lam/(1-lam^2 t)) / (2 (lam+1))`` is rewritten as
    ``S (1 - lam t) / (2 (1-t)(1-lam^2 t))``, which has no pole at ``lam = -1``.
    """
    t = _check_t(t)
    lam = check_lambda(lam)
    if is_kl(lam):
        return 0.5 / (1.0 - t)
    if is_reverse_kl(lam):
        return (1.0 + t) / (2.0 * (1.0 - t) ** 2)
    s = math.exp(_log_s(t, lam))
    return s * (1.0 - lam * t) / (2.0 * (1.0 - t) * (1.0 - lam * lam * t))


def initial_t(d: float, lam: float, epsilon: float = DEFAULT_CONFIG.epsilon) -> float:
    """Newton start ``2 D - (3 lam^2 - lam + 2) D^2`` clamped to ``[0, 1 - epsilon]``."""
    t0 = 2.0 * d - (3.0 * lam * lam - lam + 2.0) * d * d
    return min(max(t0, 0.0), 1.0 - epsilon)


def _check_d(d: float) -> float:
    d = float(d)
    if not math.isfinite(d):
        raise NonFiniteInputError(f"divergence must be finite, got {d!r}")
    if d < 0.0:
        raise OutOfDomainError(f"divergence must be nonnegative, got {d!r}")
    return d


def solve_t(d: float, lam: float, config: SolveConfig = DEFAULT_CONFIG) -> SolveResult:
    """Solve ``I_lam(t) = d`` for ``t`` in ``[0, 1)``.

    Iterates stop once a step is shorter than ``config.delta`` (or the residual
    drops below ``1e-12 (1 + d)``) and the residual is within ``1e-10 (1 + d)``.
    Hitting ``max_iter`` returns the last iterate with ``converged=False``.
    """
    d = _check_d(d)
    lam = check_lambda(lam)
    if d == 0.0:
        return SolveResult(0.0, 0.0, 0, True, 0.0, 0.0, lam)

    upper = 1.0 - config.epsilon
    accept = RESIDUAL_ACCEPT * (1.0 + d)
    t = initial_t(d, lam, config.epsilon)
    f = i_of_t(t, lam) - d
    converged = False
    k = 0
    while k < config.max_iter:
        if abs(f) < RESIDUAL_STOP * (1.0 + d):
            converged = True
            break
        k += 1
        t_new = min(max(t - f / i_prime(t, lam), 0.0), upper)
        step = abs(t_new - t)
        t = t_new
        f = i_of_t(t, lam) - d
        if step < config.delta and abs(f) <= accept:
            converged = True
            break
    return SolveResult(t, math.sqrt(t), k, converged, abs(f), d, lam)


def rho_closed_form(d: float, lam: float) -> float:
    """Algebraic inverse at ``lam = 0`` (KL) and ``lam = 1`` (Pearson)."""
    d = _check_d(d)
    lam = float(lam)
    if is_kl(lam):
        t = -math.expm1(-2.0 * d)
    elif lam == 1.0:
        t = 2.0 * d / (2.0 * d + 1.0)
    else:
        raise UnsupportedLambdaError(f"no closed form for lambda={lam!r}")
    return math.sqrt(min(t, 1.0 - DEFAULT_CONFIG.epsilon))


def _closed_form_result(d: float, lam: float) -> SolveResult:
    rho = rho_closed_form(d, lam)
    t = rho * rho
    return SolveResult(t, rho, 0, True, abs(i_of_t(t, lam) - d), d, lam)


def solve_divergence(d: float, lam: float, config: SolveConfig = DEFAULT_CONFIG,
                     debug: bool = False) -> SolveResult:
    """Closed form where one exists, Newton otherwise."""
    if is_kl(lam) or lam == 1.0:
        res = _closed_form_result(_check_d(d), lam)
        if debug:
            newton = solve_t(d, lam, config)
            assert abs(newton.t - res.t) <= 1e-9, (newton, res)
        return res
    return solve_t(d, lam, config)


def rho_lambda(table, lam: float, config: SolveConfig = DEFAULT_CONFIG,
               debug: bool = False) -> SolveResult:
    """Divergence-based latent correlation of a table.

    Parameters
    ----------
    table : ContingencyTable, ProbabilityTable or array-like
        Counts or cell probabilities.
    lam : float
        Power-divergence index in ``[-1, 1]``; ``-1`` needs positive cells.
    config : SolveConfig
        Newton settings.
    debug : bool
        Cross-check the closed forms against Newton at ``lam`` in ``{0, 1}``.
    """
    pt, _ = check_table(table)
    lam = check_lambda(lam)
    d = power_divergence(pt, lam).value
    return solve_divergence(d, lam, config, debug)
