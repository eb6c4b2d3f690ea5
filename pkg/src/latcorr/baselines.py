"""Classical association measures and the two-step polychoric correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .divergence import _fsum, kl_divergence, margin_entropy, pearson_divergence
from .exceptions import DegenerateMarginsError, NonConvergenceError
from .numerics import bvn_rect_prob, std_normal_quantile
from .solver import rho_closed_form
from .tables import check_table

_LOG_FLOOR = 1e-300


def cramers_v2(table) -> float:
    """Cramer's ``V^2 = chi^2 / (n min(r-1, c-1)) = 2 I_P / min(r-1, c-1)``."""
    pt, _ = check_table(table)
    return 2.0 * pearson_divergence(pt).value / min(pt.r - 1, pt.c - 1)


def u_total(table) -> float:
    """Symmetric uncertainty coefficient ``2 I_KL / (H(X) + H(Y))``."""
    pt, _ = check_table(table)
    h = margin_entropy(pt.row_margins) + margin_entropy(pt.col_margins)
    if h <= 0.0:
        raise DegenerateMarginsError("both margins are degenerate")
    return 2.0 * kl_divergence(pt).value / h


def pearson_c(table) -> float:
    """Pearson's contingency coefficient ``sqrt(chi^2 / (chi^2 + n))``.

    Written in terms of ``I_P = chi^2 / (2n)`` it needs no sample size.
    """
    pt, _ = check_table(table)
    ip = pearson_divergence(pt).value
    return math.sqrt(2.0 * ip / (2.0 * ip + 1.0))


def cox_snell_r2(table) -> float:
    """``1 - exp(-2 I_KL)``: the likelihood-ratio R^2 of the saturated model."""
    pt, _ = check_table(table)
    return rho_closed_form(kl_divergence(pt).value, 0.0) ** 2


def nagelkerke_r2(table) -> float:
    """Cox-Snell R^2 rescaled by its maximum ``1 - exp(-2 min(H(X), H(Y)))``."""
    pt, _ = check_table(table)
    h = min(margin_entropy(pt.row_margins), margin_entropy(pt.col_margins))
    if h <= 0.0:
        raise DegenerateMarginsError("a margin is degenerate")
    top = -math.expm1(-2.0 * h)
    return min(cox_snell_r2(pt) / top, 1.0)


@dataclass(frozen=True)
class PolychoricConfig:
    bracket: tuple[float, float] = (-1.0 + 1e-6, 1.0 - 1e-6)
    tol: float = 1e-8
    max_iter: int = 200

    def __post_init__(self):
        lo, hi = self.bracket
        if not -1.0 < lo < hi < 1.0:
            raise ValueError(f"bracket must lie strictly inside (-1, 1), got {self.bracket!r}")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol and max_iter must be positive")


@dataclass(frozen=True)
class PolychoricResult:
    rho: float
    converged: bool
    at_bound: bool
    loglik: float
    iterations: int
    row_thresholds: np.ndarray
    col_thresholds: np.ndarray


def margin_thresholds(margin) -> np.ndarray:
    """Normal thresholds ``(-inf, z_1, ..., z_{k-1}, inf)`` from a margin."""
    cum = np.cumsum(np.asarray(margin, dtype=float))[:-1]
    cum = np.clip(cum, 1e-15, 1.0 - 1e-15)
    return np.concatenate(([-np.inf], np.atleast_1d(std_normal_quantile(cum)), [np.inf]))


def polychoric_loglik(weights: np.ndarray, a: np.ndarray, b: np.ndarray, rho: float) -> float:
    """``sum w_ij log pi_ij(rho)``; cells with zero weight drop out."""
    r, c = weights.shape
    xl = np.repeat(a[:-1], c)
    xh = np.repeat(a[1:], c)
    yl = np.tile(b[:-1], r)
    yh = np.tile(b[1:], r)
    w = weights.ravel()
    keep = w > 0
    pi = bvn_rect_prob(xl[keep], xh[keep], yl[keep], yh[keep], rho, validate=False)
    return _fsum(w[keep] * np.log(np.maximum(pi, _LOG_FLOOR)))


def fit_polychoric_two_step(table, config: PolychoricConfig = PolychoricConfig()) -> PolychoricResult:
    """Two-step polychoric correlation.

    Thresholds are fixed at the normal quantiles of the cumulative margins;
    the multinomial log-likelihood is then maximized over ``rho`` alone with
    bounded Brent search (golden section plus parabolic steps).  Works on
    relative frequencies, which leaves the maximizer unchanged.
    """
    pt, _ = check_table(table)
    p = np.asarray(pt.p)
    a = margin_thresholds(pt.row_margins)
    b = margin_thresholds(pt.col_margins)
    lo, hi = config.bracket
    res = minimize_scalar(
        lambda rho: -polychoric_loglik(p, a, b, rho),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": config.tol, "maxiter": config.max_iter},
    )
    rho = float(res.x)
    at_bound = min(rho - lo, hi - rho) <= 10.0 * config.tol
    return PolychoricResult(rho, bool(res.success), at_bound, -float(res.fun), int(res.nfev), a, b)


def polychoric_two_step(table, config: PolychoricConfig = PolychoricConfig()) -> float:
    """Point estimate of :func:`fit_polychoric_two_step`; raises if the search fails."""
    fit = fit_polychoric_two_step(table, config)
    if not fit.converged:
        raise NonConvergenceError(f"polychoric search stopped after {fit.iterations} evaluations")
    return fit.rho
