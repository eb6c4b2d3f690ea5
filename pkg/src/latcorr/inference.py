"""Delta-method inference for the divergence-based correlation.

The sampling variance of the plug-in divergence is the quadratic form of its
gradient against the multinomial covariance ``diag(p) - p p^T``; it is then
pushed through the inverse of ``I_lam`` to the ``t = rho^2``, ``rho`` and
Fisher ``z = artanh(rho)`` scales.  All variances here are per observation and
get divided by ``n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergence import (
    _fsum,
    check_lambda,
    is_independent,
    is_kl,
    is_reverse_kl,
    power_divergence,
)
from .exceptions import BoundaryEstimateError, OutOfDomainError, ZeroCellError
from .numerics import chi2_quantile, std_normal_quantile
from .solver import DEFAULT_CONFIG, SolveConfig, SolveResult, i_prime, solve_divergence, solve_t
from .tables import ProbabilityTable, check_table

T_BOUNDARY = 1e-10
RHO_UPPER_BOUNDARY = 1.0 - 1e-9
SMALL_EXPECTED = 5.0
_BELOW_ONE = math.nextafter(1.0, 0.0)

SIMPLE_T = "simple_t"
SIMPLE_RHO = "simple_rho"
FISHER_Z = "fisher_z"


@dataclass(frozen=True)
class AsymptoticVariances:
    """Per-observation variances; the rho and z scales are ``None`` at the boundary."""

    sigma2_d: float
    sigma2_t: float
    sigma2_rho: float | None
    sigma2_z: float | None

    @property
    def boundary(self) -> bool:
        return self.sigma2_rho is None


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    method: str
    estimate: float
    degenerate: bool = False
    warnings: tuple[str, ...] = ()

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


def grad_d_array(p: np.ndarray, lam: float) -> np.ndarray:
    """Gradient of ``D_lam`` with respect to the cells of ``p`` (same shape).

    For ``lam`` not in ``{0, -1}``::

        dD/dp_st = x_st**lam / lam
                   - sum_i (p_it / p_.t) x_it**lam / (lam + 1)
                   - sum_j (p_sj / p_s.) x_sj**lam / (lam + 1)

    with ``x = p / (p_i. p_.j)``.  At ``lam = 0`` the gradient is ``log x``,
    which differs from the limit of the above only by a constant; constants are
    annihilated by the multinomial covariance.  Zero cells give ``-inf`` at
    ``lam = 0``; they carry zero weight in :func:`sigma2_d`.
    """
    a = p.sum(axis=1, keepdims=True)
    b = p.sum(axis=0, keepdims=True)
    pos = p > 0
    if lam < 0 and not pos.all():
        raise ZeroCellError(f"gradient at lambda={lam!r} needs strictly positive cells")
    with np.errstate(divide="ignore"):
        logx = np.log(p) - np.log(a) - np.log(b)
    if is_kl(lam):
        return logx
    if is_reverse_kl(lam):
        rows = -(b * logx).sum(axis=1, keepdims=True)
        cols = -(a * logx).sum(axis=0, keepdims=True)
        return -np.exp(-logx) + rows + cols + 2.0
    xl = np.where(pos, np.exp(lam * np.where(pos, logx, 0.0)), 0.0)
    rows = (p / a * xl).sum(axis=1, keepdims=True)
    cols = (p / b * xl).sum(axis=0, keepdims=True)
    return xl / lam - (rows + cols) / (lam + 1.0)


def grad_d(pt: ProbabilityTable, lam: float) -> np.ndarray:
    """Row-major gradient vector of the power divergence."""
    lam = check_lambda(lam)
    return grad_d_array(np.asarray(pt.p), lam).ravel()


def quadratic_form(p, g) -> float:
    """``g^T (diag(p) - p p^T) g`` over the positive cells, computed centred."""
    p = np.asarray(p, dtype=float).ravel()
    g = np.asarray(g, dtype=float).ravel()
    pos = p > 0
    pp = p[pos]
    gg = g[pos]
    mean = _fsum(pp * gg)
    return max(_fsum(pp * (gg - mean) ** 2), 0.0)


def sigma2_d_array(p: np.ndarray, lam: float) -> float:
    if is_independent(p):
        return 0.0
    return quadratic_form(p, grad_d_array(p, lam))


def sigma2_d(pt: ProbabilityTable, lam: float) -> float:
    """Asymptotic variance of ``sqrt(n) (D_hat - D)``."""
    lam = check_lambda(lam)
    return sigma2_d_array(np.asarray(pt.p), lam)


def variances_from(s2d: float, t: float, lam: float, strict: bool = False) -> AsymptoticVariances:
    s2t = s2d / i_prime(t, lam) ** 2
    if t < T_BOUNDARY:
        if strict:
            raise BoundaryEstimateError(f"t={t!r} is too close to 0 for the rho and z scales")
        return AsymptoticVariances(s2d, s2t, None, None)
    s2rho = s2t / (4.0 * t)
    return AsymptoticVariances(s2d, s2t, s2rho, s2rho / (1.0 - t) ** 2)


def asymptotic_variances(table, lam: float, estimate: SolveResult | None = None,
                         strict: bool = False) -> AsymptoticVariances:
    """Delta-method variances on the divergence, ``t``, ``rho`` and ``z`` scales.

    ``sigma2_t = sigma2_d / I'(t)^2``, ``sigma2_rho = sigma2_t / (4 t)`` and
    ``sigma2_z = sigma2_rho / (1 - t)^2``.  With ``t < 1e-10`` the last two are
    undefined: they come back as ``None``, or raise ``BoundaryEstimateError``
    when ``strict``.
    """
    pt, _ = check_table(table)
    lam = check_lambda(lam)
    if estimate is None:
        estimate = solve_divergence(power_divergence(pt, lam).value, lam)
    return variances_from(sigma2_d(pt, lam), estimate.t, lam, strict)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise OutOfDomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def _check_n(n) -> int:
    if n is None:
        raise OutOfDomainError("sample size n is required for probability-table input")
    if int(n) != n or n < 1:
        raise OutOfDomainError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _small_cell_warnings(p: np.ndarray, n: int) -> tuple[str, ...]:
    expected = n * np.outer(p.sum(axis=1), p.sum(axis=0))
    low = int(np.count_nonzero(expected < SMALL_EXPECTED))
    if low:
        return (f"small_cells: {low} cell(s) with expected count below {SMALL_EXPECTED:g}",)
    return ()


def _degenerate_t_interval(est: SolveResult, var: AsymptoticVariances, n: int,
                           z: float, level: float, warn: tuple[str, ...]) -> ConfidenceInterval:
    half = z * math.sqrt(var.sigma2_t / n)
    return ConfidenceInterval(est.t - half, est.t + half, level, SIMPLE_T, est.t, True,
                              warn + ("boundary_estimate",))


def _prepare(table, lam, alpha, n, estimate):
    pt, table_n = check_table(table)
    lam = check_lambda(lam)
    alpha = _check_alpha(alpha)
    n = _check_n(n if n is not None else table_n)
    p = np.asarray(pt.p)
    if estimate is None:
        estimate = solve_divergence(power_divergence(pt, lam).value, lam)
    var = variances_from(sigma2_d_array(p, lam), estimate.t, lam)
    return p, lam, alpha, n, estimate, var


def ci_simple(table, lam: float, alpha: float = 0.05, scale: str = "rho", n: int | None = None,
              estimate: SolveResult | None = None, strict: bool = False) -> ConfidenceInterval:
    """Wald interval ``estimate -+ z_{alpha/2} sqrt(sigma^2 / n)``.

    On the ``rho`` scale the bounds are clipped to ``[0, 1)``.  At a boundary
    estimate the ``t``-scale interval is returned with ``degenerate=True``
    (or ``BoundaryEstimateError`` is raised when ``strict``).
    """
    if scale not in ("rho", "t"):
        raise ValueError(f"scale must be 'rho' or 't', got {scale!r}")
    p, lam, alpha, n, est, var = _prepare(table, lam, alpha, n, estimate)
    z = std_normal_quantile(1.0 - alpha / 2.0)
    level = 1.0 - alpha
    warn = _small_cell_warnings(p, n)
    if scale == "t":
        half = z * math.sqrt(var.sigma2_t / n)
        return ConfidenceInterval(est.t - half, est.t + half, level, SIMPLE_T, est.t,
                                  var.boundary, warn)
    if var.boundary:
        if strict:
            raise BoundaryEstimateError("rho-scale interval undefined at rho = 0")
        return _degenerate_t_interval(est, var, n, z, level, warn)
    half = z * math.sqrt(var.sigma2_rho / n)
    lo = min(max(est.rho - half, 0.0), _BELOW_ONE)
    hi = min(max(est.rho + half, 0.0), _BELOW_ONE)
    return ConfidenceInterval(lo, hi, level, SIMPLE_RHO, est.rho, False, warn)


def ci_fisher_z(table, lam: float, alpha: float = 0.05, n: int | None = None,
                estimate: SolveResult | None = None, strict: bool = False) -> ConfidenceInterval:
    """Interval built on ``z = artanh(rho)`` and mapped back with ``tanh``.

    ``L, U = z_hat -+ z_{alpha/2} sqrt(sigma2_z / n)``; the back-transformed
    bounds lie in ``(-1, 1)`` and are clipped to ``[0, 1)``.
    """
    p, lam, alpha, n, est, var = _prepare(table, lam, alpha, n, estimate)
    z = std_normal_quantile(1.0 - alpha / 2.0)
    level = 1.0 - alpha
    warn = _small_cell_warnings(p, n)
    if var.boundary or est.rho >= RHO_UPPER_BOUNDARY:
        if strict:
            raise BoundaryEstimateError(f"Fisher z interval undefined at rho={est.rho!r}")
        return _degenerate_t_interval(est, var, n, z, level, warn)
    zhat = math.atanh(est.rho)
    half = z * math.sqrt(var.sigma2_z / n)
    lo = math.tanh(zhat - half)
    hi = math.tanh(zhat + half)
    return ConfidenceInterval(min(max(lo, 0.0), _BELOW_ONE), min(max(hi, 0.0), _BELOW_ONE),
                              level, FISHER_Z, est.rho, False, warn)


def fisher_z_bounds(rho: float, sigma2_z: float, n: int, alpha: float) -> tuple[float, float]:
    """Unclipped back-transformed Fisher bounds, always inside ``(-1, 1)``."""
    z = std_normal_quantile(1.0 - alpha / 2.0)
    half = z * math.sqrt(sigma2_z / n)
    zhat = math.atanh(rho)
    return math.tanh(zhat - half), math.tanh(zhat + half)


def detectable_threshold(alpha: float, n: int, df: int, lam: float,
                         config: SolveConfig = DEFAULT_CONFIG) -> float:
    """Smallest ``rho_(lam)`` that reaches the independence test's critical value.

    The divergence at the chi-squared critical value, ``chi2_alpha(df) / (2 n)``,
    is inverted by a full Newton solve.
    """
    n = _check_n(n)
    lam = check_lambda(lam)
    d = chi2_quantile(_check_alpha(alpha), df) / (2.0 * n)
    return solve_t(d, lam, config).rho


@dataclass(frozen=True)
class InferenceReport:
    lam: float
    n: int
    estimate: SolveResult
    variances: AsymptoticVariances
    ci_simple: ConfidenceInterval
    ci_fisher: ConfidenceInterval
    threshold: float
    df: int
    warnings: tuple[str, ...] = ()


def infer(table, lam: float, alpha: float = 0.05, n: int | None = None,
          config: SolveConfig = DEFAULT_CONFIG) -> InferenceReport:
    """Point estimate, variances, both intervals and the detectable threshold."""
    pt, table_n = check_table(table)
    lam = check_lambda(lam)
    n = _check_n(n if n is not None else table_n)
    est = solve_divergence(power_divergence(pt, lam).value, lam, config)
    var = variances_from(sigma2_d(pt, lam), est.t, lam)
    simple = ci_simple(pt, lam, alpha, "rho", n, est)
    fisher = ci_fisher_z(pt, lam, alpha, n, est)
    df = (pt.r - 1) * (pt.c - 1)
    thr = detectable_threshold(alpha, n, df, lam, config)
    warn = list(simple.warnings)
    if var.boundary:
        warn.append("boundary_estimate")
    if not est.converged:
        warn.append("newton_not_converged")
    return InferenceReport(lam, n, est, var, simple, fisher, thr, df, tuple(warn))
