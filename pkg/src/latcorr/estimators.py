"""scikit-learn style wrappers.

``fit`` accepts either a contingency table (``X`` as a 2-D grid, ``y=None``)
or two label vectors (``X`` 1-D, ``y`` 1-D) that are cross-tabulated first.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .baselines import PolychoricConfig, fit_polychoric_two_step
from .divergence import check_lambda, power_divergence
from .inference import ci_fisher_z, ci_simple, detectable_threshold, sigma2_d, variances_from
from .solver import SolveConfig, solve_divergence
from .tables import check_table, crosstab


def _table_from(X, y, kind):
    if y is None:
        return check_table(X, kind)
    x = np.asarray(X)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x.ravel()
    ct, _, _ = crosstab(x, np.asarray(y))
    return check_table(ct)


class LatentCorrelation(BaseEstimator):
    """Divergence-based latent correlation of a two-way table.

    Parameters
    ----------
    lam : float, default=0.0
        Power-divergence index in ``[-1, 1]``; ``0`` is KL, ``1`` Pearson.
    alpha : float, default=0.05
        Interval level is ``1 - alpha``.
    n : int or None
        Sample size; needed only when fitting on probabilities.
    table_kind : {"auto", "counts", "probabilities"}
    delta, epsilon, max_iter :
        Newton settings.

    Attributes
    ----------
    rho_, t_, divergence_ : float
    variances_ : AsymptoticVariances
    ci_simple_, ci_fisher_ : ConfidenceInterval or None
    threshold_ : float or None
    solve_result_ : SolveResult
    n_ : int or None
    shape_ : tuple
    """

    def __init__(self, lam=0.0, alpha=0.05, n=None, table_kind="auto",
                 delta=1e-8, epsilon=1e-12, max_iter=100):
        self.lam = lam
        self.alpha = alpha
        self.n = n
        self.table_kind = table_kind
        self.delta = delta
        self.epsilon = epsilon
        self.max_iter = max_iter

    def fit(self, X, y=None):
        lam = check_lambda(self.lam)
        cfg = SolveConfig(self.delta, self.epsilon, self.max_iter)
        pt, n = _table_from(X, y, self.table_kind)
        if self.n is not None:
            n = self.n
        est = solve_divergence(power_divergence(pt, lam).value, lam, cfg)
        self.solve_result_ = est
        self.rho_ = est.rho
        self.t_ = est.t
        self.divergence_ = est.divergence
        self.variances_ = variances_from(sigma2_d(pt, lam), est.t, lam)
        self.shape_ = pt.shape
        self.n_ = n
        self.ci_simple_ = self.ci_fisher_ = self.threshold_ = None
        if n is not None:
            self.ci_simple_ = ci_simple(pt, lam, self.alpha, "rho", n, est)
            self.ci_fisher_ = ci_fisher_z(pt, lam, self.alpha, n, est)
            df = (pt.r - 1) * (pt.c - 1)
            self.threshold_ = detectable_threshold(self.alpha, n, df, lam, cfg)
        return self


class PolychoricCorrelation(BaseEstimator):
    """Two-step polychoric correlation (thresholds from margins, then 1-D ML)."""

    def __init__(self, bracket=(-1.0 + 1e-6, 1.0 - 1e-6), tol=1e-8, max_iter=200,
                 table_kind="auto"):
        self.bracket = bracket
        self.tol = tol
        self.max_iter = max_iter
        self.table_kind = table_kind

    def fit(self, X, y=None):
        cfg = PolychoricConfig(tuple(self.bracket), self.tol, self.max_iter)
        pt, _ = _table_from(X, y, self.table_kind)
        fit = fit_polychoric_two_step(pt, cfg)
        self.rho_ = fit.rho
        self.converged_ = fit.converged
        self.at_bound_ = fit.at_bound
        self.loglik_ = fit.loglik
        self.row_thresholds_ = fit.row_thresholds
        self.col_thresholds_ = fit.col_thresholds
        return self


__all__ = ["LatentCorrelation", "PolychoricCorrelation"]
