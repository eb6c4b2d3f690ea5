"""Latent correlation of two-way contingency tables from power divergences."""
from .baselines import (
    PolychoricConfig,
    cox_snell_r2,
    cramers_v2,
    fit_polychoric_two_step,
    nagelkerke_r2,
    pearson_c,
    polychoric_two_step,
    u_total,
)
from .datasets import example_path, load_example
from .divergence import kl_divergence, margin_entropy, pearson_divergence, power_divergence
from .exceptions import LatcorrError
from .inference import (
    asymptotic_variances,
    ci_fisher_z,
    ci_simple,
    detectable_threshold,
    grad_d,
    infer,
    sigma2_d,
)
from .numerics import bvn_cdf, bvn_rect_prob, chi2_quantile, std_normal_cdf, std_normal_quantile
from .solver import SolveConfig, i_of_t, i_prime, initial_t, rho_closed_form, rho_lambda, solve_t
from .tables import (
    ContingencyTable,
    ProbabilityTable,
    check_table,
    crosstab,
    flatten,
    from_counts,
    from_probabilities,
    to_probabilities,
    unflatten,
)

__version__ = "0.1.0"


def __getattr__(name):
    # scikit-learn is slow to import; load the estimators on first use
    if name in ("LatentCorrelation", "PolychoricCorrelation"):
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
