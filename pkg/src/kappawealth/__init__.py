"""Heavy-tailed wealth distribution toolkit.

Analytic kappa-deformed generalized gamma distribution, inequality measures,
a kinetic wealth-exchange simulator, and fitting routines that tie the three
together.
"""

from .distribution import (KggParams, SpecialCase, TailParams, ccdf, cdf,
                           classify, cv, expected_log, log_pdf, mean, mode,
                           moment, moment_bounds, pdf, quantile, sample,
                           tail_params, variance)
from .errors import ConvergenceError, DomainError, ExistenceError, FittingError
from .fitting import FitResult, fit_histogram, fit_mle, ks_statistic, tail_slope
from .inequality import (LorenzPoint, empirical_gini, empirical_lorenz,
                         gen_entropy, gini, h_index, lorenz, lorenz_dominates,
                         mld, theil)
from .simulator import (AgentState, SimConfig, SimResult, WealthHistogram,
                        exchange_step, gini_now, log_binned_histogram, run,
                        total_money)
from .special import (KAPPA_SWITCH, digamma, inc_beta, inv_reg_inc_beta,
                      kappa_exp, kappa_gamma, kappa_log, log_gamma,
                      reg_inc_beta)

__version__ = "0.1.0"

__all__ = [
    "KggParams", "TailParams", "SpecialCase",
    "pdf", "log_pdf", "cdf", "ccdf", "quantile", "sample", "mode",
    "moment", "moment_bounds", "mean", "variance", "cv",
    "tail_params", "classify", "expected_log",
    "LorenzPoint", "lorenz", "gini", "gen_entropy", "mld", "theil",
    "h_index", "lorenz_dominates", "empirical_lorenz", "empirical_gini",
    "AgentState", "SimConfig", "WealthHistogram", "SimResult",
    "exchange_step", "run", "total_money", "gini_now", "log_binned_histogram",
    "FitResult", "fit_histogram", "fit_mle", "tail_slope", "ks_statistic",
    "kappa_exp", "kappa_log", "kappa_gamma",
    "reg_inc_beta", "inv_reg_inc_beta", "inc_beta", "digamma", "log_gamma",
    "KAPPA_SWITCH",
    "DomainError", "ExistenceError", "ConvergenceError", "FittingError",
    "__version__",
]
