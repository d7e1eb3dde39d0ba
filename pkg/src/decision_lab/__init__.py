"""Losses, risk functions, shrinkage estimators and error probabilities, by seeded simulation."""

from .errors import (
    ConfigurationError,
    DataError,
    DecisionLabError,
    DomainError,
    NumericalError,
    SingularityError,
)
from .rng import SeedPlan
from .models import (
    EmpiricalDistribution,
    ModelKind,
    Sample,
    StatisticalModel,
    draw_panel,
    draw_sample,
    empirical_sampling_distribution,
    laplace_iid,
    linear_regression,
    multi_normal_iso,
    normal_iid,
    uniform_iid,
)
from .estimators import (
    CRYSTAL_BALL,
    Estimate,
    EstimatorKind,
    EstimatorSpec,
    crystal_ball,
    js_shrink,
    ls_mean,
    regression_js,
    regression_ols,
    toy_estimators,
)
from .losses import DistanceKind, LossFunction, LossKind, inherent_distance, kl_quadrature, loss_eval
from .risk import (
    MINIMAX,
    BayesWithPrior,
    RiskCurve,
    Verdict,
    bayes_risk,
    check_grid_regularity,
    dominance_on_grid,
    max_risk,
    mse_bias_at_true,
    quantifier_contrast,
    risk_curve,
    risk_curves,
    risk_mc,
    select_rule,
)
from .bayes import (
    GridPrior,
    NormalPrior,
    bayes_action,
    check_full_support,
    constant_risk_minimax_check,
    grid_update,
    posterior_normal_normal,
    posterior_risk,
)
from .inference import (
    TestSpec,
    ci_normal,
    coverage_sim,
    hypothetical_distribution,
    np_test,
    pivot_value,
    power,
)
from .experiments import (
    ExperimentReport,
    run_consistency,
    run_coverage,
    run_crystal_ball,
    run_power_curve,
    run_quantifier_contrast,
    run_stein,
    run_units_sensitivity,
)

__version__ = "0.1.0"

__all__ = [
    "BayesWithPrior",
    "CRYSTAL_BALL",
    "ConfigurationError",
    "DataError",
    "DecisionLabError",
    "DistanceKind",
    "DomainError",
    "EmpiricalDistribution",
    "Estimate",
    "EstimatorKind",
    "EstimatorSpec",
    "ExperimentReport",
    "GridPrior",
    "LossFunction",
    "LossKind",
    "MINIMAX",
    "ModelKind",
    "NormalPrior",
    "NumericalError",
    "RiskCurve",
    "Sample",
    "SeedPlan",
    "SingularityError",
    "StatisticalModel",
    "TestSpec",
    "Verdict",
    "bayes_action",
    "bayes_risk",
    "check_full_support",
    "check_grid_regularity",
    "ci_normal",
    "constant_risk_minimax_check",
    "coverage_sim",
    "crystal_ball",
    "dominance_on_grid",
    "draw_panel",
    "draw_sample",
    "empirical_sampling_distribution",
    "grid_update",
    "hypothetical_distribution",
    "inherent_distance",
    "js_shrink",
    "kl_quadrature",
    "laplace_iid",
    "linear_regression",
    "loss_eval",
    "ls_mean",
    "max_risk",
    "mse_bias_at_true",
    "multi_normal_iso",
    "normal_iid",
    "np_test",
    "pivot_value",
    "posterior_normal_normal",
    "posterior_risk",
    "power",
    "quantifier_contrast",
    "regression_js",
    "regression_ols",
    "risk_curve",
    "risk_curves",
    "risk_mc",
    "run_consistency",
    "run_coverage",
    "run_crystal_ball",
    "run_power_curve",
    "run_quantifier_contrast",
    "run_stein",
    "run_units_sensitivity",
    "select_rule",
    "toy_estimators",
    "uniform_iid",
]
