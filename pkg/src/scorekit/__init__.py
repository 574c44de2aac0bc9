"""Proper scoring rules, weighted scoring families and their compatibility."""

from .compat import (
    CompatReport,
    check_compatibility,
    compatible_bregman_weight,
    first_order_factor,
    hessian_restricted,
    parallel_deviation,
    quasi_bregman_factor,
)
from .curves import CurvedFunction, affine_power, identity, neglog, power, scaled_power, xlogx
from .errors import ConfigError, ConfigWarning, DomainError, NumericError, ScorekitError
from .estimation import (
    EstimationResult,
    OptimizerSettings,
    counterexample_path,
    mle,
    optimize_score,
    score_gradient_theta,
    transfer_check,
)
from .families import (
    WeightedFamily,
    bregman_weighted_family,
    quasi_bregman_family,
    quasi_bregman_power,
    quasi_bregman_pseudospherical,
    trivial_family,
    weighted_power_family,
    weighted_pseudospherical_family,
)
from .portfolio import (
    Market,
    PortfolioOutcome,
    best_portfolio,
    domination_check,
    payoff_units,
    price_assets,
    simulate,
)
from .rules import (
    ScoringRule,
    baseline,
    bregman_rule,
    brier_rule,
    entropy,
    entropy_rule,
    equivalence_fit,
    eval_expected,
    grad_p,
    log_rule,
    power_rule,
    rebase,
)
from .simplex import (
    Distribution,
    ParametricModel,
    binomial_squares_model,
    empirical,
    linear_path_model,
    make_distribution,
    softmax_model,
    tangent_basis,
    uniform,
)
from .specs import family_from_spec, model_from_spec, rule_from_spec

__version__ = "0.1.0"
