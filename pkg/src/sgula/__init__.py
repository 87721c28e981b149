"""Subgradient unadjusted Langevin sampling and optimization toolkit."""

__version__ = "0.1.0"

from .potentials import (
    KINK_TOL,
    ModelSpecError,
    MoGLaplaceSpec,
    PotentialModel,
    RegressionData,
    RegularityParams,
    ScadSpec,
    abs_plus_quadratic_model,
    build_regression_potential,
    l1_model,
    make_model,
    max_quadratic_model,
    mog_laplace_model,
    mog_unnormalized_density,
    one_d_composite_model,
    prox_l1,
    quadratic_model,
    scad_penalty,
    scad_penalty_subgrad,
    scad_q,
    scad_q_prime,
    scad_reg_subgrad,
)
from .sampler import (
    ChainDivergenceError,
    InitLaw,
    SampleSet,
    SamplerConfig,
    myula_step,
    posterior_summary,
    run_chain,
    run_parallel_chains,
    sgula_step,
)
from .constants import (
    ConstantsReport,
    ProblemParams,
    beta_cap_A5,
    constants_report,
    default_epsilon_w2,
    dissipativity_b,
    excess_risk_bound,
    iterations_for_accuracy,
    lambda_max,
    theorem_bound,
)
from .metrics import (
    DensityEstimate,
    RateFit,
    empirical_moment2,
    kde_silverman,
    loglog_slope,
    mode_detect,
    relative_model_error,
    silverman_bandwidth,
    sliced_w2,
    wasserstein_1d,
)
from .experiments import (
    ExperimentSpec,
    ScadStudySpec,
    StudyReport,
    apply_overrides,
    build_spec,
    cv_select_gamma,
    emit_report,
    preset_config,
    read_config,
    run_experiment,
    run_mog_experiment,
    run_rate_study,
    run_scad_regression,
    run_sweep,
    target_quantiles_1d,
    write_config,
)
from .assumptions import (
    CheckReport,
    ProbePlan,
    check_convexity_at_infinity,
    check_dissipativity,
    check_linear_growth,
    check_semi_convexity,
    piecewise_radius,
    run_all_checks,
)
