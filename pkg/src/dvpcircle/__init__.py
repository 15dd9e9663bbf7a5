"""Circular density estimation built on the de la Vallee Poussin basis.

The package provides the trigonometric density basis, mixtures and their
shape diagnostics, nonnegative-trigonometric-sum competitors, three Bayesian
posterior-mean estimators, loss functions against analytic targets, and a
simulation harness with a command-line interface.
"""

from dvpcircle.circle import AngularGrid, ang_dist, bin_index, integrate, wrap
from dvpcircle.dvp_basis import (
    BasisSpec,
    ElevationMatrix,
    circular_variance,
    elevate_to_nonnegative,
    elevation_matrix,
    eval_basis,
    sample_basis,
    trig_moment,
)
from dvpcircle.mixture import (
    DvpMixture,
    ShapeReport,
    cyclic_variation,
    discretized_operator,
    dvp_mean_operator,
    eval_mixture,
    mixture_derivative,
    shape_report,
)
from dvpcircle.nnts import NntsModel, nnts_eval, nnts_mle, select_by_ic
from dvpcircle.targets import TargetDensity, make_target, sample_target
from dvpcircle.losses import hellinger_loss, kl_loss, l1_loss, l2_loss
from dvpcircle.estimators import (
    DensityEstimate,
    DpmConfig,
    fit_fdbayes,
    fit_pc,
    fit_pd,
    update_degree_N,
)
from dvpcircle.harness import (
    ExperimentConfig,
    LossRecord,
    bootstrap_ci,
    run_experiment,
    summarize,
)

__all__ = [
    "AngularGrid",
    "BasisSpec",
    "DensityEstimate",
    "DpmConfig",
    "DvpMixture",
    "ElevationMatrix",
    "ExperimentConfig",
    "LossRecord",
    "NntsModel",
    "ShapeReport",
    "TargetDensity",
    "ang_dist",
    "bin_index",
    "bootstrap_ci",
    "circular_variance",
    "cyclic_variation",
    "discretized_operator",
    "dvp_mean_operator",
    "elevate_to_nonnegative",
    "elevation_matrix",
    "eval_basis",
    "eval_mixture",
    "fit_fdbayes",
    "fit_pc",
    "fit_pd",
    "hellinger_loss",
    "integrate",
    "kl_loss",
    "l1_loss",
    "l2_loss",
    "make_target",
    "mixture_derivative",
    "nnts_eval",
    "nnts_mle",
    "run_experiment",
    "sample_basis",
    "sample_target",
    "select_by_ic",
    "shape_report",
    "summarize",
    "trig_moment",
    "update_degree_N",
    "wrap",
]
