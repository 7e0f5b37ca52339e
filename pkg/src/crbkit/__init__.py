"""crb-kit: Cramer-Rao bounds under singular Fisher information.

When the Fisher information matrix J is singular, no unbiased estimator
has finite variance, yet its Moore-Penrose pseudoinverse is still the
covariance floor for estimators made identifiable by side constraints.
This package computes those bounds, synthesizes the affine constraint
that attains the pseudoinverse bound with the fewest constraint rows,
checks the minimum-constraint conditions, and numerically certifies the
trace and eigenvalue inequalities that relate every minimum constraint
back to the pseudoinverse.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    CrbKitError,
    DegenerateParameter,
    FullRankFim,
    InvalidInput,
    InvalidMatrix,
    InvalidModel,
    NotMinimumConstraint,
    NumericalFailure,
    RankDeficientConstraint,
    SamplingExhausted,
    SingularRestriction,
)
from .matlin import (
    DEFAULT_PSD_TOL_REL,
    DEFAULT_RANK_TOL_REL,
    EigenSpectrum,
    RankedSvd,
    SymMatrix,
    as_sym_matrix,
    eigvals_desc,
    is_nonsingular,
    is_psd,
    moore_penrose_residuals,
    null_complement,
    orthonormal_columns,
    pinv_via_basis,
    ranked_svd,
)
from .matx import dump_matrix, load_matrix, parse_matrix, save_matrix
from .statmodel import (
    BlindChannelModel,
    GaussianMeanModel,
    Model,
    blind_channel_mean_jac,
    convolve,
    finite_difference_score,
    gaussian_location,
    scalar_ambiguity_direction,
)
from .fim import FimEstimate, fim_gaussian_mean, fim_monte_carlo
from .crb import CrbReport, constrained_crb, crb_exists, unconstrained_crb
from .constraint import (
    ConstraintSpec,
    MinConstraintReport,
    check_minimum_constraint,
    load_constraint_spec,
    optimal_affine_constraint,
    sample_minimum_constraints,
    save_constraint_spec,
)
from .verify import (
    DEFAULT_MARGIN_TOL,
    FailingCase,
    TheoremCertificate,
    certificates_to_csv,
    counterexample_check,
    merge_certificates,
    random_rank_deficient_psd,
    verify_constraint_equivalence,
    verify_eigen_dominance,
    verify_min_rank,
    verify_poincare,
    verify_trace_bound,
    write_certificate_witnesses,
)

__all__ = [
    "__version__",
    # errors
    "CrbKitError",
    "InvalidMatrix",
    "InvalidInput",
    "InvalidModel",
    "DegenerateParameter",
    "NumericalFailure",
    "RankDeficientConstraint",
    "FullRankFim",
    "SamplingExhausted",
    "NotMinimumConstraint",
    "SingularRestriction",
    # matlin
    "DEFAULT_RANK_TOL_REL",
    "DEFAULT_PSD_TOL_REL",
    "SymMatrix",
    "RankedSvd",
    "EigenSpectrum",
    "as_sym_matrix",
    "ranked_svd",
    "pinv_via_basis",
    "eigvals_desc",
    "is_psd",
    "is_nonsingular",
    "null_complement",
    "orthonormal_columns",
    "moore_penrose_residuals",
    # matx
    "dump_matrix",
    "parse_matrix",
    "save_matrix",
    "load_matrix",
    # statmodel
    "Model",
    "GaussianMeanModel",
    "BlindChannelModel",
    "gaussian_location",
    "convolve",
    "blind_channel_mean_jac",
    "scalar_ambiguity_direction",
    "finite_difference_score",
    # fim
    "FimEstimate",
    "fim_gaussian_mean",
    "fim_monte_carlo",
    # crb
    "CrbReport",
    "unconstrained_crb",
    "constrained_crb",
    "crb_exists",
    # constraint
    "ConstraintSpec",
    "MinConstraintReport",
    "check_minimum_constraint",
    "optimal_affine_constraint",
    "sample_minimum_constraints",
    "save_constraint_spec",
    "load_constraint_spec",
    # verify
    "DEFAULT_MARGIN_TOL",
    "TheoremCertificate",
    "FailingCase",
    "verify_trace_bound",
    "verify_eigen_dominance",
    "verify_poincare",
    "verify_constraint_equivalence",
    "verify_min_rank",
    "counterexample_check",
    "merge_certificates",
    "certificates_to_csv",
    "write_certificate_witnesses",
    "random_rank_deficient_psd",
]
