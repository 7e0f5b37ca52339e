"""Cramer-Rao bounds under possibly singular Fisher information.

The unconstrained bound is the Moore-Penrose pseudoinverse of J, valid
for unbiased estimators whose bias stays flat across the null space; a
singular J is flagged because no finite-variance unbiased estimator
exists in that case. With a constraint f(theta) = 0 whose Jacobian has
null basis U, the bound becomes U (U'JU)^-1 U' and is finite exactly
when the restricted information U'JU is nonsingular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraint import ConstraintSpec
from .errors import InvalidInput
from .matlin import (
    DEFAULT_RANK_TOL_REL,
    EigenSpectrum,
    SymMatrix,
    as_sym_matrix,
    eigvals_desc,
    is_nonsingular,
    null_complement,
    ranked_svd,
)


@dataclass(frozen=True, eq=False)
class CrbReport:
    """Covariance lower bound with provenance.

    When exists is False (restricted information singular) the bound and
    its eigenvalues are absent and trace is +inf. constraint_used is
    "none" for the unconstrained bound, "affine" when the constraint
    carried an offset, and "jacobian-only" otherwise. u_projector is the
    orthogonal projector onto the tangent space the bound lives on; it is
    basis invariant. singular_fim_warning marks a singular J on the
    unconstrained route, where no finite-variance unbiased estimator
    exists.
    """

    bound: SymMatrix | None
    exists: bool
    trace: float
    eigenvalues: EigenSpectrum | None
    constraint_used: str
    u_projector: SymMatrix
    singular_fim_warning: bool = False


def unconstrained_crb(j, rank_tol_rel: float = DEFAULT_RANK_TOL_REL) -> CrbReport:
    """Pseudoinverse bound of J; flags singular J via singular_fim_warning."""
    sym = as_sym_matrix(j)
    basis = ranked_svd(sym, rank_tol_rel)
    restricted = basis.u_r.T @ sym.entries @ basis.u_r
    bound = SymMatrix(basis.u_r @ np.linalg.inv(restricted) @ basis.u_r.T)
    return CrbReport(
        bound=bound,
        exists=True,
        trace=bound.trace,
        eigenvalues=eigvals_desc(bound),
        constraint_used="none",
        u_projector=SymMatrix(basis.range_projector()),
        singular_fim_warning=basis.rank < sym.dim,
    )


def _resolve_constraint(constraint) -> tuple[np.ndarray, str]:
    if isinstance(constraint, ConstraintSpec):
        label = "affine" if constraint.offset is not None else "jacobian-only"
        return constraint.f_jac, label
    return np.asarray(constraint, dtype=float), "jacobian-only"


def constrained_crb(
    j, constraint, rank_tol_rel: float = DEFAULT_RANK_TOL_REL
) -> CrbReport:
    """Bound under a constraint given as a Jacobian or a ConstraintSpec.

    Computes U (U'JU)^-1 U' over the constraint's null basis U when the
    restricted information is nonsingular; otherwise reports a
    nonexistent (infinite) bound.
    """
    sym = as_sym_matrix(j)
    f_jac, used = _resolve_constraint(constraint)
    if f_jac.ndim != 2 or f_jac.shape[1] != sym.dim:
        raise InvalidInput(
            f"constraint Jacobian shape {f_jac.shape} does not match J of dim {sym.dim}"
        )
    u = null_complement(f_jac, rank_tol_rel)
    restricted = u.T @ sym.entries @ u
    projector = SymMatrix(u @ u.T) if u.shape[1] else SymMatrix(np.zeros((sym.dim, sym.dim)))
    if not is_nonsingular(restricted, rank_tol_rel):
        return CrbReport(
            bound=None,
            exists=False,
            trace=math.inf,
            eigenvalues=None,
            constraint_used=used,
            u_projector=projector,
        )
    if u.shape[1]:
        bound = SymMatrix(u @ np.linalg.inv(restricted) @ u.T)
    else:
        # fully constrained parameter: zero covariance
        bound = SymMatrix(np.zeros((sym.dim, sym.dim)))
    return CrbReport(
        bound=bound,
        exists=True,
        trace=bound.trace,
        eigenvalues=eigvals_desc(bound),
        constraint_used=used,
        u_projector=projector,
    )


def crb_exists(j, constraint, rank_tol_rel: float = DEFAULT_RANK_TOL_REL) -> bool:
    """True iff the constrained bound is finite: U'JU numerically nonsingular."""
    sym = as_sym_matrix(j)
    f_jac, _ = _resolve_constraint(constraint)
    if f_jac.ndim != 2 or f_jac.shape[1] != sym.dim:
        raise InvalidInput(
            f"constraint Jacobian shape {f_jac.shape} does not match J of dim {sym.dim}"
        )
    u = null_complement(f_jac, rank_tol_rel)
    restricted = u.T @ sym.entries @ u
    return is_nonsingular(restricted, rank_tol_rel)
