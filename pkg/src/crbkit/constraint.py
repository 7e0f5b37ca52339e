"""Parameter constraints for singular Fisher information.

A constraint f(theta) = 0 enters the bound only through its Jacobian F.
This module checks the three minimum-constraint requirements (full row
rank, nonsingular restricted information U'JU, rank F + rank J = n),
synthesizes the optimal affine constraint from the information null
space, and samples random minimum constraints for experiments.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import FullRankFim, InvalidInput, SamplingExhausted
from .matlin import (
    DEFAULT_RANK_TOL_REL,
    as_sym_matrix,
    is_nonsingular,
    null_complement,
    orthonormal_columns,
    ranked_svd,
)
from .matx import _parse_block, dump_matrix, format_float

# Consistency tolerance for f(theta0) = 0 of an affine constraint.
AFFINE_CONSISTENCY_TOL = 1e-9

# Rejection budget: sampling gives up after 100 * count consecutive misses.
REJECTION_BUDGET_FACTOR = 100


@dataclass(frozen=True, eq=False)
class ConstraintSpec:
    """Constraint identified by its Jacobian, with optional affine data.

    f_jac is (m, n) with m <= n. offset, when present, makes the
    constraint globally affine: f(theta) = f_jac @ theta + offset. If an
    evaluation point is also declared, f(eval_point) = 0 is checked at
    construction.
    """

    f_jac: np.ndarray
    offset: np.ndarray | None = None
    label: str = ""
    eval_point: np.ndarray | None = None

    def __post_init__(self):
        jac = np.asarray(self.f_jac, dtype=float)
        if jac.ndim != 2:
            raise InvalidInput(f"f_jac must be 2-d, got shape {jac.shape}")
        if not np.all(np.isfinite(jac)):
            raise InvalidInput("f_jac contains non-finite entries")
        m, n = jac.shape
        if n == 0 or m > n:
            raise InvalidInput(f"f_jac shape {jac.shape} must satisfy 0 <= m <= n, n >= 1")
        jac = np.array(jac)
        jac.flags.writeable = False
        object.__setattr__(self, "f_jac", jac)
        if self.offset is not None:
            off = np.asarray(self.offset, dtype=float).ravel()
            if off.size != m:
                raise InvalidInput(f"offset must have length {m}, got {off.size}")
            off = np.array(off)
            off.flags.writeable = False
            object.__setattr__(self, "offset", off)
        if self.eval_point is not None:
            point = np.asarray(self.eval_point, dtype=float).ravel()
            if point.size != n:
                raise InvalidInput(f"eval_point must have length {n}, got {point.size}")
            point = np.array(point)
            point.flags.writeable = False
            object.__setattr__(self, "eval_point", point)
            if self.offset is not None:
                resid = float(np.max(np.abs(jac @ point + self.offset))) if m else 0.0
                if resid > AFFINE_CONSISTENCY_TOL:
                    raise InvalidInput(
                        f"affine constraint violated at eval_point: |f(theta0)| = {resid:.3e}"
                    )

    @property
    def n_constraints(self) -> int:
        return self.f_jac.shape[0]

    @property
    def param_dim(self) -> int:
        return self.f_jac.shape[1]


@dataclass(frozen=True)
class MinConstraintReport:
    """Outcome of the three minimum-constraint requirements.

    is_minimum is the conjunction of the three flags. details carries the
    numeric ranks and the extreme eigenvalues of U'JU.
    """

    full_rank_jacobian: bool
    utju_nonsingular: bool
    rank_sum_is_n: bool
    is_minimum: bool
    details: dict = field(default_factory=dict)


def _numerical_row_rank(jac: np.ndarray, rank_tol_rel: float) -> int:
    if jac.shape[0] == 0:
        return 0
    s = np.linalg.svd(jac, compute_uv=False)
    cutoff = s[0] * max(jac.shape) * rank_tol_rel if s.size else 0.0
    return int(np.sum(s > cutoff))


def check_minimum_constraint(
    j, spec: ConstraintSpec, rank_tol_rel: float = DEFAULT_RANK_TOL_REL
) -> MinConstraintReport:
    """Evaluate the three minimum-constraint requirements of F against J."""
    sym = as_sym_matrix(j)
    if spec.param_dim != sym.dim:
        raise InvalidInput(
            f"constraint has {spec.param_dim} columns but J is {sym.dim} x {sym.dim}"
        )
    m = spec.n_constraints
    n = sym.dim
    rank_f = _numerical_row_rank(spec.f_jac, rank_tol_rel)
    rank_j = ranked_svd(sym, rank_tol_rel).rank
    full_rank = rank_f == m
    rank_sum = (rank_f + rank_j) == n

    details: dict = {"rank_jacobian": rank_f, "rank_fim": rank_j, "param_dim": n}
    nonsingular = False
    if full_rank:
        u = null_complement(spec.f_jac, rank_tol_rel)
        restricted = u.T @ sym.entries @ u
        if restricted.shape[0]:
            evals = np.linalg.eigvalsh(0.5 * (restricted + restricted.T))
            details["utju_min_eig"] = float(evals[0])
            details["utju_max_eig"] = float(evals[-1])
        nonsingular = is_nonsingular(restricted, rank_tol_rel)

    return MinConstraintReport(
        full_rank_jacobian=full_rank,
        utju_nonsingular=nonsingular,
        rank_sum_is_n=rank_sum,
        is_minimum=full_rank and nonsingular and rank_sum,
        details=details,
    )


def optimal_affine_constraint(
    j, theta0, rank_tol_rel: float = DEFAULT_RANK_TOL_REL
) -> ConstraintSpec:
    """Affine minimum constraint built from the null space of J.

    F is an orthonormal basis of the null space transposed and
    C = -F theta0, so f(theta) = F theta + C vanishes at theta0. The
    constrained bound under this constraint equals the pseudoinverse of
    J. Raises FullRankFim when J is nonsingular.
    """
    sym = as_sym_matrix(j)
    point = np.asarray(theta0, dtype=float).ravel()
    if point.size != sym.dim:
        raise InvalidInput(f"theta0 must have length {sym.dim}, got {point.size}")
    basis = ranked_svd(sym, rank_tol_rel)
    if basis.rank == sym.dim:
        raise FullRankFim("J is numerically nonsingular; no constraint is needed")
    f_jac = basis.u_bar.T
    return ConstraintSpec(
        f_jac=f_jac,
        offset=-f_jac @ point,
        label="optimal-affine",
        eval_point=point,
    )


def sample_minimum_constraints(
    j, count: int, rng_seed: int, rank_tol_rel: float = DEFAULT_RANK_TOL_REL
) -> list[ConstraintSpec]:
    """Draw random minimum constraints for a singular J.

    Each Jacobian is the transpose of an orthonormalized Gaussian
    (n, n - rank J) matrix, redrawn until it passes
    check_minimum_constraint. Deterministic for a given seed; raises
    SamplingExhausted after 100 * count consecutive rejections and
    FullRankFim when J is nonsingular.
    """
    if count < 1:
        raise InvalidInput(f"count must be positive, got {count}")
    sym = as_sym_matrix(j)
    basis = ranked_svd(sym, rank_tol_rel)
    n, rank = sym.dim, basis.rank
    if rank == n:
        raise FullRankFim("J is numerically nonsingular; minimum constraints are empty")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=rng_seed))
    budget = REJECTION_BUDGET_FACTOR * count
    specs: list[ConstraintSpec] = []
    consecutive_rejects = 0
    while len(specs) < count:
        frame = orthonormal_columns(rng.standard_normal((n, n - rank)))
        spec = ConstraintSpec(
            f_jac=frame.T,
            label=f"sampled-{len(specs)} retries={consecutive_rejects}",
        )
        if check_minimum_constraint(sym, spec, rank_tol_rel).is_minimum:
            specs.append(spec)
            consecutive_rejects = 0
        else:
            consecutive_rejects += 1
            if consecutive_rejects >= budget:
                raise SamplingExhausted(
                    f"{budget} consecutive rejections while sampling minimum constraints"
                )
    return specs


def save_constraint_spec(path, spec: ConstraintSpec) -> None:
    """Write a constraint as a matx block plus an optional offset line."""
    text = dump_matrix(spec.f_jac)
    if spec.offset is not None:
        text += "offset " + " ".join(format_float(v) for v in spec.offset) + "\n"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def load_constraint_spec(path, label: str = "") -> ConstraintSpec:
    """Read a constraint written by save_constraint_spec."""
    if not os.path.isfile(path):
        raise InvalidInput(f"no such constraint file {path}")
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    jac, pos = _parse_block(lines, 0)
    offset = None
    for line in lines[pos:]:
        fields = line.split()
        if not fields:
            continue
        if fields[0] != "offset" or offset is not None:
            raise InvalidInput(f"unexpected content in constraint file: {line!r}")
        try:
            offset = np.array([float(v) for v in fields[1:]])
        except ValueError as exc:
            raise InvalidInput("non-numeric offset value") from exc
    return ConstraintSpec(f_jac=jac, offset=offset, label=label)
