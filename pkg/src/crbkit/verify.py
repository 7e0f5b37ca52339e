"""Certified numerical checks of the bound inequalities.

Each verifier returns a TheoremCertificate whose worst_margin is the
most-violated signed slack across the cases it examined: the certificate
passes exactly when worst_margin >= -margin_tol, and failing cases are
kept as replayable witnesses holding the input matrices.

Checks covered:
  trace_bound      tr(constrained CRB) >= tr(pinv J) for minimum constraints
  eigen_dominance  sorted eigenvalues of V (V'JV)^-1 V' dominate those of pinv J
  poincare         sorted eigenvalues of V'JV are dominated by those of J
  equivalence      every full-row-rank F annihilating the range basis
                   reproduces the pseudoinverse bound
  min_rank         fewer than n - rank(J) constraints always leave U'JU
                   singular; n - rank(J) suffice via the optimal constraint
  counterexample   a fixed 4x4 case where the matrix-order comparison with
                   pinv J fails even though trace and eigenvalue dominance hold
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .constraint import (
    ConstraintSpec,
    check_minimum_constraint,
    optimal_affine_constraint,
)
from .crb import constrained_crb
from .errors import (
    InvalidInput,
    NotMinimumConstraint,
    SingularRestriction,
)
from .matlin import (
    DEFAULT_RANK_TOL_REL,
    SymMatrix,
    as_sym_matrix,
    eigvals_desc,
    is_nonsingular,
    null_complement,
    orthonormal_columns,
    pinv_via_basis,
    ranked_svd,
)
from .matx import dump_matrix, format_float

DEFAULT_MARGIN_TOL = 1e-9

# Non-PSD threshold for the counterexample: the difference matrix must
# have an eigenvalue at least this far below zero.
COUNTEREXAMPLE_NEG_EIG = 1e-6

THEOREM_IDS = (
    "trace_bound",
    "eigen_dominance",
    "poincare",
    "equivalence",
    "min_rank",
    "counterexample",
)

ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FailingCase:
    """One case that violated its inequality, with replayable inputs."""

    label: str
    margin: float
    matrices: tuple[tuple[str, np.ndarray], ...]

    def as_text(self) -> str:
        parts = [f"label: {self.label}", f"margin: {format_float(self.margin)}"]
        for name, arr in self.matrices:
            parts.append(f"{name}:")
            parts.append(dump_matrix(arr).rstrip("\n"))
        return "\n".join(parts) + "\n"


@dataclass(frozen=True, eq=False)
class TheoremCertificate:
    """Aggregated outcome of one inequality over n_cases cases.

    passed iff worst_margin >= -margin_tol iff witnesses is empty. detail
    is free text for a headline number, e.g. the counterexample's most
    negative eigenvalue.
    """

    theorem_id: str
    passed: bool
    n_cases: int
    worst_margin: float
    witnesses: tuple[FailingCase, ...] = ()
    detail: str = ""


def _certify(
    theorem_id: str,
    margins: list[float],
    cases: list[tuple[str, dict[str, np.ndarray]]],
    margin_tol: float,
    detail: str = "",
) -> TheoremCertificate:
    if theorem_id not in THEOREM_IDS:
        raise InvalidInput(f"unknown theorem id {theorem_id!r}")
    if not margins:
        raise InvalidInput("certificate needs at least one case")
    witnesses = tuple(
        FailingCase(label=label, margin=margin, matrices=tuple(mats.items()))
        for margin, (label, mats) in zip(margins, cases)
        if margin < -margin_tol
    )
    worst = float(min(margins))
    return TheoremCertificate(
        theorem_id=theorem_id,
        passed=worst >= -margin_tol,
        n_cases=len(margins),
        worst_margin=worst,
        witnesses=witnesses,
        detail=detail,
    )


def merge_certificates(
    certs: list[TheoremCertificate], margin_tol: float = DEFAULT_MARGIN_TOL
) -> TheoremCertificate:
    """Fold same-theorem certificates into one, keeping all witnesses."""
    if not certs:
        raise InvalidInput("nothing to merge")
    theorem_id = certs[0].theorem_id
    if any(c.theorem_id != theorem_id for c in certs):
        raise InvalidInput("cannot merge certificates of different theorems")
    worst = min(c.worst_margin for c in certs)
    witnesses = tuple(w for c in certs for w in c.witnesses)
    detail = next((c.detail for c in certs if c.detail), "")
    return TheoremCertificate(
        theorem_id=theorem_id,
        passed=worst >= -margin_tol,
        n_cases=sum(c.n_cases for c in certs),
        worst_margin=worst,
        witnesses=witnesses,
        detail=detail,
    )


def _check_orthonormal(v: np.ndarray, name: str) -> None:
    if v.ndim != 2 or v.shape[1] > v.shape[0]:
        raise InvalidInput(f"{name} must be a tall matrix, got shape {v.shape}")
    gram = v.T @ v
    if not np.allclose(gram, np.eye(v.shape[1]), rtol=0.0, atol=ORTHONORMAL_TOL):
        raise InvalidInput(f"{name} columns are not orthonormal")


def verify_trace_bound(
    j,
    specs: list[ConstraintSpec],
    margin_tol: float = DEFAULT_MARGIN_TOL,
    rank_tol_rel: float = DEFAULT_RANK_TOL_REL,
) -> TheoremCertificate:
    """Check tr(constrained CRB) >= tr(pinv J) for minimum constraints.

    Raises NotMinimumConstraint when some spec fails its preconditions.
    """
    sym = as_sym_matrix(j)
    base_trace = pinv_via_basis(sym, rank_tol_rel).trace
    margins: list[float] = []
    cases: list[tuple[str, dict[str, np.ndarray]]] = []
    for idx, spec in enumerate(specs):
        report = check_minimum_constraint(sym, spec, rank_tol_rel)
        if not report.is_minimum:
            raise NotMinimumConstraint(
                f"constraint {idx} ({spec.label or 'unlabeled'}) is not minimum: {report.details}"
            )
        bound = constrained_crb(sym, spec, rank_tol_rel)
        margins.append(bound.trace - base_trace)
        cases.append(
            (f"constraint-{idx}", {"j": sym.entries, "f_jac": spec.f_jac})
        )
    return _certify("trace_bound", margins, cases, margin_tol)


def verify_eigen_dominance(
    j,
    v,
    margin_tol: float = DEFAULT_MARGIN_TOL,
    rank_tol_rel: float = DEFAULT_RANK_TOL_REL,
) -> TheoremCertificate:
    """Check sorted-eigenvalue dominance of V (V'JV)^-1 V' over pinv J.

    V must have orthonormal columns, as many as rank(J). Raises
    SingularRestriction when V'JV is numerically singular.
    """
    sym = as_sym_matrix(j)
    v_arr = np.asarray(v, dtype=float)
    _check_orthonormal(v_arr, "v")
    restricted = v_arr.T @ sym.entries @ v_arr
    if not is_nonsingular(restricted, rank_tol_rel):
        raise SingularRestriction("V'JV is numerically singular")
    lhs = v_arr @ np.linalg.inv(restricted) @ v_arr.T
    lam_lhs = eigvals_desc(lhs).values
    lam_pinv = eigvals_desc(pinv_via_basis(sym, rank_tol_rel)).values
    margins = [float(a - b) for a, b in zip(lam_lhs, lam_pinv)]
    cases = [
        (f"eig-index-{i}", {"j": sym.entries, "v": v_arr})
        for i in range(len(margins))
    ]
    return _certify("eigen_dominance", margins, cases, margin_tol)


def verify_poincare(
    j, v, margin_tol: float = DEFAULT_MARGIN_TOL
) -> TheoremCertificate:
    """Check lambda_i(V'JV) <= lambda_i(J) for i up to V's width."""
    sym = as_sym_matrix(j)
    v_arr = np.asarray(v, dtype=float)
    _check_orthonormal(v_arr, "v")
    k = v_arr.shape[1]
    lam_restricted = eigvals_desc(v_arr.T @ sym.entries @ v_arr).values
    lam_full = eigvals_desc(sym).values
    margins = [float(lam_full[i] - lam_restricted[i]) for i in range(k)]
    cases = [
        (f"eig-index-{i}", {"j": sym.entries, "v": v_arr}) for i in range(k)
    ]
    return _certify("poincare", margins, cases, margin_tol)


def verify_constraint_equivalence(
    j,
    theta0,
    alt_jacobians: list[np.ndarray],
    margin_tol: float = DEFAULT_MARGIN_TOL,
    rank_tol_rel: float = DEFAULT_RANK_TOL_REL,
) -> TheoremCertificate:
    """Check that every Jacobian annihilating the range basis gives pinv J.

    Each alternative F must satisfy F @ U_r = 0 (up to roundoff) and have
    full row rank n - rank(J); it is recast as an affine constraint
    through theta0 and its bound compared with the pseudoinverse in
    Frobenius norm. The margin is minus that distance.
    """
    sym = as_sym_matrix(j)
    point = np.asarray(theta0, dtype=float).ravel()
    if point.size != sym.dim:
        raise InvalidInput(f"theta0 must have length {sym.dim}, got {point.size}")
    basis = ranked_svd(sym, rank_tol_rel)
    dag = pinv_via_basis(sym, rank_tol_rel)
    margins: list[float] = []
    cases: list[tuple[str, dict[str, np.ndarray]]] = []
    for idx, f_jac in enumerate(alt_jacobians):
        f_arr = np.asarray(f_jac, dtype=float)
        if f_arr.ndim != 2 or f_arr.shape != (sym.dim - basis.rank, sym.dim):
            raise InvalidInput(
                f"alternative {idx} has shape {f_arr.shape}, "
                f"expected ({sym.dim - basis.rank}, {sym.dim})"
            )
        scale = float(np.linalg.norm(f_arr))
        if float(np.linalg.norm(f_arr @ basis.u_r)) > 1e-8 * max(scale, 1.0):
            raise InvalidInput(f"alternative {idx} does not annihilate the range basis")
        spec = ConstraintSpec(
            f_jac=f_arr,
            offset=-f_arr @ point,
            label=f"equivalent-{idx}",
            eval_point=point,
        )
        report = constrained_crb(sym, spec, rank_tol_rel)
        distance = float(np.linalg.norm(report.bound.entries - dag.entries))
        margins.append(-distance)
        cases.append((f"alternative-{idx}", {"j": sym.entries, "f_jac": f_arr}))
    return _certify("equivalence", margins, cases, margin_tol)


def verify_min_rank(
    j,
    trials: int,
    rng_seed: int,
    margin_tol: float = DEFAULT_MARGIN_TOL,
    rank_tol_rel: float = DEFAULT_RANK_TOL_REL,
) -> TheoremCertificate:
    """Check that n - rank(J) constraint rows are necessary and sufficient.

    Draws random full-row-rank Jacobians with m < n - rank(J) rows and
    requires the restricted information to be numerically singular every
    time; then requires nonsingularity for the optimal affine constraint
    with exactly n - rank(J) rows. Margins are expressed through the
    eigenvalue ratio of U'JU against the rank cutoff.
    """
    if trials < 1:
        raise InvalidInput(f"trials must be positive, got {trials}")
    sym = as_sym_matrix(j)
    basis = ranked_svd(sym, rank_tol_rel)
    n, rank = sym.dim, basis.rank
    if rank == n:
        raise InvalidInput("J is numerically nonsingular; the rank claim is vacuous")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=rng_seed))

    def eig_ratio(restricted: np.ndarray) -> float:
        if restricted.shape[0] == 0:
            return 1.0
        evals = np.linalg.eigvalsh(0.5 * (restricted + restricted.T))
        top = float(evals[-1])
        if top <= 0.0:
            return 0.0
        return max(0.0, float(evals[0])) / top

    margins: list[float] = []
    cases: list[tuple[str, dict[str, np.ndarray]]] = []
    for t in range(trials):
        m = int(rng.integers(0, n - rank))
        f_jac = rng.standard_normal((m, n))
        u = null_complement(f_jac, rank_tol_rel)
        ratio = eig_ratio(u.T @ sym.entries @ u)
        # deficient constraint must leave U'JU singular: ratio below cutoff
        margins.append(rank_tol_rel - ratio)
        cases.append((f"deficient-{t}-rows-{m}", {"j": sym.entries, "f_jac": f_jac}))

    spec = optimal_affine_constraint(sym, np.zeros(n), rank_tol_rel)
    u = null_complement(spec.f_jac, rank_tol_rel)
    ratio = eig_ratio(u.T @ sym.entries @ u)
    margins.append(ratio - rank_tol_rel)
    cases.append(("achievable-at-min-rank", {"j": sym.entries, "f_jac": spec.f_jac}))
    return _certify("min_rank", margins, cases, margin_tol)


def counterexample_check(margin_tol: float = DEFAULT_MARGIN_TOL) -> TheoremCertificate:
    """Fixed 4x4 case splitting matrix order from trace and eigenvalue order.

    With J = diag(1, 1, 0, 0) and a particular orthonormal V, the matrix
    D = V (V'JV)^-1 V' - pinv(J) is indefinite (its most negative
    eigenvalue is (1 - sqrt 5)/2), yet tr(D) >= 0 and sorted-eigenvalue
    dominance still holds. The certificate margins are: how far D's
    smallest eigenvalue sits below the -1e-6 indefiniteness threshold,
    tr(D), and the worst eigenvalue-dominance slack.
    """
    j = SymMatrix(np.diag([1.0, 1.0, 0.0, 0.0]))
    v = 0.5 * np.array(
        [
            [-1.0, 1.0],
            [-1.0, -1.0],
            [-1.0, 1.0],
            [-1.0, -1.0],
        ]
    )
    restricted = v.T @ j.entries @ v
    lhs = v @ np.linalg.inv(restricted) @ v.T
    dag = pinv_via_basis(j)
    diff = 0.5 * ((lhs - dag.entries) + (lhs - dag.entries).T)
    evals_diff = np.linalg.eigvalsh(diff)
    min_eig = float(evals_diff[0])

    margin_indefinite = -COUNTEREXAMPLE_NEG_EIG - min_eig
    margin_trace = float(np.trace(diff))
    lam_lhs = eigvals_desc(lhs).values
    lam_dag = eigvals_desc(dag).values
    margin_dominance = float(np.min(lam_lhs - lam_dag))

    margins = [margin_indefinite, margin_trace, margin_dominance]
    cases = [
        ("difference-indefinite", {"j": j.entries, "v": v}),
        ("trace-still-dominates", {"j": j.entries, "v": v}),
        ("eigenvalues-still-dominate", {"j": j.entries, "v": v}),
    ]
    return _certify(
        "counterexample",
        margins,
        cases,
        margin_tol,
        detail=f"min_eigenvalue={format_float(min_eig)}",
    )


def random_rank_deficient_psd(
    n: int, rank: int, rng: np.random.Generator, eig_range: tuple[float, float] = (0.5, 2.0)
) -> SymMatrix:
    """Random PSD matrix with exactly n - rank zero eigenvalues.

    Built as Q diag(d) Q' with Q Haar orthogonal and the nonzero entries
    of d drawn uniformly from eig_range.
    """
    if n < 1 or rank < 0 or rank > n:
        raise InvalidInput(f"need 0 <= rank <= n, got rank={rank}, n={n}")
    lo, hi = eig_range
    if not 0.0 < lo <= hi:
        raise InvalidInput(f"eig_range must be positive and ordered, got {eig_range}")
    q = orthonormal_columns(rng.standard_normal((n, n)))
    d = np.zeros(n)
    d[:rank] = rng.uniform(lo, hi, rank)
    return SymMatrix((q * d) @ q.T)


def certificates_to_csv(certs: list[TheoremCertificate]) -> str:
    """Render certificates as CSV with the crb-kit v1 header."""
    lines = ["# crb-kit v1", "theorem_id,passed,n_cases,worst_margin,detail"]
    for cert in certs:
        lines.append(
            ",".join(
                [
                    cert.theorem_id,
                    "true" if cert.passed else "false",
                    str(cert.n_cases),
                    format_float(cert.worst_margin),
                    cert.detail,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_certificate_witnesses(cert: TheoremCertificate, directory) -> list[str]:
    """Write each witness of a failed certificate as matx files plus a note.

    Returns the written file paths; passing certificates write nothing.
    """
    written: list[str] = []
    os.makedirs(directory, exist_ok=True)
    for idx, witness in enumerate(cert.witnesses):
        stem = f"{cert.theorem_id}_{idx:03d}"
        note_path = os.path.join(directory, f"{stem}.txt")
        with open(note_path, "w", encoding="ascii") as fh:
            fh.write(witness.as_text())
        written.append(note_path)
        for name, arr in witness.matrices:
            mat_path = os.path.join(directory, f"{stem}_{name}.matx")
            with open(mat_path, "w", encoding="ascii") as fh:
                fh.write(dump_matrix(arr))
            written.append(mat_path)
    return written
