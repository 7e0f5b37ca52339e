import math

import numpy as np
import pytest

from crbkit import (
    ConstraintSpec,
    InvalidInput,
    RankDeficientConstraint,
    constrained_crb,
    crb_exists,
    is_psd,
    optimal_affine_constraint,
    pinv_via_basis,
    ranked_svd,
    unconstrained_crb,
)
from util import make_psd, random_orthonormal

HOUSE = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])


def test_unconstrained_identity():
    report = unconstrained_crb(np.eye(2))
    assert report.exists
    assert report.constraint_used == "none"
    assert not report.singular_fim_warning
    assert np.array_equal(report.bound.entries, np.eye(2))
    assert np.isclose(report.trace, 2.0)


def test_unconstrained_singular_sets_warning():
    report = unconstrained_crb(np.diag([2.0, 0.0]))
    assert report.singular_fim_warning
    assert np.allclose(report.bound.entries, np.diag([0.5, 0.0]), atol=1e-14)
    assert np.allclose(report.u_projector.entries, np.diag([1.0, 0.0]), atol=1e-14)
    assert np.allclose(report.eigenvalues.values, [0.5, 0.0], atol=1e-14)


def test_unconstrained_ones_matrix():
    report = unconstrained_crb(np.ones((2, 2)))
    assert np.allclose(report.bound.entries, 0.25 * np.ones((2, 2)), atol=1e-12)


def test_constrained_frozen_examples():
    j = np.diag([2.0, 0.0])

    pinned = constrained_crb(j, np.array([[0.0, 1.0]]))
    assert pinned.exists
    assert np.allclose(pinned.bound.entries, np.diag([0.5, 0.0]), atol=1e-12)

    root = 1.0 / np.sqrt(2.0)
    diagonal = constrained_crb(j, np.array([[root, root]]))
    assert diagonal.exists
    assert np.allclose(diagonal.bound.entries, HOUSE, atol=1e-12)
    assert np.isclose(diagonal.trace, 1.0)

    useless = constrained_crb(j, np.array([[1.0, 0.0]]))
    assert not useless.exists
    assert useless.bound is None
    assert useless.trace == math.inf
    assert useless.eigenvalues is None


def test_crb_exists_examples():
    j = np.diag([2.0, 0.0])
    assert crb_exists(j, np.array([[0.0, 1.0]]))
    assert not crb_exists(j, np.array([[1.0, 0.0]]))
    assert crb_exists(np.eye(2), np.array([[1.0, 0.0]]))


def test_constraint_used_provenance():
    j = np.diag([2.0, 0.0])
    affine = constrained_crb(j, optimal_affine_constraint(j, [3.0, 4.0]))
    assert affine.constraint_used == "affine"
    jac_only = constrained_crb(j, ConstraintSpec(f_jac=np.array([[0.0, 1.0]])))
    assert jac_only.constraint_used == "jacobian-only"


def test_fully_constrained_zero_bound():
    report = constrained_crb(np.diag([2.0, 0.0]), np.eye(2))
    assert report.exists
    assert np.array_equal(report.bound.entries, np.zeros((2, 2)))
    assert np.array_equal(report.u_projector.entries, np.zeros((2, 2)))


def test_empty_constraint_gives_inverse_for_nonsingular_j():
    rng = np.random.default_rng(18)
    j = make_psd(rng, 4, 4)
    report = constrained_crb(j, np.zeros((0, 4)))
    assert np.allclose(report.bound.entries, np.linalg.inv(j), atol=1e-9)
    assert report.constraint_used == "jacobian-only"


def test_bound_properties_on_random_singular_matrices():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        rank = int(rng.integers(1, n))
        report = unconstrained_crb(make_psd(rng, n, rank))
        assert report.singular_fim_warning
        assert np.isclose(report.trace, report.eigenvalues.values.sum(), rtol=1e-9)
        assert is_psd(report.bound)


def test_null_space_constraint_reproduces_pinv():
    rng = np.random.default_rng(21)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        rank = int(rng.integers(1, n))
        j = make_psd(rng, n, rank)
        report = constrained_crb(j, ranked_svd(j).u_bar.T)
        assert report.exists
        gap = np.linalg.norm(report.bound.entries - pinv_via_basis(j).entries)
        assert gap <= 1e-9


def test_bound_invariant_under_constraint_row_mixing():
    rng = np.random.default_rng(19)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        rank = int(rng.integers(1, n))
        j = make_psd(rng, n, rank)
        m = n - rank
        f = random_orthonormal(rng, n, m).T
        mix = rng.standard_normal((m, m)) + 3.0 * np.eye(m)
        first = constrained_crb(j, f)
        second = constrained_crb(j, mix @ f)
        assert first.exists and second.exists
        assert np.linalg.norm(first.bound.entries - second.bound.entries) <= 1e-9
        assert np.linalg.norm(first.u_projector.entries - second.u_projector.entries) <= 1e-9


def test_restricted_formula_invariant_under_basis_rotation():
    rng = np.random.default_rng(20)
    j = make_psd(rng, 5, 3)
    u = random_orthonormal(rng, 5, 3)
    q = random_orthonormal(rng, 3, 3)
    direct = u @ np.linalg.inv(u.T @ j @ u) @ u.T
    rotated_u = u @ q
    rotated = rotated_u @ np.linalg.inv(rotated_u.T @ j @ rotated_u) @ rotated_u.T
    assert np.linalg.norm(direct - rotated) <= 1e-9


def test_dimension_mismatch_rejected():
    with pytest.raises(InvalidInput):
        constrained_crb(np.eye(3), np.array([[1.0, 0.0]]))
    with pytest.raises(InvalidInput):
        crb_exists(np.eye(3), np.array([[1.0, 0.0]]))


def test_dependent_constraint_rows_rejected():
    with pytest.raises(RankDeficientConstraint):
        constrained_crb(np.eye(2), np.array([[1.0, 1.0], [2.0, 2.0]]))
