"""Fisher information matrices: analytic Gaussian-mean form and Monte Carlo.

The analytic route computes G' Sigma^-1 G from the mean Jacobian. The
Monte-Carlo route averages score outer products over simulated
observations with a deterministic, partition-derived random stream, so
the result is reproducible for a given seed regardless of how the work
would be split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .matlin import SymMatrix
from .statmodel import GaussianMeanModel, Model, finite_difference_score

# Samples per derived stream; the stream for partition p is seeded from
# (rng_seed, p), and partitions are reduced in index order.
PARTITION_SIZE = 4096

MIN_MC_SAMPLES = 100


@dataclass(frozen=True, eq=False)
class FimEstimate:
    """Fisher information estimate.

    method is "analytic" or "monte_carlo". For Monte-Carlo estimates
    std_err_bound is the Frobenius norm of the entrywise standard errors
    and clip_magnitude records how far the smallest eigenvalue had to be
    raised to reach zero; both are 0.0 for analytic estimates.
    """

    matrix: SymMatrix
    method: str
    n_samples: int = 0
    std_err_bound: float = 0.0
    clip_magnitude: float = 0.0


def _isotropic_variance(cov: np.ndarray) -> float | None:
    var = cov[0, 0]
    if np.array_equal(cov, var * np.eye(cov.shape[0])):
        return float(var)
    return None


def fim_gaussian_mean(model, theta) -> FimEstimate:
    """Exact Fisher information G' Sigma^-1 G of a Gaussian-mean model.

    Accepts a GaussianMeanModel or any object exposing as_gaussian_mean().
    """
    gaussian: GaussianMeanModel = (
        model.as_gaussian_mean() if hasattr(model, "as_gaussian_mean") else model
    )
    jac = gaussian.jac_at(theta)
    var = _isotropic_variance(gaussian.noise_cov)
    if var is not None:
        # iid noise keeps the closed form (1/var) G'G exact
        info = (jac.T @ jac) / var
    else:
        whitened = np.linalg.solve(gaussian._chol, jac)
        info = whitened.T @ whitened
    return FimEstimate(matrix=SymMatrix(info), method="analytic")


def _partition_rng(rng_seed: int, partition_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=rng_seed, spawn_key=(partition_index,))
    return np.random.default_rng(seq)


def fim_monte_carlo(
    model: Model, theta, n_samples: int, rng_seed: int
) -> FimEstimate:
    """Monte-Carlo Fisher information from score outer products.

    Uses the model's analytic score when available and a central
    finite-difference score otherwise. The sample mean is symmetrized
    and its negative eigenvalues are clipped to zero so downstream
    positive-semidefinite preconditions hold; the clip size is reported.
    Raises NumericalFailure naming the sample index if a score is
    non-finite.
    """
    if n_samples < MIN_MC_SAMPLES:
        raise InvalidInput(f"n_samples must be at least {MIN_MC_SAMPLES}, got {n_samples}")
    th = np.asarray(theta, dtype=float).ravel()
    if th.size != model.param_dim:
        raise InvalidInput(f"theta must have length {model.param_dim}, got {th.size}")

    if hasattr(model, "score"):
        score_fn = model.score
    else:
        def score_fn(y, theta_):
            return finite_difference_score(model, y, theta_)

    dim = model.param_dim
    total = np.zeros((dim, dim))
    total_sq = np.zeros((dim, dim))
    n_partitions = (n_samples + PARTITION_SIZE - 1) // PARTITION_SIZE
    drawn = 0
    for part in range(n_partitions):
        rng = _partition_rng(rng_seed, part)
        part_count = min(PARTITION_SIZE, n_samples - drawn)
        part_sum = np.zeros((dim, dim))
        part_sum_sq = np.zeros((dim, dim))
        for local in range(part_count):
            y = model.sample(th, rng)
            score = np.asarray(score_fn(y, th), dtype=float).ravel()
            if not np.all(np.isfinite(score)):
                raise NumericalFailure(
                    f"non-finite score at sample {drawn + local}",
                    sample_index=drawn + local,
                )
            outer = np.outer(score, score)
            part_sum += outer
            part_sum_sq += outer * outer
        # fixed reduction order: partitions fold in by index
        total += part_sum
        total_sq += part_sum_sq
        drawn += part_count

    mean = total / n_samples
    # entrywise sample variance of the outer products
    var = (total_sq - n_samples * mean * mean) / (n_samples - 1)
    np.maximum(var, 0.0, out=var)
    std_err = np.sqrt(var / n_samples)
    std_err_bound = float(np.linalg.norm(std_err))

    sym = 0.5 * (mean + mean.T)
    evals, evecs = np.linalg.eigh(sym)
    clip = max(0.0, -float(evals[0]))
    if clip > 0.0:
        sym = (evecs * np.maximum(evals, 0.0)) @ evecs.T
    return FimEstimate(
        matrix=SymMatrix(sym),
        method="monte_carlo",
        n_samples=n_samples,
        std_err_bound=std_err_bound,
        clip_magnitude=clip,
    )
