"""Statistical observation models.

Two concrete families: Gaussian models whose mean depends on the
parameter through a differentiable map, and the blind single-channel
model y = s * h + noise whose scalar exchange (a*s, h/a) makes the
Fisher information singular with a one-dimensional null space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

import numpy as np

from .errors import DegenerateParameter, InvalidInput, InvalidModel

# Step scale for finite-difference scores: h_i = FD_STEP * (1 + |theta_i|).
FD_STEP = 1e-5


@runtime_checkable
class Model(Protocol):
    """Sampling model with a differentiable log density.

    score is optional; callers fall back to finite differences of
    log_density when it is absent.
    """

    param_dim: int
    obs_dim: int

    def log_density(self, y, theta) -> float: ...

    def sample(self, theta, rng: np.random.Generator) -> np.ndarray: ...


def _as_vector(values, size: int | None, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if size is not None and arr.size != size:
        raise InvalidInput(f"{name} must have length {size}, got {arr.size}")
    return arr


def convolve(s, h) -> np.ndarray:
    """Full linear convolution of two nonempty 1-d sequences."""
    s_arr = np.asarray(s, dtype=float).ravel()
    h_arr = np.asarray(h, dtype=float).ravel()
    if s_arr.size == 0 or h_arr.size == 0:
        raise InvalidInput("convolve requires nonempty inputs")
    return np.convolve(s_arr, h_arr)


def blind_channel_mean_jac(theta, dims: tuple[int, int]) -> np.ndarray:
    """Jacobian of theta = (s, h) -> s * h (full convolution).

    Shape is (s_len + h_len - 1, s_len + h_len). The column for s_i is a
    copy of h shifted down by i; the column for h_j is a copy of s
    shifted down by j.
    """
    s_len, h_len = int(dims[0]), int(dims[1])
    if s_len < 1 or h_len < 1:
        raise InvalidInput(f"dims must be positive, got {dims}")
    th = _as_vector(theta, s_len + h_len, "theta")
    s, h = th[:s_len], th[s_len:]
    obs = s_len + h_len - 1
    jac = np.zeros((obs, s_len + h_len))
    for i in range(s_len):
        jac[i : i + h_len, i] = h
    for j in range(h_len):
        jac[j : j + s_len, s_len + j] = s
    return jac


def scalar_ambiguity_direction(theta, dims: tuple[int, int]) -> np.ndarray:
    """Unit tangent of the scalar exchange (a*s, h/a) at a = 1.

    Returns (s, -h) normalized; this direction lies in the null space of
    the blind-channel Fisher information at generic theta.
    """
    s_len, h_len = int(dims[0]), int(dims[1])
    th = _as_vector(theta, s_len + h_len, "theta")
    norm = float(np.linalg.norm(th))
    if norm == 0.0:
        raise DegenerateParameter("ambiguity direction undefined at theta = 0")
    direction = np.concatenate([th[:s_len], -th[s_len:]])
    return direction / norm


@dataclass(frozen=True, eq=False)
class GaussianMeanModel:
    """y ~ N(mean_fn(theta), noise_cov) with a differentiable mean map.

    noise_cov must be symmetric positive definite. mean_fn maps a
    param_dim vector to an obs_dim vector and mean_jac returns the
    (obs_dim, param_dim) Jacobian of that map.
    """

    mean_fn: Callable[[np.ndarray], np.ndarray]
    mean_jac: Callable[[np.ndarray], np.ndarray]
    noise_cov: np.ndarray
    param_dim: int
    obs_dim: int

    def __post_init__(self):
        if self.param_dim < 1 or self.obs_dim < 1:
            raise InvalidModel(f"dimensions must be positive, got ({self.param_dim}, {self.obs_dim})")
        cov = np.asarray(self.noise_cov, dtype=float)
        if cov.shape != (self.obs_dim, self.obs_dim):
            raise InvalidModel(f"noise_cov shape {cov.shape} does not match obs_dim {self.obs_dim}")
        if not np.all(np.isfinite(cov)):
            raise InvalidModel("noise_cov contains non-finite entries")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(cov).max()))):
            raise InvalidModel("noise_cov must be symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise InvalidModel("noise_cov must be positive definite") from exc
        cov.flags.writeable = False
        object.__setattr__(self, "noise_cov", cov)
        object.__setattr__(self, "_chol", chol)
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        object.__setattr__(self, "_log_norm", -0.5 * (self.obs_dim * np.log(2.0 * np.pi) + log_det))

    def mean_at(self, theta) -> np.ndarray:
        th = _as_vector(theta, self.param_dim, "theta")
        return _as_vector(self.mean_fn(th), self.obs_dim, "mean_fn(theta)")

    def jac_at(self, theta) -> np.ndarray:
        th = _as_vector(theta, self.param_dim, "theta")
        jac = np.asarray(self.mean_jac(th), dtype=float)
        if jac.shape != (self.obs_dim, self.param_dim):
            raise InvalidModel(
                f"mean_jac returned shape {jac.shape}, expected ({self.obs_dim}, {self.param_dim})"
            )
        return jac

    def _solve_noise(self, resid: np.ndarray) -> np.ndarray:
        # noise_cov^-1 resid via the stored Cholesky factor
        z = np.linalg.solve(self._chol, resid)
        return np.linalg.solve(self._chol.T, z)

    def log_density(self, y, theta) -> float:
        obs = _as_vector(y, self.obs_dim, "y")
        resid = obs - self.mean_at(theta)
        z = np.linalg.solve(self._chol, resid)
        return float(self._log_norm - 0.5 * z @ z)

    def sample(self, theta, rng: np.random.Generator) -> np.ndarray:
        return self.mean_at(theta) + self._chol @ rng.standard_normal(self.obs_dim)

    def score(self, y, theta) -> np.ndarray:
        obs = _as_vector(y, self.obs_dim, "y")
        resid = obs - self.mean_at(theta)
        return self.jac_at(theta).T @ self._solve_noise(resid)


def gaussian_location(dim: int, noise_var: float = 1.0) -> GaussianMeanModel:
    """Gaussian model with identity mean map and isotropic noise."""
    if dim < 1:
        raise InvalidModel(f"dim must be positive, got {dim}")
    if not noise_var > 0.0:
        raise InvalidModel(f"noise_var must be positive, got {noise_var}")
    eye = np.eye(dim)
    return GaussianMeanModel(
        mean_fn=lambda th: np.asarray(th, dtype=float),
        mean_jac=lambda th: eye,
        noise_cov=noise_var * eye,
        param_dim=dim,
        obs_dim=dim,
    )


@dataclass(frozen=True, eq=False)
class BlindChannelModel:
    """Blind single-channel model y = s * h + w, w ~ N(0, noise_var I).

    theta stacks the source s (length s_len) and the channel h (length
    h_len). The likelihood depends on theta only through s * h, so
    (a*s, h/a) is observationally equivalent to (s, h) for every a != 0
    and the Fisher information has a one-dimensional null space at
    generic theta.
    """

    s_len: int
    h_len: int
    noise_var: float = 1.0

    def __post_init__(self):
        if self.s_len < 1 or self.h_len < 1:
            raise InvalidModel(f"filter lengths must be positive, got ({self.s_len}, {self.h_len})")
        if not self.noise_var > 0.0:
            raise InvalidModel(f"noise_var must be positive, got {self.noise_var}")
        gaussian = GaussianMeanModel(
            mean_fn=self.mean_at,
            mean_jac=self.jac_at,
            noise_cov=self.noise_var * np.eye(self.obs_dim),
            param_dim=self.param_dim,
            obs_dim=self.obs_dim,
        )
        object.__setattr__(self, "_gaussian", gaussian)

    @property
    def param_dim(self) -> int:
        return self.s_len + self.h_len

    @property
    def obs_dim(self) -> int:
        return self.s_len + self.h_len - 1

    @property
    def dims(self) -> tuple[int, int]:
        return (self.s_len, self.h_len)

    def split(self, theta) -> tuple[np.ndarray, np.ndarray]:
        th = _as_vector(theta, self.param_dim, "theta")
        return th[: self.s_len], th[self.s_len :]

    def mean_at(self, theta) -> np.ndarray:
        s, h = self.split(theta)
        return convolve(s, h)

    def jac_at(self, theta) -> np.ndarray:
        return blind_channel_mean_jac(theta, self.dims)

    def ambiguity_direction(self, theta) -> np.ndarray:
        return scalar_ambiguity_direction(theta, self.dims)

    def as_gaussian_mean(self) -> GaussianMeanModel:
        return self._gaussian

    def log_density(self, y, theta) -> float:
        return self._gaussian.log_density(y, theta)

    def sample(self, theta, rng: np.random.Generator) -> np.ndarray:
        return self._gaussian.sample(theta, rng)

    def score(self, y, theta) -> np.ndarray:
        return self._gaussian.score(y, theta)


def finite_difference_score(model: Model, y, theta) -> np.ndarray:
    """Central finite-difference gradient of log_density in theta."""
    th = np.asarray(theta, dtype=float).ravel()
    grad = np.empty(th.size)
    for i in range(th.size):
        step = FD_STEP * (1.0 + abs(th[i]))
        up = th.copy()
        up[i] += step
        down = th.copy()
        down[i] -= step
        grad[i] = (model.log_density(y, up) - model.log_density(y, down)) / (2.0 * step)
    return grad
