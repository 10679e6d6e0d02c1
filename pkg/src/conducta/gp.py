"""Gaussian-process regression with a Cholesky-factored implementation.

Isotropic squared-exponential kernel, zero prior mean. The factor L of
K = K_ff + noise_var * I is kept instead of any explicit inverse; predictions
and the log marginal likelihood go through triangular solves only.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist

JITTER_START = 1e-10
JITTER_CEIL = 1e-4


class GpError(ValueError):
    """Invalid hyperparameters, shapes, or an unfactorizable kernel matrix."""


@dataclass(frozen=True)
class Hyperparams:
    """Kernel and likelihood hyperparameters.

    lengthscale and signal_var must be strictly positive; noise_var may be
    zero (noiseless regression).
    """

    lengthscale: float
    signal_var: float
    noise_var: float

    def validate(self):
        ok = (
            math.isfinite(self.lengthscale) and self.lengthscale > 0
            and math.isfinite(self.signal_var) and self.signal_var > 0
            and math.isfinite(self.noise_var) and self.noise_var >= 0
        )
        if not ok:
            raise GpError(f"invalid hyperparameters {self}")
        return self


@dataclass(frozen=True)
class GpModel:
    """Fitted regression state: training data, factor, and solved coefficients.

    L is the lower Cholesky factor of K + noise_var * I (+ jitter if it was
    needed); alpha_vec solves (L L^T) alpha_vec = y_fit.
    """

    X: np.ndarray
    y: np.ndarray
    hp: Hyperparams
    L: np.ndarray
    alpha_vec: np.ndarray
    jitter: float
    y_shift: float
    y_scale: float

    @property
    def n_train(self):
        return self.X.shape[0]


@dataclass(frozen=True)
class Prediction:
    """Posterior mean, full covariance, and per-point variance."""

    mean: np.ndarray
    cov: np.ndarray
    var: np.ndarray


def kernel(x1, x2, hp):
    """Squared-exponential covariance between two points."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    sq = float(np.sum((x1 - x2) ** 2))
    return hp.signal_var * math.exp(-sq / (2.0 * hp.lengthscale**2))


def kernel_matrix(X1, X2, hp):
    """Cross-covariance matrix between two sets of rows."""
    sq = cdist(np.atleast_2d(X1), np.atleast_2d(X2), "sqeuclidean")
    return hp.signal_var * np.exp(-sq / (2.0 * hp.lengthscale**2))


def _chol_with_jitter(K):
    """Cholesky factor of K, escalating a diagonal jitter if needed.

    Jitter starts at 1e-10 of the mean diagonal and grows tenfold up to 1e-4
    of it; beyond that the matrix is treated as genuinely non-positive and
    the smallest eigenvalue is reported.
    """
    try:
        return cholesky(K, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    base = float(np.mean(np.diag(K)))
    if base <= 0:
        base = 1.0
    level = JITTER_START
    while level <= JITTER_CEIL * (1 + 1e-9):
        jitter = level * base
        try:
            return cholesky(K + jitter * np.eye(K.shape[0]), lower=True), jitter
        except np.linalg.LinAlgError:
            level *= 10.0
    smallest = float(np.linalg.eigvalsh(K)[0])
    raise GpError(
        f"kernel matrix is not positive definite (smallest eigenvalue "
        f"~{smallest:.3e}) even after jitter up to {JITTER_CEIL * base:.3e}"
    )


def fit(X, y, hp, standardize=False):
    """Fit the GP: factor K + noise_var I and solve for the coefficients.

    With standardize=True the targets are shifted/scaled to zero mean and
    unit variance before fitting (predictions are mapped back); off by
    default since conductance targets already live in [0, 1].
    """
    hp.validate()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise GpError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    if X.shape[0] < 1:
        raise GpError("need at least one training point")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise GpError("training data contains non-finite values")

    y_shift, y_scale = 0.0, 1.0
    if standardize:
        y_shift = float(np.mean(y))
        spread = float(np.std(y))
        y_scale = spread if spread > 0 else 1.0
    y_fit = (y - y_shift) / y_scale

    K = kernel_matrix(X, X, hp) + hp.noise_var * np.eye(X.shape[0])
    L, jitter = _chol_with_jitter(K)
    alpha_vec = cho_solve((L, True), y_fit)
    return GpModel(
        X=X, y=y, hp=hp, L=L, alpha_vec=alpha_vec,
        jitter=jitter, y_shift=y_shift, y_scale=y_scale,
    )


def predict(model, Xstar):
    """Posterior mean and covariance at new inputs via triangular solves.

    mean = Kstar^T (L L^T)^{-1} y and cov = Kss - V^T V with V = L^{-1} Kstar;
    no explicit inverse is ever formed. Negative variance dust is clamped to
    zero.
    """
    Xstar = np.atleast_2d(np.asarray(Xstar, dtype=float))
    if Xstar.shape[1] != model.X.shape[1]:
        raise GpError(
            f"test inputs have dimension {Xstar.shape[1]}, expected {model.X.shape[1]}"
        )
    Kstar = kernel_matrix(model.X, Xstar, model.hp)
    mean_fit = Kstar.T @ model.alpha_vec
    V = solve_triangular(model.L, Kstar, lower=True)
    Kss = kernel_matrix(Xstar, Xstar, model.hp)
    cov_fit = Kss - V.T @ V
    cov_fit = 0.5 * (cov_fit + cov_fit.T)

    mean = mean_fit * model.y_scale + model.y_shift
    cov = cov_fit * model.y_scale**2
    var = np.clip(np.diag(cov).copy(), 0.0, None)
    return Prediction(mean=mean, cov=cov, var=var)


def log_marginal_likelihood(model):
    """Log evidence of the training targets under the GP prior.

    -1/2 y^T alpha - sum(log L_ii) - (N/2) log(2 pi), plus the scale term
    when the model was fitted on standardized targets so the value always
    refers to the original-unit density.
    """
    y_fit = (model.y - model.y_shift) / model.y_scale
    n = model.n_train
    value = (
        -0.5 * float(y_fit @ model.alpha_vec)
        - float(np.sum(np.log(np.diag(model.L))))
        - 0.5 * n * math.log(2.0 * math.pi)
    )
    return value - n * math.log(model.y_scale)


def sample_posterior_functions(model, Xstar, count, seed):
    """Draw function values from the posterior at Xstar, deterministic per seed."""
    if count < 1:
        raise GpError(f"count must be >= 1, got {count}")
    pred = predict(model, Xstar)
    cov = pred.cov
    base = float(np.mean(np.diag(cov)))
    if base <= 0:
        base = model.hp.signal_var * model.y_scale**2
    level = JITTER_START
    L = None
    while level <= JITTER_CEIL * (1 + 1e-9):
        try:
            L = cholesky(cov + level * base * np.eye(cov.shape[0]), lower=True)
            break
        except np.linalg.LinAlgError:
            level *= 10.0
    if L is None:
        raise GpError("posterior covariance could not be factorized for sampling")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(size=(count, cov.shape[0]))
    return pred.mean[None, :] + z @ L.T


def dump_model(model, path):
    """Write hyperparameters, training-data checksum, and size as JSON.

    Cholesky factors are recomputed on load, never serialized.
    """
    payload = {
        "schema": 1,
        "hyperparams": {
            "lengthscale": model.hp.lengthscale,
            "signal_var": model.hp.signal_var,
            "noise_var": model.hp.noise_var,
        },
        "n_train": model.n_train,
        "input_dim": int(model.X.shape[1]),
        "standardized": model.y_scale != 1.0 or model.y_shift != 0.0,
        "data_sha256": training_checksum(model.X, model.y),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path, X, y):
    """Re-fit a dumped model against its original training data.

    The checksum guards against silently pairing the dump with different data.
    """
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    digest = training_checksum(X, y)
    if digest != payload["data_sha256"]:
        raise GpError("training data does not match the stored checksum")
    hp = Hyperparams(**payload["hyperparams"])
    return fit(X, y, hp, standardize=payload.get("standardized", False))


def training_checksum(X, y):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(X, dtype=float).tobytes())
    h.update(np.ascontiguousarray(y, dtype=float).tobytes())
    return h.hexdigest()
