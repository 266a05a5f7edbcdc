"""Sparse-autoencoder objective exposed as a black-box cost over a flat vector.

A single autoencoder is a sigmoid encoder (hidden x input weights) and a
sigmoid decoder (input x hidden weights).  Its training cost is

    E = (1/N) * sum_n sum_k (x[n,k] - xhat[n,k])^2
        + lambda * l2_penalty + beta * sparsity_penalty

where the L2 penalty is half the sum of squared connection weights (biases
excluded), and the sparsity penalty is the summed KL divergence between the
target mean activation rho and each hidden unit's observed mean activation.
The regularization coefficients lambda and beta live inside the searched
parameter vector alongside the weights and biases, so a derivative-free
optimizer tunes them jointly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Matrix, sigmoid
from .errors import ConfigError, ShapeError

# Mean activations are clamped away from {0, 1} before the logs; sigmoid
# outputs cannot reach the endpoints exactly but accumulated means can
# underflow to them.
RHO_HAT_EPS = 1e-8


@dataclass(frozen=True)
class AutoencoderSpec:
    """Shape and regularization ranges of one autoencoder."""

    input_dim: int
    hidden_dim: int
    rho: float = 0.05
    lambda_bounds: tuple[float, float] = (0.0, 1.0)
    beta_bounds: tuple[float, float] = (0.0, 10.0)

    def __post_init__(self):
        if self.input_dim < 1 or self.hidden_dim < 1:
            raise ConfigError(
                f"autoencoder dims must be >= 1, got input={self.input_dim}, hidden={self.hidden_dim}"
            )
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        for name, (lo, hi) in (("lambda", self.lambda_bounds), ("beta", self.beta_bounds)):
            if lo < 0 or lo > hi:
                raise ConfigError(f"{name}_bounds must satisfy 0 <= lo <= hi, got ({lo}, {hi})")

    @property
    def n_params(self) -> int:
        """Length of the flat parameter vector (weights, biases, lambda, beta)."""
        k, d = self.input_dim, self.hidden_dim
        return d * k + d + k * d + k + 2


@dataclass
class AutoencoderParams:
    """One autoencoder's weights, biases and regularization coefficients."""

    w_enc: Matrix  # hidden_dim x input_dim
    b_enc: np.ndarray  # hidden_dim
    w_dec: Matrix  # input_dim x hidden_dim
    b_dec: np.ndarray  # input_dim
    lam: float
    beta: float


def flatten(params: AutoencoderParams) -> np.ndarray:
    """Pack params into one flat vector: w_enc, b_enc, w_dec, b_dec, lambda, beta.

    Both weight blocks are laid out row-major.
    """
    return np.concatenate(
        [
            np.asarray(params.w_enc, dtype=np.float64).ravel(),
            np.asarray(params.b_enc, dtype=np.float64).ravel(),
            np.asarray(params.w_dec, dtype=np.float64).ravel(),
            np.asarray(params.b_dec, dtype=np.float64).ravel(),
            [float(params.lam), float(params.beta)],
        ]
    )


def unflatten(spec: AutoencoderSpec, v: np.ndarray) -> AutoencoderParams:
    """Inverse of :func:`flatten`; lambda and beta are clamped into spec bounds."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != spec.n_params:
        raise ShapeError(
            f"parameter vector has length {v.size}, spec "
            f"({spec.input_dim}x{spec.hidden_dim}) requires {spec.n_params}"
        )
    k, d = spec.input_dim, spec.hidden_dim
    i = 0
    w_enc = v[i : i + d * k].reshape(d, k).copy()
    i += d * k
    b_enc = v[i : i + d].copy()
    i += d
    w_dec = v[i : i + k * d].reshape(k, d).copy()
    i += k * d
    b_dec = v[i : i + k].copy()
    i += k
    lam = float(np.clip(v[i], *spec.lambda_bounds))
    beta = float(np.clip(v[i + 1], *spec.beta_bounds))
    return AutoencoderParams(w_enc, b_enc, w_dec, b_dec, lam, beta)


def encode(params: AutoencoderParams, x: Matrix) -> Matrix:
    """Hidden activations sigmoid(x @ w_enc.T + b_enc); rows are samples."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.w_enc.shape[1]:
        raise ShapeError(
            f"encode expects N x {params.w_enc.shape[1]} input, got {x.shape}"
        )
    return sigmoid(x @ params.w_enc.T + params.b_enc)


def decode(params: AutoencoderParams, h: Matrix) -> Matrix:
    """Reconstruction sigmoid(h @ w_dec.T + b_dec)."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[1] != params.w_dec.shape[1]:
        raise ShapeError(
            f"decode expects N x {params.w_dec.shape[1]} input, got {h.shape}"
        )
    return sigmoid(h @ params.w_dec.T + params.b_dec)


def kl_term(rho: float, rho_hat: float) -> float:
    """KL divergence between Bernoulli(rho) and Bernoulli(rho_hat).

    rho_hat is clamped into [RHO_HAT_EPS, 1 - RHO_HAT_EPS] first.  Natural
    logarithm; >= 0 with equality iff rho_hat == rho.
    """
    if not 0.0 < rho < 1.0:
        raise ConfigError(f"rho must lie in (0, 1), got {rho}")
    rho_hat = min(max(float(rho_hat), RHO_HAT_EPS), 1.0 - RHO_HAT_EPS)
    return rho * np.log(rho / rho_hat) + (1.0 - rho) * np.log((1.0 - rho) / (1.0 - rho_hat))


def sparsity_penalty(spec: AutoencoderSpec, h: Matrix) -> float:
    """Sum over hidden units of KL(rho || mean activation of that unit)."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[1] != spec.hidden_dim:
        raise ShapeError(f"expected N x {spec.hidden_dim} activations, got {h.shape}")
    if h.shape[0] == 0:
        raise ConfigError("sparsity penalty needs at least one sample")
    rho_hat = np.clip(h.mean(axis=0), RHO_HAT_EPS, 1.0 - RHO_HAT_EPS)
    rho = spec.rho
    return float(
        np.sum(rho * np.log(rho / rho_hat) + (1.0 - rho) * np.log((1.0 - rho) / (1.0 - rho_hat)))
    )


def l2_penalty(params: AutoencoderParams) -> float:
    """Half the sum of squared encoder and decoder weights; biases excluded."""
    return 0.5 * (float(np.sum(params.w_enc**2)) + float(np.sum(params.w_dec**2)))


def cost(spec: AutoencoderSpec, params: AutoencoderParams, x: Matrix) -> float:
    """Reconstruction error plus weighted L2 and sparsity penalties."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"cost needs a non-empty N x {spec.input_dim} matrix, got {x.shape}")
    h = encode(params, x)
    xhat = decode(params, h)
    recon = float(np.sum((x - xhat) ** 2)) / x.shape[0]
    return recon + params.lam * l2_penalty(params) + params.beta * sparsity_penalty(spec, h)


def objective(spec: AutoencoderSpec, x: Matrix):
    """The training cost as a pure function of the flat parameter vector.

    The returned callable is safe to invoke from multiple threads; it never
    mutates its argument or any shared state.
    """
    x = np.array(x, dtype=np.float64, copy=True)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"objective needs a non-empty 2-D matrix, got shape {x.shape}")
    if x.shape[1] != spec.input_dim:
        raise ShapeError(f"objective data has {x.shape[1]} columns, spec wants {spec.input_dim}")

    def f(v: np.ndarray) -> float:
        return cost(spec, unflatten(spec, v), x)

    return f
