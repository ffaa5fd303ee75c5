"""Softplus reparameterization between raw and constrained parameters.

Positivity-constrained blocks are trained as unconstrained raw values whose
softplus image supplies the model parameters. Eigenvector blocks stay in
matrix space and are kept orthonormal by projection after each update.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .intensity import HawkesParams
from .rff import CovarianceParams


def softplus(x, s: float):
    """log(1 + exp(s*x)) / s in the overflow-free branch form."""
    x = np.asarray(x, dtype=float)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-s * np.abs(x))) / s
    return float(out) if out.ndim == 0 else out


def softplus_inverse(y, s: float):
    """Raw value whose softplus image is y > 0; stable for large s*y."""
    y = np.asarray(y, dtype=float)
    if (y <= 0).any():
        raise ConfigError("softplus_inverse requires strictly positive inputs")
    out = y + np.log1p(-np.exp(-s * y)) / s
    return float(out) if out.ndim == 0 else out


def softplus_deriv(x, s: float):
    """d softplus / dx = sigmoid(s*x), computed without overflow."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-s * np.abs(x))   # always <= 1
    pos = 1.0 / (1.0 + e)
    out = np.where(x >= 0, pos, 1.0 - pos)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RawParams:
    """Unconstrained trainer state; softplus of raw blocks is positive."""

    raw_k_mu: np.ndarray
    raw_k_gamma: np.ndarray
    raw_w: np.ndarray
    v_mu: np.ndarray
    v_gamma: np.ndarray
    raw_l_mu: np.ndarray
    raw_l_gamma: np.ndarray

    def replace(self, **kw) -> "RawParams":
        return replace(self, **kw)


def raw_to_params(raw: RawParams, s: float, zero_gamma: bool = False) -> HawkesParams:
    """Constrained parameter set from raw state.

    ``zero_gamma`` pins the triggering excitation to exact zeros (the
    spatially inhomogeneous Poisson reduction), which softplus alone cannot
    represent.
    """
    k_gamma = (np.zeros_like(raw.raw_k_gamma) if zero_gamma
               else softplus(raw.raw_k_gamma, s))
    return HawkesParams(
        k_mu=softplus(raw.raw_k_mu, s),
        k_gamma=k_gamma,
        w=softplus(raw.raw_w, s),
        cov_mu=CovarianceParams(eigvecs=raw.v_mu, eigvals=softplus(raw.raw_l_mu, s)),
        cov_gamma=CovarianceParams(eigvecs=raw.v_gamma, eigvals=softplus(raw.raw_l_gamma, s)),
    )


def params_to_raw(params: HawkesParams, s: float) -> RawParams:
    """Invert the reparameterization at a strictly positive parameter set."""
    return RawParams(
        raw_k_mu=softplus_inverse(params.k_mu, s),
        raw_k_gamma=softplus_inverse(params.k_gamma, s),
        raw_w=softplus_inverse(params.w, s),
        v_mu=np.array(params.cov_mu.eigvecs),
        v_gamma=np.array(params.cov_gamma.eigvecs),
        raw_l_mu=softplus_inverse(params.cov_mu.eigvals, s),
        raw_l_gamma=softplus_inverse(params.cov_gamma.eigvals, s),
    )


def unchecked_covariance(eigvecs: np.ndarray, eigvals: np.ndarray) -> CovarianceParams:
    """CovarianceParams without the orthonormality check.

    Finite-difference probes perturb eigenvector entries off the orthonormal
    manifold on purpose; every downstream formula is well defined there.
    """
    cov = object.__new__(CovarianceParams)
    object.__setattr__(cov, "eigvecs", np.asarray(eigvecs, dtype=float))
    object.__setattr__(cov, "eigvals", np.asarray(eigvals, dtype=float).reshape(2))
    return cov


def raw_to_params_unchecked(raw: RawParams, s: float,
                            zero_gamma: bool = False) -> HawkesParams:
    """Like raw_to_params but tolerating non-orthonormal eigenvector blocks."""
    k_gamma = (np.zeros_like(raw.raw_k_gamma) if zero_gamma
               else softplus(raw.raw_k_gamma, s))
    params = object.__new__(HawkesParams)
    object.__setattr__(params, "k_mu", softplus(raw.raw_k_mu, s))
    object.__setattr__(params, "k_gamma", k_gamma)
    object.__setattr__(params, "w", softplus(raw.raw_w, s))
    object.__setattr__(params, "cov_mu",
                       unchecked_covariance(raw.v_mu, softplus(raw.raw_l_mu, s)))
    object.__setattr__(params, "cov_gamma",
                       unchecked_covariance(raw.v_gamma, softplus(raw.raw_l_gamma, s)))
    return params
