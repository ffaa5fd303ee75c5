"""Randomized Fourier feature machinery for the spatial Gaussian kernels.

A basis is a frozen draw of random directions and phases. Embedding a point
with a covariance whitens it through the covariance's eigendecomposition, so
one basis serves any covariance. The exact Gaussian density is kept alongside
as the reference kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

MAX_DIM = 5000
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RFFBasis:
    """Frozen random feature draw: directions (2, D), phases (D,)."""

    dim: int
    directions: np.ndarray
    phases: np.ndarray
    seed: int

    def __post_init__(self):
        directions = np.ascontiguousarray(np.asarray(self.directions, dtype=float))
        phases = np.ascontiguousarray(np.asarray(self.phases, dtype=float))
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "phases", phases)
        if directions.shape != (2, self.dim) or phases.shape != (self.dim,):
            raise ConfigError("basis arrays inconsistent with dim")
        directions.flags.writeable = False
        phases.flags.writeable = False


def sample_basis(dim: int, seed: int) -> RFFBasis:
    """Draw a basis: standard-normal directions, uniform phases on [0, 2pi)."""
    if not (1 <= dim <= MAX_DIM):
        raise ConfigError(f"feature dimension must lie in [1, {MAX_DIM}], got {dim}")
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((2, dim))
    phases = rng.uniform(0.0, TWO_PI, dim)
    return RFFBasis(dim=dim, directions=directions, phases=phases, seed=seed)


@dataclass(frozen=True)
class CovarianceParams:
    """2x2 covariance through its eigendecomposition V diag(l) V^T.

    The eigenvector matrix must be orthonormal and the eigenvalues positive,
    which is exactly what the projected/reparameterized optimizer maintains.
    """

    eigvecs: np.ndarray
    eigvals: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.eigvecs, dtype=float))
        l = np.ascontiguousarray(np.asarray(self.eigvals, dtype=float).reshape(2))
        object.__setattr__(self, "eigvecs", v)
        object.__setattr__(self, "eigvals", l)
        if v.shape != (2, 2):
            raise ConfigError("eigvecs must be 2x2")
        if np.abs(v.T @ v - np.eye(2)).max() > 1e-10:
            raise ConfigError("eigvecs must be orthonormal within 1e-10")
        if not (l > 0).all():
            raise ConfigError(f"eigenvalues must be positive, got {l}")
        v.flags.writeable = False
        l.flags.writeable = False

    @classmethod
    def from_matrix(cls, sigma: np.ndarray) -> "CovarianceParams":
        """Eigendecompose a symmetric positive-definite 2x2 matrix."""
        sigma = np.asarray(sigma, dtype=float)
        vals, vecs = np.linalg.eigh(sigma)
        if not (vals > 0).all():
            raise ConfigError("covariance matrix must be positive definite")
        return cls(eigvecs=vecs, eigvals=vals)

    @classmethod
    def isotropic(cls, variance: float) -> "CovarianceParams":
        return cls(eigvecs=np.eye(2), eigvals=np.full(2, float(variance)))

    @property
    def det_inv_sqrt(self) -> float:
        return 1.0 / np.sqrt(self.eigvals[0] * self.eigvals[1])

    @property
    def norm_const(self) -> float:
        """Peak density 1/(2pi) * |Sigma|^{-1/2} of the Gaussian kernel."""
        return self.det_inv_sqrt / TWO_PI

    @property
    def whitening(self) -> np.ndarray:
        """V diag(l^{-1/2}), the map applied to points inside the embedding."""
        return self.eigvecs * (self.eigvals ** -0.5)[None, :]

    @property
    def precision(self) -> np.ndarray:
        w = self.whitening
        return w @ w.T


def covariance_matrix(cov: CovarianceParams) -> np.ndarray:
    """Reconstruct Sigma = V diag(l) V^T."""
    return (cov.eigvecs * cov.eigvals[None, :]) @ cov.eigvecs.T


def gaussian_kernel_exact(a, b, cov: CovarianceParams):
    """Exact Gaussian density kernel between locations (broadcasts over rows)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d.reshape(-1, 2)
    q = np.einsum("ni,ij,nj->n", d, cov.precision, d)
    out = cov.norm_const * np.exp(-0.5 * q)
    return float(out[0]) if out.size == 1 else out


def embed_cos_sin(points, cov: CovarianceParams, basis: RFFBasis):
    """Cosine and sine feature maps of points (n, 2); each row scaled sqrt(2/D).

    The sine map is the byproduct every feature derivative reuses.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    arg = pts @ (cov.whitening @ basis.directions)
    arg += basis.phases[None, :]
    scale = np.sqrt(2.0 / basis.dim)
    return scale * np.cos(arg), scale * np.sin(arg)


def embed(points, cov: CovarianceParams, basis: RFFBasis) -> np.ndarray:
    """Cosine feature matrix (n, D) whose inner products approximate the kernel."""
    z, _ = embed_cos_sin(points, cov, basis)
    return z


def kernel_approx(a, b, cov: CovarianceParams, basis: RFFBasis):
    """Randomized kernel value: norm_const * z_a . z_b.

    Finite feature counts can make this slightly negative; values are passed
    through unclamped.
    """
    za = embed(a, cov, basis)
    zb = embed(b, cov, basis)
    out = cov.norm_const * np.einsum("nd,nd->n", za, zb)
    return float(out[0]) if out.size == 1 else out
