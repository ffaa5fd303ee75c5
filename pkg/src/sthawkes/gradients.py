"""Analytic gradients of the window NLL for every parameter block.

Everything is derived by hand from the matrix likelihood and validated
against central finite differences. Excitation blocks come from the relation
matrices directly; decay, eigenvector and eigenvalue blocks differentiate
through the pairwise decay matrix and the feature embedding, reusing the
cached sine map of the embedding argument. The compensator contributes to
the excitation and decay blocks only, since each spatial kernel integrates
to one regardless of its covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import NumericalError
from .events import EventSequence, one_hot
from .intensity import (
    INTENSITY_FLOOR,
    HawkesParams,
    compensator_window,
    pairwise_decay,
)
from .reparam import RawParams, raw_to_params_unchecked, softplus_deriv
from .rff import RFFBasis, embed_cos_sin


@dataclass
class GradientSet:
    """Gradient blocks shaped like the parameter set they differentiate."""

    d_k_mu: np.ndarray
    d_k_gamma: np.ndarray
    d_w: np.ndarray
    d_v_mu: np.ndarray
    d_v_gamma: np.ndarray
    d_l_mu: np.ndarray
    d_l_gamma: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def assert_finite(self):
        for name, block in self.as_dict().items():
            if not np.isfinite(block).all():
                raise NumericalError(f"non-finite gradient block {name}")


BLOCK_NAMES = [f.name for f in fields(GradientSet)]


def nll_and_grad(
    batch: EventSequence,
    full: EventSequence,
    params: HawkesParams,
    basis: RFFBasis,
    basis_gamma: RFFBasis | None = None,
    cutoff: float | None = None,
    floor: float = INTENSITY_FLOOR,
    include_gamma: bool = True,
    barrier: float | None = None,
) -> tuple[float, GradientSet]:
    """Window NLL and its gradient with respect to the constrained blocks.

    ``batch`` must be a contiguous window of ``full``; its (t_start,
    duration] bounds the compensator. With ``include_gamma`` off the
    triggering pipeline is skipped entirely and its blocks come back zero
    (the spatially inhomogeneous Poisson training path masks them anyway).

    ``barrier``, when set, censors the log term below it: events whose
    randomized intensity sits at or under the barrier contribute a constant
    ``log(barrier)`` and no gradient. Feature noise makes a few isolated
    events' approximate intensities dip near or below zero in tight-kernel
    regimes; hard-failing (or repelling) on them would abort or bias the
    descent. Training uses this surrogate; reported likelihoods never do.
    """
    basis_ga = basis_gamma or basis
    u_count = full.num_types
    x = full.locations
    y = one_hot(full)
    i0, i1 = _batch_range(batch, full)
    b = i1 - i0
    rows = slice(i0, i1)
    ev_types = full.types[rows]
    a_w, b_w = batch.t_start, batch.duration
    t_norm = full.window_length
    win_len = b_w - a_w

    c_mu = params.cov_mu.norm_const
    z_mu, s_mu = embed_cos_sin(x, params.cov_mu, basis)
    q_mu = (c_mu / t_norm) * (z_mu[rows] @ (z_mu.T @ y))

    # Exact-zero triggering still needs the relation matrix for d_k_gamma,
    # so only an explicit include_gamma=False skips the pairwise pipeline.
    c_ga = params.cov_gamma.norm_const
    if include_gamma:
        z_ga, s_ga = embed_cos_sin(x, params.cov_gamma, basis_ga)
        mask, dt, d = pairwise_decay(
            full.times[rows], ev_types, full.times, full.types, params.w, cutoff
        )
        gram = z_ga[rows] @ z_ga.T
        q_ga = c_ga * ((gram * d) @ y)
    else:
        q_ga = np.zeros((b, u_count))

    a_mat = q_mu @ params.k_mu + q_ga @ params.k_gamma
    a_sel = a_mat[np.arange(b), ev_types]
    if barrier is None:
        if (a_sel <= floor).any():
            i = int(np.flatnonzero(a_sel <= floor)[0])
            raise NumericalError(
                f"intensity {a_sel[i]!r} at batch event {i} "
                f"(t={batch.times[i]!r}) is at or below the floor {floor!r}"
            )
        log_terms = np.log(a_sel)
        inv_a = 1.0 / a_sel
    else:
        low = a_sel <= barrier
        safe = np.where(low, barrier, a_sel)
        log_terms = np.log(safe)
        inv_a = np.where(low, 0.0, 1.0 / safe)
    value = -float(log_terms.sum())
    value += compensator_window(a_w, b_w, full, params)
    r = np.zeros((b, u_count))
    r[np.arange(b), ev_types] = inv_a

    # Excitation blocks: intensity part through the relation matrices, plus
    # the window compensator differentiated in closed form.
    counts = y.sum(axis=0)
    d_k_mu = -(q_mu.T @ r) + (win_len / t_norm) * np.tile(counts[:, None], (1, u_count))

    rates_full = params.w[full.types]              # (N, U) toward each target
    gap_a = np.clip(a_w - full.times, 0.0, None)[:, None]
    gap_b = np.clip(b_w - full.times, 0.0, None)[:, None]
    f_a = np.exp(-rates_full * gap_a)
    f_b = np.exp(-rates_full * gap_b)
    d_k_gamma = -(q_ga.T @ r) + y.T @ (f_a - f_b)

    d_r_w = params.k_gamma * (y.T @ (f_b * gap_b - f_a * gap_a))

    if include_gamma:
        # Decay block: each pair's decay differentiates to
        # (1 - w*dt) * exp(-w*dt) = e - d*dt, routed to entry (source, target).
        rates_pair = _masked(params.w, full.types, ev_types)
        e_pair = d / rates_pair
        p_w = gram * (e_pair - d * dt)
        d_w = -c_ga * params.k_gamma * (y.T @ (p_w.T @ r)) + d_r_w

        kpair_ga = params.k_gamma[full.types[None, :], ev_types[:, None]]
        psi = (d * kpair_ga) * inv_a[:, None]
        d_v_gamma, d_l_gamma = _spatial_blocks(
            weights=psi, z=z_ga, s=s_ga, rows=rows, x=x,
            directions=basis_ga.directions,
            eigvecs=params.cov_gamma.eigvecs,
            eigvals=params.cov_gamma.eigvals,
            scale=c_ga,
            comp_sel_over_a=float(((q_ga @ params.k_gamma)[np.arange(b), ev_types]
                                   * inv_a).sum()),
        )
    else:
        d_w = d_r_w
        d_v_gamma = np.zeros((2, 2))
        d_l_gamma = np.zeros(2)

    kpair_mu = params.k_mu[full.types[None, :], ev_types[:, None]]
    phi = kpair_mu * (inv_a[:, None] / t_norm)
    d_v_mu, d_l_mu = _spatial_blocks(
        weights=phi, z=z_mu, s=s_mu, rows=rows, x=x,
        directions=basis.directions,
        eigvecs=params.cov_mu.eigvecs,
        eigvals=params.cov_mu.eigvals,
        scale=c_mu,
        comp_sel_over_a=float(((q_mu @ params.k_mu)[np.arange(b), ev_types]
                               * inv_a).sum()),
    )

    grads = GradientSet(
        d_k_mu=d_k_mu, d_k_gamma=d_k_gamma, d_w=d_w,
        d_v_mu=d_v_mu, d_v_gamma=d_v_gamma,
        d_l_mu=d_l_mu, d_l_gamma=d_l_gamma,
    )
    return value, grads


def _masked(w: np.ndarray, hist_types: np.ndarray, ev_types: np.ndarray) -> np.ndarray:
    return w[hist_types[None, :], ev_types[:, None]]


def _batch_range(batch: EventSequence, full: EventSequence) -> tuple[int, int]:
    from .intensity import _locate

    return _locate(batch, full)


def _spatial_blocks(weights, z, s, rows, x, directions, eigvecs, eigvals,
                    scale, comp_sel_over_a):
    """Eigenvector and eigenvalue gradients of one spatial component.

    ``weights`` is the (b, N) pair weight: decay times excitation over the
    selected intensity (triggering), or excitation over horizon times
    selected intensity (background). Both embedding arguments of a pair
    contribute, giving two rank-reduced products against the sine maps.
    """
    b1 = weights @ z            # (b, D)
    b2 = weights.T @ z[rows]    # (N, D)
    p1 = (s[rows] * b1) @ directions.T   # (b, 2)
    p2 = (s * b2) @ directions.T         # (N, 2)
    inv_sqrt_l = eigvals ** -0.5
    d_v = scale * (x[rows].T @ p1 + x.T @ p2) * inv_sqrt_l[None, :]
    g = ((x[rows] @ eigvecs) * p1).sum(axis=0) + ((x @ eigvecs) * p2).sum(axis=0)
    d_l = comp_sel_over_a / (2.0 * eigvals) - 0.5 * scale * eigvals ** -1.5 * g
    return d_v, d_l


def grad_all(
    batch: EventSequence,
    full: EventSequence,
    params: HawkesParams,
    basis: RFFBasis,
    basis_gamma: RFFBasis | None = None,
    cutoff: float | None = None,
    floor: float = INTENSITY_FLOOR,
) -> GradientSet:
    """Gradient of the window NLL with respect to the constrained blocks."""
    _, grads = nll_and_grad(
        batch, full, params, basis, basis_gamma=basis_gamma,
        cutoff=cutoff, floor=floor,
    )
    return grads


def chain_softplus(grad_constrained, raw, s: float):
    """Chain a constrained-space gradient back to raw coordinates."""
    grad_constrained = np.asarray(grad_constrained, dtype=float)
    raw = np.asarray(raw, dtype=float)
    if grad_constrained.shape != raw.shape:
        raise ValueError(
            f"shape mismatch {grad_constrained.shape} vs {raw.shape}"
        )
    return grad_constrained * softplus_deriv(raw, s)


def grad_raw(
    batch: EventSequence,
    full: EventSequence,
    raw: RawParams,
    basis: RFFBasis,
    s: float,
    basis_gamma: RFFBasis | None = None,
    cutoff: float | None = None,
    include_gamma: bool = True,
    zero_gamma: bool = False,
    barrier: float | None = None,
) -> tuple[float, GradientSet]:
    """NLL and raw-space gradient: softplus chain on K/W/l, matrix space on V."""
    params = raw_to_params_unchecked(raw, s, zero_gamma=zero_gamma)
    value, g = nll_and_grad(
        batch, full, params, basis, basis_gamma=basis_gamma,
        cutoff=cutoff, include_gamma=include_gamma, barrier=barrier,
    )
    chained = GradientSet(
        d_k_mu=chain_softplus(g.d_k_mu, raw.raw_k_mu, s),
        d_k_gamma=(np.zeros_like(g.d_k_gamma) if zero_gamma
                   else chain_softplus(g.d_k_gamma, raw.raw_k_gamma, s)),
        d_w=chain_softplus(g.d_w, raw.raw_w, s),
        d_v_mu=g.d_v_mu,
        d_v_gamma=g.d_v_gamma,
        d_l_mu=chain_softplus(g.d_l_mu, raw.raw_l_mu, s),
        d_l_gamma=chain_softplus(g.d_l_gamma, raw.raw_l_gamma, s),
    )
    return value, chained


_RAW_OF_BLOCK = {
    "d_k_mu": "raw_k_mu",
    "d_k_gamma": "raw_k_gamma",
    "d_w": "raw_w",
    "d_v_mu": "v_mu",
    "d_v_gamma": "v_gamma",
    "d_l_mu": "raw_l_mu",
    "d_l_gamma": "raw_l_gamma",
}


def finite_diff(
    batch: EventSequence,
    full: EventSequence,
    raw: RawParams,
    basis: RFFBasis,
    s: float,
    h: float = 1e-5,
    basis_gamma: RFFBasis | None = None,
    cutoff: float | None = None,
    zero_gamma: bool = False,
) -> GradientSet:
    """Central finite differences of the NLL along every raw coordinate.

    Eigenvector blocks are probed along their matrix entries directly (the
    projection happens after updates, so no derivative of it is needed).
    This is the verification oracle; it never calls the analytic path.
    """
    from .intensity import nll

    if h <= 0:
        raise ValueError("step size must be positive")

    def value_at(r: RawParams) -> float:
        params = raw_to_params_unchecked(r, s, zero_gamma=zero_gamma)
        return nll(batch, full, params, basis=basis, basis_gamma=basis_gamma,
                   cutoff=cutoff, mode="rff")

    blocks = {}
    for block_name, raw_name in _RAW_OF_BLOCK.items():
        ref = np.asarray(getattr(raw, raw_name), dtype=float)
        grad = np.zeros_like(ref)
        for idx in np.ndindex(ref.shape):
            probe = ref.copy()
            probe[idx] = ref[idx] + h
            try:
                up = value_at(raw.replace(**{raw_name: probe}))
                probe[idx] = ref[idx] - h
                down = value_at(raw.replace(**{raw_name: probe}))
            except NumericalError as exc:
                raise NumericalError(
                    f"finite-difference probe failed at {raw_name}{list(idx)}: {exc}"
                ) from exc
            grad[idx] = (up - down) / (2.0 * h)
        blocks[block_name] = grad
    return GradientSet(**blocks)
