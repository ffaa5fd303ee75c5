"""Process model: intensities, matrix likelihood pipeline, compensators.

The conditional intensity of type u at (t, s) is a background term, a
kernel-density sum over the modeling sequence normalized by the horizon,
plus a triggering term summing exponentially decaying spatial kernels over
strictly earlier events. Both spatial kernels may be evaluated exactly or
through the randomized feature embedding; the exact path is the reference
oracle, the randomized path is what training optimizes.

The negative log-likelihood of a window is
``-sum(log selected intensities) + compensator`` where the compensator is
available in closed form because each spatial kernel integrates to one over
the plane (domain boundary effects are neglected, as usual).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, NumericalError
from .events import EventSequence, one_hot
from .rff import CovarianceParams, RFFBasis, embed_cos_sin

INTENSITY_FLOOR = 1e-12


@dataclass(frozen=True)
class HawkesParams:
    """Full parameter set of the process.

    ``k_mu`` and ``k_gamma`` are (U, U) excitation matrices, entry (m, n)
    scaling how much type-m events raise type-n background mass/triggering.
    ``w`` holds the exponential decay rates per (source, target) pair. The
    two covariances parameterize the background and triggering spatial
    kernels. ``k_gamma`` may be exactly zero (spatially inhomogeneous
    Poisson reduction); ``k_mu`` and ``w`` must stay strictly positive.
    """

    k_mu: np.ndarray
    k_gamma: np.ndarray
    w: np.ndarray
    cov_mu: CovarianceParams
    cov_gamma: CovarianceParams

    def __post_init__(self):
        for name in ("k_mu", "k_gamma", "w"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arr)
        u = self.k_mu.shape[0]
        for name in ("k_mu", "k_gamma", "w"):
            if getattr(self, name).shape != (u, u):
                raise ConfigError(f"{name} must be square of shared size, got "
                                  f"{getattr(self, name).shape}")
        if not (self.k_mu > 0).all():
            raise ConfigError("k_mu entries must be strictly positive")
        if not (self.w > 0).all():
            raise ConfigError("w entries must be strictly positive")
        if (self.k_gamma < 0).any():
            raise ConfigError("k_gamma entries must be nonnegative")
        for name in ("k_mu", "k_gamma", "w"):
            getattr(self, name).flags.writeable = False

    @property
    def num_types(self) -> int:
        return self.k_mu.shape[0]


def decay_vector(t: float, history: EventSequence, eval_type: int, w: np.ndarray) -> np.ndarray:
    """Temporal kernel values w * exp(-w * (t - t_j)) against a strict prefix.

    ``eval_type`` (0-based) selects the target column of the decay matrix.
    """
    if len(history) and history.times[-1] >= t:
        raise ValueError("history must lie strictly before the evaluation time")
    rates = np.asarray(w, dtype=float)[history.types, eval_type]
    return rates * np.exp(-rates * (t - history.times))


def _kernel_matrix(points_a, points_b, cov: CovarianceParams,
                   basis: RFFBasis | None, mode: str) -> np.ndarray:
    """(na, nb) spatial kernel values, exact or via the feature embedding."""
    pa = np.asarray(points_a, dtype=float).reshape(-1, 2)
    pb = np.asarray(points_b, dtype=float).reshape(-1, 2)
    if mode == "rff":
        if basis is None:
            raise ConfigError("randomized mode requires a feature basis")
        za, _ = embed_cos_sin(pa, cov, basis)
        zb, _ = embed_cos_sin(pb, cov, basis)
        return cov.norm_const * (za @ zb.T)
    if mode == "exact":
        wa = pa @ cov.whitening
        wb = pb @ cov.whitening
        q = (wa * wa).sum(1)[:, None] + (wb * wb).sum(1)[None, :] - 2.0 * (wa @ wb.T)
        np.clip(q, 0.0, None, out=q)
        return cov.norm_const * np.exp(-0.5 * q)
    raise ConfigError(f"unknown kernel mode {mode!r}")


def _history_window(history: EventSequence, t: float, cutoff: float | None):
    """Index mask of history events strictly before t (within the cutoff)."""
    mask = history.times < t
    if cutoff is not None:
        mask &= history.times >= t - cutoff
    return mask


def intensity_profile(
    t: float,
    points,
    params: HawkesParams,
    history: EventSequence,
    base: EventSequence | None = None,
    basis: RFFBasis | None = None,
    basis_gamma: RFFBasis | None = None,
    mode: str = "exact",
    cutoff: float | None = None,
) -> np.ndarray:
    """Per-type intensities at time t for many locations: (n_points, U).

    ``history`` feeds the triggering term (events strictly before t);
    ``base`` feeds the background term (defaults to ``history``). The
    background is normalized by the base sequence's window length.
    """
    base = history if base is None else base
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    u_count = params.num_types
    if base.window_length <= 0:
        raise DataError("background sequence has a zero-length window")
    km = _kernel_matrix(points, base.locations, params.cov_mu, basis, mode)
    lam = (km @ one_hot(base) / base.window_length) @ params.k_mu
    sel = _history_window(history, t, cutoff)
    if sel.any() and params.k_gamma.any():
        locs = history.locations[sel]
        types = history.types[sel]
        dts = t - history.times[sel]
        kg = _kernel_matrix(points, locs, params.cov_gamma,
                            basis_gamma or basis, mode)
        hot = np.zeros((sel.sum(), u_count))
        hot[np.arange(sel.sum()), types] = 1.0
        for u in range(u_count):
            rates = params.w[types, u]
            decay = rates * np.exp(-rates * dts)
            lam[:, u] += ((kg * decay[None, :]) @ hot) @ params.k_gamma[:, u]
    return lam


def evaluate_intensity(
    u: int,
    t: float,
    s,
    params: HawkesParams,
    seq: EventSequence,
    basis: RFFBasis | None = None,
    mode: str = "exact",
    base: EventSequence | None = None,
    basis_gamma: RFFBasis | None = None,
    cutoff: float | None = None,
) -> float:
    """Pointwise conditional intensity of type u (0-based) at (t, s)."""
    if not (0 <= u < params.num_types):
        raise DataError(f"unknown type {u} for {params.num_types} types")
    lam = intensity_profile(t, [s], params, seq, base=base, basis=basis,
                            basis_gamma=basis_gamma, mode=mode, cutoff=cutoff)
    return float(lam[0, u])


def aggregate(
    seq: EventSequence,
    t: float,
    params: HawkesParams,
    basis: RFFBasis,
    component: str,
    eval_type: int | None = None,
) -> np.ndarray:
    """(D, U) feature aggregation of a component.

    The background component aggregates every event of the sequence. The
    triggering component aggregates the strict-past prefix weighted by the
    temporal decay toward ``eval_type``, whose target column fixes the decay
    rates; an empty prefix yields zeros.
    """
    if component == "mu":
        z, _ = embed_cos_sin(seq.locations, params.cov_mu, basis)
        return params.cov_mu.norm_const * (z.T @ one_hot(seq))
    if component == "gamma":
        if eval_type is None:
            raise ConfigError("triggering aggregation needs the evaluation type")
        sel = seq.times < t
        if not sel.any():
            return np.zeros((basis.dim, seq.num_types))
        prefix_locs = seq.locations[sel]
        z, _ = embed_cos_sin(prefix_locs, params.cov_gamma, basis)
        rates = params.w[seq.types[sel], eval_type]
        d = rates * np.exp(-rates * (t - seq.times[sel]))
        hot = np.zeros((int(sel.sum()), seq.num_types))
        hot[np.arange(int(sel.sum())), seq.types[sel]] = 1.0
        return params.cov_gamma.norm_const * (z.T @ (d[:, None] * hot))
    raise ConfigError(f"unknown component {component!r}")


def _locate(batch: EventSequence, full: EventSequence) -> tuple[int, int]:
    """Index range of a contiguous batch inside the full sequence."""
    b = len(batch)
    if b == 0 or b > len(full):
        raise ValueError("batch must be a nonempty sub-window of the full sequence")
    start = int(np.searchsorted(full.times, batch.times[0], side="left"))
    for i0 in range(start, len(full) - b + 1):
        if full.times[i0] != batch.times[0]:
            break
        if (
            np.array_equal(full.times[i0:i0 + b], batch.times)
            and np.array_equal(full.types[i0:i0 + b], batch.types)
            and np.array_equal(full.locations[i0:i0 + b], batch.locations)
        ):
            return i0, i0 + b
    raise ValueError("batch events not found as a contiguous window of the full sequence")


@dataclass
class BatchMatrices:
    """Per-batch caches used by the likelihood and its gradients.

    Rows index the batch events; columns of the pairwise blocks index the
    full sequence. The triggering aggregation has no single (D, U) form for
    a whole batch because each row's decay is tied to that event's own type,
    so the pairwise decay matrix is cached instead and per-row aggregations
    are reconstructed on demand.
    """

    i0: int
    i1: int
    t_start: float
    t_end: float
    y: np.ndarray               # (N, U) one-hot of the full sequence
    z_mu: np.ndarray            # (N, D) background embeddings
    s_mu: np.ndarray            # (N, D) matching sine map
    z_gamma: np.ndarray | None  # (N, D) triggering embeddings
    s_gamma: np.ndarray | None
    dt: np.ndarray | None       # (b, N) time lags of batch rows vs all events
    mask: np.ndarray | None     # (b, N) strict-past (and cutoff) indicator
    d: np.ndarray | None        # (b, N) masked decay matrix
    n_mu: np.ndarray            # (D, U) scaled background aggregation
    q_mu: np.ndarray            # (b, U)
    q_gamma: np.ndarray         # (b, U)
    a: np.ndarray               # (b, U) intensity matrix
    a_sel: np.ndarray           # (b,) intensities at each event's own type
    scale_mu: float
    scale_gamma: float
    t_norm: float

    def n_gamma_row(self, i: int) -> np.ndarray:
        """(D, U) triggering aggregation for batch row i."""
        if self.z_gamma is None:
            return np.zeros((self.z_mu.shape[1], self.y.shape[1]))
        return self.scale_gamma * (self.z_gamma.T @ (self.d[i][:, None] * self.y))


def pairwise_decay(
    eval_times: np.ndarray,
    eval_types: np.ndarray,
    hist_times: np.ndarray,
    hist_types: np.ndarray,
    w: np.ndarray,
    cutoff: float | None = None,
):
    """Strict-past mask, lags and decay matrix for eval x history pairs.

    Decay entry (i, j) is w[u_j, u_i] * exp(-w[u_j, u_i] * (t_i - t_j)) for
    t_j < t_i (zero elsewhere); the pair rate is source-row, target-column.
    """
    dt = eval_times[:, None] - hist_times[None, :]
    mask = dt > 0
    if cutoff is not None:
        mask &= dt <= cutoff
    rates = w[hist_types[None, :], eval_types[:, None]]
    d = np.where(mask, rates * np.exp(-rates * np.where(mask, dt, 0.0)), 0.0)
    return mask, dt, d


def intensity_matrix(
    batch: EventSequence,
    full: EventSequence,
    params: HawkesParams,
    basis: RFFBasis,
    basis_gamma: RFFBasis | None = None,
    cutoff: float | None = None,
    include_gamma: bool = True,
) -> BatchMatrices:
    """Assemble the matrix pipeline for a contiguous batch of the sequence.

    The background aggregation runs over the full sequence at its horizon;
    each batch row's triggering relation runs over that event's strict past.
    """
    i0, i1 = _locate(batch, full)
    b = i1 - i0
    u_count = full.num_types
    y = one_hot(full)
    z_mu, s_mu = embed_cos_sin(full.locations, params.cov_mu, basis)
    c_mu = params.cov_mu.norm_const
    t_norm = full.window_length
    n_mu = c_mu * (z_mu.T @ y)
    q_mu = (z_mu[i0:i1] @ n_mu) / t_norm

    include_gamma = include_gamma and bool(params.k_gamma.any())
    if include_gamma:
        z_ga, s_ga = embed_cos_sin(full.locations, params.cov_gamma,
                                   basis_gamma or basis)
        c_ga = params.cov_gamma.norm_const
        mask, dt, d = pairwise_decay(
            full.times[i0:i1], full.types[i0:i1], full.times, full.types,
            params.w, cutoff,
        )
        gram = z_ga[i0:i1] @ z_ga.T
        q_ga = c_ga * ((gram * d) @ y)
    else:
        z_ga = s_ga = mask = dt = d = None
        c_ga = params.cov_gamma.norm_const
        q_ga = np.zeros((b, u_count))

    a = q_mu @ params.k_mu + q_ga @ params.k_gamma
    a_sel = a[np.arange(b), full.types[i0:i1]]
    return BatchMatrices(
        i0=i0, i1=i1,
        t_start=batch.t_start, t_end=batch.duration,
        y=y, z_mu=z_mu, s_mu=s_mu, z_gamma=z_ga, s_gamma=s_ga,
        dt=dt, mask=mask, d=d, n_mu=n_mu,
        q_mu=q_mu, q_gamma=q_ga, a=a, a_sel=a_sel,
        scale_mu=c_mu, scale_gamma=c_ga, t_norm=t_norm,
    )


def compensator_window(
    t_start: float,
    t_end: float,
    history: EventSequence,
    params: HawkesParams,
    base: EventSequence | None = None,
) -> float:
    """Integral of the total intensity over (t_start, t_end] x the plane.

    Exact in closed form: the background contributes its constant total rate
    times the window length; each history event's triggering mass enters
    through the survival difference of its exponential decay, clamped at one
    before the event exists. Independent of any feature basis.
    """
    if t_end < t_start:
        raise ValueError(f"reversed window ({t_start!r}, {t_end!r})")
    base = history if base is None else base
    counts = np.bincount(base.types, minlength=base.num_types).astype(float)
    mu_part = (t_end - t_start) / base.window_length * float(counts @ params.k_mu.sum(axis=1))
    if len(history) == 0 or not params.k_gamma.any():
        return mu_part
    rates = params.w[history.types]        # (N, U) decay toward each target type
    kg = params.k_gamma[history.types]     # (N, U)
    f_start = np.exp(-rates * np.clip(t_start - history.times, 0.0, None)[:, None])
    f_end = np.exp(-rates * np.clip(t_end - history.times, 0.0, None)[:, None])
    return mu_part + float((kg * (f_start - f_end)).sum())


def compensator_full(seq: EventSequence, params: HawkesParams,
                     base: EventSequence | None = None) -> float:
    """Compensator of the sequence's whole observation window."""
    return compensator_window(seq.t_start, seq.duration, seq, params, base=base)


def compensator_batch(
    t_start: float,
    t_end: float,
    full: EventSequence,
    params: HawkesParams,
    base: EventSequence | None = None,
) -> float:
    """Telescoped compensator of a batch window (t_start, t_end]."""
    if not (full.t_start <= t_start < t_end <= full.duration):
        raise ValueError(
            f"batch window ({t_start!r}, {t_end!r}) outside "
            f"({full.t_start!r}, {full.duration!r})"
        )
    return compensator_window(t_start, t_end, full, params, base=base)


def selected_intensities(
    batch: EventSequence,
    full: EventSequence,
    params: HawkesParams,
    basis: RFFBasis | None = None,
    basis_gamma: RFFBasis | None = None,
    base: EventSequence | None = None,
    mode: str = "rff",
    cutoff: float | None = None,
    include_gamma: bool = True,
    chunk: int = 512,
) -> np.ndarray:
    """Intensity of each batch event at its own type, vectorized in chunks.

    Triggering history is the strict past within ``full``; the background
    sums over ``base`` (default ``full``) at that sequence's horizon.
    """
    base = full if base is None else base
    u_count = params.num_types
    n = len(batch)
    out = np.empty(n)
    include_gamma = include_gamma and bool(params.k_gamma.any())
    if mode == "rff":
        z_base, _ = embed_cos_sin(base.locations, params.cov_mu, basis)
        n_mu = params.cov_mu.norm_const * (z_base.T @ one_hot(base))
        if include_gamma:
            z_hist, _ = embed_cos_sin(full.locations, params.cov_gamma,
                                      basis_gamma or basis)
    y_full = one_hot(full)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        pts = batch.locations[lo:hi]
        if mode == "rff":
            z_pts, _ = embed_cos_sin(pts, params.cov_mu, basis)
            q_mu = (z_pts @ n_mu) / base.window_length
        else:
            km = _kernel_matrix(pts, base.locations, params.cov_mu, basis, mode)
            q_mu = (km @ one_hot(base)) / base.window_length
        lam = q_mu @ params.k_mu
        if include_gamma:
            if mode == "rff":
                zc, _ = embed_cos_sin(pts, params.cov_gamma, basis_gamma or basis)
                kg = params.cov_gamma.norm_const * (zc @ z_hist.T)
            else:
                kg = _kernel_matrix(pts, full.locations, params.cov_gamma,
                                    basis_gamma or basis, mode)
            _, _, d = pairwise_decay(
                batch.times[lo:hi], batch.types[lo:hi], full.times, full.types,
                params.w, cutoff,
            )
            lam += ((kg * d) @ y_full) @ params.k_gamma
        out[lo:hi] = lam[np.arange(hi - lo), batch.types[lo:hi]]
    return out


def nll(
    batch: EventSequence,
    full: EventSequence,
    params: HawkesParams,
    basis: RFFBasis | None = None,
    basis_gamma: RFFBasis | None = None,
    base: EventSequence | None = None,
    mode: str = "rff",
    cutoff: float | None = None,
    floor: float = INTENSITY_FLOOR,
    include_gamma: bool = True,
) -> float:
    """Negative log-likelihood of a window given its history.

    ``batch`` may be the full sequence itself (whole-window likelihood) or a
    contiguous sub-window, in which case its own (t_start, duration] bounds
    the compensator. Intensities at or below the positivity floor raise a
    numerical-domain error naming the first offending event, since they
    signal divergence or a bad feature basis rather than a valid model state.
    """
    a_sel = selected_intensities(
        batch, full, params, basis=basis, basis_gamma=basis_gamma, base=base,
        mode=mode, cutoff=cutoff, include_gamma=include_gamma,
    )
    bad = a_sel <= floor
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NumericalError(
            f"intensity {a_sel[i]!r} at event {i} (t={batch.times[i]!r}, "
            f"type={int(batch.types[i]) + 1}) is at or below the floor {floor!r}"
        )
    comp = compensator_window(batch.t_start, batch.duration, full, params, base=base)
    return float(-np.log(a_sel).sum() + comp)


def count_parameters(model: str, u_count: int) -> int:
    """Free-parameter count per model kind, covariances counted as 4 + 2."""
    if u_count < 1:
        raise ConfigError("number of types must be >= 1")
    if model == "poisson":
        return u_count
    if model == "spatial-poisson":
        return u_count * u_count + 6
    if model == "hawkes":
        return 3 * u_count * u_count + 12
    raise ConfigError(f"unknown model kind {model!r}")


def aic(total_nll: float, p: int) -> float:
    """Akaike information criterion from a total (not per-event) NLL."""
    if p < 0:
        raise ConfigError("parameter count must be nonnegative")
    return 2.0 * total_nll + 2.0 * p
