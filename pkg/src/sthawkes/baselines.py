"""Comparison models: homogeneous and spatially inhomogeneous Poisson.

The homogeneous baseline has a closed-form MLE. The spatial baseline is the
full model with triggering pinned to zero, trained through the same
gradient-descent pipeline so the comparison isolates the model class.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .events import EventSequence
from .optimizer import FitConfig, FitReport, fit


@dataclass(frozen=True)
class PoissonParams:
    """Per-type constant intensity per unit time per unit area."""

    mu: np.ndarray

    def __post_init__(self):
        mu = np.ascontiguousarray(np.asarray(self.mu, dtype=float).reshape(-1))
        object.__setattr__(self, "mu", mu)
        if not (mu > 0).all():
            raise ConfigError(f"rates must be positive, got {mu}")
        mu.flags.writeable = False

    @property
    def num_types(self) -> int:
        return len(self.mu)


def fit_poisson(seq: EventSequence) -> PoissonParams:
    """Closed-form MLE: counts over observed time-area volume.

    Types absent from the sequence get half an event's worth of rate so the
    log-likelihood stays finite, with a warning.
    """
    if len(seq) == 0:
        raise DataError("cannot fit an empty sequence")
    volume = seq.window_length * seq.domain.area
    if volume <= 0:
        raise DataError("sequence has a zero observation volume")
    counts = np.bincount(seq.types, minlength=seq.num_types).astype(float)
    if (counts == 0).any():
        warnings.warn(
            f"types {np.flatnonzero(counts == 0) + 1} absent, assigning half "
            "an event each", stacklevel=2,
        )
        counts = np.maximum(counts, 0.5)
    return PoissonParams(mu=counts / volume)


def nll_poisson(seq: EventSequence, params: PoissonParams) -> float:
    """Exact negative log-likelihood of the constant-rate model."""
    if params.num_types != seq.num_types:
        raise ConfigError("rate vector does not match the sequence types")
    log_term = float(np.log(params.mu[seq.types]).sum())
    volume = seq.window_length * seq.domain.area
    return -log_term + volume * float(params.mu.sum())


def fit_spatial_poisson(
    fit_seq: EventSequence,
    val_seq: EventSequence,
    config: FitConfig,
) -> FitReport:
    """Train the zero-triggering reduction through the shared GD pipeline."""
    return fit(fit_seq, val_seq, config, model_kind="spatial-poisson")
