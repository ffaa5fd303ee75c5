"""Model evaluation and reporting.

Wraps fitted parameter sets with the context needed to score held-out
windows (background anchored on the fit events, triggering history carried
across split boundaries) and emits the excitation matrices and intensity
grids used for event analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import PoissonParams, nll_poisson
from .errors import ConfigError, DataError
from .events import EventSequence
from .intensity import HawkesParams, aic, count_parameters, intensity_profile, nll
from .rff import RFFBasis


@dataclass(frozen=True)
class FittedHawkes:
    """A fitted process model plus its evaluation context.

    ``base`` carries the background anchor events and horizon the model was
    trained with (the fit sequence); intensities on later windows keep using
    it, while the triggering history is whatever precedes each scored event.
    """

    params: HawkesParams
    basis: RFFBasis | None
    base: EventSequence
    model_kind: str = "hawkes"
    basis_gamma: RFFBasis | None = None
    mode: str = "rff"
    history_cutoff: float | None = None

    @property
    def num_types(self) -> int:
        return self.params.num_types


@dataclass(frozen=True)
class FittedPoisson:
    params: PoissonParams
    model_kind: str = "poisson"

    @property
    def num_types(self) -> int:
        return self.params.num_types


@dataclass(frozen=True)
class EvalResult:
    model_kind: str
    split: str
    nll_per_event: float
    total_nll: float
    p: int
    aic: float
    n_events: int

    def as_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "split": self.split,
            "nll_per_event": self.nll_per_event,
            "total_nll": self.total_nll,
            "p": self.p,
            "aic": self.aic,
            "n_events": self.n_events,
        }


def evaluate(
    seq: EventSequence,
    model,
    split: str,
    history: EventSequence | None = None,
) -> EvalResult:
    """Score one split window under a fitted model.

    ``history`` must contain every event up to the window's end (fit and
    val events included when scoring test); it defaults to the window
    itself, which is only correct for the fit split.
    """
    if len(seq) == 0:
        raise DataError(f"cannot evaluate an empty {split} split")
    if isinstance(model, FittedPoisson):
        total = nll_poisson(seq, model.params)
    elif isinstance(model, FittedHawkes):
        total = nll(
            seq,
            history if history is not None else seq,
            model.params,
            basis=model.basis,
            basis_gamma=model.basis_gamma,
            base=model.base,
            mode=model.mode,
            cutoff=model.history_cutoff,
            include_gamma=model.model_kind != "spatial-poisson",
        )
    else:
        raise ConfigError(f"cannot evaluate model of type {type(model).__name__}")
    n = len(seq)
    p = count_parameters(model.model_kind, model.num_types)
    per_event = total / n
    return EvalResult(
        model_kind=model.model_kind,
        split=split,
        nll_per_event=float(per_event),
        total_nll=float(total),
        p=p,
        aic=float(aic(total, p)),
        n_events=n,
    )


def excitation_report(params: HawkesParams, type_names: list[str]) -> dict:
    """Labeled excitation and decay matrices plus in/out excitation totals.

    Rows are source types, columns targets; the numeric grids are emitted
    as plain lists so external tools can render heat maps.
    """
    u_count = params.num_types
    if len(type_names) != u_count:
        raise ConfigError(
            f"got {len(type_names)} labels for {u_count} types"
        )
    return {
        "type_names": list(type_names),
        "k_mu": params.k_mu.tolist(),
        "k_gamma": params.k_gamma.tolist(),
        "w": params.w.tolist(),
        "out_excitation_mu": params.k_mu.sum(axis=1).tolist(),
        "in_excitation_mu": params.k_mu.sum(axis=0).tolist(),
        "out_excitation_gamma": params.k_gamma.sum(axis=1).tolist(),
        "in_excitation_gamma": params.k_gamma.sum(axis=0).tolist(),
    }


def render_excitation_report(report: dict) -> str:
    """Human-readable rendering of an excitation report."""
    names = report["type_names"]
    width = max(12, max(len(n) for n in names) + 2)

    def matrix_block(title: str, rows) -> list[str]:
        lines = [title, " " * width + "".join(f"{n:>{width}}" for n in names)]
        for name, row in zip(names, rows):
            lines.append(
                f"{name:>{width}}" + "".join(f"{v:>{width}.6g}" for v in row)
            )
        return lines + [""]

    out: list[str] = []
    out += matrix_block("background excitation (rows excite columns)", report["k_mu"])
    out += matrix_block("triggering excitation (rows excite columns)", report["k_gamma"])
    out += matrix_block("temporal decay rates", report["w"])
    out.append("per-type totals (triggering): out = " +
               ", ".join(f"{n}={v:.6g}" for n, v in
                         zip(names, report["out_excitation_gamma"])))
    out.append("                              in  = " +
               ", ".join(f"{n}={v:.6g}" for n, v in
                         zip(names, report["in_excitation_gamma"])))
    return "\n".join(out) + "\n"


def intensity_grid(
    params: HawkesParams,
    seq: EventSequence,
    t: float,
    resolution: int,
    base: EventSequence | None = None,
    cutoff: float | None = None,
) -> np.ndarray:
    """Total intensity on a resolution x resolution grid, exact kernels.

    Rows follow the x axis, columns the y axis; exported row-major.
    """
    if not (seq.t_start <= t <= seq.duration):
        raise ConfigError(f"time {t!r} outside the sequence window")
    pts = seq.domain.grid(resolution)
    lam = intensity_profile(t, pts, params, seq, base=base, mode="exact",
                            cutoff=cutoff)
    return lam.sum(axis=1).reshape(resolution, resolution)
