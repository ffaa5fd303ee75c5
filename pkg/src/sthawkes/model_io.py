"""Model-file persistence.

One JSON document per fitted model: schema version, model kind, scaling,
the feature basis verbatim (seed alone would do, but storing the arrays
keeps files valid across generator changes), parameters and provenance.
Serialization is canonical (sorted keys, repr floats) so save -> load ->
save is byte-identical and every numeric field round-trips bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .baselines import PoissonParams
from .errors import ConfigError, DataError
from .events import EventSequence, Rectangle, ScalingInfo
from .evaluation import FittedHawkes, FittedPoisson
from .intensity import HawkesParams
from .rff import CovarianceParams, RFFBasis

SCHEMA_VERSION = 1


@dataclass
class ModelFile:
    model_kind: str
    num_types: int
    domain: list[float]
    scaling: dict
    params: dict
    rff_dim: int | None = None
    basis: dict | None = None
    basis_gamma: dict | None = None
    history_cutoff: float | None = None
    provenance: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "model_kind": self.model_kind,
            "num_types": self.num_types,
            "domain": self.domain,
            "scaling": self.scaling,
            "params": self.params,
            "rff_dim": self.rff_dim,
            "basis": self.basis,
            "basis_gamma": self.basis_gamma,
            "history_cutoff": self.history_cutoff,
            "provenance": self.provenance,
        }


def _basis_dict(basis: RFFBasis | None) -> dict | None:
    if basis is None:
        return None
    return {
        "seed": basis.seed,
        "dim": basis.dim,
        "directions": basis.directions.tolist(),
        "phases": basis.phases.tolist(),
    }


def _basis_from(d: dict | None) -> RFFBasis | None:
    if d is None:
        return None
    return RFFBasis(
        dim=d["dim"],
        directions=np.asarray(d["directions"]),
        phases=np.asarray(d["phases"]),
        seed=d["seed"],
    )


def hawkes_params_dict(params: HawkesParams) -> dict:
    return {
        "k_mu": params.k_mu.tolist(),
        "k_gamma": params.k_gamma.tolist(),
        "w": params.w.tolist(),
        "v_mu": params.cov_mu.eigvecs.tolist(),
        "l_mu": params.cov_mu.eigvals.tolist(),
        "v_gamma": params.cov_gamma.eigvecs.tolist(),
        "l_gamma": params.cov_gamma.eigvals.tolist(),
    }


def hawkes_params_from(d: dict) -> HawkesParams:
    return HawkesParams(
        k_mu=np.asarray(d["k_mu"]),
        k_gamma=np.asarray(d["k_gamma"]),
        w=np.asarray(d["w"]),
        cov_mu=CovarianceParams(eigvecs=np.asarray(d["v_mu"]),
                                eigvals=np.asarray(d["l_mu"])),
        cov_gamma=CovarianceParams(eigvecs=np.asarray(d["v_gamma"]),
                                   eigvals=np.asarray(d["l_gamma"])),
    )


def scaling_dict(info: ScalingInfo) -> dict:
    return {
        "time_scale": info.time_scale,
        "x_scale": info.x_scale,
        "y_scale": info.y_scale,
        "x_offset": info.x_offset,
        "y_offset": info.y_offset,
    }


def scaling_from(d: dict) -> ScalingInfo:
    return ScalingInfo(**d)


def data_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def save_model(path, model: ModelFile) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f, sort_keys=True, indent=1)
        f.write("\n")


def load_model(path) -> ModelFile:
    with open(path, encoding="utf-8") as f:
        d = json.load(f)
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DataError(
            f"model file schema {version!r} unsupported (expected {SCHEMA_VERSION})"
        )
    d.pop("schema_version")
    return ModelFile(schema_version=version, **d)


def fitted_model(model: ModelFile, base: EventSequence | None):
    """Reconstruct an evaluable model; process kinds need the fit events."""
    if model.model_kind == "poisson":
        return FittedPoisson(params=PoissonParams(mu=np.asarray(model.params["mu"])))
    if model.model_kind in ("hawkes", "spatial-poisson"):
        if base is None:
            raise ConfigError(
                f"{model.model_kind} evaluation needs the fit events as background"
            )
        return FittedHawkes(
            params=hawkes_params_from(model.params),
            basis=_basis_from(model.basis),
            basis_gamma=_basis_from(model.basis_gamma),
            base=base,
            model_kind=model.model_kind,
            history_cutoff=model.history_cutoff,
        )
    raise ConfigError(f"unknown model kind {model.model_kind!r}")


def rectangle_from(bounds) -> Rectangle:
    b = list(map(float, bounds))
    if len(b) != 4:
        raise ConfigError(f"domain must be [x_min, x_max, y_min, y_max], got {bounds}")
    return Rectangle(*b)
