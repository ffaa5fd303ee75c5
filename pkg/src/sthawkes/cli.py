"""Command-line surface: simulate, fit, evaluate, report, gradcheck.

Each invocation reads one YAML config (simulate/fit) or operates on saved
artifacts (evaluate/report), validates it strictly (unknown keys are
errors), and writes into a fresh run directory named by timestamp and
config hash under ``$STHAWKES_RUNS`` (default ``./runs``). Run directories
are never overwritten and every output file is deterministic given the
config and seed. Exit codes: 0 success, 1 usage/config, 2 data, 3
numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from dataclasses import asdict

import numpy as np
import yaml

from .baselines import fit_poisson, fit_spatial_poisson, nll_poisson
from .errors import ConfigError, DataError, NumericalError, TrainingError
from .events import (
    EventSequence,
    Rectangle,
    ScalingInfo,
    SplitSpec,
    concat,
    normalize_space,
    parse_events,
    rescale_time,
    serialize_events,
    split_chronological,
)
from .evaluation import (
    EvalResult,
    FittedPoisson,
    evaluate,
    excitation_report,
    intensity_grid,
    render_excitation_report,
)
from .gradients import BLOCK_NAMES, finite_diff, grad_raw
from .intensity import HawkesParams, count_parameters
from .model_io import (
    ModelFile,
    data_hash,
    fitted_model,
    hawkes_params_dict,
    load_model,
    rectangle_from,
    save_model,
    scaling_dict,
    scaling_from,
)
from .optimizer import FitConfig, fit, init_params, project_orthonormal
from .reparam import params_to_raw, raw_to_params
from .rff import CovarianceParams
from .simulator import SimConfig, simulate, uniform_anchors

RUNS_ENV = "STHAWKES_RUNS"


# ---------------------------------------------------------------------------
# config plumbing


def _check_keys(d: dict, allowed: set[str], required: set[str], where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _load_yaml(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return doc


def _canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def make_run_dir(out_root: str | None, doc: dict) -> str:
    root = out_root or os.environ.get(RUNS_ENV, "runs")
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S")
    digest = hashlib.sha256(_canonical_json(doc).encode()).hexdigest()[:8]
    base = os.path.join(root, f"{stamp}-{digest}")
    path, n = base, 0
    while True:
        try:
            os.makedirs(path)
            return path
        except FileExistsError:
            n += 1
            path = f"{base}-{n}"


def _write_json(path: str, doc) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True, indent=1)
        f.write("\n")


def _hawkes_params_from_config(doc: dict, num_types: int) -> HawkesParams:
    allowed = {"k_mu", "k_gamma", "w", "sigma_mu", "sigma_gamma"}
    _check_keys(doc, allowed, {"k_mu", "sigma_mu"}, "params")
    k_mu = np.asarray(doc["k_mu"], dtype=float)
    k_gamma = np.asarray(doc.get("k_gamma", np.zeros((num_types, num_types))),
                         dtype=float)
    w = doc.get("w")
    if w is None:
        if k_gamma.any():
            raise ConfigError("params.w is required when k_gamma is nonzero")
        w = np.ones((num_types, num_types))
    sigma_gamma = doc.get("sigma_gamma")
    if sigma_gamma is None:
        if k_gamma.any():
            raise ConfigError("params.sigma_gamma is required when k_gamma is nonzero")
        sigma_gamma = np.eye(2)
    return HawkesParams(
        k_mu=k_mu,
        k_gamma=k_gamma,
        w=np.asarray(w, dtype=float),
        cov_mu=CovarianceParams.from_matrix(np.asarray(doc["sigma_mu"], dtype=float)),
        cov_gamma=CovarianceParams.from_matrix(np.asarray(sigma_gamma, dtype=float)),
    )


# ---------------------------------------------------------------------------
# simulate


_SIM_KEYS = {"duration", "domain", "num_types", "seed", "grid_resolution",
             "history_cutoff", "type_sampling", "safety_factor", "max_events",
             "params", "anchors"}


def _sim_config(doc: dict) -> SimConfig:
    _check_keys(doc, _SIM_KEYS, {"duration", "domain", "num_types", "params"},
                "simulate config")
    num_types = int(doc["num_types"])
    domain = rectangle_from(doc["domain"])
    params = _hawkes_params_from_config(doc["params"], num_types)
    if params.num_types != num_types:
        raise ConfigError("params matrices do not match num_types")
    anchors = doc.get("anchors", [])
    if isinstance(anchors, dict):
        _check_keys(anchors, {"count", "seed", "margin", "type_weights"},
                    {"count"}, "anchors")
        anchor_types, anchor_locs = uniform_anchors(
            int(anchors["count"]), domain,
            seed=int(anchors.get("seed", 0)),
            type_weights=anchors.get("type_weights"),
            num_types=num_types,
            margin=float(anchors.get("margin", 0.0)),
        )
    else:
        anchor_types = np.asarray([int(a["u"]) - 1 for a in anchors], dtype=np.int64)
        anchor_locs = np.asarray([[float(a["x"]), float(a["y"])] for a in anchors],
                                 dtype=float).reshape(-1, 2)
    return SimConfig(
        params=params,
        duration=float(doc["duration"]),
        domain=domain,
        anchor_types=anchor_types,
        anchor_locations=anchor_locs,
        grid_resolution=int(doc.get("grid_resolution", 50)),
        history_cutoff=float(doc.get("history_cutoff", 100.0)),
        seed=int(doc.get("seed", 0)),
        type_sampling=doc.get("type_sampling", "verbatim"),
        safety_factor=float(doc.get("safety_factor", 1.2)),
        max_events=(int(doc["max_events"]) if doc.get("max_events") is not None
                    else None),
    )


def cmd_simulate(args) -> int:
    doc = _load_yaml(args.config)
    for key in ("duration", "seed", "grid_resolution", "type_sampling",
                "max_events"):
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    config = _sim_config(doc)
    seq, stats = simulate(config, return_stats=True)
    run_dir = make_run_dir(args.out_root, doc)
    csv_path = os.path.join(run_dir, "events.csv")
    with open(csv_path, "w", encoding="utf-8") as f:
        f.write(serialize_events(seq))
    _write_json(os.path.join(run_dir, "metadata.json"), {
        "config": doc,
        "seed": config.seed,
        "type_sampling": config.type_sampling,
        "n_events": len(seq),
        "n_candidates": stats.n_candidates,
        "acceptance_rate": stats.acceptance_rate,
        "capped": stats.capped,
        "duration": seq.duration,
    })
    print(f"run dir: {run_dir}")
    print(f"events: {len(seq)}  acceptance rate: {stats.acceptance_rate:.4f}")
    return 0


# ---------------------------------------------------------------------------
# fit


_FIT_KEYS = {"events", "model", "num_types", "domain", "duration",
             "rescale_time", "normalize_space", "split", "fit", "type_names"}
_FITCFG_KEYS = {"rff_dim", "learning_rate", "batch_size", "softplus_scale",
                "max_epoch", "patience", "seed", "history_cutoff",
                "shared_basis", "adaptive"}


def _fit_config(doc: dict) -> FitConfig:
    sub = doc.get("fit", {})
    _check_keys(sub, _FITCFG_KEYS, set(), "fit section")
    return FitConfig(**sub)


def _split_spec(doc: dict) -> SplitSpec:
    sub = doc.get("split", {})
    _check_keys(sub, {"fit", "val", "test"}, set(), "split section")
    return SplitSpec(
        fit_fraction=float(sub.get("fit", 0.72)),
        val_fraction=float(sub.get("val", 0.08)),
        test_fraction=float(sub.get("test", 0.20)),
    )


def _prepare_data(doc: dict):
    path = doc["events"]
    try:
        with open(path, encoding="utf-8") as f:
            csv_text = f.read()
    except FileNotFoundError:
        raise DataError(f"events file not found: {path}") from None
    domain = rectangle_from(doc["domain"])
    seq = parse_events(csv_text, int(doc["num_types"]), domain,
                       duration=doc.get("duration"))
    scaling = ScalingInfo()
    if doc.get("normalize_space", False):
        seq, s_space = normalize_space(seq)
        scaling = ScalingInfo(
            time_scale=scaling.time_scale,
            x_scale=s_space.x_scale, y_scale=s_space.y_scale,
            x_offset=s_space.x_offset, y_offset=s_space.y_offset,
        )
    if doc.get("rescale_time", True):
        seq, s_time = rescale_time(seq)
        scaling = ScalingInfo(
            time_scale=s_time.time_scale,
            x_scale=scaling.x_scale, y_scale=scaling.y_scale,
            x_offset=scaling.x_offset, y_offset=scaling.y_offset,
        )
    return seq, scaling, data_hash(csv_text)


def _eval_splits(model, fit_seq, val_seq, test_seq):
    results: dict[str, EvalResult] = {}
    results["fit"] = evaluate(fit_seq, model, "fit")
    history = fit_seq
    if len(val_seq):
        history = concat(history, val_seq)
        results["val"] = evaluate(val_seq, model, "val", history=history)
    if len(test_seq):
        history = concat(history, test_seq)
        results["test"] = evaluate(test_seq, model, "test", history=history)
    return results


def cmd_fit(args) -> int:
    doc = _load_yaml(args.config)
    for key in ("events", "model", "duration", "num_types"):
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    fit_overrides = {k: getattr(args, k) for k in _FITCFG_KEYS
                     if getattr(args, k, None) is not None}
    if fit_overrides:
        doc["fit"] = {**doc.get("fit", {}), **fit_overrides}
    _check_keys(doc, _FIT_KEYS, {"events", "model", "num_types", "domain"},
                "fit config")
    model_kind = doc["model"]
    if model_kind not in ("hawkes", "poisson", "spatial-poisson"):
        raise ConfigError(f"unknown model kind {model_kind!r}")

    seq, scaling, digest = _prepare_data(doc)
    fit_seq, val_seq, test_seq = split_chronological(seq, _split_spec(doc))
    config = _fit_config(doc)
    run_dir = make_run_dir(args.out_root, doc)
    provenance = {"config": doc, "data_sha256": digest, "seed": config.seed}

    if model_kind == "poisson":
        params = fit_poisson(fit_seq)
        model = FittedPoisson(params=params)
        model_file = ModelFile(
            model_kind="poisson",
            num_types=seq.num_types,
            domain=[seq.domain.x_min, seq.domain.x_max,
                    seq.domain.y_min, seq.domain.y_max],
            scaling=scaling_dict(scaling),
            params={"mu": params.mu.tolist()},
            provenance=provenance,
        )
        report_doc = {
            "model_kind": "poisson",
            "p": count_parameters("poisson", seq.num_types),
            "epochs_run": 0,
            "total_nll_fit": nll_poisson(fit_seq, params),
        }
        series = []
    else:
        try:
            if model_kind == "hawkes":
                report = fit(fit_seq, val_seq, config)
            else:
                report = fit_spatial_poisson(fit_seq, val_seq, config)
        except TrainingError as exc:
            if exc.report is not None:
                _write_json(os.path.join(run_dir, "fit_report.json"),
                            _report_doc(exc.report))
                _write_series(run_dir, exc.report)
            print(f"training diverged: {exc}", file=sys.stderr)
            print(f"partial report in {run_dir}", file=sys.stderr)
            return 3
        from .model_io import _basis_dict

        model_file = ModelFile(
            model_kind=model_kind,
            num_types=seq.num_types,
            domain=[seq.domain.x_min, seq.domain.x_max,
                    seq.domain.y_min, seq.domain.y_max],
            scaling=scaling_dict(scaling),
            params=hawkes_params_dict(report.best_params),
            rff_dim=config.rff_dim,
            basis=_basis_dict(report.basis),
            basis_gamma=_basis_dict(report.basis_gamma),
            history_cutoff=config.history_cutoff,
            provenance=provenance,
        )
        model = fitted_model(model_file, base=fit_seq)
        report_doc = _report_doc(report)
        series = list(zip(report.train_nll_per_event, report.val_nll_per_event))

    results = _eval_splits(model, fit_seq, val_seq, test_seq)
    save_model(os.path.join(run_dir, "model.json"), model_file)
    report_doc["eval"] = {k: v.as_dict() for k, v in results.items()}
    _write_json(os.path.join(run_dir, "fit_report.json"), report_doc)
    with open(os.path.join(run_dir, "nll_series.csv"), "w", encoding="utf-8") as f:
        f.write("epoch,train_nll_per_event,val_nll_per_event\n")
        for i, (tr, va) in enumerate(series):
            f.write(f"{i},{tr!r},{va!r}\n")
    print(f"run dir: {run_dir}")
    for split, res in results.items():
        print(f"{split}: nll/event = {res.nll_per_event:.6f}  "
              f"(n = {res.n_events}, aic = {res.aic:.2f})")
    return 0


def _report_doc(report) -> dict:
    return {
        "model_kind": report.model_kind,
        "epochs_run": report.epochs_run,
        "best_epoch": report.best_epoch,
        "best_val_nll_per_event": report.best_val_nll,
        "p": report.p,
        "aic_train": report.aic_train,
        "wall_time_s": report.wall_time,
        "n_fit": report.n_fit,
        "n_val": report.n_val,
    }


def _write_series(run_dir: str, report) -> None:
    with open(os.path.join(run_dir, "nll_series.csv"), "w", encoding="utf-8") as f:
        f.write("epoch,train_nll_per_event,val_nll_per_event\n")
        for i, (tr, va) in enumerate(zip(report.train_nll_per_event,
                                         report.val_nll_per_event)):
            f.write(f"{i},{tr!r},{va!r}\n")


# ---------------------------------------------------------------------------
# evaluate


def _replay_data(model_file: ModelFile, events_path: str):
    """Parse events and apply the model's stored scaling and split."""
    try:
        with open(events_path, encoding="utf-8") as f:
            csv_text = f.read()
    except FileNotFoundError:
        raise DataError(f"events file not found: {events_path}") from None
    doc = model_file.provenance.get("config", {})
    domain_raw = doc.get("domain")
    scaling = scaling_from(model_file.scaling)
    if domain_raw is not None and (scaling.x_scale != 1.0 or scaling.y_scale != 1.0):
        parse_domain = rectangle_from(domain_raw)
    else:
        parse_domain = rectangle_from(model_file.domain)
    seq = parse_events(csv_text, model_file.num_types, parse_domain,
                       duration=doc.get("duration"))
    if scaling.x_scale != 1.0 or scaling.y_scale != 1.0:
        seq, _ = normalize_space(seq)
    if scaling.time_scale != 1.0:
        from dataclasses import replace

        seq = replace(seq, times=seq.times * scaling.time_scale,
                      duration=seq.duration * scaling.time_scale,
                      t_start=seq.t_start * scaling.time_scale)
    split_doc = {"split": doc.get("split", {})} if doc.get("split") else {}
    return split_chronological(seq, _split_spec(split_doc))


def cmd_evaluate(args) -> int:
    model_file = load_model(args.model)
    fit_seq, val_seq, test_seq = _replay_data(model_file, args.events)
    model = fitted_model(model_file, base=fit_seq)
    results = _eval_splits(model, fit_seq, val_seq, test_seq)
    wanted = args.split.split(",") if args.split else list(results)
    out = {}
    for split in wanted:
        if split not in results:
            raise ConfigError(f"split {split!r} unavailable (empty partition?)")
        res = results[split]
        out[split] = res.as_dict()
        print(f"{split}: nll/event = {res.nll_per_event:.6f}  "
              f"(n = {res.n_events}, aic = {res.aic:.2f})")
    if args.out:
        _write_json(args.out, out)
    return 0


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    model_file = load_model(args.model)
    run_dir = make_run_dir(args.out_root, {"model": args.model,
                                           "times": args.grid_times})
    names = (args.type_names.split(",") if args.type_names
             else [f"type{i + 1}" for i in range(model_file.num_types)])
    params = None
    if model_file.model_kind == "poisson":
        mu = model_file.params["mu"]
        print("constant-rate model; excitation structure is not defined")
        _write_json(os.path.join(run_dir, "excitation.json"),
                    {"type_names": names, "mu": mu})
    else:
        from .model_io import hawkes_params_from

        params = hawkes_params_from(model_file.params)
        rep = excitation_report(params, names)
        _write_json(os.path.join(run_dir, "excitation.json"), rep)
        text = render_excitation_report(rep)
        with open(os.path.join(run_dir, "excitation.txt"), "w",
                  encoding="utf-8") as f:
            f.write(text)
        print(text)

    if args.grid_times:
        times = [float(v) for v in args.grid_times.split(",")]
        resolution = args.resolution
        if model_file.model_kind == "poisson":
            print("warning: constant-rate model, emitting flat grids",
                  file=sys.stderr)
            total = float(np.sum(model_file.params["mu"]))
            for t in times:
                grid = np.full((resolution, resolution), total)
                _save_grid(run_dir, t, grid)
        else:
            if not args.events:
                raise ConfigError("--events is required for intensity grids")
            fit_seq, val_seq, test_seq = _replay_data(model_file, args.events)
            seq = concat(concat(fit_seq, val_seq), test_seq)
            for t in times:
                grid = intensity_grid(params, seq, t, resolution, base=fit_seq)
                _save_grid(run_dir, t, grid)
    print(f"run dir: {run_dir}")
    return 0


def _save_grid(run_dir: str, t: float, grid: np.ndarray) -> None:
    path = os.path.join(run_dir, f"grid_t{t:g}.csv")
    with open(path, "w", encoding="utf-8") as f:
        for row in grid:
            f.write(",".join(repr(float(v)) for v in row) + "\n")


# ---------------------------------------------------------------------------
# gradcheck


def gradcheck_instance(seed: int, n: int = 50, u_count: int = 2):
    """Random instance for gradient verification.

    Kernel scales sit at the domain scale so the low-dimensional randomized
    intensities stay clear of zero at every event across seeds.
    """
    from .reparam import softplus_inverse

    rng = np.random.default_rng(seed)
    domain = Rectangle(-1.0, 1.0, -1.0, 1.0)
    times = np.sort(rng.uniform(0.0, float(n), n))
    seq = EventSequence(
        times=times,
        locations=rng.uniform(-1.0, 1.0, (n, 2)),
        types=rng.integers(0, u_count, n),
        num_types=u_count,
        duration=float(times[-1]),
        domain=domain,
    )
    raw = init_params(seq, seed)
    angles = rng.uniform(0.0, 2.0 * np.pi, 2)
    rot = lambda a: np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    raw = raw.replace(
        v_mu=rot(angles[0]), v_gamma=rot(angles[1]),
        raw_l_mu=softplus_inverse(np.array([2.5, 4.0]), 0.01),
        raw_l_gamma=softplus_inverse(np.array([3.0, 2.0]), 0.01),
    )
    return seq, raw


def cmd_gradcheck(args) -> int:
    from .rff import sample_basis

    s = 0.01
    tol = args.tolerance
    worst = {name: 0.0 for name in BLOCK_NAMES}
    worst_coord = {name: "" for name in BLOCK_NAMES}
    for seed in range(args.seeds):
        seq, raw = gradcheck_instance(seed)
        basis = sample_basis(10, seed)
        _, analytic = grad_raw(seq, seq, raw, basis, s)
        numeric = finite_diff(seq, seq, raw, basis, s, h=1e-5)
        if args.perturb:
            analytic.d_k_mu = analytic.d_k_mu + 1e-3
        for name in BLOCK_NAMES:
            a = np.atleast_1d(getattr(analytic, name))
            f = np.atleast_1d(getattr(numeric, name))
            denom = max(np.abs(f).max(), 1e-12)
            rel = np.abs(a - f) / denom
            if rel.max() > worst[name]:
                worst[name] = float(rel.max())
                idx = np.unravel_index(np.argmax(rel), rel.shape)
                worst_coord[name] = f"seed {seed}, index {list(idx)}"
    status = 0
    for name in BLOCK_NAMES:
        ok = worst[name] <= tol
        print(f"{name:12s} max rel err {worst[name]:.3e}  "
              f"{'ok' if ok else 'FAIL at ' + worst_coord[name]}")
        if not ok:
            status = 3
    return status


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sthawkes",
        description="simulate, fit and analyze multi-type spatio-temporal "
                    "self-exciting processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a realization")
    p_sim.add_argument("-c", "--config", required=True)
    p_sim.add_argument("--out-root", default=None)
    p_sim.add_argument("--duration", type=float, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--grid-resolution", dest="grid_resolution", type=int,
                       default=None)
    p_sim.add_argument("--type-sampling", dest="type_sampling", default=None)
    p_sim.add_argument("--max-events", dest="max_events", type=int, default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="rescale, split and fit a model")
    p_fit.add_argument("-c", "--config", required=True)
    p_fit.add_argument("--out-root", default=None)
    p_fit.add_argument("--events", default=None)
    p_fit.add_argument("--model", default=None)
    p_fit.add_argument("--num-types", dest="num_types", type=int, default=None)
    p_fit.add_argument("--duration", type=float, default=None)
    p_fit.add_argument("--rff-dim", dest="rff_dim", type=int, default=None)
    p_fit.add_argument("--learning-rate", dest="learning_rate", type=float,
                       default=None)
    p_fit.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p_fit.add_argument("--softplus-scale", dest="softplus_scale", type=float,
                       default=None)
    p_fit.add_argument("--max-epoch", dest="max_epoch", type=int, default=None)
    p_fit.add_argument("--patience", type=int, default=None)
    p_fit.add_argument("--seed", type=int, default=None)
    p_fit.add_argument("--history-cutoff", dest="history_cutoff", type=float,
                       default=None)
    p_fit.set_defaults(func=cmd_fit)

    p_eval = sub.add_parser("evaluate", help="score a saved model on a CSV")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--events", required=True)
    p_eval.add_argument("--split", default=None,
                        help="comma-separated subset of fit,val,test")
    p_eval.add_argument("--out", default=None, help="write results JSON here")
    p_eval.set_defaults(func=cmd_evaluate)

    p_rep = sub.add_parser("report", help="excitation matrices and grids")
    p_rep.add_argument("--model", required=True)
    p_rep.add_argument("--events", default=None)
    p_rep.add_argument("--out-root", default=None)
    p_rep.add_argument("--type-names", dest="type_names", default=None)
    p_rep.add_argument("--grid-times", dest="grid_times", default=None)
    p_rep.add_argument("--resolution", type=int, default=50)
    p_rep.set_defaults(func=cmd_report)

    p_gc = sub.add_parser("gradcheck", help="analytic vs finite-difference "
                                            "gradients on synthetic instances")
    p_gc.add_argument("--seeds", type=int, default=5)
    p_gc.add_argument("--tolerance", type=float, default=1e-5)
    p_gc.add_argument("--perturb", action="store_true",
                      help=argparse.SUPPRESS)
    p_gc.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
