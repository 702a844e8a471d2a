"""Experiment harness: config files, dataset I/O, runs, tuning, benchmarks.

File conventions, shared by the CLI and the test suite:

* configs are JSON (a complete example lives in the README);
* dataset directories hold ``manifest.json`` plus CSVs (``inputs.csv``,
  ``observations.csv``, ``latents.csv``) or ``events.txt`` for count data;
* run directories hold ``trace.csv`` (columns ``iteration, log_likelihood,
  cumulative_likelihood_evals, accepted``), ``summary.json`` and
  ``manifest.json``;
* every CSV starts with a ``#`` comment carrying the config hash and seed,
  and JSON outputs carry the same keys, so any output can be traced back to
  the exact configuration that produced it.

Floats are written with ``repr`` (shortest round-trip form), which makes
rerunning a command with the same config and seed byte-identical. Wall-clock
fields live only in ``summary.json``, never in trace CSVs.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .diagnostics import ChainTrace, EssReport, effective_sample_size, summarize
from .errors import EllsliceError, InvalidConfig
from .gaussian import GaussianPrior, factorize
from .kernels import KernelConfig, squared_exponential
from .models import (
    CLASSIFICATION_KERNEL,
    bin_events,
    generate_classification_dataset,
    generate_regression_dataset,
    mining_event_times,
    read_event_times,
)
from .samplers import chain_rng, make_operator, run_chain

DESK_BURN = 1_000
DESK_KEEP = 10_000
PAPER_BURN = 10_000
PAPER_KEEP = 100_000

# Count data defaults: 50-day bins, lengthscale 13516 days, unit variance.
COX_BIN_WIDTH = 50.0
COX_KERNEL = KernelConfig(lengthscale=13516.0, signal_variance=1.0)

MODEL_KINDS = ("regression", "classification", "cox")

# Sub-streams of the master seed, so each command draws from its own
# reproducible stream regardless of execution order. Benchmark cells build
# model mi's dataset from the same stream `generate` uses for variant mi,
# so a step size tuned on a generated dataset transfers exactly.
_STREAM_DATASET = 0
_STREAM_RUN = 1
_STREAM_TUNE = 2
_STREAM_BENCH = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    ``model``/``sampler`` describe a single run; ``models``/``samplers`` a
    benchmark matrix. The seed must come from the config or the command
    line, never the wall clock.
    """

    seed: int
    n_burn: int = DESK_BURN
    n_keep: int = DESK_KEEP
    thin: int = 0
    repeats: int = 1
    kernel: KernelConfig = KernelConfig()
    model: Mapping[str, Any] | None = None
    sampler: Mapping[str, Any] | None = None
    models: tuple[Mapping[str, Any], ...] = ()
    samplers: tuple[Mapping[str, Any], ...] = ()
    tune_grid: tuple[float, ...] = ()

    def __post_init__(self):
        if not isinstance(self.seed, int):
            raise InvalidConfig(f"seed must be an integer, got {self.seed!r}")
        if self.n_keep < 1:
            raise InvalidConfig(f"n_keep must be >= 1, got {self.n_keep}")
        if self.n_burn < 0 or self.thin < 0:
            raise InvalidConfig("n_burn and thin must be >= 0")
        if self.repeats < 1:
            raise InvalidConfig(f"repeats must be >= 1, got {self.repeats}")

    def as_dict(self) -> dict[str, Any]:
        """Canonical plain-dict form, used for hashing and manifests."""
        return {
            "seed": self.seed,
            "n_burn": self.n_burn,
            "n_keep": self.n_keep,
            "thin": self.thin,
            "repeats": self.repeats,
            "kernel": dataclasses.asdict(self.kernel),
            "model": dict(self.model) if self.model is not None else None,
            "sampler": dict(self.sampler) if self.sampler is not None else None,
            "models": [dict(m) for m in self.models],
            "samplers": [dict(s) for s in self.samplers],
            "tune_grid": list(self.tune_grid),
        }


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 over the canonical JSON form of a config."""
    blob = json.dumps(cfg.as_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def parse_config(raw: Mapping[str, Any], overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a JSON-style dict plus CLI overrides."""
    merged = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    if "seed" not in merged:
        raise InvalidConfig("config must supply a seed (no wall-clock seeding)")
    known = {
        "seed", "n_burn", "n_keep", "thin", "repeats", "kernel",
        "model", "sampler", "models", "samplers", "tune_grid",
    }
    unknown = set(merged) - known
    if unknown:
        raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
    kernel = merged.get("kernel", {})
    if isinstance(kernel, Mapping):
        kernel = KernelConfig(**kernel)
    return ExperimentConfig(
        seed=merged["seed"],
        n_burn=int(merged.get("n_burn", DESK_BURN)),
        n_keep=int(merged.get("n_keep", DESK_KEEP)),
        thin=int(merged.get("thin", 0)),
        repeats=int(merged.get("repeats", 1)),
        kernel=kernel,
        model=merged.get("model"),
        sampler=merged.get("sampler"),
        models=tuple(merged.get("models", ())),
        samplers=tuple(merged.get("samplers", ())),
        tune_grid=tuple(float(g) for g in merged.get("tune_grid", ())),
    )


def load_config(path: str | Path, overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Parse a JSON config file; overrides win over file values."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidConfig(f"config {path} must be a JSON object")
    return parse_config(raw, overrides)


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class Dataset:
    """In-memory dataset: inputs, likelihood model and optional true latents."""

    inputs: np.ndarray
    data: Any
    latents: np.ndarray | None
    kernel: KernelConfig
    model_cfg: dict[str, Any]


def _model_kernel(model_cfg: Mapping[str, Any], default: KernelConfig) -> KernelConfig:
    """Per-model kernel override, else the kind-specific default."""
    override = model_cfg.get("kernel")
    if override is None:
        return default
    if isinstance(override, Mapping):
        return KernelConfig(**override)
    return override


def build_dataset(model_cfg: Mapping[str, Any], kernel: KernelConfig, rng: np.random.Generator) -> Dataset:
    """Generate (or load and bin) the dataset a model spec describes.

    Regression and classification are synthesized from the prior;
    ``cox`` bins event times, either from ``events_file`` or the packaged
    coal-mining record. Bin centers double as the 1-D inputs so the same
    kernel machinery applies.
    """
    kind = model_cfg.get("kind")
    if kind == "regression":
        kern = _model_kernel(model_cfg, kernel)
        inputs, data, latents = generate_regression_dataset(
            int(model_cfg.get("n", 200)),
            int(model_cfg.get("dims", 1)),
            kern,
            float(model_cfg.get("noise_std", 0.3)),
            rng,
        )
        return Dataset(inputs, data, latents, kern, dict(model_cfg))
    if kind == "classification":
        kern = _model_kernel(model_cfg, CLASSIFICATION_KERNEL)
        inputs, data, latents = generate_classification_dataset(
            int(model_cfg.get("n", 200)),
            int(model_cfg.get("dims", 1)),
            kern,
            rng,
            link=model_cfg.get("link", "logistic"),
        )
        return Dataset(inputs, data, latents, kern, dict(model_cfg))
    if kind == "cox":
        kern = _model_kernel(model_cfg, COX_KERNEL)
        source = model_cfg.get("events_file")
        if source is None:
            events = np.asarray(mining_event_times())
        else:
            events = read_event_times(source)
        width = float(model_cfg.get("bin_width", COX_BIN_WIDTH))
        data = bin_events(events, width)
        centers = (np.arange(data.n) + 0.5) * width
        return Dataset(centers.reshape(-1, 1), data, None, kern, dict(model_cfg))
    raise InvalidConfig(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def _write_matrix(path: Path, arr: np.ndarray, comment: str) -> None:
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    if arr.shape[0] == 1 and arr.size > 1:
        arr = arr.T
    lines = [f"# {comment}"]
    lines += [",".join(repr(float(v)) for v in row) for row in arr]
    path.write_text("\n".join(lines) + "\n")


def _read_matrix(path: Path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([float(tok) for tok in line.split(",")])
    return np.asarray(rows, dtype=float)


def _write_json(path: Path, payload: Mapping[str, Any]) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _provenance(cfg: ExperimentConfig) -> str:
    return f"config_hash={config_hash(cfg)} seed={cfg.seed}"


def cli_generate(cfg: ExperimentConfig, out_dir: str | Path) -> list[Path]:
    """Write dataset directories described by the config's model section.

    ``dims`` may be a list, in which case one subdirectory per dimension is
    produced (``d01``, ``d02``, ...); otherwise files go straight into
    ``out_dir``. Returns the directories written.
    """
    if cfg.model is None:
        raise InvalidConfig("generate requires a 'model' section")
    dims = cfg.model.get("dims", 1)
    if isinstance(dims, (list, tuple)):
        variants = [dict(cfg.model, dims=int(d)) for d in dims]
        dirs = [Path(out_dir) / f"d{int(d):02d}" for d in dims]
    else:
        variants = [dict(cfg.model)]
        dirs = [Path(out_dir)]
    written = []
    for idx, (model_cfg, target) in enumerate(zip(variants, dirs)):
        rng = chain_rng(cfg.seed, _STREAM_DATASET, idx)
        ds = build_dataset(model_cfg, cfg.kernel, rng)
        target.mkdir(parents=True, exist_ok=True)
        note = _provenance(cfg)
        manifest = {
            "config_hash": config_hash(cfg),
            "seed": cfg.seed,
            "model": ds.model_cfg,
            "kernel": dataclasses.asdict(ds.kernel),
            "n": ds.data.n,
        }
        if ds.model_cfg["kind"] == "cox":
            events = np.asarray(mining_event_times()) if ds.model_cfg.get("events_file") is None \
                else read_event_times(ds.model_cfg["events_file"])
            (target / "events.txt").write_text(
                "\n".join(repr(float(t)) for t in events) + "\n"
            )
            manifest["bin_width"] = float(ds.model_cfg.get("bin_width", COX_BIN_WIDTH))
            manifest["files"] = ["events.txt"]
        else:
            _write_matrix(target / "inputs.csv", ds.inputs, note)
            obs = ds.data.y if ds.model_cfg["kind"] == "regression" else ds.data.labels
            _write_matrix(target / "observations.csv", obs, note)
            _write_matrix(target / "latents.csv", ds.latents, note)
            manifest["files"] = ["inputs.csv", "observations.csv", "latents.csv"]
        _write_json(target / "manifest.json", manifest)
        written.append(target)
    return written


def load_dataset(dataset_dir: str | Path) -> Dataset:
    """Rebuild a Dataset from a directory written by :func:`cli_generate`.

    The manifest is self-describing: model kind, parameters and kernel all
    come from it, so a run only adds sampler and chain settings.
    """
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / "manifest.json"
    if not manifest_path.exists():
        raise InvalidConfig(f"{dataset_dir} has no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    model_cfg = dict(manifest["model"])
    kernel = KernelConfig(**manifest["kernel"])
    kind = model_cfg["kind"]
    if kind == "cox":
        events = read_event_times(dataset_dir / "events.txt")
        width = float(manifest.get("bin_width", COX_BIN_WIDTH))
        data = bin_events(events, width)
        centers = (np.arange(data.n) + 0.5) * width
        return Dataset(centers.reshape(-1, 1), data, None, kernel, model_cfg)
    inputs = _read_matrix(dataset_dir / "inputs.csv")
    obs = _read_matrix(dataset_dir / "observations.csv").ravel()
    latents = _read_matrix(dataset_dir / "latents.csv").ravel()
    if kind == "regression":
        from .models import RegressionData

        noise_std = float(model_cfg.get("noise_std", 0.3))
        data = RegressionData(y=obs, noise_variance=noise_std**2)
    elif kind == "classification":
        from .models import ClassificationData

        data = ClassificationData(
            labels=obs.astype(int), link=model_cfg.get("link", "logistic")
        )
    else:
        raise InvalidConfig(f"unknown model kind {kind!r} in manifest")
    return Dataset(inputs, data, latents, kernel, model_cfg)


# ---------------------------------------------------------------------------
# runs


def build_prior(dataset: Dataset) -> GaussianPrior:
    return factorize(squared_exponential(dataset.inputs, dataset.kernel))


def write_trace_csv(path: str | Path, trace: ChainTrace, comment: str) -> None:
    lines = [f"# {comment}", "iteration,log_likelihood,cumulative_likelihood_evals,accepted"]
    for i in range(trace.n_kept):
        lines.append(
            f"{i},{repr(float(trace.log_lik[i]))},"
            f"{int(trace.lik_evals_cum[i])},{int(trace.accepted[i])}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(log_likelihood, cumulative_likelihood_evals, accepted) columns."""
    log_lik, evals, accepted = [], [], []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("iteration"):
            continue
        _, ll, ev, acc = line.split(",")
        log_lik.append(float(ll))
        evals.append(int(ev))
        accepted.append(bool(int(acc)))
    if not log_lik:
        raise InvalidConfig(f"{path} contains no trace rows")
    return np.asarray(log_lik), np.asarray(evals), np.asarray(accepted)


def _report_dict(report: EssReport, cfg: ExperimentConfig) -> dict[str, Any]:
    payload = dataclasses.asdict(report)
    payload["config_hash"] = config_hash(cfg)
    payload["seed"] = cfg.seed
    return payload


def _run_one(
    cfg: ExperimentConfig,
    dataset: Dataset,
    prior: GaussianPrior,
    sampler_cfg: Mapping[str, Any],
    stream: tuple[int, ...],
) -> tuple[ChainTrace, EssReport]:
    params = {k: v for k, v in sampler_cfg.items() if k != "kind"}
    step_fn = make_operator(sampler_cfg.get("kind", "elliptical"), **params)
    rng = chain_rng(cfg.seed, *stream)
    trace = run_chain(
        np.zeros(dataset.data.n),
        step_fn,
        prior,
        dataset.data,
        n_burn=cfg.n_burn,
        n_keep=cfg.n_keep,
        thin=cfg.thin,
        rng=rng,
    )
    return trace, summarize(trace)


def cli_run(
    cfg: ExperimentConfig, dataset_dir: str | Path, out_dir: str | Path
) -> EssReport:
    """Single chain on an existing dataset; writes trace, summary, manifest."""
    if cfg.sampler is None:
        raise InvalidConfig("run requires a 'sampler' section")
    dataset = load_dataset(dataset_dir)
    prior = build_prior(dataset)
    trace, report = _run_one(cfg, dataset, prior, cfg.sampler, (_STREAM_RUN, 0))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(out / "trace.csv", trace, _provenance(cfg))
    _write_json(out / "summary.json", _report_dict(report, cfg))
    _write_json(
        out / "manifest.json",
        {
            "config_hash": config_hash(cfg),
            "seed": cfg.seed,
            "config": cfg.as_dict(),
            "dataset": str(dataset_dir),
        },
    )
    return report


def cli_tune_mh(
    cfg: ExperimentConfig,
    dataset_dir: str | Path,
    out_dir: str | Path | None = None,
) -> tuple[float, list[dict[str, Any]]]:
    """Grid-search the M-H step size, maximizing mean ESS over repeats.

    Each grid value gets ``cfg.repeats`` chains; ties break toward the
    larger step size. Returns (best epsilon, per-epsilon results).
    """
    grid = cfg.tune_grid
    if not grid:
        raise InvalidConfig("tune-mh requires a non-empty 'tune_grid'")
    if any(not 0.0 < eps <= 1.0 for eps in grid):
        raise InvalidConfig(f"tune_grid values must be in (0, 1], got {list(grid)}")
    dataset = load_dataset(dataset_dir)
    prior = build_prior(dataset)
    results = []
    best_eps, best_ess = None, -np.inf
    for gi, eps in enumerate(sorted(grid)):
        esses = []
        for rep in range(cfg.repeats):
            _, report = _run_one(
                cfg, dataset, prior, {"kind": "neal-mh", "epsilon": eps},
                (_STREAM_TUNE, gi, rep),
            )
            esses.append(report.ess)
        mean_ess = float(np.mean(esses))
        results.append({"epsilon": eps, "ess_mean": mean_ess, "ess": esses})
        if mean_ess >= best_ess:
            best_eps, best_ess = eps, mean_ess
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(
            out / "tuning.json",
            {
                "config_hash": config_hash(cfg),
                "seed": cfg.seed,
                "best_epsilon": best_eps,
                "results": results,
            },
        )
    return best_eps, results


# ---------------------------------------------------------------------------
# benchmark matrix


def _model_tag(model_cfg: Mapping[str, Any]) -> str:
    kind = model_cfg.get("kind", "?")
    if kind in ("regression", "classification"):
        return f"{kind}-d{int(model_cfg.get('dims', 1))}"
    return str(kind)


def _sampler_tag(sampler_cfg: Mapping[str, Any]) -> str:
    kind = sampler_cfg.get("kind", "?")
    if kind == "neal-mh" and "epsilon" in sampler_cfg:
        return f"{kind}-eps{sampler_cfg['epsilon']:g}"
    return str(kind)


def cli_benchmark(cfg: ExperimentConfig, out_dir: str | Path) -> dict[str, Any]:
    """Full samplers x models cross-product, ``repeats`` chains per cell.

    One directory per cell; per-repeat traces and summaries inside. A repeat
    that raises is recorded in the cell's ``failures`` list and the matrix
    keeps going. Datasets are built once per model (stream keyed by model
    index) and shared by every sampler, so cells are comparable.
    """
    if not cfg.samplers or not cfg.models:
        raise InvalidConfig("benchmark requires non-empty 'samplers' and 'models'")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    datasets = []
    for mi, model_cfg in enumerate(cfg.models):
        ds = build_dataset(model_cfg, cfg.kernel, chain_rng(cfg.seed, _STREAM_DATASET, mi))
        datasets.append((ds, build_prior(ds)))
    cells = []
    for si, sampler_cfg in enumerate(cfg.samplers):
        for mi, model_cfg in enumerate(cfg.models):
            cell_index = si * len(cfg.models) + mi
            dataset, prior = datasets[mi]
            tag = f"cell{cell_index:02d}_{_sampler_tag(sampler_cfg)}_{_model_tag(model_cfg)}"
            cell_dir = out / tag
            cell_dir.mkdir(parents=True, exist_ok=True)
            reports, failures = [], []
            for rep in range(cfg.repeats):
                rep_dir = cell_dir / f"repeat{rep:02d}"
                rep_dir.mkdir(parents=True, exist_ok=True)
                try:
                    trace, report = _run_one(
                        cfg, dataset, prior, sampler_cfg,
                        (_STREAM_BENCH, cell_index, rep),
                    )
                except EllsliceError as exc:
                    failures.append({"repeat": rep, "error": str(exc)})
                    continue
                write_trace_csv(rep_dir / "trace.csv", trace, _provenance(cfg))
                _write_json(rep_dir / "summary.json", _report_dict(report, cfg))
                reports.append(report)
            ess = np.array([r.ess for r in reports]) if reports else np.array([np.nan])
            cell = {
                "cell": tag,
                "sampler": dict(sampler_cfg),
                "model": dict(model_cfg),
                "repeats_completed": len(reports),
                "ess_mean": float(ess.mean()),
                "ess_std": float(ess.std()) if reports else float("nan"),
                "seconds_mean": float(np.mean([r.seconds for r in reports])) if reports else float("nan"),
                "lik_evals_mean": float(np.mean([r.total_lik_evals for r in reports])) if reports else float("nan"),
                "prior_evals_mean": float(np.mean([r.total_prior_evals for r in reports])) if reports else float("nan"),
                "failures": failures,
            }
            cells.append(cell)
            _write_json(cell_dir / "cell_summary.json",
                        dict(cell, config_hash=config_hash(cfg), seed=cfg.seed))
    summary = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "n_burn": cfg.n_burn,
        "n_keep": cfg.n_keep,
        "repeats": cfg.repeats,
        "cells": cells,
    }
    _write_json(out / "benchmark_summary.json", summary)
    header = "cell,ess_mean,ess_std,seconds_mean,lik_evals_mean,prior_evals_mean,failures"
    rows = [header] + [
        f"{c['cell']},{repr(c['ess_mean'])},{repr(c['ess_std'])},"
        f"{repr(c['seconds_mean'])},{repr(c['lik_evals_mean'])},"
        f"{repr(c['prior_evals_mean'])},{len(c['failures'])}"
        for c in cells
    ]
    (out / "benchmark_summary.csv").write_text(
        f"# {_provenance(cfg)}\n" + "\n".join(rows) + "\n"
    )
    return summary


def cli_diagnose(trace_path: str | Path) -> EssReport:
    """ESS report recomputed from a trace CSV.

    Wall time and prior-evaluation totals are not stored in trace CSVs, so
    those fields are zero here; everything else matches the original
    summary.
    """
    log_lik, evals, _ = read_trace_csv(trace_path)
    report = effective_sample_size(log_lik)
    return dataclasses.replace(report, total_lik_evals=int(evals[-1]))
