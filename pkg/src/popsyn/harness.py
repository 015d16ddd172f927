"""Experiment orchestration: grid search and the full benchmark protocol.

The protocol mirrors the evaluation pipeline end to end on the synthetic
benchmark: split the data (application group, then 90/10 train/test, then
K=5 folds), train CVAE and CGAN on every fold, select each model's best
fold by validation pooled-marginal SRMSE, fit the empirical baseline, then
score all three against the validation, test, and application sets and emit
table-shaped JSON reports plus figure CSVs. Reports contain no timestamps
or wall-clock values, so a fixed master seed reproduces them byte for byte.
"""

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .baseline import fit_empirical, sample_baseline
from .cgan import CganTrainConfig, sample_cgan, save_cgan, train_cgan
from .cvae import CvaeTrainConfig, sample_cvae, save_cvae, train_cvae
from .errors import ConfigError, TrainingDivergedError
from .metrics import (
    distribution_suite,
    fold_stats,
    pooled_marginal_srmse,
    write_marginal_figure_csv,
    write_scatter_figure_csv,
    zero_sample_pct,
    SUITE_BIVARIATE,
    SUITE_TRIVARIATE_1,
    SUITE_TRIVARIATE_2,
)
from .rng import derive_rng, derive_seed
from .schema import build_schema, conditional_part
from .split import make_split
from .synthetic import GENERATOR_VERSION, default_application_selector, generate_dataset

MODEL_KINDS = ("cvae", "cgan")
# extra samples per conditional row when scoring, to keep sampling noise
# well below the model differences being measured
PROTOCOL_SAMPLE_MULTIPLIER = 10


def _train_model(kind, records, schema, config, validation_records=None):
    if kind == "cvae":
        return train_cvae(records, schema, config, validation_records)
    if kind == "cgan":
        return train_cgan(records, schema, config, validation_records)
    raise ConfigError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def _sample_model(kind, model, conditionals, rng):
    return sample_cvae(model, conditionals, rng) if kind == "cvae" else sample_cgan(
        model, conditionals, rng
    )


def _repeat_conditionals(records, schema, multiplier):
    conds = conditional_part(np.asarray(records, dtype=np.int64), schema)
    return np.tile(conds, (multiplier, 1))


def default_config(kind, **overrides):
    cls = CvaeTrainConfig if kind == "cvae" else CganTrainConfig
    return cls(**overrides)


@dataclass(frozen=True)
class GridSpec:
    """Candidate values per hyperparameter axis; the grid is their product."""

    axes: dict

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("grid needs at least one axis")
        for name, values in self.axes.items():
            if not values:
                raise ConfigError(f"grid axis {name!r} is empty")

    @property
    def size(self):
        n = 1
        for values in self.axes.values():
            n *= len(values)
        return n

    def configs(self, kind):
        """All combinations as config objects, in row-major axis order."""
        cls = CvaeTrainConfig if kind == "cvae" else CganTrainConfig
        valid = set(cls.__dataclass_fields__)
        for name in self.axes:
            if name not in valid:
                raise ConfigError(f"grid axis {name!r} is not a {kind} config field")
        names = list(self.axes)
        combos = [{}]
        for name in names:
            combos = [dict(c, **{name: v}) for c in combos for v in self.axes[name]]
        return [cls(**combo) for combo in combos]


@dataclass
class ExperimentRecord:
    config: dict
    config_index: int
    seed: int
    fold_srmse: list = field(default_factory=list)
    best_fold: int = None
    best_srmse: float = None
    fold_mean: float = None
    fold_std: float = None
    zero_sample_pct: float = None
    wall_time_s: float = None
    failed: bool = False
    error: str = None

    def to_json_dict(self):
        d = dataclasses.asdict(self)
        d.pop("wall_time_s")  # keep command outputs reproducible byte for byte
        return d


def run_grid(kind, grid, records, split, schema, master_seed=0):
    """Train every grid config on all K folds; rank by best-fold SRMSE.

    A config whose training diverges becomes a failure entry ranked last.
    Ties break by lower fold mean, then lower config index.
    """
    records = np.asarray(records, dtype=np.int64)
    ranked = []
    for ci, config in enumerate(grid.configs(kind)):
        t0 = time.perf_counter()
        record = ExperimentRecord(
            config=dataclasses.asdict(config), config_index=ci, seed=master_seed
        )
        try:
            fold_srmse = []
            fold_models = []
            for k, (tr, va) in enumerate(split.folds):
                cfg = dataclasses.replace(
                    config, seed=derive_seed(master_seed, "grid", kind, ci, k)
                )
                model, _ = _train_model(kind, records[tr], schema, cfg)
                sample_rng = derive_rng(master_seed, "grid", kind, ci, k, "sample")
                sampled = _sample_model(
                    kind, model, conditional_part(records[va], schema), sample_rng
                )
                fold_srmse.append(pooled_marginal_srmse(sampled, records[va], schema))
                fold_models.append((model, sampled, tr))
            best = int(np.argmin(fold_srmse))
            record.fold_srmse = [float(v) for v in fold_srmse]
            record.best_fold = best
            record.best_srmse = float(fold_srmse[best])
            record.fold_mean, record.fold_std = fold_stats(fold_srmse)
            _, best_samples, best_tr = fold_models[best]
            record.zero_sample_pct = zero_sample_pct(best_samples, records[best_tr], schema)
        except TrainingDivergedError as exc:
            record.failed = True
            record.error = str(exc)
        record.wall_time_s = time.perf_counter() - t0
        ranked.append(record)
    ok = [r for r in ranked if not r.failed]
    bad = [r for r in ranked if r.failed]
    ok.sort(key=lambda r: (r.best_srmse, r.fold_mean, r.config_index))
    return ok + bad


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_protocol(records, schema, master_seed, out_dir,
                       cvae_config=None, cgan_config=None,
                       sample_multiplier=PROTOCOL_SAMPLE_MULTIPLIER,
                       save_models=True):
    """One variant's end-to-end benchmark run; returns the report dict.

    Writes, under out_dir: report.json, best-fold model directories, best-fold
    trace CSVs, and figure CSVs for the test and application splits.
    """
    records = np.asarray(records, dtype=np.int64)
    if records.shape[0] < 1000:
        raise ConfigError(f"protocol needs >= 1000 records, got {records.shape[0]}")
    os.makedirs(out_dir, exist_ok=True)
    variant = schema.variant
    split_rng = derive_rng(master_seed, "protocol", variant, "split")
    split = make_split(records, default_application_selector(schema), schema, split_rng)
    train_pool = records[split.train_ids]

    configs = {
        "cvae": cvae_config or CvaeTrainConfig(),
        "cgan": cgan_config or CganTrainConfig(),
    }
    validation_block = {}
    holdout_block = {"test": {}, "application": {}}
    samples_for_figures = {"test": {}, "application": {}}

    # empirical baseline: per-fold fits for the validation table, full-pool
    # fit for the holdout tables
    fold_srmse = []
    for k, (tr, va) in enumerate(split.folds):
        table = fit_empirical(records[tr], schema)
        rng = derive_rng(master_seed, "protocol", variant, "baseline", k)
        conds = _repeat_conditionals(records[va], schema, sample_multiplier)
        sampled = sample_baseline(table, conds, rng)
        fold_srmse.append(pooled_marginal_srmse(sampled, records[va], schema))
    best = int(np.argmin(fold_srmse))
    mu, sigma = fold_stats(fold_srmse)
    table = fit_empirical(records[split.folds[best][0]], schema)
    rng = derive_rng(master_seed, "protocol", variant, "baseline", best, "zsp")
    best_samples = sample_baseline(
        table, _repeat_conditionals(records[split.folds[best][1]], schema, sample_multiplier), rng
    )
    validation_block["baseline"] = {
        "marginal_srmse_best_fold": float(fold_srmse[best]),
        "fold_srmse": [float(v) for v in fold_srmse],
        "fold_mean": mu,
        "fold_std": sigma,
        "best_fold": best,
        "zero_sample_pct": zero_sample_pct(best_samples, train_pool, schema),
    }
    full_table = fit_empirical(train_pool, schema)
    for split_name, ids in (("test", split.test_ids), ("application", split.application_ids)):
        rng = derive_rng(master_seed, "protocol", variant, "baseline", split_name)
        conds = _repeat_conditionals(records[ids], schema, sample_multiplier)
        sampled = sample_baseline(full_table, conds, rng)
        report = distribution_suite(sampled, records[ids], schema, train=train_pool)
        holdout_block[split_name]["baseline"] = report.to_json_dict()
        samples_for_figures[split_name]["baseline"] = sampled

    for kind in MODEL_KINDS:
        fold_results = []
        for k, (tr, va) in enumerate(split.folds):
            cfg = dataclasses.replace(
                configs[kind], seed=derive_seed(master_seed, "protocol", variant, kind, k)
            )
            model, trace = _train_model(kind, records[tr], schema, cfg, records[va])
            rng = derive_rng(master_seed, "protocol", variant, kind, k, "select")
            conds = _repeat_conditionals(records[va], schema, sample_multiplier)
            sampled = _sample_model(kind, model, conds, rng)
            fold_results.append({
                "model": model,
                "trace": trace,
                "srmse": pooled_marginal_srmse(sampled, records[va], schema),
                "samples": sampled,
                "train_ids": tr,
            })
        srmses = [r["srmse"] for r in fold_results]
        best = int(np.argmin(srmses))
        mu, sigma = fold_stats(srmses)
        best_result = fold_results[best]
        validation_block[kind] = {
            "marginal_srmse_best_fold": float(srmses[best]),
            "fold_srmse": [float(v) for v in srmses],
            "fold_mean": mu,
            "fold_std": sigma,
            "best_fold": best,
            "zero_sample_pct": zero_sample_pct(best_result["samples"], train_pool, schema),
        }
        model = best_result["model"]
        for split_name, ids in (("test", split.test_ids), ("application", split.application_ids)):
            rng = derive_rng(master_seed, "protocol", variant, kind, split_name)
            conds = _repeat_conditionals(records[ids], schema, sample_multiplier)
            sampled = _sample_model(kind, model, conds, rng)
            report = distribution_suite(sampled, records[ids], schema, train=train_pool)
            holdout_block[split_name][kind] = report.to_json_dict()
            samples_for_figures[split_name][kind] = sampled
        if save_models:
            model_dir = os.path.join(out_dir, f"{kind}_best")
            (save_cvae if kind == "cvae" else save_cgan)(model, model_dir)
            _write_trace_csv(os.path.join(out_dir, f"{kind}_best_trace.csv"), kind,
                             best_result["trace"])

    _write_figures(out_dir, records, split, schema, samples_for_figures)
    report = {
        "variant": variant,
        "generator_version": GENERATOR_VERSION,
        "master_seed": master_seed,
        "n_records": int(records.shape[0]),
        "sample_multiplier": sample_multiplier,
        "split": {
            "application": int(len(split.application_ids)),
            "test": int(len(split.test_ids)),
            "train": int(len(split.train_ids)),
        },
        "configs": {k: dataclasses.asdict(v) for k, v in configs.items()},
        "validation": validation_block,
        "holdout": holdout_block,
    }
    _write_json(os.path.join(out_dir, "report.json"), report)
    return report


def _write_trace_csv(path, kind, trace):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if kind == "cvae":
            writer.writerow(["iteration", "train_loss"])
            for i, v in enumerate(trace["train_loss"], start=1):
                writer.writerow([i, repr(v)])
        else:
            writer.writerow(["iteration", "d_loss", "g_loss"])
            for i, (d, g) in enumerate(zip(trace["d_loss"], trace["g_loss"]), start=1):
                writer.writerow([i, repr(d), repr(g)])
    val_path = path.replace(".csv", "_validation.csv")
    with open(val_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        points = trace["validation"]
        if not points:
            writer.writerow(["iteration"])
            return
        keys = [k for k in points[0] if k != "iteration"]
        writer.writerow(["iteration"] + keys)
        for p in points:
            writer.writerow([p["iteration"]] + [repr(p[k]) for k in keys])


def _write_figures(out_dir, records, split, schema, samples_for_figures):
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    for split_name, ids in (("test", split.test_ids), ("application", split.application_ids)):
        truth = records[ids]
        sampled = samples_for_figures[split_name]
        write_marginal_figure_csv(
            os.path.join(fig_dir, f"marginals_{split_name}.csv"), truth, sampled, schema
        )
        for tag, subset in (
            ("bivariate", SUITE_BIVARIATE),
            ("trivariate1", SUITE_TRIVARIATE_1),
            ("trivariate2", SUITE_TRIVARIATE_2),
        ):
            write_scatter_figure_csv(
                os.path.join(fig_dir, f"scatter_{tag}_{split_name}.csv"),
                truth, sampled, schema, subset,
            )


def run_protocol_suite(out_dir, master_seed, variants=("original", "extended"),
                       n_records=6893, cvae_config=None, cgan_config=None,
                       sample_multiplier=PROTOCOL_SAMPLE_MULTIPLIER,
                       save_models=True):
    """Run the protocol on each schema variant and merge the table reports."""
    os.makedirs(out_dir, exist_ok=True)
    merged = {"master_seed": master_seed, "variants": {}}
    for variant in variants:
        schema = build_schema(variant)
        data_rng = derive_rng(master_seed, "protocol", variant, "data")
        records = generate_dataset(schema, n_records, data_rng)
        report = run_protocol(
            records, schema, master_seed, os.path.join(out_dir, variant),
            cvae_config=cvae_config, cgan_config=cgan_config,
            sample_multiplier=sample_multiplier, save_models=save_models,
        )
        merged["variants"][variant] = report
    validation_summary = {
        v: merged["variants"][v]["validation"] for v in merged["variants"]
    }
    holdout_summary = {
        v: merged["variants"][v]["holdout"] for v in merged["variants"]
    }
    _write_json(os.path.join(out_dir, "validation_summary.json"), validation_summary)
    _write_json(os.path.join(out_dir, "holdout_summary.json"), holdout_summary)
    _write_json(os.path.join(out_dir, "report.json"), merged)
    return merged
