"""Command-line interface.

Subcommands: gen-data, train, sample, evaluate, protocol, grid. Parameters
come from an optional JSON config file (--config) overridden by flags; the
effective configuration is echoed into every output directory. Exit codes:
0 success, 1 validation error, 2 I/O error.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .cgan import CganTrainConfig, load_cgan, sample_cgan, save_cgan, train_cgan
from .cvae import CvaeTrainConfig, load_cvae, sample_cvae, save_cvae, train_cvae
from .dataio import (
    read_conditionals,
    read_dataset,
    read_schema,
    write_dataset,
    write_schema,
)
from .errors import ConfigError, PopsynError
from .harness import GridSpec, run_grid, run_protocol_suite, _write_trace_csv
from .metrics import (
    SUITE_BIVARIATE,
    SUITE_TRIVARIATE_1,
    SUITE_TRIVARIATE_2,
    distribution_suite,
    write_marginal_figure_csv,
    write_scatter_figure_csv,
)
from .persist import load_manifest
from .rng import derive_rng, make_rng
from .schema import VARIANTS, build_schema
from .split import make_split
from .synthetic import default_application_selector, generate_dataset


def _load_config_file(path):
    if path is None:
        return {}
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return d


def _effective(args, keys):
    """Merge config-file values with flag overrides (flags win)."""
    cfg = _load_config_file(getattr(args, "config", None))
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in cfg:
            out[key] = cfg[key]
    return out, cfg


def _echo_config(out_dir, command, effective):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "run_config.json"), "w") as fh:
        json.dump({"command": command, "config": effective}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _require(effective, key):
    if effective.get(key) is None:
        raise ConfigError(f"config field {key!r} is required (flag or config file)")
    return effective[key]


def cmd_gen_data(args):
    eff, _ = _effective(args, ("variant", "n", "seed", "out"))
    eff.setdefault("variant", "extended")
    eff.setdefault("n", 6893)
    eff.setdefault("seed", 0)
    out = _require(eff, "out")
    schema = build_schema(eff["variant"])
    records = generate_dataset(schema, int(eff["n"]), make_rng(int(eff["seed"])))
    _echo_config(out, "gen-data", eff)
    write_dataset(os.path.join(out, "dataset.csv"), records, schema)
    write_schema(os.path.join(out, "schema.json"), schema)
    print(
        f"wrote {records.shape[0]} records (variant={schema.variant}, "
        f"output width {schema.output_width}, conditional width "
        f"{schema.conditional_width}) to {out}"
    )
    return 0


_TRAIN_KEYS = (
    "seed", "epochs", "batch_size", "learning_rate", "hidden_layers",
    "hidden_units", "bottleneck_dim", "beta", "noise_dim", "non_saturating",
)


def _build_train_config(kind, eff):
    cls = CvaeTrainConfig if kind == "cvae" else CganTrainConfig
    fields = set(cls.__dataclass_fields__)
    kwargs = {k: v for k, v in eff.items() if k in fields and v is not None}
    return cls(**kwargs)


def cmd_train(args):
    eff, _ = _effective(args, ("data", "schema", "out", "validation") + _TRAIN_KEYS)
    out = _require(eff, "out")
    schema = read_schema(_require(eff, "schema"))
    records = read_dataset(_require(eff, "data"), schema)
    validation = None
    if eff.get("validation"):
        validation = read_dataset(eff["validation"], schema)
    config = _build_train_config(args.kind, eff)
    train = train_cvae if args.kind == "cvae" else train_cgan
    model, trace = train(records, schema, config, validation)
    _echo_config(out, f"train {args.kind}", dict(eff, **dataclasses.asdict(config)))
    save = save_cvae if args.kind == "cvae" else save_cgan
    save(model, os.path.join(out, "model"))
    _write_trace_csv(os.path.join(out, "trace.csv"), args.kind, trace)
    n_batches = len(trace["train_loss"] if args.kind == "cvae" else trace["d_loss"])
    print(f"trained {args.kind} on {records.shape[0]} records "
          f"({n_batches} mini-batches); model in {os.path.join(out, 'model')}")
    return 0


def cmd_sample(args):
    eff, _ = _effective(args, ("model", "conditionals", "n_per_row", "seed", "out"))
    eff.setdefault("n_per_row", 1)
    eff.setdefault("seed", 0)
    out = _require(eff, "out")
    model_dir = _require(eff, "model")
    manifest = load_manifest(model_dir)
    kind = manifest["kind"]
    if kind == "cvae":
        model = load_cvae(model_dir)
        schema, sampler = model.schema, sample_cvae
    elif kind == "cgan":
        model = load_cgan(model_dir)
        schema, sampler = model.schema, sample_cgan
    elif kind == "baseline":
        raise ConfigError("baseline models are sampled via cmd 'protocol'")
    else:
        raise ConfigError(f"unknown model kind {kind!r} in manifest")
    conds = read_conditionals(_require(eff, "conditionals"), schema)
    n_per = int(eff["n_per_row"])
    if n_per < 0:
        raise ConfigError(f"n_per_row must be nonnegative, got {n_per}")
    _echo_config(out, "sample", eff)
    path = os.path.join(out, "samples.csv")
    if n_per == 0:
        write_dataset(path, np.zeros((0, schema.n_features), dtype=np.int64), schema)
        print(f"wrote 0 samples to {path}")
        return 0
    repeated = np.repeat(conds, n_per, axis=0)
    rng = derive_rng(int(eff["seed"]), "cli", "sample")
    samples = sampler(model, repeated, rng)
    write_dataset(path, samples, schema)
    print(f"wrote {samples.shape[0]} samples ({conds.shape[0]} conditional rows "
          f"x {n_per}) to {path}")
    return 0


def cmd_evaluate(args):
    eff, _ = _effective(args, ("samples", "truth", "train", "schema", "out"))
    out = _require(eff, "out")
    schema = read_schema(_require(eff, "schema"))
    samples = read_dataset(_require(eff, "samples"), schema)
    truth = read_dataset(_require(eff, "truth"), schema)
    train = read_dataset(eff["train"], schema) if eff.get("train") else None
    report = distribution_suite(samples, truth, schema, train=train)
    _echo_config(out, "evaluate", eff)
    report.to_json(os.path.join(out, "eval_report.json"))
    fig_dir = os.path.join(out, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    write_marginal_figure_csv(
        os.path.join(fig_dir, "marginals.csv"), truth, {"sampled": samples}, schema
    )
    for tag, subset in (
        ("bivariate", SUITE_BIVARIATE),
        ("trivariate1", SUITE_TRIVARIATE_1),
        ("trivariate2", SUITE_TRIVARIATE_2),
    ):
        write_scatter_figure_csv(
            os.path.join(fig_dir, f"scatter_{tag}.csv"), truth,
            {"sampled": samples}, schema, subset,
        )
    for name, score in report.distributions.items():
        print(f"{name}: srmse={score.srmse:.6f}")
    if report.zero_sample_pct is not None:
        print(f"zero_sample_pct: {report.zero_sample_pct:.4f}")
    return 0


def cmd_protocol(args):
    eff, cfg = _effective(
        args,
        ("seed", "out", "variants", "n", "sample_multiplier"),
    )
    out = _require(eff, "out")
    seed = int(_require(eff, "seed"))
    variants = eff.get("variants", list(VARIANTS))
    if isinstance(variants, str):
        variants = [v for v in variants.split(",") if v]
    for v in variants:
        if v not in VARIANTS:
            raise ConfigError(f"unknown variant {v!r}; expected one of {VARIANTS}")
    cvae_config = _build_train_config("cvae", cfg.get("cvae", {}))
    cgan_config = _build_train_config("cgan", cfg.get("cgan", {}))
    eff["variants"] = list(variants)
    eff["cvae"] = dataclasses.asdict(cvae_config)
    eff["cgan"] = dataclasses.asdict(cgan_config)
    _echo_config(out, "protocol", eff)
    merged = run_protocol_suite(
        out, seed, variants=tuple(variants), n_records=int(eff.get("n", 6893)),
        cvae_config=cvae_config, cgan_config=cgan_config,
        sample_multiplier=int(eff.get("sample_multiplier", 10)),
    )
    for variant, report in merged["variants"].items():
        for model, block in sorted(report["validation"].items()):
            print(
                f"{variant}/{model}: validation marginal srmse "
                f"{block['marginal_srmse_best_fold']:.4f} "
                f"(mean {block['fold_mean']:.4f}, std {block['fold_std']:.4f}, "
                f"zero samples {block['zero_sample_pct']:.2f}%)"
            )
    print(f"reports in {out}")
    return 0


def cmd_grid(args):
    eff, cfg = _effective(args, ("data", "schema", "out", "seed", "axes"))
    out = _require(eff, "out")
    seed = int(eff.get("seed", 0))
    schema = read_schema(_require(eff, "schema"))
    records = read_dataset(_require(eff, "data"), schema)
    axes = eff.get("axes") or cfg.get("axes")
    if not axes:
        raise ConfigError("config field 'axes' is required (grid axes)")
    if isinstance(axes, str):
        axes = json.loads(axes)
    grid = GridSpec({k: tuple(v) for k, v in axes.items()})
    print(f"grid of {grid.size} config(s) x 5 folds ({args.kind})")
    split = make_split(
        records, default_application_selector(schema), schema,
        derive_rng(seed, "cli", "grid", "split"),
    )
    ranked = run_grid(args.kind, grid, records, split, schema, master_seed=seed)
    _echo_config(out, f"grid {args.kind}", dict(eff, axes=axes))
    with open(os.path.join(out, "grid_results.json"), "w") as fh:
        json.dump([r.to_json_dict() for r in ranked], fh, indent=2, sort_keys=True)
        fh.write("\n")
    best = next((r for r in ranked if not r.failed), None)
    if best is None:
        print("all configs failed")
        return 1
    print(f"best config index {best.config_index}: "
          f"best-fold srmse {best.best_srmse:.4f} (mean {best.fold_mean:.4f})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="popsyn",
        description="Conditional generative population synthesis toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("gen-data", help="generate a synthetic benchmark dataset")
    common(p)
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--n", type=int, help="record count")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model on a dataset CSV")
    common(p)
    p.add_argument("kind", choices=("cvae", "cgan"))
    p.add_argument("--data", help="training dataset CSV")
    p.add_argument("--schema", help="schema JSON")
    p.add_argument("--validation", help="validation dataset CSV (optional)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--hidden-layers", dest="hidden_layers", type=int)
    p.add_argument("--hidden-units", dest="hidden_units", type=int)
    p.add_argument("--bottleneck-dim", dest="bottleneck_dim", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--noise-dim", dest="noise_dim", type=int)
    p.add_argument("--non-saturating", dest="non_saturating", action="store_const", const=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="sample agents from a trained model")
    common(p)
    p.add_argument("--model", help="model directory (manifest + weights)")
    p.add_argument("--conditionals", help="CSV with conditional feature columns")
    p.add_argument("--n-per-row", dest="n_per_row", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("evaluate", help="score samples against a truth dataset")
    common(p)
    p.add_argument("--samples", help="samples CSV")
    p.add_argument("--truth", help="truth dataset CSV")
    p.add_argument("--train", help="training dataset CSV for the zero-sample rate")
    p.add_argument("--schema", help="schema JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("protocol", help="run the full benchmark protocol")
    common(p)
    p.add_argument("--variants", help="comma-separated schema variants")
    p.add_argument("--n", type=int, help="records per variant")
    p.add_argument("--sample-multiplier", dest="sample_multiplier", type=int)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("grid", help="grid-search hyperparameters over K folds")
    common(p)
    p.add_argument("kind", choices=("cvae", "cgan"))
    p.add_argument("--data", help="dataset CSV")
    p.add_argument("--schema", help="schema JSON")
    p.add_argument("--axes", help="JSON object of axis name -> list of values")
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PopsynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
