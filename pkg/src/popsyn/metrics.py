"""Distribution tables and comparison metrics.

Evaluation follows one recipe throughout: build dense frequency tables over
one to three output features (zero bins included), then compare with
SRMSE = sqrt(N_c * sum((p_hat - p)^2)), R-squared, and Pearson correlation.
The headline "marginal" number pools all per-feature marginals into a single
concatenated vector and applies the same SRMSE formula once, with N_c equal
to the total category count.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .schema import output_part

SUITE_BIVARIATE = ("age", "nationality")
SUITE_TRIVARIATE_1 = ("age", "nationality", "prior_home")
SUITE_TRIVARIATE_2 = ("age", "prior_home", "investor")


@dataclass(frozen=True)
class DistributionTable:
    """Dense joint distribution over a subset of output features.

    probs is flat in C order over the subset's Cartesian product, so
    n_bins counts every theoretical bin, observed or not.
    """

    feature_subset: tuple
    shape: tuple
    probs: np.ndarray

    def __post_init__(self):
        if self.probs.shape != (int(np.prod(self.shape)),):
            raise ValueError(
                f"probs length {self.probs.shape} does not match shape {self.shape}"
            )
        if (self.probs < 0).any():
            raise ValueError("probabilities must be nonnegative")
        if abs(float(self.probs.sum()) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {self.probs.sum()}, expected 1")

    @property
    def n_bins(self):
        return int(np.prod(self.shape))

    def prob(self, index_tuple):
        return float(self.probs[np.ravel_multi_index(index_tuple, self.shape)])


def _output_indices(records, schema):
    arr = np.asarray(records, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError(f"records must be 2-d, got shape {arr.shape}")
    if arr.shape[1] == schema.n_features:
        return output_part(arr, schema)
    if arr.shape[1] == schema.n_output:
        return arr
    raise ValueError(
        f"records have {arr.shape[1]} columns; expected {schema.n_features} "
        f"(full) or {schema.n_output} (outputs only)"
    )


def build_table(records, subset, schema):
    """Normalized frequency table over 1-3 output features."""
    subset = tuple(subset)
    if not 1 <= len(subset) <= 3:
        raise ValueError(f"subset must have 1-3 features, got {len(subset)}")
    out_names = [f.name for f in schema.output_features]
    cols, shape = [], []
    for name in subset:
        if name not in out_names:
            raise ValueError(f"{name!r} is not an output feature")
        j = out_names.index(name)
        cols.append(j)
        shape.append(schema.output_features[j].n_categories)
    outs = _output_indices(records, schema)
    if outs.shape[0] == 0:
        raise ValueError("records must be nonempty")
    flat = np.ravel_multi_index([outs[:, j] for j in cols], shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).astype(np.float64)
    return DistributionTable(subset, tuple(shape), counts / counts.sum())


def sample_table(table, n, rng):
    """Draw n index tuples from a DistributionTable, as an (n, k) int array."""
    flat = rng.choice(table.n_bins, size=n, p=table.probs)
    return np.stack(np.unravel_index(flat, table.shape), axis=1).astype(np.int64)


def srmse_vec(estimate, truth, n_cells):
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    if est.shape != tru.shape:
        raise ValueError(f"vector shapes differ: {est.shape} vs {tru.shape}")
    return math.sqrt(n_cells * float(np.sum((est - tru) ** 2)))


def _check_same_subset(estimate, truth):
    if estimate.feature_subset != truth.feature_subset or estimate.shape != truth.shape:
        raise ValueError(
            f"tables disagree: {estimate.feature_subset}/{estimate.shape} "
            f"vs {truth.feature_subset}/{truth.shape}"
        )


def srmse(estimate, truth):
    """RMSE between bin probabilities divided by the mean cell probability 1/N_c."""
    _check_same_subset(estimate, truth)
    return srmse_vec(estimate.probs, truth.probs, estimate.n_bins)


def r_squared(estimate, truth):
    """Coefficient of determination over paired bin probabilities.

    None when the truth vector is constant (undefined), unless the
    estimate matches it exactly.
    """
    _check_same_subset(estimate, truth)
    return r_squared_vec(estimate.probs, truth.probs)


def r_squared_vec(estimate, truth):
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    ss_res = float(np.sum((est - tru) ** 2))
    ss_tot = float(np.sum((tru - tru.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else None
    return 1.0 - ss_res / ss_tot


def pearson(estimate, truth):
    """Linear correlation of bin probabilities; None when either side is constant."""
    _check_same_subset(estimate, truth)
    return pearson_vec(estimate.probs, truth.probs)


def pearson_vec(estimate, truth):
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    de = est - est.mean()
    dt = tru - tru.mean()
    denom = math.sqrt(float(np.sum(de**2)) * float(np.sum(dt**2)))
    if denom == 0.0:
        return None
    return float(np.sum(de * dt)) / denom


def zero_sample_pct(generated, train, schema):
    """Percentage of generated agents whose full output tuple never occurs in train."""
    gen = _output_indices(generated, schema)
    ref = _output_indices(train, schema)
    if gen.shape[0] == 0 or ref.shape[0] == 0:
        raise ValueError("generated and train must be nonempty")
    seen = set(map(tuple, ref.tolist()))
    novel = sum(1 for row in gen.tolist() if tuple(row) not in seen)
    return 100.0 * novel / gen.shape[0]


def pooled_marginal(records, schema):
    """Concatenated per-output-feature marginals; length = schema.output_width."""
    outs = _output_indices(records, schema)
    parts = []
    for j, feat in enumerate(schema.output_features):
        counts = np.bincount(outs[:, j], minlength=feat.n_categories).astype(np.float64)
        parts.append(counts / outs.shape[0])
    return np.concatenate(parts)


def pooled_marginal_srmse(generated, truth_set, schema):
    return srmse_vec(
        pooled_marginal(generated, schema),
        pooled_marginal(truth_set, schema),
        schema.output_width,
    )


@dataclass
class DistributionScore:
    srmse: float
    r_squared: object = None
    pearson: object = None

    def to_json_dict(self):
        return {"srmse": self.srmse, "r_squared": self.r_squared, "pearson": self.pearson}


@dataclass
class EvalReport:
    """Per-distribution scores plus the sample-novelty rate.

    Headline r_squared/pearson refer to the pooled marginal vector; the
    per-distribution values are kept alongside for transparency.
    """

    distributions: dict
    zero_sample_pct: object = None
    fold_mean: object = None
    fold_std: object = None
    per_feature_srmse: dict = field(default_factory=dict)

    def to_json_dict(self):
        d = {
            "distributions": {k: v.to_json_dict() for k, v in self.distributions.items()},
            "zero_sample_pct": self.zero_sample_pct,
            "per_feature_srmse": self.per_feature_srmse,
        }
        if self.fold_mean is not None:
            d["fold_mean"] = self.fold_mean
            d["fold_std"] = self.fold_std
        return d

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


SUITE_KEYS = (
    "marginal",
    "bivariate_age_nationality",
    "trivariate_age_nationality_prior_home",
    "trivariate_age_prior_home_investor",
)


def distribution_suite(generated, truth_set, schema, train=None):
    """The four-column evaluation: pooled marginal, one bivariate, two trivariates.

    When train is given, zero_sample_pct is computed against it.
    """
    gen_pool = pooled_marginal(generated, schema)
    tru_pool = pooled_marginal(truth_set, schema)
    scores = {
        "marginal": DistributionScore(
            srmse=srmse_vec(gen_pool, tru_pool, schema.output_width),
            r_squared=r_squared_vec(gen_pool, tru_pool),
            pearson=pearson_vec(gen_pool, tru_pool),
        )
    }
    for key, subset in (
        ("bivariate_age_nationality", SUITE_BIVARIATE),
        ("trivariate_age_nationality_prior_home", SUITE_TRIVARIATE_1),
        ("trivariate_age_prior_home_investor", SUITE_TRIVARIATE_2),
    ):
        est = build_table(generated, subset, schema)
        tru = build_table(truth_set, subset, schema)
        scores[key] = DistributionScore(
            srmse=srmse(est, tru),
            r_squared=r_squared(est, tru),
            pearson=pearson(est, tru),
        )
    per_feature = {}
    for feat in schema.output_features:
        est = build_table(generated, (feat.name,), schema)
        tru = build_table(truth_set, (feat.name,), schema)
        per_feature[feat.name] = srmse(est, tru)
    zsp = None if train is None else zero_sample_pct(generated, train, schema)
    return EvalReport(distributions=scores, zero_sample_pct=zsp, per_feature_srmse=per_feature)


def fold_stats(values):
    """(mean, population std) of per-fold validation scores."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no fold values")
    return float(arr.mean()), float(arr.std())


def write_marginal_figure_csv(path, truth_records, sampled, schema):
    """Bar-chart data: one row per output category bin.

    sampled maps column name -> records; row count equals schema.output_width.
    """
    tru = pooled_marginal(truth_records, schema)
    cols = {name: pooled_marginal(records, schema) for name, records in sampled.items()}
    names = sorted(cols)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "category", "truth"] + names)
        i = 0
        for feat in schema.output_features:
            for label in feat.categories:
                writer.writerow(
                    [feat.name, label, repr(float(tru[i]))]
                    + [repr(float(cols[n][i])) for n in names]
                )
                i += 1


def write_scatter_figure_csv(path, truth_records, sampled, schema, subset):
    """Scatter data over a joint table: sampled vs true bin frequency per bin."""
    tru = build_table(truth_records, subset, schema)
    cols = {name: build_table(records, subset, schema) for name, records in sampled.items()}
    names = sorted(cols)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "truth"] + names)
        for i, idx in enumerate(np.ndindex(tru.shape)):
            writer.writerow(
                ["x".join(str(v) for v in idx), repr(float(tru.probs[i]))]
                + [repr(float(cols[n].probs[i])) for n in names]
            )
