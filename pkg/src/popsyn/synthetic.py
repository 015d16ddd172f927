"""Synthetic benchmark generator with planted, analytically known structure.

Each record is drawn in two stages: a latent household class (4 classes)
is sampled from a softmax over fixed per-conditional-feature logit tables,
then every output feature is sampled from a class-conditional categorical
table. All tables are deterministic constants versioned by
GENERATOR_VERSION, so the true joint distribution is available in closed
form for any conditioning, via exact enumeration of the conditional space.

The class partitions are planted so that (age, nationality) are strongly
dependent: classes {0, 1} are young and locally dominated, classes {2, 3}
older and foreign-dominated. Investor status and prior home district vary
across the other partitions, giving every class a distinct profile.
"""

from functools import reduce

import numpy as np

from .metrics import DistributionTable
from .schema import ROLE_OUTPUT

GENERATOR_VERSION = "1"
N_CLASSES = 4

# class slopes per conditional feature; logit = slope[l] * t(v) with
# t(v) = 2v/(K-1) - 1 the centered bin coordinate
_SLOPES = {
    "distance_phase1": (0.9, -0.9, 0.9, -0.9),
    "distance_phase2": (0.9, 0.9, -0.9, -0.9),
    "distance_greenfield": (-0.7, 0.7, 0.7, -0.7),
    "sales_price": (1.5, 0.5, -0.5, -1.5),
    "size": (-0.8, -0.3, 0.3, 0.8),
    "floor": (0.5, -0.8, 0.8, -0.5),
    "property_type": (0.7, -0.7, -0.7, 0.7),
}

_AGE_CENTERS = (0.30, 0.30, 0.70, 0.70)
_AGE_WIDTH = 0.045
_HOME_CENTERS = (1.5, 4.5, 7.5, 9.5)
_HOME_WIDTH = 1.1
_HOME_OUTSIDE = 0.10
_GENDER = {0: (0.56, 0.44), 1: (0.44, 0.56), 2: (0.44, 0.56), 3: (0.56, 0.44)}
_INVESTOR = {0: (0.85, 0.15), 1: (0.45, 0.55), 2: (0.85, 0.15), 3: (0.45, 0.55)}
_NATIONALITY_LOCAL = (0.52, 0.07, 0.07, 0.06, 0.03, 0.03, 0.03, 0.03, 0.03, 0.03, 0.04, 0.06)
_NATIONALITY_FOREIGN = (0.10, 0.22, 0.20, 0.16, 0.06, 0.05, 0.04, 0.04, 0.03, 0.03, 0.03, 0.04)


def _bump(n_bins, center, width, floor=0.003):
    """Discretized Gaussian bump over bin centers in [0, 1], with a floor."""
    u = (np.arange(n_bins) + 0.5) / n_bins
    p = np.exp(-0.5 * ((u - center) / width) ** 2) + floor
    return p / p.sum()


def output_tables(schema):
    """Class-conditional output tables: feature name -> (N_CLASSES, K) array."""
    tables = {}
    for feat in schema.output_features:
        k = feat.n_categories
        rows = np.zeros((N_CLASSES, k))
        for l in range(N_CLASSES):
            if feat.name == "age":
                rows[l] = _bump(k, _AGE_CENTERS[l], _AGE_WIDTH)
            elif feat.name == "gender":
                rows[l] = np.array(_GENDER[l])
            elif feat.name == "nationality":
                p = _NATIONALITY_LOCAL if l < 2 else _NATIONALITY_FOREIGN
                rows[l] = np.array(p) / np.sum(p)
            elif feat.name == "investor":
                rows[l] = np.array(_INVESTOR[l])
            elif feat.name == "prior_home":
                districts = _bump(k - 1, (_HOME_CENTERS[l] + 0.5) / (k - 1), _HOME_WIDTH / (k - 1))
                rows[l] = np.concatenate((districts * (1.0 - _HOME_OUTSIDE), [_HOME_OUTSIDE]))
            else:
                raise ValueError(f"no generator table for output feature {feat.name!r}")
        tables[feat.name] = rows
    return tables


def conditional_priors(schema):
    """Per-conditional-feature category priors (uniform by construction)."""
    return [np.full(f.n_categories, 1.0 / f.n_categories) for f in schema.conditional_features]


def logit_tables(schema):
    """Per-conditional-feature class logit tables: name -> (K, N_CLASSES)."""
    tables = {}
    for feat in schema.conditional_features:
        if feat.name not in _SLOPES:
            raise ValueError(f"no generator slopes for conditional feature {feat.name!r}")
        k = feat.n_categories
        t = 2.0 * np.arange(k) / (k - 1) - 1.0
        tables[feat.name] = t[:, None] * np.array(_SLOPES[feat.name])[None, :]
    return tables


def class_posterior(cond_records, schema):
    """P(class | conditional values) row-wise: (n, N_CLASSES), rows sum to 1."""
    arr = np.asarray(cond_records, dtype=np.int64)
    tables = logit_tables(schema)
    logits = np.zeros((arr.shape[0], N_CLASSES))
    for j, feat in enumerate(schema.conditional_features):
        logits += tables[feat.name][arr[:, j]]
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    return p / p.sum(axis=1, keepdims=True)


def _draw_rows(probs, rng):
    """One categorical draw per row of a (n, K) probability matrix."""
    cum = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    idx = (cum < u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1).astype(np.int64)


def sample_outputs_given_conditionals(cond_records, schema, rng):
    """Draw output indices for given conditional rows: (n, n_output)."""
    arr = np.asarray(cond_records, dtype=np.int64)
    post = class_posterior(arr, schema)
    classes = _draw_rows(post, rng)
    tables = output_tables(schema)
    outs = np.zeros((arr.shape[0], schema.n_output), dtype=np.int64)
    for j, feat in enumerate(schema.output_features):
        outs[:, j] = _draw_rows(tables[feat.name][classes], rng)
    return outs


def generate_dataset(schema, n, rng):
    """n records as an (n, n_features) int64 array (outputs then conditionals)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    priors = conditional_priors(schema)
    conds = np.zeros((n, len(priors)), dtype=np.int64)
    for j, prior in enumerate(priors):
        conds[:, j] = np.searchsorted(np.cumsum(prior), rng.random(n), side="right")
        conds[:, j] = np.minimum(conds[:, j], prior.shape[0] - 1)
    outs = sample_outputs_given_conditionals(conds, schema, rng)
    return np.concatenate((outs, conds), axis=1)


_POSTERIOR_CACHE = {}


def _posterior_tensor(schema):
    """softmax class tensor over the full conditional product space.

    Shape (K_1, ..., K_7, N_CLASSES); exact, cached per bin layout.
    """
    key = tuple(f.n_categories for f in schema.conditional_features)
    if key not in _POSTERIOR_CACHE:
        tables = logit_tables(schema)
        n_axes = len(key)
        logits = np.zeros(key + (N_CLASSES,))
        for j, feat in enumerate(schema.conditional_features):
            shape = [1] * n_axes + [N_CLASSES]
            shape[j] = feat.n_categories
            logits = logits + tables[feat.name].reshape(shape)
        logits -= logits.max(axis=-1, keepdims=True)
        p = np.exp(logits)
        _POSTERIOR_CACHE[key] = p / p.sum(axis=-1, keepdims=True)
    return _POSTERIOR_CACHE[key]


def _as_conditional_indices(conditional_values, schema):
    if isinstance(conditional_values, dict):
        missing = [f.name for f in schema.conditional_features if f.name not in conditional_values]
        if missing:
            raise ValueError(f"conditional values missing features {missing}")
        extra = set(conditional_values) - {f.name for f in schema.conditional_features}
        if extra:
            raise ValueError(f"unknown conditional features {sorted(extra)}")
        vals = [int(conditional_values[f.name]) for f in schema.conditional_features]
    else:
        vals = [int(v) for v in conditional_values]
        if len(vals) != len(schema.conditional_features):
            raise ValueError(
                f"expected {len(schema.conditional_features)} conditional values, got {len(vals)}"
            )
    for v, feat in zip(vals, schema.conditional_features):
        if not 0 <= v < feat.n_categories:
            raise ValueError(f"feature {feat.name!r}: value {v} out of range [0, {feat.n_categories})")
    return vals


def _joint_from_class_weights(weights, feature_subset, schema):
    out_names = [f.name for f in schema.output_features]
    for name in feature_subset:
        if name not in out_names:
            raise ValueError(f"{name!r} is not an output feature")
    tables = output_tables(schema)
    shape = tuple(schema.output_features[out_names.index(n)].n_categories for n in feature_subset)
    acc = np.zeros(shape)
    for l in range(N_CLASSES):
        acc += weights[l] * reduce(np.multiply.outer, [tables[n][l] for n in feature_subset])
    return DistributionTable(tuple(feature_subset), shape, acc.ravel())


def true_conditional_distribution(schema, conditional_values, feature_subset):
    """Exact joint over output features given a complete conditional row."""
    vals = _as_conditional_indices(conditional_values, schema)
    weights = class_posterior(np.array([vals]), schema)[0]
    return _joint_from_class_weights(weights, feature_subset, schema)


def true_output_given_value(schema, cond_name, value, feature_subset):
    """Exact joint over output features given ONE conditional feature's value.

    Marginalizes the remaining conditional features against their priors by
    enumerating the full conditional product space.
    """
    names = [f.name for f in schema.conditional_features]
    if cond_name not in names:
        raise ValueError(f"{cond_name!r} is not a conditional feature")
    axis = names.index(cond_name)
    feat = schema.conditional_features[axis]
    if not 0 <= value < feat.n_categories:
        raise ValueError(f"value {value} out of range [0, {feat.n_categories})")
    post = np.take(_posterior_tensor(schema), value, axis=axis)
    priors = conditional_priors(schema)
    weights = post
    # contract from the back so earlier axis positions stay valid
    for j in range(len(names) - 1, -1, -1):
        if j == axis:
            continue
        pos = j if j < axis else j - 1
        weights = np.tensordot(priors[j], weights, axes=([0], [pos]))
    weights = weights.reshape(N_CLASSES)
    return _joint_from_class_weights(weights, feature_subset, schema)


def class_prior(schema):
    """Exact marginal class distribution under the conditional priors."""
    post = _posterior_tensor(schema)
    priors = conditional_priors(schema)
    weights = post
    for prior in reversed(priors):
        weights = np.tensordot(prior, weights, axes=([0], [len(weights.shape) - 2]))
    return weights.reshape(N_CLASSES)


def default_application_selector(schema):
    """Conditional-group selector for the held-out application set.

    Top-floor apartments: every record sharing these conditional values is
    held out together, emulating an unseen housing project (~5% of data).
    """
    floor = schema.feature("floor")
    ptype = schema.feature("property_type")
    return {
        "floor": floor.n_categories - 1,
        "property_type": ptype.categories.index("apartment"),
    }
