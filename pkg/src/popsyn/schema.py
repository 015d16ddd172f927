"""Feature schema and one-hot encoding.

Twelve categorical features describe each agent: five output features
(the demographics a model generates) followed by seven conditional features
(the property attributes generation is conditioned on). Two discretization
variants exist: `original` (one-hot widths 36 output / 36 conditional) and
`extended` with finer bins (45 / 49).

Records are tuples or int arrays of per-feature category indices in this
canonical order; batches are (N, 12) int arrays.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, EncodingError

ROLE_OUTPUT = "output"
ROLE_CONDITIONAL = "conditional"
VARIANTS = ("original", "extended")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    role: str
    categories: tuple

    def __post_init__(self):
        if self.role not in (ROLE_OUTPUT, ROLE_CONDITIONAL):
            raise DataFormatError(f"feature {self.name!r} has unknown role {self.role!r}")
        if len(self.categories) < 2:
            raise DataFormatError(f"feature {self.name!r} needs >= 2 categories")
        if len(set(self.categories)) != len(self.categories):
            raise DataFormatError(f"feature {self.name!r} has duplicate category labels")

    @property
    def n_categories(self):
        return len(self.categories)


class Schema:
    def __init__(self, variant, features):
        self.variant = variant
        self.features = tuple(features)
        roles = [f.role for f in self.features]
        n_out = roles.count(ROLE_OUTPUT)
        if roles != [ROLE_OUTPUT] * n_out + [ROLE_CONDITIONAL] * (len(roles) - n_out):
            raise DataFormatError("output features must precede conditional features")
        self.output_features = self.features[:n_out]
        self.conditional_features = self.features[n_out:]
        self.n_output = n_out
        self.n_features = len(self.features)
        self.output_width = sum(f.n_categories for f in self.output_features)
        self.conditional_width = sum(f.n_categories for f in self.conditional_features)
        self.output_blocks = tuple(f.n_categories for f in self.output_features)
        ends = np.cumsum(self.output_blocks).astype(np.int64)
        self.output_block_starts = np.concatenate(([0], ends[:-1])).astype(np.int64)
        self.output_block_ends = ends
        self._index = {f.name: i for i, f in enumerate(self.features)}

    def feature_index(self, name):
        if name not in self._index:
            raise EncodingError(f"schema has no feature named {name!r}")
        return self._index[name]

    def feature(self, name):
        return self.features[self.feature_index(name)]

    def feature_names(self):
        return [f.name for f in self.features]

    def to_json_dict(self):
        return {
            "variant": self.variant,
            "features": [
                {"name": f.name, "role": f.role, "categories": list(f.categories)}
                for f in self.features
            ],
        }

    def hash(self):
        payload = json.dumps(self.to_json_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    @staticmethod
    def from_json_dict(d):
        try:
            features = [
                FeatureSpec(f["name"], f["role"], tuple(f["categories"]))
                for f in d["features"]
            ]
            return Schema(d["variant"], features)
        except (KeyError, TypeError) as exc:
            raise DataFormatError(f"malformed schema JSON: {exc}") from exc


def _range_labels(lo, hi, n_bins, open_top=True):
    cuts = np.unique(np.round(np.linspace(lo, hi, n_bins + 1)).astype(int))
    while len(cuts) < n_bins + 1:  # guard against rounding collisions
        cuts = np.append(cuts, cuts[-1] + 1)
    labels = [f"{cuts[i]}-{cuts[i + 1] - 1}" for i in range(n_bins - 1)]
    labels.append(f"{cuts[n_bins - 1]}+" if open_top else f"{cuts[n_bins - 1]}-{cuts[n_bins]}")
    return tuple(labels)


_NATIONALITIES = ("VN", "KR", "CN", "JP", "US", "GB", "FR", "DE", "IT", "AU", "SG", "other")
_DISTRICTS = tuple(f"district_{i:02d}" for i in range(1, 12)) + ("outside",)

# (name, role, original bins, extended bins, label builder)
_FEATURE_TABLE = (
    ("age", ROLE_OUTPUT, 8, 17, lambda k: _range_labels(18, 80, k)),
    ("gender", ROLE_OUTPUT, 2, 2, lambda k: ("female", "male")),
    ("nationality", ROLE_OUTPUT, 12, 12, lambda k: _NATIONALITIES),
    ("investor", ROLE_OUTPUT, 2, 2, lambda k: ("no", "yes")),
    ("prior_home", ROLE_OUTPUT, 12, 12, lambda k: _DISTRICTS),
    ("distance_phase1", ROLE_CONDITIONAL, 4, 7, lambda k: tuple(f"band{i + 1}" for i in range(k))),
    ("distance_phase2", ROLE_CONDITIONAL, 4, 7, lambda k: tuple(f"band{i + 1}" for i in range(k))),
    ("distance_greenfield", ROLE_CONDITIONAL, 4, 7, lambda k: tuple(f"band{i + 1}" for i in range(k))),
    ("sales_price", ROLE_CONDITIONAL, 11, 13, lambda k: tuple(f"p{i + 1}" for i in range(k))),
    ("size", ROLE_CONDITIONAL, 5, 6, lambda k: tuple(f"s{i + 1}" for i in range(k))),
    ("floor", ROLE_CONDITIONAL, 5, 6, lambda k: tuple(f"f{i + 1}" for i in range(k))),
    ("property_type", ROLE_CONDITIONAL, 3, 3, lambda k: ("villa", "townhouse", "apartment")),
)


def build_schema(variant):
    """The shipped schema for one of the two discretization variants."""
    if variant not in VARIANTS:
        raise DataFormatError(f"unknown schema variant {variant!r}; expected one of {VARIANTS}")
    features = []
    for name, role, k_orig, k_ext, labeler in _FEATURE_TABLE:
        k = k_orig if variant == "original" else k_ext
        features.append(FeatureSpec(name, role, tuple(labeler(k))))
    return Schema(variant, features)


def validate_records(records, schema):
    """Coerce to an (N, n_features) int64 array, checking index bounds."""
    arr = np.asarray(records, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != schema.n_features:
        raise EncodingError(
            f"records have shape {arr.shape}, expected (*, {schema.n_features})"
        )
    for j, feat in enumerate(schema.features):
        col = arr[:, j]
        bad = (col < 0) | (col >= feat.n_categories)
        if bad.any():
            i = int(np.argmax(bad))
            raise EncodingError(
                f"feature {feat.name!r}: index {int(col[i])} out of range "
                f"[0, {feat.n_categories}) at record {i}"
            )
    return arr


def encode_one_hot(record, schema):
    """One record -> (output one-hot vector, conditional one-hot vector)."""
    arr = validate_records(record, schema)[0]
    out, cond = encode_batch(arr[None, :], schema, validated=True)
    return out[0], cond[0]


def encode_batch(records, schema, validated=False):
    """Records -> (N, output_width) and (N, conditional_width) one-hot matrices."""
    arr = records if validated else validate_records(records, schema)
    n = arr.shape[0]
    out = np.zeros((n, schema.output_width))
    cond = np.zeros((n, schema.conditional_width))
    rows = np.arange(n)
    offset = 0
    for j, feat in enumerate(schema.output_features):
        out[rows, offset + arr[:, j]] = 1.0
        offset += feat.n_categories
    offset = 0
    for j, feat in enumerate(schema.conditional_features):
        cond[rows, offset + arr[:, schema.n_output + j]] = 1.0
        offset += feat.n_categories
    return out, cond


def encode_conditionals(cond_indices, schema):
    """Conditional index rows -> (N, conditional_width) one-hot matrix."""
    arr = np.asarray(cond_indices, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != len(schema.conditional_features):
        raise EncodingError(
            f"conditional rows have shape {arr.shape}, expected "
            f"(*, {len(schema.conditional_features)})"
        )
    n = arr.shape[0]
    cond = np.zeros((n, schema.conditional_width))
    rows = np.arange(n)
    offset = 0
    for j, feat in enumerate(schema.conditional_features):
        col = arr[:, j]
        bad = (col < 0) | (col >= feat.n_categories)
        if bad.any():
            i = int(np.argmax(bad))
            raise EncodingError(
                f"feature {feat.name!r}: index {int(col[i])} out of range "
                f"[0, {feat.n_categories}) at record {i}"
            )
        cond[rows, offset + col] = 1.0
        offset += feat.n_categories
    return cond


def decode_one_hot(out_vec, cond_vec, schema):
    """Inverse of encode_one_hot; each block must contain exactly one 1."""
    indices = []
    for vec, feats, width in (
        (np.asarray(out_vec), schema.output_features, schema.output_width),
        (np.asarray(cond_vec), schema.conditional_features, schema.conditional_width),
    ):
        if vec.shape != (width,):
            raise EncodingError(f"vector of shape {vec.shape} does not match width {width}")
        offset = 0
        for feat in feats:
            block = vec[offset:offset + feat.n_categories]
            hot = np.flatnonzero(block == 1.0)
            if len(hot) != 1 or block.sum() != 1.0:
                raise EncodingError(f"block for feature {feat.name!r} is not one-hot")
            indices.append(int(hot[0]))
            offset += feat.n_categories
    return tuple(indices)


def output_part(records, schema):
    return np.asarray(records)[:, :schema.n_output]


def conditional_part(records, schema):
    return np.asarray(records)[:, schema.n_output:]
