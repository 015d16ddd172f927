"""Empirical-distribution-table baseline.

Fits exact integer counts of full output tuples keyed by the full
conditional tuple. Sampling a seen conditional combination draws from its
stored table; an unseen combination falls back to the overall output table.
Counts are normalized lazily at sampling time, so repeated fits carry no
floating-point drift. The baseline can only replay output tuples observed
in training, hence its zero-sample rate against training is 0 by
construction.
"""

import json
from collections import Counter

import numpy as np

from .errors import StateError
from .schema import conditional_part, output_part


class EmpiricalTable:
    def __init__(self, schema):
        self.schema = schema
        self.by_conditional = {}
        self.overall = Counter()
        self.n_records = 0

    @property
    def fitted(self):
        return self.n_records > 0

    def conditional_table(self, cond_tuple):
        """Normalized output-tuple distribution for one conditional tuple, or None."""
        counts = self.by_conditional.get(tuple(cond_tuple))
        if counts is None:
            return None
        total = sum(counts.values())
        return {out: c / total for out, c in counts.items()}

    def overall_table(self):
        total = sum(self.overall.values())
        return {out: c / total for out, c in self.overall.items()}

    def to_json(self, path):
        d = {
            "n_records": self.n_records,
            "overall": {",".join(map(str, k)): v for k, v in sorted(self.overall.items())},
            "by_conditional": {
                ",".join(map(str, ck)): {
                    ",".join(map(str, ok)): c for ok, c in sorted(counts.items())
                }
                for ck, counts in sorted(self.by_conditional.items())
            },
        }
        with open(path, "w") as fh:
            json.dump(d, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def from_json(path, schema):
        with open(path) as fh:
            d = json.load(fh)
        table = EmpiricalTable(schema)
        table.n_records = int(d["n_records"])
        table.overall = Counter(
            {tuple(map(int, k.split(","))): int(v) for k, v in d["overall"].items()}
        )
        table.by_conditional = {
            tuple(map(int, ck.split(","))): Counter(
                {tuple(map(int, ok.split(","))): int(c) for ok, c in counts.items()}
            )
            for ck, counts in d["by_conditional"].items()
        }
        return table


def fit_empirical(train, schema):
    """Count output tuples per distinct conditional tuple, plus overall."""
    arr = np.asarray(train, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("train must be a nonempty 2-d record array")
    outs = output_part(arr, schema)
    conds = conditional_part(arr, schema)
    table = EmpiricalTable(schema)
    for out_row, cond_row in zip(map(tuple, outs.tolist()), map(tuple, conds.tolist())):
        table.by_conditional.setdefault(cond_row, Counter())[out_row] += 1
        table.overall[out_row] += 1
    table.n_records = arr.shape[0]
    return table


def _draw_from_counts(counts, n, rng):
    keys = sorted(counts.keys())
    weights = np.array([counts[k] for k in keys], dtype=np.float64)
    probs = weights / weights.sum()
    idx = rng.choice(len(keys), size=n, p=probs)
    return np.array([keys[i] for i in idx], dtype=np.int64)


def sample_uniform_outputs(conditionals, schema, rng):
    """Reference sampler: every output feature uniform over its categories."""
    conds = np.asarray(conditionals, dtype=np.int64)
    if conds.shape[1] == schema.n_features:
        conds = conditional_part(conds, schema)
    outs = np.zeros((conds.shape[0], schema.n_output), dtype=np.int64)
    for j, feat in enumerate(schema.output_features):
        outs[:, j] = rng.integers(feat.n_categories, size=conds.shape[0])
    return np.concatenate((outs, conds), axis=1)


def sample_independent_outputs(train, conditionals, schema, rng):
    """Reference sampler: each output feature drawn from its train marginal.

    Ignores all dependence between features, so it reproduces marginals but
    no joint structure.
    """
    train_outs = output_part(np.asarray(train, dtype=np.int64), schema)
    conds = np.asarray(conditionals, dtype=np.int64)
    if conds.shape[1] == schema.n_features:
        conds = conditional_part(conds, schema)
    outs = np.zeros((conds.shape[0], schema.n_output), dtype=np.int64)
    for j, feat in enumerate(schema.output_features):
        counts = np.bincount(train_outs[:, j], minlength=feat.n_categories)
        probs = counts / counts.sum()
        outs[:, j] = rng.choice(feat.n_categories, size=conds.shape[0], p=probs)
    return np.concatenate((outs, conds), axis=1)


def sample_baseline(table, conditionals, rng):
    """Draw one output tuple per conditional row; returns full records.

    Conditionals are copied through unchanged next to the sampled outputs.
    """
    if not table.fitted:
        raise StateError("empirical table has not been fitted")
    conds = np.asarray(conditionals, dtype=np.int64)
    if conds.ndim == 1:
        conds = conds[None, :]
    schema = table.schema
    if conds.shape[1] == schema.n_features:
        conds = conditional_part(conds, schema)
    elif conds.shape[1] != len(schema.conditional_features):
        raise ValueError(
            f"conditionals have {conds.shape[1]} columns, expected "
            f"{len(schema.conditional_features)} or {schema.n_features}"
        )
    outs = np.zeros((conds.shape[0], schema.n_output), dtype=np.int64)
    # group identical conditional tuples so each group needs one table lookup
    order = {}
    for i, row in enumerate(map(tuple, conds.tolist())):
        order.setdefault(row, []).append(i)
    for cond_row, indices in order.items():
        counts = table.by_conditional.get(cond_row, table.overall)
        outs[np.array(indices)] = _draw_from_counts(counts, len(indices), rng)
    return np.concatenate((outs, conds), axis=1)
