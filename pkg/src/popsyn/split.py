"""Dataset partitioning: application hold-out, train/test, K-fold CV.

The application set is a conditional group: every record whose conditional
features match the selector values is held out together, emulating an
entire unseen housing project. The remainder is split 90/10 into train and
test, and the training pool is cut into K=5 cross-validation folds.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SplitError
from .schema import conditional_part

K_FOLDS = 5
APPLICATION_MAX_FRACTION = 0.15


@dataclass(frozen=True)
class SplitPlan:
    application_ids: np.ndarray
    test_ids: np.ndarray
    train_ids: np.ndarray
    folds: tuple  # K pairs of (train_subset_ids, validation_ids)

    def __post_init__(self):
        n = len(self.application_ids) + len(self.test_ids) + len(self.train_ids)
        all_ids = np.concatenate((self.application_ids, self.test_ids, self.train_ids))
        if len(np.unique(all_ids)) != n:
            raise SplitError("application/test/train sets overlap")
        train_set = set(self.train_ids.tolist())
        seen_val = []
        for tr, va in self.folds:
            fold_ids = np.concatenate((tr, va))
            if set(fold_ids.tolist()) != train_set or len(fold_ids) != len(train_set):
                raise SplitError("fold does not partition the training pool")
            seen_val.extend(va.tolist())
        if sorted(seen_val) != sorted(train_set):
            raise SplitError("validation subsets do not partition the training pool")


def select_by_conditionals(records, selector, schema):
    """Row ids whose conditional features equal every value in selector."""
    conds = conditional_part(np.asarray(records, dtype=np.int64), schema)
    names = [f.name for f in schema.conditional_features]
    mask = np.ones(conds.shape[0], dtype=bool)
    for name, value in selector.items():
        if name not in names:
            raise SplitError(f"selector names unknown conditional feature {name!r}")
        mask &= conds[:, names.index(name)] == int(value)
    return np.flatnonzero(mask)


def make_split(records, selector, schema, rng):
    """Partition records into application / test / train with K=5 folds.

    selector maps conditional feature names to required category indices;
    matching rows become the application set (must be >0% and <=15% of data).
    """
    arr = np.asarray(records, dtype=np.int64)
    n = arr.shape[0]
    if n < 100:
        raise SplitError(f"need at least 100 records to split, got {n}")
    app_ids = select_by_conditionals(arr, selector, schema)
    if len(app_ids) == 0:
        raise SplitError("application selector matches no records")
    if len(app_ids) > APPLICATION_MAX_FRACTION * n:
        raise SplitError(
            f"application selector matches {len(app_ids)} of {n} records "
            f"(> {APPLICATION_MAX_FRACTION:.0%})"
        )
    rest = np.setdiff1d(np.arange(n), app_ids)
    perm = rng.permutation(rest)
    n_test = int(round(0.10 * len(rest)))
    test_ids = np.sort(perm[:n_test])
    train_ids = np.sort(perm[n_test:])

    fold_perm = rng.permutation(train_ids)
    val_chunks = np.array_split(fold_perm, K_FOLDS)
    folds = []
    for k in range(K_FOLDS):
        va = np.sort(val_chunks[k])
        tr = np.sort(np.concatenate([val_chunks[i] for i in range(K_FOLDS) if i != k]))
        folds.append((tr, va))
    return SplitPlan(
        application_ids=np.sort(app_ids),
        test_ids=test_ids,
        train_ids=train_ids,
        folds=tuple(folds),
    )
