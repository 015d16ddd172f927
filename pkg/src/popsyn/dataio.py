"""Dataset and schema file I/O.

Datasets are CSV: a header row of feature names, then one row of integer
category indices per record, columns in schema order. Schemas are JSON.
"""

import csv
import json

import numpy as np

from .errors import DataFormatError, EncodingError
from .schema import Schema


def write_dataset(path, records, schema):
    arr = np.asarray(records, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != schema.n_features:
        raise DataFormatError(
            f"records have shape {arr.shape}, expected (*, {schema.n_features})"
        )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.feature_names())
        writer.writerows(arr.tolist())


def read_dataset(path, schema):
    """Read a CSV dataset, validating indices against the schema.

    Errors carry 1-based line numbers (header is line 1).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty") from None
        expected = schema.feature_names()
        if header != expected:
            raise DataFormatError(
                f"{path}: line 1: header {header!r} does not match schema features {expected!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != schema.n_features:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {schema.n_features} columns, got {len(row)}"
                )
            try:
                rows.append([int(v) for v in row])
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: non-integer value in {row!r}"
                ) from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    arr = np.array(rows, dtype=np.int64)
    for j, feat in enumerate(schema.features):
        col = arr[:, j]
        bad = (col < 0) | (col >= feat.n_categories)
        if bad.any():
            i = int(np.argmax(bad))
            raise EncodingError(
                f"{path}: line {i + 2}: feature {feat.name!r}: index {int(col[i])} "
                f"out of range [0, {feat.n_categories})"
            )
    return arr


def read_conditionals(path, schema):
    """Read conditional feature columns from a CSV by header name.

    The file must contain every conditional feature column; extra columns
    (for example output features in a full dataset) are ignored.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty") from None
        names = [f.name for f in schema.conditional_features]
        missing = [n for n in names if n not in header]
        if missing:
            raise DataFormatError(
                f"{path}: line 1: missing conditional column(s) {missing}"
            )
        cols = [header.index(n) for n in names]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}"
                )
            try:
                rows.append([int(row[c]) for c in cols])
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: non-integer value in {row!r}"
                ) from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    arr = np.array(rows, dtype=np.int64)
    for j, feat in enumerate(schema.conditional_features):
        col = arr[:, j]
        bad = (col < 0) | (col >= feat.n_categories)
        if bad.any():
            i = int(np.argmax(bad))
            raise EncodingError(
                f"{path}: line {i + 2}: feature {feat.name!r}: index {int(col[i])} "
                f"out of range [0, {feat.n_categories})"
            )
    return arr


def write_schema(path, schema):
    with open(path, "w") as fh:
        json.dump(schema.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_schema(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid JSON: {exc}") from exc
    return Schema.from_json_dict(d)
