import numpy as np
import pytest

import popsyn
from popsyn.schema import ROLE_CONDITIONAL, ROLE_OUTPUT, FeatureSpec, Schema
from popsyn.synthetic import generate_dataset


@pytest.fixture(scope="session")
def schema_original():
    return popsyn.build_schema("original")


@pytest.fixture(scope="session")
def schema_extended():
    return popsyn.build_schema("extended")


@pytest.fixture(scope="session")
def toy_schema():
    """Minimal 2-output / 1-conditional schema for fast network tests."""
    return Schema("toy", [
        FeatureSpec("color", ROLE_OUTPUT, ("red", "green", "blue")),
        FeatureSpec("shape", ROLE_OUTPUT, ("square", "round")),
        FeatureSpec("bucket", ROLE_CONDITIONAL, ("a", "b")),
    ])


@pytest.fixture(scope="session")
def small_extended_dataset(schema_extended):
    """1,200 generated records; enough for split/protocol plumbing tests."""
    return generate_dataset(schema_extended, 1200, popsyn.make_rng(20260101))


def toy_records(schema, n, rng):
    """Uniform random records valid under any schema."""
    cols = [rng.integers(0, f.n_categories, size=n) for f in schema.features]
    return np.stack(cols, axis=1).astype(np.int64)
