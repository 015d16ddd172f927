import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import popsyn
from popsyn.metrics import (
    SUITE_KEYS,
    DistributionTable,
    build_table,
    distribution_suite,
    fold_stats,
    pearson,
    pearson_vec,
    pooled_marginal,
    pooled_marginal_srmse,
    r_squared,
    r_squared_vec,
    sample_table,
    srmse,
    srmse_vec,
    write_marginal_figure_csv,
    write_scatter_figure_csv,
    zero_sample_pct,
)

from conftest import toy_records


def _table(subset, shape, probs):
    return DistributionTable(tuple(subset), tuple(shape), np.asarray(probs, dtype=np.float64))


class TestSrmse:
    def test_two_bin_hand_value(self):
        # RMSE = sqrt(0.25) = 0.5 over 2 cells, scaled by N_c=2: sqrt(2*0.5) = 1
        est = _table(("g",), (2,), [0.5, 0.5])
        tru = _table(("g",), (2,), [1.0, 0.0])
        assert srmse(est, tru) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_vs_point_mass(self):
        est = _table(("f",), (4,), [0.25] * 4)
        tru = _table(("f",), (4,), [1.0, 0.0, 0.0, 0.0])
        assert srmse(est, tru) == pytest.approx(math.sqrt(3.0), abs=1e-12)

    def test_identical_tables_score_zero_exactly(self):
        t = _table(("f",), (3,), [0.2, 0.3, 0.5])
        assert srmse(t, t) == 0.0

    def test_zero_padding_scales_by_sqrt2(self):
        # doubling the cell count with empty bins keeps the error sum but
        # doubles N_c, so the score grows by exactly sqrt(2)
        est, tru = [0.5, 0.5], [1.0, 0.0]
        base = srmse_vec(est, tru, 2)
        padded = srmse_vec(est + [0.0, 0.0], tru + [0.0, 0.0], 4)
        assert padded == pytest.approx(math.sqrt(2.0) * base, rel=1e-12)

    def test_mismatched_tables_rejected(self):
        a = _table(("f",), (2,), [0.5, 0.5])
        b = _table(("g",), (2,), [0.5, 0.5])
        with pytest.raises(ValueError):
            srmse(a, b)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
    def test_nonnegative_and_zero_only_when_equal(self, weights):
        p = np.asarray(weights) / sum(weights)
        q = np.roll(p, 1)
        v = srmse_vec(p, q, len(p))
        assert v >= 0.0
        if not np.allclose(p, q):
            assert v > 0.0


class TestCorrelations:
    def test_perfect_agreement(self):
        t = _table(("f",), (3,), [0.2, 0.3, 0.5])
        assert r_squared(t, t) == pytest.approx(1.0)
        assert pearson(t, t) == pytest.approx(1.0)

    def test_reversed_two_bins_anticorrelate(self):
        est = _table(("f",), (2,), [0.3, 0.7])
        tru = _table(("f",), (2,), [0.7, 0.3])
        assert pearson(est, tru) == pytest.approx(-1.0)

    def test_r_squared_hand_value(self):
        # SS_res = 0.02, SS_tot = (0.2-0.3333..)^2*... computed directly
        est = np.array([0.3, 0.3, 0.4])
        tru = np.array([0.2, 0.3, 0.5])
        ss_res = 0.01 + 0.0 + 0.01
        ss_tot = float(np.sum((tru - tru.mean()) ** 2))
        assert r_squared_vec(est, tru) == pytest.approx(1.0 - ss_res / ss_tot, rel=1e-12)

    def test_constant_truth_undefined(self):
        est = np.array([0.4, 0.6])
        tru = np.array([0.5, 0.5])
        assert r_squared_vec(est, tru) is None
        assert pearson_vec(est, tru) is None

    def test_constant_truth_with_exact_match_is_one(self):
        tru = np.array([0.5, 0.5])
        assert r_squared_vec(tru.copy(), tru) == 1.0


class TestTables:
    def test_build_table_counts(self, toy_schema):
        recs = np.array([
            [0, 0, 0],
            [0, 0, 1],
            [1, 1, 0],
            [0, 0, 0],
        ], dtype=np.int64)
        t = build_table(recs, ("color",), toy_schema)
        np.testing.assert_allclose(t.probs, [0.75, 0.25, 0.0])
        joint = build_table(recs, ("color", "shape"), toy_schema)
        assert joint.shape == (3, 2)
        assert joint.prob((0, 0)) == pytest.approx(0.75)
        assert joint.prob((1, 1)) == pytest.approx(0.25)
        assert joint.prob((2, 0)) == 0.0

    def test_build_table_accepts_output_only_arrays(self, toy_schema):
        full = np.array([[1, 0, 1]], dtype=np.int64)
        outs = full[:, :2]
        a = build_table(full, ("color",), toy_schema)
        b = build_table(outs, ("color",), toy_schema)
        np.testing.assert_array_equal(a.probs, b.probs)

    def test_build_table_subset_bounds(self, schema_extended, small_extended_dataset):
        with pytest.raises(ValueError):
            build_table(small_extended_dataset, (), schema_extended)
        with pytest.raises(ValueError):
            build_table(small_extended_dataset,
                        ("age", "gender", "nationality", "investor"), schema_extended)
        with pytest.raises(ValueError):
            build_table(small_extended_dataset, ("floor",), schema_extended)

    def test_table_validation(self):
        with pytest.raises(ValueError):
            _table(("f",), (2,), [0.5, -0.5])
        with pytest.raises(ValueError):
            _table(("f",), (2,), [0.6, 0.6])
        with pytest.raises(ValueError):
            _table(("f",), (3,), [0.5, 0.5])

    def test_sample_table_round_trip(self, toy_schema):
        probs = np.array([0.1, 0.2, 0.05, 0.15, 0.3, 0.2])
        t = _table(("color", "shape"), (3, 2), probs)
        draws = sample_table(t, 1_000_000, popsyn.make_rng(12))
        emp = np.bincount(np.ravel_multi_index((draws[:, 0], draws[:, 1]), (3, 2)),
                          minlength=6) / draws.shape[0]
        assert 0.5 * float(np.abs(emp - probs).sum()) < 0.005


def test_zero_sample_pct_boundaries(toy_schema):
    train = np.array([[0, 0, 0], [1, 1, 0]], dtype=np.int64)
    inside = np.array([[0, 0, 1], [1, 1, 1]], dtype=np.int64)
    outside = np.array([[2, 0, 0], [2, 1, 0]], dtype=np.int64)
    assert zero_sample_pct(inside, train, toy_schema) == 0.0
    assert zero_sample_pct(outside, train, toy_schema) == 100.0
    half = np.vstack((inside, outside))
    assert zero_sample_pct(half, train, toy_schema) == 50.0


def test_pooled_marginal_concatenates_feature_marginals(toy_schema):
    recs = np.array([[0, 0, 0], [1, 1, 1], [1, 0, 0], [2, 0, 1]], dtype=np.int64)
    pooled = pooled_marginal(recs, toy_schema)
    assert pooled.shape == (5,)
    np.testing.assert_allclose(pooled[:3], [0.25, 0.5, 0.25])
    np.testing.assert_allclose(pooled[3:], [0.75, 0.25])


def test_pooled_marginal_srmse_matches_direct_formula(toy_schema):
    a = np.array([[0, 0, 0], [1, 1, 0]], dtype=np.int64)
    b = np.array([[0, 1, 0], [2, 1, 0]], dtype=np.int64)
    direct = srmse_vec(pooled_marginal(a, toy_schema), pooled_marginal(b, toy_schema), 5)
    assert pooled_marginal_srmse(a, b, toy_schema) == pytest.approx(direct, rel=1e-15)


def test_fold_stats_population_std():
    mean, std = fold_stats([1.0, 2.0, 3.0, 4.0])
    assert mean == pytest.approx(2.5)
    assert std == pytest.approx(math.sqrt(1.25))
    with pytest.raises(ValueError):
        fold_stats([])


def test_distribution_suite_keys_and_json(schema_extended, small_extended_dataset):
    rng = popsyn.make_rng(3)
    gen = toy_records(schema_extended, 500, rng)
    rep = distribution_suite(gen, small_extended_dataset, schema_extended,
                             train=small_extended_dataset)
    assert tuple(sorted(rep.distributions)) == tuple(sorted(SUITE_KEYS))
    assert set(rep.per_feature_srmse) == {f.name for f in schema_extended.output_features}
    assert rep.zero_sample_pct is not None
    d = rep.to_json_dict()
    assert set(d["distributions"]) == set(SUITE_KEYS)
    assert "fold_mean" not in d  # only present for fold-aggregated reports


def test_distribution_suite_without_train_leaves_zero_pct_unset(
        schema_extended, small_extended_dataset):
    rep = distribution_suite(small_extended_dataset, small_extended_dataset, schema_extended)
    assert rep.zero_sample_pct is None
    assert rep.distributions["marginal"].srmse == 0.0


def test_marginal_figure_csv_layout(tmp_path, schema_original, small_extended_dataset):
    schema = schema_original
    rng = popsyn.make_rng(8)
    truth = toy_records(schema, 300, rng)
    sampled = {"modelB": toy_records(schema, 300, rng), "modelA": toy_records(schema, 300, rng)}
    path = tmp_path / "marginals.csv"
    write_marginal_figure_csv(path, truth, sampled, schema)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["feature", "category", "truth", "modelA", "modelB"]
    assert len(rows) - 1 == schema.output_width
    total = sum(float(r[2]) for r in rows[1:])
    assert total == pytest.approx(len(schema.output_features), rel=1e-9)


def test_scatter_figure_csv_layout(tmp_path, schema_original):
    rng = popsyn.make_rng(9)
    truth = toy_records(schema_original, 300, rng)
    sampled = {"m": toy_records(schema_original, 300, rng)}
    path = tmp_path / "scatter.csv"
    write_scatter_figure_csv(path, truth, sampled, schema_original, ("age", "gender"))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["bin", "truth", "m"]
    assert len(rows) - 1 == 8 * 2
    assert rows[1][0] == "0x0"
