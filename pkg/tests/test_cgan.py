import math

import numpy as np
import pytest

import popsyn
from popsyn import (
    CganTrainConfig,
    discriminator_loss,
    discriminator_scores,
    distinct_output_tuples,
    generator_loss,
    load_cgan,
    make_rng,
    sample_cgan,
    save_cgan,
    train_cgan,
)
from popsyn.cgan import build_cgan
from popsyn.errors import ConfigError


class TestLossValues:
    def test_equilibrium_discriminator_loss(self):
        # D emitting 0.5 everywhere sits at the -[ln .5 + ln .5] = 2 ln 2 point
        assert discriminator_loss([0.5], [0.5]) == pytest.approx(2.0 * math.log(2.0), abs=1e-9)

    def test_equilibrium_generator_loss(self):
        assert generator_loss([0.5]) == pytest.approx(-math.log(2.0), abs=1e-9)

    def test_perfect_discriminator_loss_is_zero(self):
        assert discriminator_loss([1.0], [0.0]) == pytest.approx(0.0, abs=1e-6)

    def test_losses_clamped_finite_at_extremes(self):
        assert math.isfinite(discriminator_loss([0.0], [1.0]))
        assert math.isfinite(generator_loss([1.0]))

    def test_losses_average_over_batch(self):
        a = discriminator_loss([0.9, 0.5], [0.1, 0.5])
        b = 0.5 * (discriminator_loss([0.9], [0.1]) + discriminator_loss([0.5], [0.5]))
        assert a == pytest.approx(b, rel=1e-12)

    def test_generator_loss_decreases_as_fakes_fool(self):
        # more convincing fakes push the saturating loss more negative
        assert generator_loss([0.9]) < generator_loss([0.5]) < generator_loss([0.1])


def test_config_validation():
    with pytest.raises(ConfigError):
        CganTrainConfig(noise_dim=0)
    with pytest.raises(ConfigError):
        CganTrainConfig(epochs=-1)
    assert CganTrainConfig().non_saturating is False
    assert CganTrainConfig(epochs=0).epochs == 0


def test_build_dimensions(toy_schema):
    cfg = CganTrainConfig(hidden_units=8, noise_dim=4, seed=0)
    model = build_cgan(toy_schema, cfg)
    x_w, c_w = toy_schema.output_width, toy_schema.conditional_width
    assert model.generator.in_width == 4 + c_w
    assert model.generator.out_width == x_w
    assert model.discriminator.in_width == x_w + c_w
    assert model.discriminator.out_width == 1


@pytest.fixture
def coupled_records(toy_schema):
    rows = [[0, 1, 0]] * 120 + [[2, 0, 1]] * 120
    return np.array(rows, dtype=np.int64)


def _small_config(**overrides):
    base = dict(hidden_layers=1, hidden_units=24, batch_size=16,
                learning_rate=0.001, epochs=60, noise_dim=4, seed=5)
    base.update(overrides)
    return CganTrainConfig(**base)


def test_training_stays_finite_and_traces_losses(toy_schema, coupled_records):
    model, trace = train_cgan(coupled_records, toy_schema, _small_config(epochs=10))
    batches_per_epoch = math.ceil(len(coupled_records) / 16)
    assert len(trace["d_loss"]) == 10 * batches_per_epoch
    assert len(trace["g_loss"]) == len(trace["d_loss"])
    assert all(math.isfinite(v) for v in trace["d_loss"] + trace["g_loss"])
    for p in model.generator.parameters() + model.discriminator.parameters():
        assert np.isfinite(p).all()


def test_discriminator_drifts_toward_equilibrium(toy_schema):
    # one memorized record: G can match it, so D ends near 0.5 on reals
    rows = np.array([[1, 0, 0]] * 64, dtype=np.int64)
    model, _ = train_cgan(rows, toy_schema, _small_config(epochs=200))
    d_real, d_fake = discriminator_scores(model, rows, make_rng(3))
    assert 0.35 < d_real < 0.65
    assert 0.35 < d_fake < 0.65


def test_training_is_deterministic(toy_schema, coupled_records):
    cfg = _small_config(epochs=4)
    m1, t1 = train_cgan(coupled_records, toy_schema, cfg)
    m2, t2 = train_cgan(coupled_records, toy_schema, cfg)
    for p1, p2 in zip(m1.generator.parameters(), m2.generator.parameters()):
        np.testing.assert_array_equal(p1, p2)
    for p1, p2 in zip(m1.discriminator.parameters(), m2.discriminator.parameters()):
        np.testing.assert_array_equal(p1, p2)
    assert t1["d_loss"] == t2["d_loss"]


def test_validation_does_not_alter_weights(toy_schema, coupled_records):
    cfg = _small_config(epochs=8)
    plain, trace_plain = train_cgan(coupled_records, toy_schema, cfg)
    with_val, trace_val = train_cgan(coupled_records, toy_schema, cfg,
                                     validation_records=coupled_records[:40])
    for p1, p2 in zip(plain.generator.parameters(), with_val.generator.parameters()):
        np.testing.assert_array_equal(p1, p2)
    assert trace_plain["validation"] == []
    assert len(trace_val["validation"]) >= 1
    assert set(trace_val["validation"][0]) == {"iteration", "marginal_srmse",
                                               "d_real", "d_fake"}


def test_non_saturating_variant_trains(toy_schema, coupled_records):
    cfg = _small_config(epochs=10, non_saturating=True)
    model, trace = train_cgan(coupled_records, toy_schema, cfg)
    assert all(math.isfinite(v) for v in trace["g_loss"])
    samp = sample_cgan(model, np.array([[0]] * 20, dtype=np.int64), make_rng(1))
    assert samp.shape == (20, 3)


def test_zero_epochs_returns_initialized_model(toy_schema, coupled_records):
    model, trace = train_cgan(coupled_records, toy_schema, _small_config(epochs=0))
    assert trace["d_loss"] == []
    samp = sample_cgan(model, np.array([0], dtype=np.int64), make_rng(0), n=6)
    assert samp.shape == (6, 3)


def test_sample_outputs_are_schema_valid(toy_schema, coupled_records):
    model, _ = train_cgan(coupled_records, toy_schema, _small_config(epochs=5))
    conds = np.array([[0]] * 100 + [[1]] * 100, dtype=np.int64)
    samp = sample_cgan(model, conds, make_rng(2))
    np.testing.assert_array_equal(samp[:, 2], conds[:, 0])
    for j, feat in enumerate(toy_schema.features):
        assert samp[:, j].min() >= 0
        assert samp[:, j].max() < feat.n_categories


def test_discriminator_scores_in_unit_interval(toy_schema, coupled_records):
    model, _ = train_cgan(coupled_records, toy_schema, _small_config(epochs=2))
    d_real, d_fake = discriminator_scores(model, coupled_records, make_rng(6))
    assert 0.0 < d_real < 1.0
    assert 0.0 < d_fake < 1.0


def test_distinct_output_tuples_counts_unique_rows(toy_schema):
    recs = np.array([[0, 0, 0], [0, 0, 1], [1, 1, 0], [0, 0, 0]], dtype=np.int64)
    assert distinct_output_tuples(recs, toy_schema) == 2


def test_save_load_round_trip(tmp_path, toy_schema, coupled_records):
    model, _ = train_cgan(coupled_records, toy_schema, _small_config(epochs=3))
    save_cgan(model, tmp_path / "model")
    clone = load_cgan(tmp_path / "model")
    conds = np.array([[1]] * 40, dtype=np.int64)
    np.testing.assert_array_equal(
        sample_cgan(model, conds, make_rng(8)),
        sample_cgan(clone, conds, make_rng(8)),
    )
    assert clone.noise_dim == model.noise_dim
