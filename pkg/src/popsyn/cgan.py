"""Conditional GAN on one-hot agent records.

The generator maps (z || c) to per-output-feature softmax blocks; the
discriminator maps (x || c) to a realness score. During training the
discriminator sees exact one-hot vectors as real samples and the
generator's continuous block probabilities as fakes, keeping everything
differentiable. One discriminator step is followed by one generator step
per mini-batch, both RMSProp. The generator loss is the saturating
batch mean of ln(1 - D(G(z|c))); the non-saturating -ln D variant sits
behind a config flag, off by default.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels as K
from .errors import ConfigError, ShapeMismatchError, TrainingDivergedError
from .metrics import pooled_marginal_srmse
from .nn import feedforward
from .optim import RmsProp
from .persist import load_model, save_model
from .rng import derive_rng
from .schema import conditional_part, encode_batch, encode_conditionals

CLAMP = 1e-12
VALIDATE_EVERY = 100


@dataclass(frozen=True)
class CganTrainConfig:
    hidden_layers: int = 1
    hidden_units: int = 1200
    batch_size: int = 64
    learning_rate: float = 0.001
    epochs: int = 51
    noise_dim: int = 25
    seed: int = 0
    non_saturating: bool = False

    def __post_init__(self):
        for name in ("hidden_layers", "hidden_units", "batch_size", "noise_dim"):
            if int(getattr(self, name)) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if int(self.epochs) < 0:
            raise ConfigError(f"epochs must be nonnegative, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")


class CganModel:
    def __init__(self, generator, discriminator, noise_dim, schema, config=None):
        if generator.out_width != schema.output_width:
            raise ShapeMismatchError(
                f"generator emits {generator.out_width} values, schema output "
                f"width is {schema.output_width}"
            )
        if discriminator.out_width != 1:
            raise ShapeMismatchError(
                f"discriminator must emit one logit, got {discriminator.out_width}"
            )
        self.generator = generator
        self.discriminator = discriminator
        self.noise_dim = noise_dim
        self.schema = schema
        self.config = config

    def generate(self, z, c):
        return self.generator.forward(np.hstack((z, c)))

    def discriminate(self, x, c):
        """Realness probabilities strictly inside (0, 1)."""
        logits = self.discriminator.forward(np.hstack((x, c)))[:, 0]
        return np.clip(_sigmoid(logits), CLAMP, 1.0 - CLAMP)


def build_cgan(schema, config):
    init_rng = derive_rng(config.seed, "cgan", "init")
    x_w, c_w = schema.output_width, schema.conditional_width
    generator = feedforward(
        config.noise_dim + c_w, config.hidden_layers, config.hidden_units,
        x_w, init_rng,
        hidden_activation="elu", out_activation="softmax_blocks",
        out_blocks=schema.output_blocks,
    )
    discriminator = feedforward(
        x_w + c_w, config.hidden_layers, config.hidden_units, 1, init_rng,
        hidden_activation="elu", out_activation="identity",
    )
    return CganModel(generator, discriminator, config.noise_dim, schema, config)


def discriminator_loss(d_real, d_fake):
    """Batch mean of -[ln d_real_i + ln(1 - d_fake_i)], clamped."""
    dr = np.clip(np.asarray(d_real, dtype=np.float64), CLAMP, 1.0 - CLAMP)
    df = np.clip(np.asarray(d_fake, dtype=np.float64), CLAMP, 1.0 - CLAMP)
    if dr.shape != df.shape:
        raise ShapeMismatchError(f"shapes differ: {dr.shape} vs {df.shape}")
    return float(np.mean(-(np.log(dr) + np.log(1.0 - df))))


def generator_loss(d_fake):
    """Batch mean of ln(1 - d_fake_i): the saturating form, clamped."""
    df = np.clip(np.asarray(d_fake, dtype=np.float64), CLAMP, 1.0 - CLAMP)
    return float(np.mean(np.log(1.0 - df)))


def _sigmoid(logits):
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim == 1:  # the kernel contract is (n, d)
        return K.sigmoid_forward(arr[:, None])[:, 0]
    return K.sigmoid_forward(arr)


def train_cgan(train_records, schema, config, validation_records=None):
    """Alternating D/G training; returns (model, trace).

    trace holds per-batch d_loss/g_loss and, when validation records are
    given, {iteration, marginal_srmse, d_real, d_fake} every 100 iterations.
    """
    records = np.asarray(train_records, dtype=np.int64)
    if records.ndim != 2 or records.shape[0] == 0:
        raise ValueError("train_records must be a nonempty 2-d index array")
    x_all, c_all = encode_batch(records, schema)
    model = build_cgan(schema, config)
    opt_d = RmsProp(learning_rate=config.learning_rate)
    opt_g = RmsProp(learning_rate=config.learning_rate)
    run_rng = derive_rng(config.seed, "cgan", "batches")
    val_rng = derive_rng(config.seed, "cgan", "validation")

    val = None
    if validation_records is not None:
        val_arr = np.asarray(validation_records, dtype=np.int64)
        val = (val_arr, conditional_part(val_arr, schema))

    n = records.shape[0]
    x_w = schema.output_width
    trace = {"d_loss": [], "g_loss": [], "validation": []}
    iteration = 0
    for _ in range(config.epochs):
        perm = run_rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            xb, cb = x_all[idx], c_all[idx]
            b = len(idx)
            z = run_rng.standard_normal((b, config.noise_dim))
            fake = model.generate(z, cb)

            # discriminator step: one forward over reals stacked on fakes
            logits = model.discriminator.forward(
                np.vstack((np.hstack((xb, cb)), np.hstack((fake, cb))))
            )[:, 0]
            s = _sigmoid(logits)
            d_real, d_fake = s[:b], s[b:]
            d_loss = discriminator_loss(d_real, d_fake)
            # d(d_loss)/dlogit: sigma(l) - 1 on reals, sigma(l) on fakes
            g_logits = np.concatenate(((d_real - 1.0), d_fake)) / b
            model.discriminator.backward(g_logits[:, None])
            opt_d.step(model.discriminator.parameters(), model.discriminator.grads())

            # generator step: gradients flow through a fresh fake-only D pass
            logits_f = model.discriminator.forward(np.hstack((fake, cb)))[:, 0]
            sf = _sigmoid(logits_f)
            g_loss = generator_loss(sf)
            if config.non_saturating:
                dlogit = (sf - 1.0) / b  # minimizes -ln d_fake
            else:
                dlogit = -sf / b  # minimizes ln(1 - d_fake)
            g_input = model.discriminator.backward(dlogit[:, None])
            model.discriminator.zero_grads()  # G's pass must not update D
            model.generator.backward(g_input[:, :x_w])
            opt_g.step(model.generator.parameters(), model.generator.grads())

            if not (np.isfinite(d_loss) and np.isfinite(g_loss)):
                raise TrainingDivergedError(
                    f"non-finite loss (D={d_loss}, G={g_loss}) at iteration {iteration + 1}"
                )
            trace["d_loss"].append(d_loss)
            trace["g_loss"].append(g_loss)
            iteration += 1
            if val is not None and iteration % VALIDATE_EVERY == 0:
                sampled = sample_cgan(model, val[1], val_rng)
                trace["validation"].append({
                    "iteration": iteration,
                    "marginal_srmse": pooled_marginal_srmse(sampled, val[0], schema),
                    "d_real": float(np.mean(d_real)),
                    "d_fake": float(np.mean(d_fake)),
                })
    return model, trace


def discriminator_scores(model, records, rng):
    """(mean D(real), mean D(fake)) over the given records' conditionals."""
    arr = np.asarray(records, dtype=np.int64)
    x, c = encode_batch(arr, model.schema)
    d_real = float(np.mean(model.discriminate(x, c)))
    z = rng.standard_normal((arr.shape[0], model.noise_dim))
    fake = model.generate(z, c)
    d_fake = float(np.mean(model.discriminate(fake, c)))
    return d_real, d_fake


def sample_cgan(model, conditionals, rng, n=None, chunk=8192):
    """Generate full records for conditional index rows (see sample_cvae)."""
    conds = np.asarray(conditionals, dtype=np.int64)
    if conds.ndim == 1:
        conds = np.tile(conds[None, :], (1 if n is None else int(n), 1))
    elif n is not None and n != conds.shape[0]:
        raise ValueError(f"n={n} conflicts with {conds.shape[0]} conditional rows")
    if conds.shape[1] == model.schema.n_features:
        conds = conditional_part(conds, model.schema)
    schema = model.schema
    outs = np.zeros((conds.shape[0], schema.n_output), dtype=np.int64)
    for start in range(0, conds.shape[0], chunk):
        rows = conds[start:start + chunk]
        c = encode_conditionals(rows, schema)
        z = rng.standard_normal((rows.shape[0], model.noise_dim))
        probs = model.generate(z, c)
        u = rng.random((rows.shape[0], schema.n_output))
        outs[start:start + chunk] = K.categorical_blocks(
            probs, schema.output_block_starts, schema.output_block_ends, u
        )
    return np.concatenate((outs, conds), axis=1)


def distinct_output_tuples(records, schema):
    """Mode-collapse guard: number of distinct output tuples in a sample."""
    outs = np.asarray(records, dtype=np.int64)[:, :schema.n_output]
    return len(set(map(tuple, outs.tolist())))


def save_cgan(model, directory):
    config = asdict(model.config) if model.config is not None else {}
    config["noise_dim"] = model.noise_dim
    return save_model(
        directory, "cgan", config, model.schema,
        {"generator": model.generator, "discriminator": model.discriminator},
    )


def load_cgan(directory):
    manifest, schema, nets = load_model(directory, expected_kind="cgan")
    cfg = manifest["config"]
    config = None
    try:
        config = CganTrainConfig(**{k: cfg[k] for k in CganTrainConfig.__dataclass_fields__})
    except (KeyError, ConfigError):
        pass
    return CganModel(
        nets["generator"], nets["discriminator"], int(cfg["noise_dim"]), schema, config
    )
