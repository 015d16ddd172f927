"""Conditional Variational Auto-Encoder on one-hot agent records.

The encoder maps (x || c) to a mean and log-variance of the latent z; the
decoder maps (z || c) back to per-output-feature softmax blocks. Training
minimizes element-wise binary cross-entropy over the concatenated one-hot
vector plus beta times the Gaussian KL, averaged over the batch, with
RMSProp. Sampling draws z from the standard normal prior and a categorical
per softmax block.
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

CE_CLAMP = 1e-12
VALIDATE_EVERY = 100


@dataclass(frozen=True)
class CvaeTrainConfig:
    hidden_layers: int = 1
    hidden_units: int = 50
    bottleneck_dim: int = 25
    batch_size: int = 32
    learning_rate: float = 0.001
    beta: float = 0.5
    epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        for name in ("hidden_layers", "hidden_units", "bottleneck_dim", "batch_size"):
            if int(getattr(self, name)) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if int(self.epochs) < 0:
            raise ConfigError(f"epochs must be nonnegative, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.beta < 0:
            raise ConfigError(f"beta must be nonnegative, got {self.beta}")


class CvaeModel:
    def __init__(self, encoder, decoder, bottleneck_dim, beta, schema, config=None):
        if encoder.out_width != 2 * bottleneck_dim:
            raise ShapeMismatchError(
                f"encoder emits {encoder.out_width} values, expected 2*{bottleneck_dim}"
            )
        if decoder.out_width != schema.output_width:
            raise ShapeMismatchError(
                f"decoder emits {decoder.out_width} values, schema output width "
                f"is {schema.output_width}"
            )
        self.encoder = encoder
        self.decoder = decoder
        self.bottleneck_dim = bottleneck_dim
        self.beta = beta
        self.schema = schema
        self.config = config

    def encode(self, x, c):
        h = self.encoder.forward(np.hstack((x, c)))
        return h[:, : self.bottleneck_dim], h[:, self.bottleneck_dim:]

    def decode(self, z, c):
        return self.decoder.forward(np.hstack((z, c)))

    def parameters(self):
        return self.encoder.parameters() + self.decoder.parameters()

    def grads(self):
        return self.encoder.grads() + self.decoder.grads()


def build_cvae(schema, config):
    init_rng = derive_rng(config.seed, "cvae", "init")
    x_w, c_w = schema.output_width, schema.conditional_width
    encoder = feedforward(
        x_w + c_w, config.hidden_layers, config.hidden_units,
        2 * config.bottleneck_dim, init_rng,
        hidden_activation="elu", out_activation="identity",
    )
    decoder = feedforward(
        config.bottleneck_dim + c_w, config.hidden_layers, config.hidden_units,
        x_w, init_rng,
        hidden_activation="elu", out_activation="softmax_blocks",
        out_blocks=schema.output_blocks,
    )
    return CvaeModel(encoder, decoder, config.bottleneck_dim, config.beta, schema, config)


def reparameterize(mu, sigma, epsilon):
    """z = mu + sigma * epsilon, with sigma the latent standard deviation."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    epsilon = np.asarray(epsilon, dtype=np.float64)
    if mu.shape != sigma.shape or mu.shape != epsilon.shape:
        raise ShapeMismatchError(
            f"mu/sigma/epsilon shapes differ: {mu.shape}, {sigma.shape}, {epsilon.shape}"
        )
    return mu + sigma * epsilon


def cross_entropy(x, x_hat):
    """Element-wise binary cross-entropy summed over all vector positions.

    Predictions are clamped into [1e-12, 1 - 1e-12] so exact zeros and ones
    stay finite.
    """
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ShapeMismatchError(f"shapes differ: {x.shape} vs {x_hat.shape}")
    if x.ndim == 1:  # the kernel contract is (n, d)
        x, x_hat = x[None, :], x_hat[None, :]
    value, _ = K.binary_ce_value_grad(x, x_hat, CE_CLAMP)
    return float(value)


def kl_divergence(mu, variance):
    """-1/2 sum(1 + ln(v) - mu^2 - v), v the latent variance per dimension."""
    mu = np.asarray(mu, dtype=np.float64)
    variance = np.asarray(variance, dtype=np.float64)
    if mu.shape != variance.shape:
        raise ShapeMismatchError(f"shapes differ: {mu.shape} vs {variance.shape}")
    if (variance <= 0).any():
        raise ValueError("variance entries must be positive")
    return float(-0.5 * np.sum(1.0 + np.log(variance) - mu**2 - variance))


def cvae_loss(x, x_hat, mu, variance, beta):
    """Reconstruction CE plus beta-weighted KL, averaged over the batch."""
    n = 1 if np.asarray(x).ndim == 1 else np.asarray(x).shape[0]
    return (cross_entropy(x, x_hat) + beta * kl_divergence(mu, variance)) / n


def _loss_and_grads(model, xb, cb, eps, beta):
    """Forward + backward for one batch; returns the batch-mean loss.

    Gradients accumulate into the model's layers; caller owns the step.
    """
    n = xb.shape[0]
    mu, logvar = model.encode(xb, cb)
    sigma = np.exp(0.5 * logvar)
    z = mu + sigma * eps
    probs = model.decode(z, cb)
    ce_sum, ce_grad = K.binary_ce_value_grad(xb, probs, CE_CLAMP)
    var = np.exp(logvar)
    kl_sum = -0.5 * np.sum(1.0 + logvar - mu**2 - var)
    loss = (ce_sum + beta * kl_sum) / n

    g_dec_in = model.decoder.backward(ce_grad / n)
    g_z = g_dec_in[:, : model.bottleneck_dim]
    g_mu = g_z + (beta / n) * mu
    g_logvar = g_z * eps * sigma * 0.5 + (beta / n) * 0.5 * (var - 1.0)
    model.encoder.backward(np.hstack((g_mu, g_logvar)))
    return float(loss)


def train_cvae(train_records, schema, config, validation_records=None):
    """Train on index records; returns (model, trace).

    trace["train_loss"] holds one batch-mean loss per mini-batch;
    trace["validation"] holds {iteration, loss, marginal_srmse} every 100
    iterations when validation records are supplied.
    """
    records = np.asarray(train_records, dtype=np.int64)
    if records.ndim != 2 or records.shape[0] == 0:
        raise ValueError("train_records must be a nonempty 2-d index array")
    x_all, c_all = encode_batch(records, schema)
    model = build_cvae(schema, config)
    optimizer = RmsProp(learning_rate=config.learning_rate)
    run_rng = derive_rng(config.seed, "cvae", "batches")
    val_rng = derive_rng(config.seed, "cvae", "validation")

    val = None
    if validation_records is not None:
        val_arr = np.asarray(validation_records, dtype=np.int64)
        vx, vc = encode_batch(val_arr, schema)
        val = (val_arr, vx, vc)

    n = records.shape[0]
    trace = {"train_loss": [], "validation": []}
    iteration = 0
    for _ in range(config.epochs):
        perm = run_rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            eps = run_rng.standard_normal((len(idx), config.bottleneck_dim))
            loss = _loss_and_grads(model, x_all[idx], c_all[idx], eps, config.beta)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss {loss} at iteration {iteration + 1}"
                )
            optimizer.step(model.parameters(), model.grads())
            trace["train_loss"].append(loss)
            iteration += 1
            if val is not None and iteration % VALIDATE_EVERY == 0:
                trace["validation"].append(
                    _validation_point(model, val, schema, config, val_rng, iteration)
                )
    return model, trace


def _validation_point(model, val, schema, config, val_rng, iteration):
    val_arr, vx, vc = val
    eps = val_rng.standard_normal((vx.shape[0], config.bottleneck_dim))
    mu, logvar = model.encode(vx, vc)
    probs = model.decode(mu + np.exp(0.5 * logvar) * eps, vc)
    loss = cvae_loss(vx, probs, mu, np.exp(logvar), config.beta)
    sampled = sample_cvae(model, conditional_part(val_arr, schema), val_rng)
    return {
        "iteration": iteration,
        "loss": float(loss),
        "marginal_srmse": pooled_marginal_srmse(sampled, val_arr, schema),
    }


def sample_cvae(model, conditionals, rng, n=None, chunk=8192):
    """Generate full records for conditional index rows.

    A 1-d conditional row with n set is repeated n times; a 2-d array yields
    one sample per row. z is drawn from the standard normal prior, then each
    output feature is a categorical draw from its softmax block.
    """
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
        z = rng.standard_normal((rows.shape[0], model.bottleneck_dim))
        probs = model.decode(z, c)
        u = rng.random((rows.shape[0], schema.n_output))
        outs[start:start + chunk] = K.categorical_blocks(
            probs, schema.output_block_starts, schema.output_block_ends, u
        )
    return np.concatenate((outs, conds), axis=1)


def save_cvae(model, directory):
    config = asdict(model.config) if model.config is not None else {}
    config["beta"] = model.beta
    config["bottleneck_dim"] = model.bottleneck_dim
    return save_model(
        directory, "cvae", config, model.schema,
        {"encoder": model.encoder, "decoder": model.decoder},
    )


def load_cvae(directory):
    manifest, schema, nets = load_model(directory, expected_kind="cvae")
    cfg = manifest["config"]
    config = None
    try:
        config = CvaeTrainConfig(**{k: cfg[k] for k in CvaeTrainConfig.__dataclass_fields__})
    except (KeyError, ConfigError):
        pass  # manifest from a hand-built model; beta/bottleneck still present
    return CvaeModel(
        nets["encoder"], nets["decoder"],
        int(cfg["bottleneck_dim"]), float(cfg["beta"]), schema, config,
    )
