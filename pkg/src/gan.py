"""GAN over aligned 16-point series with minibatch averaging.

An autoencoder (16 -> 16 -> 16, tanh) is pretrained on the real series.
The generator maps Gaussian noise to a latent code that the pretrained
decoder turns into a series. The discriminator sees each series
concatenated with the mean of its minibatch. During the adversarial phase
the encoder is frozen and the decoder is fine-tuned with the generator.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .exceptions import InsufficientPointsError, ShapeError, TrainingDivergenceError, ValidationError
from .files import read_document, write_document, write_rows
from .models.config import GanTrainConfig
from .models.series import AlignedSeries, Dataset, NormBounds, Provenance, series_from_matrix
from .nn import (
    DenseNet,
    OptimState,
    adam_step,
    backward,
    bce,
    forward,
    forward_cached,
    init_net,
    init_state,
    mse,
    net_from_dict,
    net_to_dict,
    state_from_dict,
    state_to_dict,
)
from .utils.seeding import derive_seed, rng_for

logger = logging.getLogger(__name__)

GENERATOR_HIDDEN = 16
DISCRIMINATOR_HIDDEN = (32, 16)


@dataclass
class TrainingLog:
    """Losses recorded while training one GAN.

    The adversarial lists hold one entry per minibatch, in training order.
    """

    ae_loss: list[float] = field(default_factory=list)
    epoch: list[int] = field(default_factory=list)
    d_loss: list[float] = field(default_factory=list)
    g_loss: list[float] = field(default_factory=list)
    d_acc_real: list[float] = field(default_factory=list)
    d_acc_fake: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ae_loss": self.ae_loss,
            "epoch": self.epoch,
            "d_loss": self.d_loss,
            "g_loss": self.g_loss,
            "d_acc_real": self.d_acc_real,
            "d_acc_fake": self.d_acc_fake,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainingLog":
        return cls(**{k: list(data.get(k, [])) for k in cls().to_dict()})


@dataclass(frozen=True)
class GanModel:
    """Trained networks plus what is needed to generate and denormalize.

    Attributes:
        bounds: Normalization bounds of the training dataset, if known
        seed: Training seed
        optimizer_states: Final Adam state per trained network (generator,
            decoder, discriminator), kept so training can be inspected or resumed
    """

    ae_encoder: DenseNet
    ae_decoder: DenseNet
    generator: DenseNet
    discriminator: DenseNet
    noise_dim: int
    n_pre: int
    n_during: int
    seed: int
    bounds: NormBounds | None = None
    log: TrainingLog = field(default_factory=TrainingLog)
    optimizer_states: dict[str, OptimState] = field(default_factory=dict)

    def __post_init__(self) -> None:
        length = self.n_pre + self.n_during
        if self.ae_encoder.dims[0] != length or self.ae_decoder.output_dim != length:
            raise ShapeError(f"autoencoder does not map {length}-point series")
        if self.generator.input_dim != self.noise_dim or self.generator.output_dim != self.ae_decoder.input_dim:
            raise ShapeError("generator does not map noise onto the decoder's code")
        if self.discriminator.input_dim != 2 * length or self.discriminator.output_dim != 1:
            raise ShapeError(f"discriminator must map {2 * length} inputs to 1")

    @property
    def series_length(self) -> int:
        return self.n_pre + self.n_during

    def is_finite(self) -> bool:
        return all(
            net.is_finite() for net in (self.ae_encoder, self.ae_decoder, self.generator, self.discriminator)
        )


def minibatch_average_features(batch: np.ndarray) -> np.ndarray:
    """Append the minibatch mean to every row: (x_i || mean_j x_j).

    Raises:
        ShapeError: On an empty or non-2-D batch
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"minibatch averaging needs a non-empty B x L batch, got {x.shape}")
    mean = np.broadcast_to(x.mean(axis=0), x.shape)
    return np.concatenate([x, mean], axis=1)


def minibatch_average_backward(grad: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the batch given the gradient w.r.t. the augmented rows."""
    g = np.asarray(grad, dtype=np.float64)
    length = g.shape[1] // 2
    return g[:, :length] + g[:, length:].mean(axis=0)


def build_gan_nets(config: GanTrainConfig, series_length: int = 16) -> tuple[DenseNet, DenseNet, DenseNet, DenseNet]:
    """Seeded initial (encoder, decoder, generator, discriminator)."""
    seed = config.seed
    encoder = init_net([series_length, series_length], ["tanh"], derive_seed(seed, "ae-encoder"))
    decoder = init_net([series_length, series_length], ["tanh"], derive_seed(seed, "ae-decoder"))
    generator = init_net(
        [config.noise_dim, GENERATOR_HIDDEN, series_length],
        ["tanh", "tanh"],
        derive_seed(seed, "generator"),
    )
    discriminator = init_net(
        [2 * series_length, *DISCRIMINATOR_HIDDEN, 1],
        ["relu", "relu", "sigmoid"],
        derive_seed(seed, "discriminator"),
    )
    return encoder, decoder, generator, discriminator


def _series_array(series: list[AlignedSeries] | tuple[AlignedSeries, ...] | np.ndarray) -> np.ndarray:
    if isinstance(series, np.ndarray):
        return np.asarray(series, dtype=np.float64)
    return np.array([s.values for s in series], dtype=np.float64)


def _check_loss(value: float, what: str, epoch: int) -> None:
    if not math.isfinite(value):
        raise TrainingDivergenceError(f"{what} loss became {value} at epoch {epoch}")


def pretrain_autoencoder(
    series: list[AlignedSeries] | np.ndarray,
    config: GanTrainConfig | None = None,
    log: TrainingLog | None = None,
) -> tuple[DenseNet, DenseNet]:
    """Fit the series autoencoder on MSE with Adam.

    Args:
        series: Training series (or an N x L matrix)
        config: Epochs, batch size, learning rate and seed
        log: Receives the mean loss of every epoch

    Returns:
        (encoder, decoder); the seeded initialization when epochs is 0

    Raises:
        InsufficientPointsError: If there are fewer series than the batch size
        TrainingDivergenceError: On a non-finite loss
    """
    cfg = config or GanTrainConfig()
    x = _series_array(series)
    n = len(x)
    batch_size = cfg.effective_batch_size(n)
    if n < batch_size:
        raise InsufficientPointsError(f"{n} series is fewer than the batch size {batch_size}")
    encoder, decoder, _, _ = build_gan_nets(cfg, x.shape[1])
    enc_state = init_state(encoder, cfg.ae_learning_rate)
    dec_state = init_state(decoder, cfg.ae_learning_rate)
    rng = rng_for(cfg.seed, "ae-shuffle")

    for epoch in range(cfg.ae_pretrain_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            batch = x[order[start : start + batch_size]]
            code, enc_cache = forward_cached(encoder, batch)
            recon, dec_cache = forward_cached(decoder, code)
            loss, grad = mse(recon, batch)
            _check_loss(loss, "autoencoder", epoch)
            dec_grads = backward(decoder, code, grad, dec_cache)
            enc_grads = backward(encoder, batch, dec_grads.inputs, enc_cache)
            decoder, dec_state = adam_step(decoder, dec_grads.params, dec_state)
            encoder, enc_state = adam_step(encoder, enc_grads.params, enc_state)
            total += loss * len(batch)
        if log is not None:
            log.ae_loss.append(total / n)
        logger.debug("GAN autoencoder epoch %d loss %.6f", epoch, total / n)
    return encoder, decoder


def discriminator_loss(
    discriminator: DenseNet,
    real: np.ndarray,
    fake: np.ndarray,
) -> tuple[float, list[np.ndarray], float, float]:
    """BCE of real rows labelled 1 and fake rows labelled 0.

    Returns:
        (loss, parameter gradients, accuracy on real, accuracy on fake)
    """
    real_in = minibatch_average_features(real)
    fake_in = minibatch_average_features(fake)
    p_real, real_cache = forward_cached(discriminator, real_in)
    p_fake, fake_cache = forward_cached(discriminator, fake_in)
    loss_real, g_real = bce(p_real, np.ones_like(p_real))
    loss_fake, g_fake = bce(p_fake, np.zeros_like(p_fake))
    grads_real = backward(discriminator, real_in, g_real, real_cache)
    grads_fake = backward(discriminator, fake_in, g_fake, fake_cache)
    grads = [a + b for a, b in zip(grads_real.params, grads_fake.params)]
    return (
        loss_real + loss_fake,
        grads,
        float(np.mean(p_real > 0.5)),
        float(np.mean(p_fake < 0.5)),
    )


def generator_loss(
    generator: DenseNet,
    decoder: DenseNet,
    discriminator: DenseNet,
    noise: np.ndarray,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Non-saturating generator loss -mean log D(decoder(generator(z))).

    Returns:
        (loss, generator gradients, decoder gradients)
    """
    code, gen_cache = forward_cached(generator, noise)
    fake, dec_cache = forward_cached(decoder, code)
    fake_in = minibatch_average_features(fake)
    prob, disc_cache = forward_cached(discriminator, fake_in)
    loss, g = bce(prob, np.ones_like(prob))
    disc_grads = backward(discriminator, fake_in, g, disc_cache)
    dec_grads = backward(decoder, code, minibatch_average_backward(disc_grads.inputs), dec_cache)
    gen_grads = backward(generator, noise, dec_grads.inputs, gen_cache)
    return loss, gen_grads.params, dec_grads.params


def train_gan(
    series: list[AlignedSeries] | tuple[AlignedSeries, ...] | np.ndarray,
    config: GanTrainConfig | None = None,
    bounds: NormBounds | None = None,
    n_pre: int = 8,
) -> GanModel:
    """Pretrain the autoencoder, then alternate discriminator and generator steps.

    Every minibatch (the last one may be partial) does one discriminator
    step followed by one generator + decoder step.

    Args:
        series: Training series with values in [-1, 1]
        config: Training parameters
        bounds: Normalization bounds stored with the model
        n_pre: Pre-exposure length of the series

    Returns:
        Trained GanModel with its training log

    Raises:
        InsufficientPointsError: If the batch size exceeds the number of series
        TrainingDivergenceError: On a non-finite loss or gradient
    """
    cfg = config or GanTrainConfig()
    x = _series_array(series)
    if x.ndim != 2 or x.shape[0] == 0:
        raise InsufficientPointsError("cannot train a GAN on zero series")
    if np.any(np.abs(x) > 1.0):
        raise ValidationError("training series must lie in [-1, 1]")
    n, length = x.shape
    batch_size = cfg.effective_batch_size(n)
    log = TrainingLog()
    encoder, decoder = pretrain_autoencoder(x, cfg, log)
    _, _, generator, discriminator = build_gan_nets(cfg, length)
    gen_state = init_state(generator, cfg.generator_learning_rate)
    dec_state = init_state(decoder, cfg.generator_learning_rate)
    disc_state = init_state(discriminator, cfg.discriminator_learning_rate)
    shuffle = rng_for(cfg.seed, "gan-shuffle")
    noise_rng = rng_for(cfg.seed, "gan-noise")
    logger.info("training GAN on %d series, batch size %d, %d epochs", n, batch_size, cfg.epochs)

    for epoch in range(cfg.epochs):
        order = shuffle.permutation(n)
        for start in range(0, n, batch_size):
            real = x[order[start : start + batch_size]]
            b = len(real)

            fake = forward(decoder, forward(generator, noise_rng.standard_normal((b, cfg.noise_dim))))
            d_loss, d_grads, acc_real, acc_fake = discriminator_loss(discriminator, real, fake)
            _check_loss(d_loss, "discriminator", epoch)
            discriminator, disc_state = adam_step(discriminator, d_grads, disc_state)

            z = noise_rng.standard_normal((b, cfg.noise_dim))
            g_loss, g_grads, dec_grads = generator_loss(generator, decoder, discriminator, z)
            _check_loss(g_loss, "generator", epoch)
            generator, gen_state = adam_step(generator, g_grads, gen_state)
            decoder, dec_state = adam_step(decoder, dec_grads, dec_state)

            log.epoch.append(epoch)
            log.d_loss.append(d_loss)
            log.g_loss.append(g_loss)
            log.d_acc_real.append(acc_real)
            log.d_acc_fake.append(acc_fake)
        logger.debug("GAN epoch %d d_loss %.4f g_loss %.4f", epoch, log.d_loss[-1], log.g_loss[-1])

    return GanModel(
        ae_encoder=encoder,
        ae_decoder=decoder,
        generator=generator,
        discriminator=discriminator,
        noise_dim=cfg.noise_dim,
        n_pre=n_pre,
        n_during=length - n_pre,
        seed=cfg.seed,
        bounds=bounds,
        log=log,
        optimizer_states={"generator": gen_state, "ae_decoder": dec_state, "discriminator": disc_state},
    )


def train_gan_on_dataset(dataset: Dataset, config: GanTrainConfig | None = None) -> GanModel:
    """train_gan on a dataset's series, keeping its bounds and layout."""
    return train_gan(dataset.series, config, bounds=dataset.bounds, n_pre=dataset.n_pre)


def noise_batch(noise_dim: int, n: int, seed: int) -> np.ndarray:
    """n noise vectors, draw i from its own stream (seed, i).

    The first m rows do not depend on n, and any split of the draws across
    workers reproduces the same matrix.
    """
    if n == 0:
        return np.zeros((0, noise_dim))
    return np.stack([rng_for(seed, "generate", i).standard_normal(noise_dim) for i in range(n)])


def generate_matrix(model: GanModel, n: int, seed: int) -> np.ndarray:
    """n generated series as an n x L matrix clamped to [-1, 1].

    Raises:
        ValidationError: If n is negative
    """
    if n < 0:
        raise ValidationError(f"cannot generate {n} series")
    if n == 0:
        return np.zeros((0, model.series_length))
    out = forward(model.ae_decoder, forward(model.generator, noise_batch(model.noise_dim, n, seed)))
    return np.clip(out, -1.0, 1.0)


def generate(model: GanModel, n: int, seed: int) -> list[AlignedSeries]:
    """n synthetic series with ids synth-0 .. synth-(n-1)."""
    return series_from_matrix(generate_matrix(model, n, seed), n_pre=model.n_pre)


def generate_dataset(model: GanModel, n: int, seed: int) -> Dataset:
    """Synthetic dataset carrying the model's bounds.

    Raises:
        ValidationError: If the model was trained without bounds
    """
    if model.bounds is None:
        raise ValidationError("model has no normalization bounds; train it from a dataset")
    return Dataset(
        series=tuple(generate(model, n, seed)),
        bounds=model.bounds,
        provenance=Provenance(kind="simulated", seed=seed),
        n_pre=model.n_pre,
        n_during=model.n_during,
    )


def model_to_payload(model: GanModel) -> dict[str, Any]:
    return {
        "ae_encoder": net_to_dict(model.ae_encoder),
        "ae_decoder": net_to_dict(model.ae_decoder),
        "generator": net_to_dict(model.generator),
        "discriminator": net_to_dict(model.discriminator),
        "noise_dim": model.noise_dim,
        "n_pre": model.n_pre,
        "n_during": model.n_during,
        "seed": model.seed,
        "bounds": model.bounds.model_dump() if model.bounds is not None else None,
        "log": model.log.to_dict(),
        "optimizer_states": {name: state_to_dict(s) for name, s in model.optimizer_states.items()},
    }


def model_from_payload(document: dict[str, Any], source: str = "<memory>") -> GanModel:
    try:
        bounds = document.get("bounds")
        return GanModel(
            ae_encoder=net_from_dict(document["ae_encoder"]),
            ae_decoder=net_from_dict(document["ae_decoder"]),
            generator=net_from_dict(document["generator"]),
            discriminator=net_from_dict(document["discriminator"]),
            noise_dim=int(document["noise_dim"]),
            n_pre=int(document["n_pre"]),
            n_during=int(document["n_during"]),
            seed=int(document["seed"]),
            bounds=NormBounds(**bounds) if bounds is not None else None,
            log=TrainingLog.from_dict(document.get("log", {})),
            optimizer_states={
                name: state_from_dict(s) for name, s in document.get("optimizer_states", {}).items()
            },
        )
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{source}: invalid gan-model document: {e}") from e


def save_model(model: GanModel, path: Path) -> None:
    """Write a model as a versioned JSON document."""
    write_document("gan-model", model_to_payload(model), path)


def load_model(path: Path) -> GanModel:
    """Read a model written by save_model."""
    return model_from_payload(read_document(path, "gan-model"), source=str(path))


def write_loss_curves(log: TrainingLog, path: Path) -> None:
    """Export the training log as CSV.

    Autoencoder rows carry phase "autoencoder" and the epoch loss in
    `ae_loss`; adversarial rows carry phase "adversarial", the epoch, the
    minibatch index within the epoch, losses and accuracies.
    """
    rows: list[dict[str, Any]] = [
        {"phase": "autoencoder", "epoch": epoch, "batch": "", "ae_loss": loss}
        for epoch, loss in enumerate(log.ae_loss)
    ]
    batch = 0
    for i, epoch in enumerate(log.epoch):
        batch = batch + 1 if i and log.epoch[i - 1] == epoch else 0
        rows.append(
            {
                "phase": "adversarial",
                "epoch": epoch,
                "batch": batch,
                "d_loss": log.d_loss[i],
                "g_loss": log.g_loss[i],
                "d_acc_real": log.d_acc_real[i],
                "d_acc_fake": log.d_acc_fake[i],
            }
        )
    write_rows(
        rows,
        path,
        columns=["phase", "epoch", "batch", "ae_loss", "d_loss", "g_loss", "d_acc_real", "d_acc_fake"],
    )
