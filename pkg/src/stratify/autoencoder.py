"""Deep autoencoder compressing binary covariates into a 32-d code."""

import logging
from dataclasses import dataclass

import numpy as np

from ..exceptions import InsufficientPointsError, ShapeError, TrainingDivergenceError
from ..models.config import AutoencoderConfig
from ..nn import DenseNet, adam_step, backward, bce, forward, forward_cached, init_net, init_state
from ..utils.seeding import derive_seed, rng_for

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StratificationAutoencoder:
    """Trained encoder/decoder pair and its per-epoch reconstruction loss."""

    encoder: DenseNet
    decoder: DenseNet
    loss_history: tuple[float, ...]


def build_autoencoder(vocab_size: int, config: AutoencoderConfig, seed: int) -> tuple[DenseNet, DenseNet]:
    """Mirrored encoder [V, *hidden] and decoder [*reversed(hidden), V].

    Hidden layers use tanh, the reconstruction layer a sigmoid.
    """
    enc_dims = [vocab_size, *config.hidden_dims]
    dec_dims = list(reversed(enc_dims))
    encoder = init_net(enc_dims, ["tanh"] * (len(enc_dims) - 1), derive_seed(seed, "encoder"))
    decoder = init_net(
        dec_dims,
        ["tanh"] * (len(dec_dims) - 2) + ["sigmoid"],
        derive_seed(seed, "decoder"),
    )
    return encoder, decoder


def train_stratification_autoencoder(
    covariates: np.ndarray,
    seed: int,
    config: AutoencoderConfig | None = None,
) -> StratificationAutoencoder:
    """Fit the autoencoder with Adam on binary cross-entropy.

    Args:
        covariates: N x V 0/1 matrix
        seed: Seed for initialization and minibatch shuffling
        config: Widths, epochs, batch size and learning rate

    Returns:
        Encoder, decoder and the mean training loss of every epoch

    Raises:
        InsufficientPointsError: Fewer than two patients or an empty vocabulary
        TrainingDivergenceError: On a non-finite loss
    """
    cfg = config or AutoencoderConfig()
    x = np.asarray(covariates, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 1:
        raise InsufficientPointsError(f"need >= 2 patients and >= 1 feature, got shape {x.shape}")
    encoder, decoder = build_autoencoder(x.shape[1], cfg, seed)
    enc_state = init_state(encoder, cfg.learning_rate)
    dec_state = init_state(decoder, cfg.learning_rate)
    rng = rng_for(seed, "shuffle")
    n = x.shape[0]
    history: list[float] = []

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = x[order[start : start + cfg.batch_size]]
            code, enc_cache = forward_cached(encoder, batch)
            recon, dec_cache = forward_cached(decoder, code)
            loss, grad = bce(recon, batch)
            if not np.isfinite(loss):
                raise TrainingDivergenceError(f"autoencoder loss became {loss} at epoch {epoch}")
            dec_grads = backward(decoder, code, grad, dec_cache)
            enc_grads = backward(encoder, batch, dec_grads.inputs, enc_cache)
            decoder, dec_state = adam_step(decoder, dec_grads.params, dec_state)
            encoder, enc_state = adam_step(encoder, enc_grads.params, enc_state)
            total += loss * len(batch)
        history.append(total / n)
        logger.debug("stratification AE epoch %d loss %.6f", epoch, history[-1])

    return StratificationAutoencoder(encoder=encoder, decoder=decoder, loss_history=tuple(history))


def reconstruction_loss(model: StratificationAutoencoder, covariates: np.ndarray) -> float:
    """BCE of the full-batch reconstruction."""
    x = np.asarray(covariates, dtype=np.float64)
    loss, _ = bce(forward(model.decoder, forward(model.encoder, x)), x)
    return loss


def embed(encoder: DenseNet, covariates: np.ndarray) -> np.ndarray:
    """Encode covariate rows into N x code_dim embeddings.

    Raises:
        ShapeError: If the covariate width does not match the encoder
    """
    x = np.asarray(covariates, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != encoder.input_dim:
        raise ShapeError(f"covariates of shape {x.shape} do not fit encoder width {encoder.input_dim}")
    return forward(encoder, x)
