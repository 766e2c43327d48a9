"""Tests for GAN training, generation and checkpoints."""

import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from src.exceptions import InsufficientPointsError, ShapeError, ValidationError
from src.files import write_document
from src.gan import (
    build_gan_nets,
    discriminator_loss,
    generate,
    generate_dataset,
    generate_matrix,
    generator_loss,
    load_model,
    minibatch_average_backward,
    minibatch_average_features,
    noise_batch,
    pretrain_autoencoder,
    save_model,
    train_gan,
    train_gan_on_dataset,
    write_loss_curves,
)
from src.models import GanTrainConfig
from src.nn import forward, init_net


def _params_equal(a, b):
    return all(np.array_equal(p, q) for p, q in zip(a.params(), b.params()))


def _numeric(f, arrays, h=1e-5):
    out = []
    for a in arrays:
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            old = a[idx]
            a[idx] = old + h
            up = f()
            a[idx] = old - h
            down = f()
            a[idx] = old
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


@pytest.fixture
def trained(random_dataset, tiny_gan_config):
    return train_gan_on_dataset(random_dataset, tiny_gan_config)


class TestMinibatchAveraging:
    def test_single_row(self):
        x = np.arange(16, dtype=float)[None, :] / 16
        assert np.array_equal(minibatch_average_features(x), np.concatenate([x, x], axis=1))

    def test_antisymmetric_batch(self):
        row = np.linspace(-1, 1, 16)
        out = minibatch_average_features(np.stack([row, -row]))
        assert out.shape == (2, 32)
        assert not out[:, 16:].any()

    def test_permutation(self, rng):
        x = rng.uniform(-1, 1, size=(5, 16))
        a = minibatch_average_features(x)
        b = minibatch_average_features(x[::-1])
        np.testing.assert_allclose(a[:, 16:], b[:, 16:], atol=1e-15)
        np.testing.assert_allclose(a[0, 16:], a[4, 16:])

    def test_empty_batch(self):
        with pytest.raises(ShapeError):
            minibatch_average_features(np.zeros((0, 16)))

    def test_backward_is_adjoint(self, rng):
        x = rng.normal(size=(4, 3))
        upstream = rng.normal(size=(4, 6))
        x_var = x.copy()
        numeric = _numeric(lambda: float(np.sum(upstream * minibatch_average_features(x_var))), [x_var])[0]
        np.testing.assert_allclose(minibatch_average_backward(upstream), numeric, atol=1e-8)


class TestNetworks:
    def test_dimension_chain(self):
        encoder, decoder, generator, discriminator = build_gan_nets(GanTrainConfig(), 16)
        assert encoder.dims == [16, 16] and decoder.dims == [16, 16]
        assert decoder.activations == ["tanh"]
        assert generator.dims == [16, 16, 16]
        assert discriminator.dims == [32, 32, 16, 1]
        assert discriminator.activations[-1] == "sigmoid"

    def test_model_shapes_checked(self, trained):
        wrong = init_net([3, 16, 16], ["tanh", "tanh"], seed=0)
        with pytest.raises(ShapeError):
            replace(trained, generator=wrong)


class TestGradients:
    def test_discriminator_gradients(self, rng):
        disc = init_net([8, 5, 3, 1], ["relu", "relu", "sigmoid"], seed=2)
        disc = disc.with_params([p + 0.05 if p.ndim == 1 else p for p in disc.params()])
        real = rng.uniform(-1, 1, size=(2, 4))
        fake = rng.uniform(-1, 1, size=(2, 4))
        params = [p.copy() for p in disc.params()]
        _, grads, _, _ = discriminator_loss(disc, real, fake)
        numeric = _numeric(lambda: discriminator_loss(disc.with_params(params), real, fake)[0], params)
        for a, n in zip(grads, numeric):
            np.testing.assert_allclose(a, n, rtol=1e-4, atol=1e-9)

    def test_generator_and_decoder_gradients(self, rng):
        gen = init_net([3, 4, 4], ["tanh", "tanh"], seed=1)
        dec = init_net([4, 4], ["tanh"], seed=2)
        disc = init_net([8, 5, 1], ["tanh", "sigmoid"], seed=3)
        z = rng.normal(size=(2, 3))
        _, g_grads, d_grads = generator_loss(gen, dec, disc, z)

        gen_params = [p.copy() for p in gen.params()]
        numeric = _numeric(lambda: generator_loss(gen.with_params(gen_params), dec, disc, z)[0], gen_params)
        for a, n in zip(g_grads, numeric):
            np.testing.assert_allclose(a, n, rtol=1e-4, atol=1e-9)

        dec_params = [p.copy() for p in dec.params()]
        numeric = _numeric(lambda: generator_loss(gen, dec.with_params(dec_params), disc, z)[0], dec_params)
        for a, n in zip(d_grads, numeric):
            np.testing.assert_allclose(a, n, rtol=1e-4, atol=1e-9)

    def test_discriminator_loss_at_chance(self):
        disc = init_net([8, 1], ["sigmoid"], seed=0)
        disc = disc.with_params([np.zeros_like(p) for p in disc.params()])
        loss, _, acc_real, acc_fake = discriminator_loss(disc, np.zeros((2, 4)), np.zeros((2, 4)))
        assert loss == pytest.approx(2 * math.log(2))
        assert acc_real == 0.0 and acc_fake == 0.0


class TestPretrain:
    def test_zero_epochs_is_initialization(self, random_dataset):
        cfg = GanTrainConfig(ae_pretrain_epochs=0, seed=4)
        encoder, decoder = pretrain_autoencoder(random_dataset.series, cfg)
        init_encoder, init_decoder, _, _ = build_gan_nets(cfg, 16)
        assert _params_equal(encoder, init_encoder)
        assert _params_equal(decoder, init_decoder)

    def test_outputs_in_tanh_range(self, random_dataset, tiny_gan_config):
        encoder, decoder = pretrain_autoencoder(random_dataset.matrix(), tiny_gan_config)
        out = forward(decoder, forward(encoder, random_dataset.matrix()))
        assert np.all(np.abs(out) < 1.0)

    def test_fewer_series_than_batch(self, random_dataset, tiny_gan_config):
        with pytest.raises(InsufficientPointsError):
            pretrain_autoencoder(random_dataset.matrix()[:3], tiny_gan_config)

    @pytest.mark.slow
    def test_learns_repeated_series(self):
        x = np.tile(np.linspace(-0.5, 0.5, 16), (100, 1))
        cfg = GanTrainConfig(ae_pretrain_epochs=500, batch_size=10, small_cluster_threshold=0)
        encoder, decoder = pretrain_autoencoder(x, cfg)
        assert np.mean((forward(decoder, forward(encoder, x)) - x) ** 2) < 1e-3


class TestTrainGan:
    def test_log_lengths(self, trained, tiny_gan_config):
        # 30 series, batch 5
        assert len(trained.log.d_loss) == tiny_gan_config.epochs * 6
        assert len(trained.log.g_loss) == len(trained.log.d_loss)
        assert trained.log.epoch == [0] * 6 + [1] * 6
        assert len(trained.log.ae_loss) == tiny_gan_config.ae_pretrain_epochs

    def test_partial_last_batch(self, random_dataset, tiny_gan_config):
        model = train_gan(random_dataset.matrix()[:23], tiny_gan_config)
        assert len(model.log.d_loss) == tiny_gan_config.epochs * 5

    def test_small_training_set_batch(self, random_dataset):
        cfg = GanTrainConfig(epochs=1, ae_pretrain_epochs=1, small_cluster_threshold=10)
        model = train_gan(random_dataset.matrix()[:8], cfg)
        assert len(model.log.d_loss) == 2

    def test_deterministic(self, random_dataset, tiny_gan_config, trained):
        again = train_gan_on_dataset(random_dataset, tiny_gan_config)
        for name in ("ae_encoder", "ae_decoder", "generator", "discriminator"):
            assert _params_equal(getattr(trained, name), getattr(again, name))
        assert again.log == trained.log

    def test_zero_epochs_keeps_generator(self, random_dataset):
        cfg = GanTrainConfig(epochs=0, ae_pretrain_epochs=1, batch_size=5, seed=8)
        model = train_gan(random_dataset.series, cfg)
        _, _, generator, discriminator = build_gan_nets(cfg, 16)
        assert _params_equal(model.generator, generator)
        assert _params_equal(model.discriminator, discriminator)
        assert model.log.d_loss == []

    def test_keeps_dataset_metadata(self, trained, random_dataset):
        assert trained.bounds == random_dataset.bounds
        assert (trained.n_pre, trained.n_during) == (8, 8)
        assert set(trained.optimizer_states) == {"generator", "ae_decoder", "discriminator"}
        assert trained.optimizer_states["generator"].step == 12
        assert trained.is_finite()

    def test_encoder_frozen_after_pretraining(self, random_dataset, tiny_gan_config, trained):
        encoder, _ = pretrain_autoencoder(random_dataset.series, tiny_gan_config)
        assert _params_equal(trained.ae_encoder, encoder)

    def test_rejects_out_of_range(self, tiny_gan_config):
        with pytest.raises(ValidationError):
            train_gan(np.full((10, 16), 1.5), tiny_gan_config)

    def test_batch_larger_than_training_set(self, random_dataset):
        cfg = GanTrainConfig(batch_size=50, small_cluster_threshold=0)
        with pytest.raises(InsufficientPointsError):
            train_gan(random_dataset.series, cfg)

    @pytest.mark.slow
    def test_constant_series_recovered(self):
        c = np.linspace(-0.6, 0.6, 16)
        model = train_gan(np.tile(c, (200, 1)), GanTrainConfig(seed=0))
        mean = generate_matrix(model, 500, seed=1).mean(axis=0)
        assert np.max(np.abs(mean - c)) < 0.15

    @pytest.mark.slow
    def test_toy_distribution_recovered(self):
        mu = 0.5 * np.sin(np.linspace(0, np.pi, 16))
        hits = 0
        for seed in range(5):
            x = np.clip(np.random.default_rng(seed).normal(mu, 0.05, size=(200, 16)), -1, 1)
            model = train_gan(x, GanTrainConfig(seed=seed))
            out = generate_matrix(model, 1000, seed=seed + 100)
            if np.all(np.abs(out.mean(axis=0) - mu) < 0.1) and np.all(np.abs(out.std(axis=0) - 0.05) < 0.1):
                hits += 1
        assert hits >= 4


class TestGenerate:
    def test_zero(self, trained):
        assert generate(trained, 0, seed=1) == []

    def test_negative(self, trained):
        with pytest.raises(ValidationError):
            generate(trained, -1, seed=1)

    def test_range_ids_and_determinism(self, trained):
        series = generate(trained, 20, seed=3)
        assert [s.patient_id for s in series[:2]] == ["synth-0", "synth-1"]
        m = np.array([s.values for s in series])
        assert m.min() >= -1.0 and m.max() <= 1.0
        assert generate(trained, 20, seed=3) == series
        assert generate(trained, 20, seed=4) != series

    def test_prefix_stable(self, trained):
        np.testing.assert_array_equal(generate_matrix(trained, 5, seed=2), generate_matrix(trained, 12, seed=2)[:5])
        np.testing.assert_array_equal(noise_batch(16, 3, 9), noise_batch(16, 7, 9)[:3])

    def test_dataset_needs_bounds(self, random_dataset, tiny_gan_config, trained):
        bare = train_gan(random_dataset.series, tiny_gan_config)
        with pytest.raises(ValidationError):
            generate_dataset(bare, 3, seed=0)
        ds = generate_dataset(trained, 3, seed=0)
        assert ds.bounds == random_dataset.bounds
        assert len(ds.series) == 3


class TestCheckpoints:
    def test_round_trip(self, trained, tmp_path):
        save_model(trained, tmp_path / "model.json")
        back = load_model(tmp_path / "model.json")
        for name in ("ae_encoder", "ae_decoder", "generator", "discriminator"):
            assert _params_equal(getattr(trained, name), getattr(back, name))
        assert back.log == trained.log
        assert back.bounds == trained.bounds
        assert back.optimizer_states["discriminator"].step == trained.optimizer_states["discriminator"].step
        np.testing.assert_array_equal(generate_matrix(back, 4, seed=5), generate_matrix(trained, 4, seed=5))

    def test_invalid_document(self, tmp_path):
        write_document("gan-model", {"noise_dim": 16}, tmp_path / "model.json")
        with pytest.raises(ValidationError):
            load_model(tmp_path / "model.json")

    def test_loss_curves(self, trained, tmp_path):
        write_loss_curves(trained.log, tmp_path / "loss.csv")
        frame = pd.read_csv(tmp_path / "loss.csv")
        assert list(frame.columns) == [
            "phase", "epoch", "batch", "ae_loss", "d_loss", "g_loss", "d_acc_real", "d_acc_fake",
        ]
        assert (frame["phase"] == "autoencoder").sum() == 2
        adversarial = frame[frame["phase"] == "adversarial"]
        assert len(adversarial) == 12
        assert adversarial["batch"].tolist() == [0, 1, 2, 3, 4, 5] * 2
