import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from htnn.checkpoint import load_checkpoint, save_checkpoint
from htnn.data import Dataset
from htnn.network import ModelSpec, softmax_cross_entropy
from htnn.optim import Adadelta
from htnn.train import (
    CONFIG_SCHEMA_VERSION,
    METRICS_HEADER,
    TrainConfig,
    evaluate,
    evaluate_checkpoint,
    train,
)

TINY = dict(image_size=8, channels=4, dense_units=16)


def synthetic_dataset(n, rng, image_size=8, classes=8):
    """Separable image set: class k lights up column k (classes <= image_size)."""
    labels = rng.integers(0, classes, n)
    images = 0.1 * rng.standard_normal((n, 1, image_size, image_size))
    for i, k in enumerate(labels):
        images[i, 0, :, k % image_size] += 2.0
    return Dataset(images.astype(np.float32), labels.astype(np.int64))


def tiny_config(tmp_path, arch="toy-ht-cnn", **overrides):
    defaults = dict(architecture=arch, paths=2, epochs=2, batch_size=16,
                    output_dir=str(tmp_path / "run"), seed=1, **TINY)
    defaults.update(overrides)
    return TrainConfig(**defaults)


class TestTrainConfig:
    def test_defaults_mirror_protocol(self):
        config = TrainConfig()
        assert config.epochs == 14
        assert config.batch_size == 64
        assert config.learning_rate == 1.0
        assert config.lr_decay == 0.7
        assert config.dropout == 0.2
        assert config.rho == 0.9
        assert config.eps == 1e-6

    def test_json_round_trip(self):
        config = TrainConfig(architecture="toy-cnn", epochs=3, seed=42)
        text = config.to_json()
        parsed = json.loads(text)
        assert parsed["schema_version"] == CONFIG_SCHEMA_VERSION
        assert TrainConfig.from_json(text) == config

    def test_wrong_schema_version_rejected(self):
        bad = json.dumps({"schema_version": 999, "epochs": 1})
        with pytest.raises(ValueError, match="schema_version"):
            TrainConfig.from_json(bad)

    def test_unknown_keys_rejected(self):
        bad = json.dumps({"schema_version": 1, "epochz": 1})
        with pytest.raises(ValueError, match="unknown config keys"):
            TrainConfig.from_json(bad)


class TestTrainingLoop:
    def test_smoke_run_writes_artifacts(self, tmp_path, rng):
        config = tiny_config(tmp_path)
        train_data = synthetic_dataset(200, rng)
        test_data = synthetic_dataset(50, rng)
        result = train(config, train_data, test_data, verbose=False)
        assert result.checkpoint_path.exists()
        assert result.metrics_path.exists()
        lines = result.metrics_path.read_text().strip().splitlines()
        assert lines[0] == ",".join(METRICS_HEADER)
        assert len(lines) == 1 + config.epochs
        assert 0.0 <= result.best_accuracy <= 1.0
        ckpt = load_checkpoint(result.checkpoint_path)
        assert ckpt.manifest["conventions"]["ht_normalization"] == "folded-inverse"
        assert ckpt.manifest["conventions"]["rng_family"] == "philox"
        assert ckpt.manifest["seeds"]["seed"] == config.seed

    def test_learns_separable_data(self, tmp_path, rng):
        config = tiny_config(tmp_path, epochs=6, dropout=0.0)
        train_data = synthetic_dataset(400, rng)
        test_data = synthetic_dataset(100, rng)
        result = train(config, train_data, test_data, verbose=False)
        assert result.best_accuracy > 0.9

    def test_deterministic_metrics_for_fixed_seed(self, tmp_path, rng):
        data = synthetic_dataset(120, rng)
        test = synthetic_dataset(40, rng)
        runs = []
        for sub in ("a", "b"):
            config = tiny_config(tmp_path / sub, seed=7)
            result = train(config, data, test, verbose=False)
            runs.append([(m["epoch"], m["train_loss"], m["test_acc"])
                         for m in result.metrics])
        assert runs[0] == runs[1]

    def test_divergence_aborts_with_diagnostic(self, tmp_path, rng):
        config = tiny_config(tmp_path, epochs=1)
        data = synthetic_dataset(64, rng)
        poisoned = data.images.copy()
        poisoned[0] = np.nan
        with pytest.raises(RuntimeError, match="diverged.*epoch 1"):
            train(config, Dataset(poisoned, data.labels), data, verbose=False)

    def test_best_checkpoint_tracks_argmax_accuracy(self, tmp_path, rng):
        config = tiny_config(tmp_path, epochs=3)
        result = train(config, synthetic_dataset(200, rng),
                       synthetic_dataset(60, rng), verbose=False)
        best_by_metrics = max(result.metrics, key=lambda m: m["test_acc"])
        assert result.best_accuracy == best_by_metrics["test_acc"]
        # ties break toward the earliest epoch
        candidates = [m["epoch"] for m in result.metrics
                      if m["test_acc"] == result.best_accuracy]
        assert result.best_epoch == min(candidates)
        ckpt = load_checkpoint(result.checkpoint_path)
        assert ckpt.manifest["epoch"] == result.best_epoch


class TestEvaluation:
    def test_checkpoint_round_trip_bit_exact(self, tmp_path, rng):
        spec = ModelSpec(architecture="toy-ht-cnn", paths=2, dropout=0.0, **TINY)
        net = spec.build(seed=3)
        data = synthetic_dataset(64, rng)
        path = save_checkpoint(tmp_path / "m.ckpt", spec, net.state_dict())
        acc1 = evaluate_checkpoint(path, data)
        acc2 = evaluate_checkpoint(path, data)
        assert acc1 == acc2
        reloaded = load_checkpoint(path).build_model()
        assert_array_equal(net.forward(data.images),
                           reloaded.forward(data.images))
        resaved = save_checkpoint(tmp_path / "m2.ckpt", spec, reloaded.state_dict())
        assert (tmp_path / "m.ckpt").read_bytes()[12:] == resaved.read_bytes()[12:]

    def test_random_model_near_chance(self, rng):
        spec = ModelSpec(architecture="toy-cnn", dropout=0.0, **TINY)
        net = spec.build(seed=11)
        # pure-noise inputs with independent labels: chance-level predictions
        noise = Dataset(rng.standard_normal((1500, 1, 8, 8)).astype(np.float32),
                        rng.integers(0, 10, 1500).astype(np.int64))
        acc = evaluate(net, noise)
        assert abs(acc - 0.1) < 0.03

    def test_label_permutation_changes_accuracy(self, tmp_path, rng):
        config = tiny_config(tmp_path, epochs=2, dropout=0.0)
        data = synthetic_dataset(300, rng)
        result = train(config, data, data, verbose=False)
        net = load_checkpoint(result.checkpoint_path).build_model()
        straight = evaluate(net, data)
        permuted = Dataset(data.images, (data.labels + 1) % 8)
        assert straight != evaluate(net, permuted)

    def test_mismatched_checkpoint_architecture_rejected(self, tmp_path, rng):
        spec = ModelSpec(architecture="toy-cnn", **TINY)
        net = spec.build(seed=0)
        path = save_checkpoint(tmp_path / "cnn.ckpt", spec, net.state_dict())
        ckpt = load_checkpoint(path)
        wrong = ModelSpec(architecture="toy-ht-cnn", paths=2, **TINY).build(seed=0)
        with pytest.raises(ValueError, match="does not match"):
            wrong.load_state_dict(ckpt.state)

    def test_checkpoint_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOTACKPT" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            load_checkpoint(path)


class TestOverfitCanary:
    @pytest.mark.parametrize("arch", ["toy-cnn", "toy-ht-cnn"])
    def test_two_hundred_steps_drive_loss_down(self, arch, rng):
        spec = ModelSpec(architecture=arch, paths=3, dropout=0.0, dtype="float64",
                         **TINY)
        net = spec.build(seed=5)
        optimizer = Adadelta(net.params())
        x = rng.standard_normal((8, 1, 8, 8))
        y = rng.integers(0, 10, 8)
        loss = np.inf
        for _ in range(200):
            net.zero_grads()
            logits = net.forward(x, training=True)
            loss, grad = softmax_cross_entropy(logits, y)
            net.backward(grad)
            optimizer.step(1.0)
        assert loss < 0.01
