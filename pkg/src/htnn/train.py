"""Training and evaluation for the digit-classification experiment.

Protocol: Adadelta with initial learning rate 1.0, decayed by 0.7 after
each epoch; mini-batch 64; 14 epochs; dropout 0.2. After every epoch the
test set is evaluated and the best-accuracy checkpoint is kept (ties go to
the earlier epoch). Metrics are appended to a CSV with columns
``epoch,train_loss,test_acc,seconds``.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, asdict, field, fields
from pathlib import Path

import numpy as np

from . import ht_layer
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import Dataset, default_data_dir, load_mnist_idx, resolve_split
from .network import ModelSpec, Network, softmax_cross_entropy
from .optim import Adadelta
from .quantum import SAMPLED, MeasurementPlan
from .validation import derive_seed

__all__ = [
    "CONFIG_SCHEMA_VERSION",
    "TrainConfig",
    "TrainResult",
    "load_split",
    "train",
    "evaluate",
    "evaluate_checkpoint",
]

CONFIG_SCHEMA_VERSION = 1

METRICS_HEADER = ("epoch", "train_loss", "test_acc", "seconds")


@dataclass
class TrainConfig:
    architecture: str = "toy-ht-cnn"
    paths: int = 3
    epochs: int = 14
    batch_size: int = 64
    learning_rate: float = 1.0
    lr_decay: float = 0.7
    dropout: float = 0.2
    rho: float = 0.9
    eps: float = 1e-6
    pool: str = "max"
    seed: int = 0
    ht_backend: str = "classical"
    shots: int = 1_000_000
    data_dir: str | None = None
    output_dir: str = "runs/latest"
    limit_train: int | None = None
    limit_test: int | None = None
    eval_batch_size: int = 256
    image_size: int = 32
    channels: int = 32
    dense_units: int = 128

    def model_spec(self) -> ModelSpec:
        return ModelSpec(architecture=self.architecture, paths=self.paths,
                         image_size=self.image_size, channels=self.channels,
                         dense_units=self.dense_units, pool=self.pool,
                         dropout=self.dropout)

    def to_json(self) -> str:
        d = {"schema_version": CONFIG_SCHEMA_VERSION}
        d.update(asdict(self))
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrainConfig":
        d = json.loads(text)
        version = d.pop("schema_version", None)
        if version != CONFIG_SCHEMA_VERSION:
            raise ValueError(
                f"config schema_version {version!r} not supported "
                f"(expected {CONFIG_SCHEMA_VERSION})"
            )
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        return cls.from_json(Path(path).read_text())


@dataclass
class TrainResult:
    best_accuracy: float
    best_epoch: int
    metrics: list[dict] = field(repr=False)
    checkpoint_path: Path | None
    metrics_path: Path | None


def load_split(config: TrainConfig, split: str) -> Dataset:
    data_dir = config.data_dir or default_data_dir()
    if data_dir is None:
        raise FileNotFoundError(
            "no dataset directory: set data_dir in the config or the "
            "HT_DATA_DIR environment variable"
        )
    images, labels = resolve_split(data_dir, split)
    ds = load_mnist_idx(images, labels, pad_to=config.image_size)
    return ds.subset(config.limit_train if split == "train" else config.limit_test)


def _eval_plan(config: TrainConfig) -> MeasurementPlan | None:
    if config.ht_backend == ht_layer.QUANTUM_SHOTS:
        return MeasurementPlan(SAMPLED, shots=config.shots, seed=derive_seed(config.seed, 3))
    return None


def evaluate(net: Network, dataset: Dataset, batch_size: int = 256,
             backend: str | None = None, plan: MeasurementPlan | None = None,
             limit: int | None = None) -> float:
    """Top-1 accuracy with dropout disabled.

    In the shot-sampled backend every batch gets a sub-plan derived from
    (plan.seed, batch start), so results do not depend on how many batches
    the data is split into only through the pinned batch size.
    """
    if backend is not None:
        net.set_ht_backend(backend, plan)
    ds = dataset.subset(limit)
    correct = 0
    for start in range(0, len(ds), batch_size):
        stop = min(start + batch_size, len(ds))
        if backend == ht_layer.QUANTUM_SHOTS and plan is not None:
            net.set_ht_backend(backend, plan.with_seed(derive_seed(plan.seed, start)))
        logits = net.forward(ds.images[start:stop], training=False)
        correct += int((logits.argmax(axis=1) == ds.labels[start:stop]).sum())
    return correct / len(ds)


def evaluate_checkpoint(path, dataset: Dataset, batch_size: int = 256,
                        backend: str | None = None,
                        plan: MeasurementPlan | None = None,
                        limit: int | None = None) -> float:
    ckpt = load_checkpoint(path)
    net = ckpt.build_model()
    return evaluate(net, dataset, batch_size=batch_size, backend=backend,
                    plan=plan, limit=limit)


def train(config: TrainConfig, train_data: Dataset | None = None,
          test_data: Dataset | None = None, verbose: bool = True) -> TrainResult:
    """Run the full training protocol and keep the best-accuracy checkpoint."""
    if train_data is None:
        train_data = load_split(config, "train")
    if test_data is None:
        test_data = load_split(config, "test")

    spec = config.model_spec()
    net = spec.build(seed=derive_seed(config.seed, 1))
    optimizer = Adadelta(net.params(), rho=config.rho, eps=config.eps)
    shuffle_rng = np.random.Generator(np.random.Philox(derive_seed(config.seed, 2)))
    dropout_rng = np.random.Generator(np.random.Philox(derive_seed(config.seed, 4)))

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "best.ckpt"
    csv_path = out_dir / "metrics.csv"

    seeds = {"seed": config.seed, "rng_family": "philox"}
    lr = config.learning_rate
    best_acc, best_epoch = -1.0, -1
    metrics: list[dict] = []
    n = len(train_data)

    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_HEADER)
        for epoch in range(1, config.epochs + 1):
            t0 = time.perf_counter()
            order = shuffle_rng.permutation(n)
            losses = []
            for start in range(0, n, config.batch_size):
                idx = order[start:start + config.batch_size]
                x, y = train_data.images[idx], train_data.labels[idx]
                net.zero_grads()
                logits = net.forward(x, training=True, rng=dropout_rng)
                loss, grad = softmax_cross_entropy(logits, y)
                if not np.isfinite(loss):
                    raise RuntimeError(
                        f"training diverged: loss {loss} at epoch {epoch}, "
                        f"batch offset {start}"
                    )
                net.backward(grad.astype(logits.dtype))
                optimizer.step(lr)
                losses.append(loss)
            train_loss = float(np.mean(losses))
            test_acc = evaluate(net, test_data, batch_size=config.eval_batch_size)
            seconds = time.perf_counter() - t0
            row = {"epoch": epoch, "train_loss": train_loss,
                   "test_acc": test_acc, "seconds": seconds}
            metrics.append(row)
            writer.writerow([epoch, f"{train_loss:.6f}", f"{test_acc:.4f}",
                             f"{seconds:.2f}"])
            f.flush()
            if verbose:
                print(f"epoch {epoch:3d}  loss {train_loss:.4f}  "
                      f"test acc {test_acc * 100:.2f}%  ({seconds:.1f}s)")
            if test_acc > best_acc:
                best_acc, best_epoch = test_acc, epoch
                save_checkpoint(ckpt_path, spec, net.state_dict(), epoch=epoch,
                                metrics={"test_acc": test_acc, "train_loss": train_loss},
                                seeds=seeds)
            lr *= config.lr_decay

    return TrainResult(best_accuracy=best_acc, best_epoch=best_epoch,
                       metrics=metrics, checkpoint_path=ckpt_path,
                       metrics_path=csv_path)
