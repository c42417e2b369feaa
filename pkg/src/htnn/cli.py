"""Command-line interface.

Subcommands: ``transform`` (1D/2D transforms under any backend), ``verify``
(property suites with nonzero exit on failure), ``count`` (parameter/MAC
tables), ``train`` / ``eval`` (the digit experiment), and ``bench``
(transform micro-benchmarks).

Exit codes: 0 success or all checks passed, 1 verification failure,
2 usage error, 3 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bench import benchmark_transforms
from .costs import TOY_CNN, TOY_HT_CNN, parse_layer_spec, toy_model_cost
from .data import default_data_dir, load_mnist_idx, resolve_split
from .hadamard import (
    SYMMETRIC,
    FOLDED_INVERSE,
    fht1d,
    fht2d,
    run_conv_theorem_trials,
    run_involution_trials,
)
from .quantum import EXACT, SAMPLED, MeasurementPlan, hybrid_ht, hybrid_ht2d, run_lemma1_trials
from .train import TrainConfig, evaluate_checkpoint, train as run_training
from .validation import is_power_of_two

EXIT_VERIFY_FAILED = 1
EXIT_IO = 3

MODE_CLASSICAL = "classical"
MODE_QUANTUM_EXACT = "quantum-exact"
MODE_QUANTUM_SHOTS = "quantum-shots"


@click.group()
@click.version_option(version=__version__, prog_name="htnn")
def main():
    """Hadamard-transform neural network toolkit."""


def _load_numbers(path: Path, want_2d: bool) -> np.ndarray:
    try:
        rows = []
        for line in path.read_text().strip().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.replace(",", " ").split()])
    except OSError as e:
        click.echo(f"cannot read {path}: {e}", err=True)
        sys.exit(EXIT_IO)
    except ValueError as e:
        raise click.UsageError(f"{path} is not numeric CSV: {e}") from e
    if not rows:
        raise click.UsageError(f"{path} contains no data")
    if want_2d:
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise click.UsageError(f"{path}: ragged rows in matrix input")
        return np.array(rows)
    return np.array([v for r in rows for v in r])


def _pad_pow2(a: np.ndarray) -> np.ndarray:
    def up(n):
        m = 1
        while m < n:
            m *= 2
        return m

    if a.ndim == 1:
        return np.pad(a, (0, up(a.shape[0]) - a.shape[0]))
    return np.pad(a, ((0, up(a.shape[0]) - a.shape[0]), (0, up(a.shape[1]) - a.shape[1])))


def _format_csv(a: np.ndarray) -> str:
    if a.ndim == 1:
        return ",".join(f"{v:.12g}" for v in a)
    return "\n".join(",".join(f"{v:.12g}" for v in row) for row in a)


@main.command()
@click.option("--input", "input_file", type=click.Path(path_type=Path),
              help="CSV file with the vector (one line) or matrix (one row per line).")
@click.option("--random", "random_n", type=int,
              help="Use a random standard-normal input of this size instead of a file.")
@click.option("--mode", type=click.Choice([MODE_CLASSICAL, MODE_QUANTUM_EXACT,
                                           MODE_QUANTUM_SHOTS]), default=MODE_CLASSICAL)
@click.option("--shots", type=int, default=None,
              help="Shot count (quantum-shots mode only).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--2d", "two_d", is_flag=True, help="Treat the input as a 2D matrix.")
@click.option("--pad", is_flag=True, help="Zero-pad to the next power-of-two size.")
@click.option("--convention", type=click.Choice([SYMMETRIC, FOLDED_INVERSE]),
              default=SYMMETRIC, show_default=True,
              help="Normalization for classical mode (quantum modes are symmetric).")
@click.option("--epsilon", type=float, default=None,
              help="Positivity offset for the hybrid modes (default: relative).")
@click.option("--output", type=click.Path(path_type=Path),
              help="Write the CSV result here instead of stdout.")
def transform(input_file, random_n, mode, shots, seed, two_d, pad, convention,
              epsilon, output):
    """Hadamard-transform a vector or matrix."""
    if (input_file is None) == (random_n is None):
        raise click.UsageError("provide exactly one of --input or --random")
    if shots is not None and mode != MODE_QUANTUM_SHOTS:
        raise click.UsageError("--shots only applies to --mode quantum-shots")
    if mode == MODE_QUANTUM_SHOTS:
        if not shots or shots <= 0:
            raise click.UsageError("quantum-shots mode needs a positive --shots")
        plan = MeasurementPlan(SAMPLED, shots=shots, seed=seed)
    else:
        plan = MeasurementPlan(EXACT)

    if input_file is not None:
        a = _load_numbers(input_file, two_d)
    else:
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((random_n, random_n) if two_d else random_n)

    sizes = a.shape
    if not all(is_power_of_two(s) for s in sizes):
        if not pad:
            raise click.UsageError(
                f"input size {sizes} is not a power of two; use --pad to zero-pad"
            )
        a = _pad_pow2(a)

    report = None
    if mode == MODE_CLASSICAL:
        if epsilon is not None:
            raise click.UsageError("--epsilon only applies to the quantum modes")
        result = fht2d(a, convention) if two_d else fht1d(a, convention)
    elif two_d:
        result = hybrid_ht2d(a, epsilon=epsilon, plan=plan)
    else:
        rep = hybrid_ht(a, epsilon=epsilon, plan=plan)
        result = rep.result
        report = f"# b={rep.b:.12g} c={rep.c:.12g} delta={rep.delta:.12g}"

    text = _format_csv(result)
    if output:
        try:
            output.write_text(text + "\n")
        except OSError as e:
            click.echo(f"cannot write {output}: {e}", err=True)
            sys.exit(EXIT_IO)
    else:
        click.echo(text)
    if report:
        click.echo(report, err=True)


@main.command()
@click.option("--theorem", type=click.Choice(["conv", "lemma1", "involution"]),
              required=True)
@click.option("--n", "max_n", type=int, default=None,
              help="Largest (conv/involution) or fixed (lemma1) transform size.")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--tol", type=float, default=None,
              help="Tolerance (defaults: conv 1e-10, involution 1e-12).")
@click.option("--seed", type=int, default=0, show_default=True)
def verify(theorem, max_n, trials, tol, seed):
    """Run a property suite; exit 0 iff every trial passes."""
    if theorem == "conv":
        report = run_conv_theorem_trials(max_n=max_n or 256, trials=trials,
                                         tol=tol if tol is not None else 1e-10,
                                         seed=seed)
    elif theorem == "involution":
        report = run_involution_trials(max_n=max_n or 4096, trials=trials,
                                       tol=tol if tol is not None else 1e-12,
                                       seed=seed)
    else:
        report = run_lemma1_trials(n=max_n or 64, trials=trials, seed=seed)
    click.echo(json.dumps(report, sort_keys=True))
    if not report["ok"]:
        sys.exit(EXIT_VERIFY_FAILED)


@main.command()
@click.option("--arch", type=click.Choice([TOY_CNN, TOY_HT_CNN]), default=None)
@click.option("--paths", type=int, default=3, show_default=True)
@click.option("--layer", "layer_spec", type=str, default=None,
              help="Single-layer spec: conv:K,C,N or htp:P,C,N (bias-free).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def count(arch, paths, layer_spec, as_json):
    """Parameter and MAC accounting for a model or a single layer."""
    if (arch is None) == (layer_spec is None):
        raise click.UsageError("provide exactly one of --arch or --layer")
    if arch:
        report = toy_model_cost(arch, paths=paths).to_dict()
    else:
        cost = parse_layer_spec(layer_spec)
        report = {"params": cost.params, "macs": cost.macs,
                  "breakdown": [{"name": cost.name, "params": cost.params,
                                 "macs": cost.macs, **cost.detail}]}
    if as_json:
        click.echo(json.dumps(report, sort_keys=True))
        return
    click.echo(f"{'layer':<24} {'params':>12} {'macs':>14}")
    for row in report["breakdown"]:
        click.echo(f"{row['name']:<24} {row['params']:>12,} {row['macs']:>14,}")
    click.echo(f"{'total':<24} {report['params']:>12,} {report['macs']:>14,}")


@main.command(name="train")
@click.option("--config", "config_file", type=click.Path(path_type=Path), required=True)
@click.option("--data", "data_dir", type=click.Path(path_type=Path), default=None,
              help="Dataset directory (default: config value or $HT_DATA_DIR).")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Override the config output directory.")
def train_cmd(config_file, data_dir, out_dir):
    """Train per a JSON config; writes the best checkpoint and a metrics CSV."""
    try:
        config = TrainConfig.from_file(config_file)
    except OSError as e:
        click.echo(f"cannot read config: {e}", err=True)
        sys.exit(EXIT_IO)
    except (ValueError, TypeError) as e:
        raise click.UsageError(f"bad config: {e}") from e
    if data_dir is not None:
        config.data_dir = str(data_dir)
    if out_dir is not None:
        config.output_dir = str(out_dir)
    try:
        result = run_training(config)
    except FileNotFoundError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_IO)
    except RuntimeError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_VERIFY_FAILED)
    click.echo(f"best test accuracy {result.best_accuracy * 100:.2f}% "
               f"(epoch {result.best_epoch}); checkpoint: {result.checkpoint_path}")


@main.command(name="eval")
@click.option("--checkpoint", "ckpt", type=click.Path(path_type=Path), required=True)
@click.option("--data", "data_dir", type=click.Path(path_type=Path), default=None)
@click.option("--split", type=click.Choice(["train", "test"]), default="test",
              show_default=True)
@click.option("--backend", type=click.Choice([MODE_CLASSICAL, MODE_QUANTUM_EXACT,
                                              MODE_QUANTUM_SHOTS]), default=None,
              help="Override the transform backend for evaluation.")
@click.option("--shots", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--limit", type=int, default=None, help="Evaluate only the first N samples.")
@click.option("--batch-size", type=int, default=256, show_default=True)
def eval_cmd(ckpt, data_dir, split, backend, shots, seed, limit, batch_size):
    """Evaluate a checkpoint on a dataset split."""
    data_dir = data_dir or default_data_dir()
    if data_dir is None:
        click.echo("no dataset directory: pass --data or set HT_DATA_DIR", err=True)
        sys.exit(EXIT_IO)
    plan = None
    if backend == MODE_QUANTUM_SHOTS:
        plan = MeasurementPlan(SAMPLED, shots=shots, seed=seed)
    try:
        images, labels = resolve_split(data_dir, split)
        dataset = load_mnist_idx(images, labels)
        acc = evaluate_checkpoint(ckpt, dataset, batch_size=batch_size,
                                  backend=backend, plan=plan, limit=limit)
    except FileNotFoundError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_IO)
    except ValueError as e:
        # bad magic, wrong version, or weights that do not fit the model
        raise click.UsageError(str(e)) from e
    n = limit if limit is not None else len(dataset)
    click.echo(f"accuracy {acc * 100:.2f}% on {min(n, len(dataset))} {split} samples")


@main.command()
@click.option("--sizes", default="64,256,1024", show_default=True,
              help="Comma-separated transform sizes.")
@click.option("--reps", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def bench(sizes, reps, seed, as_json):
    """Time naive vs fast vs hybrid-exact transforms (median ns/op)."""
    try:
        size_list = [int(s) for s in sizes.split(",") if s]
    except ValueError:
        raise click.UsageError(f"bad --sizes {sizes!r}") from None
    for n in size_list:
        if not is_power_of_two(n):
            raise click.UsageError(f"size {n} is not a power of two")
    rows = benchmark_transforms(size_list, reps=reps, seed=seed)
    if as_json:
        click.echo(json.dumps(rows))
        return
    click.echo(f"{'n':>6} {'naive ns':>12} {'fht ns':>12} {'hybrid ns':>12}")
    for r in rows:
        click.echo(f"{r['n']:>6} {r['naive_ns']:>12.0f} {r['fht_ns']:>12.0f} "
                   f"{r['hybrid_exact_ns']:>12.0f}")


if __name__ == "__main__":
    main()
