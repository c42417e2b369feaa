#!/usr/bin/env python3
"""Build the bundled MNIST subset (data/mnist-subset) in IDX format.

Source: the ``mnist`` npm package (MIT), which embeds 1001 images per digit
class from the MNIST training set as flattened [0, 1] floats. Pixels are
exact x/255 values, so rounding recovers the original uint8 bytes.

Usage: make_mnist_subset.py <npm-mnist-package-dir>/src/digits <output-dir>

The subset is stratified: per class the last ~10% of images form the test
split (9001 train / 999 test in total), then each split is shuffled with a
fixed seed. File names mirror the official layout so the loaders work
unchanged.
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from htnn.data import write_idx_images, write_idx_labels  # noqa: E402

TEST_FRACTION = 0.1
SEED = 20230701


def main(digits_dir: Path, out_dir: Path):
    train_x, train_y, test_x, test_y = [], [], [], []
    for digit in range(10):
        flat = np.array(json.loads((digits_dir / f"{digit}.json").read_text())["data"])
        images = np.rint(flat.reshape(-1, 28, 28) * 255.0).astype(np.uint8)
        n_train = images.shape[0] - round(images.shape[0] * TEST_FRACTION)
        train_x.append(images[:n_train])
        test_x.append(images[n_train:])
        train_y.append(np.full(n_train, digit, dtype=np.uint8))
        test_y.append(np.full(images.shape[0] - n_train, digit, dtype=np.uint8))

    rng = np.random.default_rng(SEED)
    out_dir.mkdir(parents=True, exist_ok=True)
    for prefix, xs, ys in (("train", train_x, train_y), ("t10k", test_x, test_y)):
        x = np.concatenate(xs)
        y = np.concatenate(ys)
        order = rng.permutation(x.shape[0])
        write_idx_images(out_dir / f"{prefix}-images-idx3-ubyte.gz", x[order])
        write_idx_labels(out_dir / f"{prefix}-labels-idx1-ubyte.gz", y[order])
        print(f"{prefix}: {x.shape[0]} images -> {out_dir}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(Path(sys.argv[1]), Path(sys.argv[2]))
