#!/usr/bin/env python3
"""Build the desk-scale MNIST IDX files shipped under data/mnist-desk/.

Source: the `mnist` npm package (MIT), which bundles 10,000 MNIST digits as
JSON arrays of 784 intensities in [0, 1]. Intensities are scaled back to
bytes, each class is shuffled with a fixed seed and split in half into a
training pool and a test pool, and both pools are written as gzipped IDX
files with the standard magic numbers.

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/mnist_from_npm.py package/src/digits data/mnist-desk
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path


def write_idx(path, magic, dims, payload):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(payload)


def main(src, dst):
    src, dst = Path(src), Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240229)
    pools = {"train": [], "test": []}
    for digit in range(10):
        data = json.loads((src / f"{digit}.json").read_text())["data"]
        images = [data[i:i + 784] for i in range(0, len(data), 784)]
        rng.shuffle(images)
        half = len(images) // 2
        pools["train"] += [(img, digit) for img in images[:half]]
        pools["test"] += [(img, digit) for img in images[half:]]
    for name, pool in pools.items():
        rng.shuffle(pool)
        pixels = bytes(
            min(255, max(0, round(v * 255))) for img, _ in pool for v in img
        )
        labels = bytes(label for _, label in pool)
        prefix = "train" if name == "train" else "t10k"
        write_idx(dst / f"{prefix}-images-idx3-ubyte.gz", 0x803, [len(pool), 28, 28], pixels)
        write_idx(dst / f"{prefix}-labels-idx1-ubyte.gz", 0x801, [len(pool)], labels)
        print(f"{name}: {len(pool)} samples")


if __name__ == "__main__":
    main(*sys.argv[1:3])
