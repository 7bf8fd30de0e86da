#!/usr/bin/env python3
"""Build data/mnist-10k-bin.bin from the digit files of the npm `mnist` package.

Usage: npm pack mnist && tar xzf mnist-*.tgz
       python3 scripts/prepare_mnist_subset.py package/src/digits data/mnist-10k-bin.bin

Each record is 99 bytes: one label byte followed by the 784 pixels binarized at
pixel > 75, packed LSB-first into 98 bytes. Records are shuffled with a fixed seed.
"""
import json
import sys

import numpy as np


def main(src, dst):
    images, labels = [], []
    for digit in range(10):
        with open(f"{src}/{digit}.json") as fh:
            flat = np.array(json.load(fh)["data"], dtype=np.float64)
        pixels = np.rint(flat.reshape(-1, 784) * 255.0)
        images.append(pixels > 75)
        labels += [digit] * len(pixels)
    images = np.vstack(images).astype(np.uint8)
    labels = np.array(labels, dtype=np.uint8)
    order = np.random.default_rng(20240101).permutation(len(labels))
    packed = np.packbits(images[order], axis=1, bitorder="little")
    with open(dst, "wb") as out:
        for label, row in zip(labels[order], packed):
            out.write(bytes([label]))
            out.write(row.tobytes())


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
