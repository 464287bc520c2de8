#!/usr/bin/env python3
"""Convert the digits bundled in the npm `mnist` package (v1.1.0) to gzipped IDX files.

Usage:
    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 scripts/mnist_from_npm.py package/dist/mnist.js data/mnist10k

The bundle holds 10,000 MNIST digits (28x28, grey levels in [0,1] with three
decimals), grouped by class. Samples are interleaved with a fixed permutation
so that any prefix is roughly class balanced.
"""
import gzip
import json
import re
import struct
import sys

import numpy as np


def main(bundle, out_dir):
    text = open(bundle).read()
    blocks = re.findall(r'(\d+):\[function\(require,module,exports\)\{\nmodule\.exports=(\{ "data": \[[^\]]*\]\s*\})', text)
    images, labels = [], []
    for module_id, body in blocks:
        digit = int(module_id) - 1
        data = np.asarray(json.loads(body)["data"], dtype=np.float64)
        rows = data.reshape(-1, 784)
        images.append(np.rint(rows * 255.0).astype(np.uint8))
        labels.append(np.full(rows.shape[0], digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(0).permutation(len(labels))
    images, labels = images[order], labels[order]
    n = len(labels)
    with gzip.GzipFile(f"{out_dir}/images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        f.write(images.tobytes())
    with gzip.GzipFile(f"{out_dir}/labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels.tobytes())
    print(n, "samples;", "class counts", np.bincount(labels).tolist())


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
