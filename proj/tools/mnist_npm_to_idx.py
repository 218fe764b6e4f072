#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the `mnist` npm package into IDX.

The npm package stores each image as 784 floats equal to byte/255 rounded to
three decimals, so round(v * 255) recovers the original byte exactly.

usage: mnist_npm_to_idx.py <package/src/digits> <out-prefix> [digit ...]
"""
import json
import os
import struct
import sys


def main() -> int:
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    src, prefix = sys.argv[1], sys.argv[2]
    digits = [int(d) for d in sys.argv[3:]] or list(range(10))
    images, labels = bytearray(), bytearray()
    count = 0
    for d in digits:
        with open(os.path.join(src, f"{d}.json")) as fh:
            data = json.load(fh)["data"]
        assert len(data) % 784 == 0
        images += bytes(int(round(v * 255)) for v in data)
        n = len(data) // 784
        labels += bytes([d]) * n
        count += n
    with open(prefix + "-images-idx3-ubyte", "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, count, 28, 28))
        fh.write(images)
    with open(prefix + "-labels-idx1-ubyte", "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, count))
        fh.write(labels)
    print(f"wrote {count} images to {prefix}-*-ubyte")
    return 0


if __name__ == "__main__":
    sys.exit(main())
