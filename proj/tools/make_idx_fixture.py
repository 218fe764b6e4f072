#!/usr/bin/env python3
"""Write a tiny two-image 3x2 IDX fixture with known bytes (used by the IDX tests)."""
import struct
import sys

PIXELS = [
    [0, 255, 128, 1, 254, 64],
    [10, 20, 30, 40, 50, 255],
]
LABELS = [7, 3]


def main() -> int:
    prefix = sys.argv[1] if len(sys.argv) > 1 else "tiny"
    with open(prefix + "-images-idx3-ubyte", "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, len(PIXELS), 3, 2))
        for img in PIXELS:
            fh.write(bytes(img))
    with open(prefix + "-labels-idx1-ubyte", "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, len(LABELS)))
        fh.write(bytes(LABELS))
    return 0


if __name__ == "__main__":
    sys.exit(main())
