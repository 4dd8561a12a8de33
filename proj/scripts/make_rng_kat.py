#!/usr/bin/env python3
"""One-time generator for data/philox_kat.csv.

Known-answer vectors for the Philox4x64-10 block cipher underlying the
counter-based path RNG, produced by numpy.random.Philox (same algorithm).
Each row: key0,key1,ctr0,ctr1,ctr2,ctr3,out0,out1,out2,out3 (all u64, hex).

Usage: python3 scripts/make_rng_kat.py [out.csv]
"""
import sys
import numpy as np

CASES = [
    # (key, counter)
    ((0, 0), (0, 0, 0, 0)),
    ((0xDEADBEEF, 0), (1, 0, 0, 0)),
    ((0x9E3779B97F4A7C15, 0xBB67AE8584CAA73B), (0, 0, 0, 0)),
    ((1, 2), (3, 4, 5, 6)),
    ((0xFFFFFFFFFFFFFFFF, 0xFFFFFFFFFFFFFFFF),
     (0xFFFFFFFFFFFFFFFF, 0xFFFFFFFFFFFFFFFF,
      0xFFFFFFFFFFFFFFFF, 0xFFFFFFFFFFFFFFFF)),
    ((0x243F6A8885A308D3, 0x13198A2E03707344),
     (0xA4093822299F31D0, 0x082EFA98EC4E6C89,
      0x452821E638D01377, 0xBE5466CF34E90C6C)),
]


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/philox_kat.csv"
    lines = ["key0,key1,ctr0,ctr1,ctr2,ctr3,out0,out1,out2,out3"]
    for key, ctr in CASES:
        bg = np.random.Philox(counter=np.array(ctr, dtype=np.uint64),
                              key=np.array(key, dtype=np.uint64))
        words = bg.random_raw(4)
        row = [f"{v:016x}" for v in (*key, *ctr, *(int(w) for w in words))]
        lines.append(",".join(row))
        print(lines[-1])
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(CASES)} vectors)")


if __name__ == "__main__":
    main()
