#!/usr/bin/env python3
"""Timing experiment: single-threaded map generation + full-coverage
stamp on a 2-triangle quad, across map resolutions.

Records mean/std per stage and the texel counters that witness the
2*W*H work bound. Results land in a JSON file next to the console
report so runs can be compared across machines.
"""

import argparse
import json
import platform
from pathlib import Path

import decalpaint as dp
from decalpaint.cli import run_bench

QUAD_OBJ = b"""\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
vn 0 0 1
f 1/1/1 2/2/1 3/3/1 4/4/1
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    parser.add_argument("--iterations", type=int, default=20)
    parser.add_argument("--warmup", type=int, default=3)
    parser.add_argument("--out", type=Path, default=Path("bench_results.json"))
    args = parser.parse_args()

    mesh = dp.parse_obj(QUAD_OBJ)
    results = []
    print(f"machine: {platform.processor() or platform.machine()}, single-threaded")
    for size in args.sizes:
        report = run_bench(mesh, size, args.iterations, args.warmup)
        results.append(report.to_dict())
        print(
            f"{size:5d}x{size:<5d} genmaps {report.genmaps_mean * 1e3:8.2f} "
            f"± {report.genmaps_std * 1e3:5.2f} ms   "
            f"stamp {report.stamp_mean * 1e3:8.2f} ± {report.stamp_std * 1e3:5.2f} ms   "
            f"visits<=2WH {report.within_bound}"
        )
    args.out.write_text(json.dumps(results, indent=2))
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
