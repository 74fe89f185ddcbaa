#!/usr/bin/env python3
"""Consistency-protocol sweep: mean PSNR between the reference and the
pooled-down reconstruction across scales, in double and single precision.

Example:
    python scripts/run_table1.py --count 100 --size 256 --scales 2 4 8 16
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rangenull.cli import run_table1  # noqa: E402


@dataclass(frozen=True)
class SweepConfig:
    count: int
    size: int
    scales: tuple[int, ...]
    seed: int
    workers: int


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", default=100, type=int)
    parser.add_argument("--size", default=256, type=int)
    parser.add_argument("--scales", default=[2, 4, 8, 16], type=int, nargs="+")
    parser.add_argument("--seed", default=0, type=int)
    parser.add_argument("--workers", default=1, type=int)
    parser.add_argument("--json", action="store_true", help="emit one JSON object per scale")
    args = parser.parse_args()
    cfg = SweepConfig(args.count, args.size, tuple(args.scales), args.seed, args.workers)

    if not args.json:
        print(f"# consistency protocol: count={cfg.count} size={cfg.size} seed={cfg.seed}")
        print(f"{'scale':>5} {'psnr(f64)':>10} {'max_abs(f64)':>13} {'psnr(f32)':>10} {'ms/image':>9}")
    for scale in cfg.scales:
        summary = run_table1(cfg.count, cfg.size, scale, cfg.seed, cfg.workers)
        if args.json:
            print(json.dumps(summary))
        else:
            print(
                f"{scale:>5} {summary['mean_psnr']:>10.2f} {summary['mean_max_abs']:>13.3e} "
                f"{summary['mean_psnr_float32']:>10.2f} {summary['mean_time_ms']:>9.3f}"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
