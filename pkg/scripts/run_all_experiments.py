#!/usr/bin/env python3
"""Run the five built-in experiments and print a summary table."""

import argparse
import sys
from pathlib import Path

try:
    from crossfuzzy.harness import EXPERIMENT_NAMES, default_config, run_experiment
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from crossfuzzy.harness import EXPERIMENT_NAMES, default_config, run_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-root", default="results", help="directory for per-run folders")
    args = parser.parse_args()

    rows = []
    for name in EXPERIMENT_NAMES:
        cfg = default_config(name, output_dir=str(Path(args.output_root) / name))
        result = run_experiment(name, cfg)
        rows.append(result)
        print(f"{name}: mse={result.mse:.4f}  ({result.runtime_s:.1f}s)")

    print()
    print(f"{'experiment':<20} {'mse':>8} {'n_train':>8} {'saturated':>10} {'flagged':>8} {'time/s':>7}")
    for r in rows:
        print(
            f"{r.name:<20} {r.mse:>8.4f} {r.n_train:>8d} {r.saturation_count:>10d} "
            f"{len(r.flagged_points):>8d} {r.runtime_s:>7.1f}"
        )
    print(f"\nresults written under {args.output_root}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
