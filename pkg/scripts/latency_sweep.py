#!/usr/bin/env python3
"""Latency and speedup sweep over fuzzed designs.

Buckets random specs by operand count and DFG depth, then tabulates the
done-cycle formula next to the estimated software baseline so the effect
of operand loading versus computation depth is easy to read off.
"""

import argparse
import random
from collections import defaultdict

from cigen.fuzz import FuzzConfig, random_spec
from cigen.mapper import map_design
from cigen.metrics import estimate_metrics


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--specs", type=int, default=400)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-inputs", type=int, default=8)
    parser.add_argument("--max-depth", type=int, default=5)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    config = FuzzConfig(max_inputs=args.max_inputs, max_depth=args.max_depth)
    buckets: dict[tuple[int, int], list] = defaultdict(list)

    for index in range(args.specs):
        spec = random_spec(rng, f"sw{index}", config)
        mapped = map_design(spec)
        report = estimate_metrics(spec, mapped)
        buckets[(report.operands, report.levels)].append(report)

    print(f"{'operands':>8} {'levels':>6} {'n':>4} {'load':>4} "
          f"{'done':>4} {'ci':>4} {'sw(avg)':>8} {'speedup(avg)':>12}")
    for (operands, levels), reports in sorted(buckets.items()):
        load = reports[0].load_cycles
        done = reports[0].done_cycle
        ci = reports[0].ci_cycles
        sw = sum(r.sw_cycles for r in reports) / len(reports)
        speedup = sum(r.speedup_estimate for r in reports) / len(reports)
        print(f"{operands:>8} {levels:>6} {len(reports):>4} {load:>4} "
              f"{done:>4} {ci:>4} {sw:>8.1f} {speedup:>12.2f}")


if __name__ == "__main__":
    main()
