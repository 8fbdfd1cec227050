#!/usr/bin/env python3
"""Run every suite at a configurable scale and write JSON + text reports.

Example:
    python3 scripts/full_report.py --seed 20250809 --instances 25 --out reports/
"""

import argparse
import os
import sys
import time

from ksgnslab.harness import SizeCaps, SuiteConfig, report_emit, run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20250809)
    parser.add_argument("--instances", type=int, default=10)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default="reports")
    args = parser.parse_args()

    config = SuiteConfig(
        seed=args.seed,
        caps=SizeCaps(instances_per_suite=args.instances),
        jobs=args.jobs,
    )
    start = time.perf_counter()
    report = run(config)
    elapsed = time.perf_counter() - start

    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, f"report_seed{args.seed}.json")
    text_path = os.path.join(args.out, f"report_seed{args.seed}.txt")
    with open(json_path, "w") as fh:
        fh.write(report_emit(report, "json"))
    with open(text_path, "w") as fh:
        fh.write(report_emit(report, "text"))

    print(f"{report.total} checks, {report.passed} passed, "
          f"max residual {report.max_residual:.3e}, {elapsed:.1f}s")
    print(f"wrote {json_path} and {text_path}")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
