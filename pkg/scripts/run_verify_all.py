#!/usr/bin/env python3
"""Run the full verification suite and write a JSON report.

Usage: python scripts/run_verify_all.py [--seed N] [--out report.json]
"""

import argparse
import json
import sys

from graphqft import acceptance


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="verify_report.json")
    args = ap.parse_args()

    results = acceptance.run_all(seed=args.seed)
    report = {
        "seed": args.seed,
        "passed": all(r.passed for r in results),
        "criteria": [
            {"index": r.index, "name": r.name, "passed": r.passed, "elapsed": r.elapsed}
            for r in results
        ],
    }
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"wrote {args.out}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
