"""Verify the bundled corpus and print a per-group summary.

Usage: python3 scripts/run_corpus.py [--workers N] [--samples N] [--json PATH]
"""

import argparse
import json
import os
import time
from collections import defaultdict

from fexpand.verify import bundled_corpus, verify_corpus


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, default=os.cpu_count())
    ap.add_argument("--samples", type=int, default=32)
    ap.add_argument("--json", help="also write the full summary here")
    ns = ap.parse_args()

    t0 = time.perf_counter()
    summary = verify_corpus(bundled_corpus(), workers=ns.workers, samples=ns.samples)
    dt = time.perf_counter() - t0

    groups = defaultdict(list)
    for r in summary.results:
        groups[r.fixture.group].append(r)
    for name, rs in groups.items():
        zero = sum(r.verdict == "zero" for r in rs)
        print(f"{name:28s} {zero:3d}/{len(rs):<3d}")
        for r in rs:
            if not r.ok or r.verdict != "zero":
                tag = "documented" if r.whitelisted else "FAIL"
                print(f"    {r.fixture.id:22s} {r.verdict} ({tag}) residual {r.residual or r.error}")
    total = len(summary.results)
    zero = sum(r.verdict == "zero" for r in summary.results)
    print(f"total: {zero}/{total} zero in {dt:.1f} s")
    if ns.json:
        with open(ns.json, "w") as fh:
            json.dump(summary.to_json(), fh, indent=2)
    return summary.exit_status


if __name__ == "__main__":
    raise SystemExit(main())
