"""Run every check suite on every built-in cell for k = 0..3 and print a summary table.

    python3 scripts/check_all.py [--degrees 0..3] [--jobs 4] [--out report.md]
"""

import argparse
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor

from ddr.cli import parse_degrees
from ddr.geometry import load_cell
from ddr.shapes import SHAPES, shape_document
from ddr.verify import SUITES, TABLE_SHAPES, VerifyConfig, run_suites, to_markdown


def run(task):
    name, k = task
    t0 = time.perf_counter()
    res = run_suites(load_cell(shape_document(name)), k, SUITES, VerifyConfig(),
                     name if name in TABLE_SHAPES else None)
    return name, k, res, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degrees", type=parse_degrees, default=parse_degrees("0..3"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", help="write the full markdown report here")
    args = ap.parse_args()

    tasks = [(name, k) for name in SHAPES for k in args.degrees]
    with ProcessPoolExecutor(args.jobs) as ex:
        out = list(ex.map(run, tasks))

    per = defaultdict(lambda: [0, 0, 0.0])
    everything = []
    print(f"{'cell':<10} {'k':>2} {'passed':>8} {'checks':>7} {'time (s)':>9}")
    for name, k, res, dt in out:
        everything += res
        n_pass = sum(r.passed for r in res)
        print(f"{name:<10} {k:>2} {n_pass:>8} {len(res):>7} {dt:>9.2f}")
        per[name][0] += n_pass
        per[name][1] += len(res)
        per[name][2] += dt
    total = sum(v[1] for v in per.values())
    passed = sum(v[0] for v in per.values())
    print(f"\n{passed}/{total} checks passed")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(to_markdown(everything))
    raise SystemExit(0 if passed == total else 1)


if __name__ == "__main__":
    main()
