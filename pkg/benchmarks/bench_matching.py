#!/usr/bin/env python3
"""Benchmark the compiled mapping-search kernel against its pure-Python twin.

Both implementations are imported explicitly (ignoring the import-time
dispatch), run on identical problem encodings, and checked for bit-identical
results — matched count and mapping — before any timing is reported.

Usage: python3 benchmarks/bench_matching.py [--problems N] [--seed S]
"""
import argparse
import random
import sys
import time

from drskit.metrics import _matchcore_py
from drskit.metrics.matching import build_clause_problem
from drskit.testing import random_clause_pair

try:
    from drskit.metrics import _matchcore
except ImportError:
    _matchcore = None


def make_problems(count, seed, max_entities):
    rng = random.Random(seed)
    problems = []
    while len(problems) < count:
        pred, gold = random_clause_pair(rng, max_boxes=2,
                                        max_entities=max_entities,
                                        max_extra=2 * max_entities)
        p = build_clause_problem(pred, gold)
        if p.n_pred:
            problems.append(p)
    return problems


def run(impl, problems, seed, restarts, use_exact):
    started = time.perf_counter()
    results = [
        impl.solve(p.n_pred, p.n_gold, p.pair_offsets, p.pair_pred,
                   p.pair_gold, p.cand_offsets, p.cand_gold,
                   seed, restarts, use_exact)
        for p in problems
    ]
    return time.perf_counter() - started, results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", type=int, default=300,
                    help="problems per configuration (default: 300)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--restarts", type=int, default=4)
    args = ap.parse_args(argv)

    if _matchcore is None:
        print("compiled kernel not built; nothing to compare "
              "(pip install -e . builds it)", file=sys.stderr)
        return 1

    configs = [
        ("exact, <=5 vars", 3, True),
        ("hill,  <=5 vars", 3, False),
        ("hill,  <=9 vars", 7, False),
        ("hill, <=13 vars", 11, False),
    ]

    rows = [("configuration", "problems", "pure (s)", "compiled (s)", "speedup")]
    for label, max_entities, use_exact in configs:
        problems = make_problems(args.problems, args.seed, max_entities)
        pure_t, pure_r = run(_matchcore_py, problems, args.seed,
                             args.restarts, use_exact)
        comp_t, comp_r = run(_matchcore, problems, args.seed,
                             args.restarts, use_exact)
        for i, (a, b) in enumerate(zip(pure_r, comp_r)):
            if a[0] != b[0] or list(a[1]) != list(b[1]):
                print(f"MISMATCH on problem {i} ({label}): {a} vs {b}",
                      file=sys.stderr)
                return 1
        rows.append((label, str(len(problems)), f"{pure_t:.3f}",
                     f"{comp_t:.3f}", f"{pure_t / comp_t:.1f}x"))

    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    for r in rows:
        print("  ".join(cell.rjust(w) if c else cell.ljust(w)
                        for c, (cell, w) in enumerate(zip(r, widths))))
    print("\nresults identical across kernels for every problem")
    return 0


if __name__ == "__main__":
    sys.exit(main())
