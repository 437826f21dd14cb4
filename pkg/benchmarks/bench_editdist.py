"""Benchmark the edit-distance kernels against each other.

Typosquat scanning computes one distance per (candidate, popular-name)
pair, so throughput here bounds how large a popular list the metadata
stage can afford. Run:

    python3 benchmarks/bench_editdist.py [--pairs N] [--seed S]
"""

import argparse
import random
import string
import time

from pkgvet.distance._fallback import edit_distance as pure_distance

try:
    from pkgvet.distance._speedups import edit_distance as fast_distance
except ImportError:
    fast_distance = None


def make_pairs(n, seed):
    rng = random.Random(seed)
    alphabet = string.ascii_lowercase + "-_"

    def name():
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(3, 24)))

    pairs = []
    for _ in range(n):
        a = name()
        if rng.random() < 0.5:
            # near-miss: mutate a into a plausible squat
            chars = list(a)
            i = rng.randrange(len(chars))
            op = rng.random()
            if op < 0.4:
                chars[i] = rng.choice(alphabet)
            elif op < 0.7 and len(chars) > 1:
                del chars[i]
            elif i + 1 < len(chars):
                chars[i], chars[i + 1] = chars[i + 1], chars[i]
            b = "".join(chars)
        else:
            b = name()
        pairs.append((a, b))
    return pairs


def run(fn, pairs):
    started = time.perf_counter()
    total = 0
    for a, b in pairs:
        total += fn(a, b)
    elapsed = time.perf_counter() - started
    return elapsed, total


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    pairs = make_pairs(args.pairs, args.seed)

    pure_time, pure_sum = run(pure_distance, pairs)
    print(f"pure python : {args.pairs / pure_time:>12,.0f} pairs/s  ({pure_time:.3f}s)")

    if fast_distance is None:
        print("compiled    : not built (pip install -e . rebuilds it)")
        return

    fast_time, fast_sum = run(fast_distance, pairs)
    print(f"compiled    : {args.pairs / fast_time:>12,.0f} pairs/s  ({fast_time:.3f}s)")
    if fast_sum != pure_sum:
        raise SystemExit("kernels disagree; benchmark aborted")
    print(f"speedup     : {pure_time / fast_time:.1f}x  (identical results on all pairs)")


if __name__ == "__main__":
    main()
