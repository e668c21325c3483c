"""Compare the numba and numpy pair-similarity kernels.

Builds a random sparse weight matrix shaped like a mid-sized revision pair
(a few thousand entities, tens of tokens each), checks that both backends
agree bit for bit, then times each one.

    python3 benchmarks/bench_kernels.py --entities 4000 --pairs 200000
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from refdetect import _kernels


def random_csr(rng: np.random.Generator, n_rows: int, vocab: int, mean_len: int):
    lengths = rng.poisson(mean_len, n_rows).clip(0, vocab)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    ids = np.concatenate([np.sort(rng.choice(vocab, k, replace=False)) for k in lengths]).astype(np.int64)
    weights = rng.integers(1, 6, len(ids)) * rng.uniform(0.1, 3.0, len(ids))
    return indptr, ids, weights


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entities", type=int, default=4000)
    ap.add_argument("--vocab", type=int, default=3000)
    ap.add_argument("--tokens", type=int, default=40, help="mean distinct tokens per entity")
    ap.add_argument("--pairs", type=int, default=100_000)
    ap.add_argument("--numpy-pairs", type=int, default=5_000, help="pairs timed on the slow numpy path")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    indptr, ids, weights = random_csr(rng, args.entities, args.vocab, args.tokens)
    left = rng.integers(0, args.entities, args.pairs).astype(np.int64)
    right = rng.integers(0, args.entities, args.pairs).astype(np.int64)
    k = min(args.numpy_pairs, args.pairs)

    t_np = best_of(lambda: _kernels.pair_stats_numpy(indptr, ids, weights, left[:k], right[:k]), args.repeat)
    print(f"numpy : {k:>8} pairs  {t_np * 1e3:9.1f} ms  {t_np / k * 1e6:8.2f} us/pair")

    nb = _kernels.pair_stats_numba
    if nb is None:
        print("numba : unavailable (not installed or disabled by REFDETECT_DISABLE_NUMBA)")
        return 0
    t0 = time.perf_counter()
    got = nb(indptr, ids, weights, left[:k], right[:k])
    print(f"numba : first call incl. compile/cache load {(time.perf_counter() - t0) * 1e3:.1f} ms")
    ref = _kernels.pair_stats_numpy(indptr, ids, weights, left[:k], right[:k])
    identical = all(np.array_equal(a, b) for a, b in zip(got, ref))
    print(f"numba vs numpy bit-identical on {k} pairs: {identical}")

    t_nb = best_of(lambda: nb(indptr, ids, weights, left, right), args.repeat)
    per = t_nb / args.pairs
    print(f"numba : {args.pairs:>8} pairs  {t_nb * 1e3:9.1f} ms  {per * 1e6:8.2f} us/pair")
    print(f"speedup: {t_np / k / per:.1f}x per pair")
    return 0 if identical else 1


if __name__ == "__main__":
    raise SystemExit(main())
