"""Compare the compiled kernels against the pure-Python/numpy fallback.

Run from the repository root after an editable install:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --rows 20000 --pairs 500

Both implementations are run on identical inputs; results are asserted
equal before any timing is reported, so a speedup line is also an
agreement check.
"""

import argparse
import time

import numpy as np

from flowlens.kernels import pykernels

try:
    from flowlens.kernels import _ckernels
except ImportError:
    _ckernels = None


def unit_rows(rng, n, dim, clusters):
    """Rows grouped around `clusters` directions, like a deduped corpus.

    Uniform random unit vectors in high dimension are near-orthogonal, so
    every row would found its own cluster; real corpora repeat a limited
    set of line shapes, which is what the kernel's cost profile depends on.
    """
    centers = rng.standard_normal((clusters, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    rows = centers[rng.integers(0, clusters, size=n)]
    noise = rng.standard_normal((n, dim)) * (0.4 / np.sqrt(dim))
    rows = rows + noise
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def bench(fn, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_leader(rng, rows, dim, threshold, clusters, repeats):
    vectors = unit_rows(rng, rows, dim, clusters)
    weights = rng.integers(1, 20, size=rows).astype(np.float64)
    py_time, py_out = bench(
        lambda: pykernels.leader_cluster(vectors, weights, threshold), repeats
    )
    report("leader_cluster", f"{rows} rows x {dim} dims", py_time, None)
    if _ckernels is None:
        return
    cy_time, cy_out = bench(
        lambda: _ckernels.leader_cluster(vectors, weights, threshold), repeats
    )
    assert np.array_equal(py_out[0], cy_out[0]), "assignments diverge"
    report("leader_cluster", f"{rows} rows x {dim} dims", py_time, cy_time)


def bench_lcs(rng, pairs, max_len, alphabet, repeats):
    inputs = []
    for _ in range(pairs):
        la, lb = rng.integers(1, max_len + 1, size=2)
        inputs.append(
            (
                rng.integers(0, alphabet, size=la).astype(np.int64),
                rng.integers(0, alphabet, size=lb).astype(np.int64),
            )
        )

    def run(impl):
        return [impl.lcs_leftmost(a, b) for a, b in inputs]

    py_time, py_out = bench(lambda: run(pykernels), repeats)
    report("lcs_leftmost", f"{pairs} pairs, len<={max_len}", py_time, None)
    if _ckernels is None:
        return
    cy_time, cy_out = bench(lambda: run(_ckernels), repeats)
    assert py_out == cy_out, "matchings diverge"
    report("lcs_leftmost", f"{pairs} pairs, len<={max_len}", py_time, cy_time)


def report(kernel, shape, py_time, cy_time):
    if cy_time is None:
        print(f"{kernel:<16} {shape:<24} python {py_time * 1000:9.2f} ms")
    else:
        print(
            f"{kernel:<16} {shape:<24} cython {cy_time * 1000:9.2f} ms"
            f"   ({py_time / cy_time:5.1f}x faster)"
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=5000, help="vectors to cluster")
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--threshold", type=float, default=0.25)
    parser.add_argument("--clusters", type=int, default=60,
                        help="distinct directions the rows are drawn around")
    parser.add_argument("--pairs", type=int, default=200, help="sequence pairs")
    parser.add_argument("--max-len", type=int, default=60)
    parser.add_argument("--alphabet", type=int, default=40)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    if _ckernels is None:
        print("compiled kernels not built; timing the fallback only\n")
    bench_leader(rng, args.rows, args.dim, args.threshold, args.clusters,
                 args.repeats)
    bench_lcs(rng, args.pairs, args.max_len, args.alphabet, args.repeats)


if __name__ == "__main__":
    main()
