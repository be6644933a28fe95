"""Benchmark the compiled enumeration kernel against the pure-Python fallback.

Runs the full separator on a few instance shapes and reports per-call wall
time for each backend, plus the cross-backend agreement of status and
enumeration counters.  Usage:

    python3 benchmarks/bench_separator.py [--repeats 5]
"""

import argparse
import statistics
import time

import numpy as np

import analogsep.separator as sep
from analogsep.measure import EnsembleA, build_A, build_B
from analogsep.separator import CandidateSet, separate
from analogsep.sources import MixedSourceSpec, sample_source
from analogsep.experiments import trial_streams

SHAPES = [
    # (label, n, k, s_bar, rho, atoms1)
    ("small sparse", 12, 6, 5, 0.3, ((0.0, 1.0),)),
    ("acceptance cell", 16, 7, 6, 0.3, ((0.0, 1.0),)),
    ("wide cap", 16, 9, 8, 0.25, ((0.0, 1.0),)),
    ("two-atom alphabet", 12, 6, 4, 0.3, ((0.0, 0.5), (1.0, 0.5))),
    ("deep enumeration", 20, 9, 7, 0.25, ((0.0, 1.0),)),
]


def build_instance(label, n, k, s_bar, rho, atoms1, seed):
    spec = MixedSourceSpec(lam=0.5, rho1=rho, rho2=rho, atoms1=atoms1)
    rng_x, rng_a, rng_b = trial_streams(seed, 0, 0)
    src = sample_source(spec, n, rng_x)
    A = build_A(k, n - src.ell, EnsembleA(), rng_a)
    B = build_B("normal", k, src.ell, rng_b)
    H = np.hstack([A, B])
    cand = CandidateSet.from_source_spec(spec, n, src.ell, s_bar)
    return H, H @ src.x, cand


def time_backend(H, w, cand, backend, repeats):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = separate(H, w, cand, backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = ["py"] + (["c"] if sep._compiled is not None else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the fallback only")

    hdr = f"{'shape':22s} {'pairs':>9s}"
    for b in backends:
        hdr += f" {b + ' best':>12s} {b + ' median':>12s}"
    hdr += "   status / examined"
    print(hdr)
    print("-" * len(hdr))

    for label, n, k, s_bar, rho, atoms1 in SHAPES:
        H, w, cand = build_instance(label, n, k, s_bar, rho, atoms1, args.seed)
        pairs = sep.enumeration_size(cand, k)
        row = f"{label:22s} {pairs:>9d}"
        outcomes = {}
        for b in backends:
            best, med, out = time_backend(H, w, cand, b, args.repeats)
            outcomes[b] = out
            row += f" {best * 1e3:>10.2f}ms {med * 1e3:>10.2f}ms"
        ref = outcomes[backends[0]]
        agree = all(o.status == ref.status and o.patterns_examined == ref.patterns_examined
                    for o in outcomes.values())
        row += f"   {ref.status} / {ref.patterns_examined}"
        if not agree:
            row += "   BACKEND DISAGREEMENT"
        print(row)

    if len(backends) == 2:
        ratios = []
        for label, n, k, s_bar, rho, atoms1 in SHAPES:
            H, w, cand = build_instance(label, n, k, s_bar, rho, atoms1, args.seed)
            py_best, _, _ = time_backend(H, w, cand, "py", args.repeats)
            c_best, _, _ = time_backend(H, w, cand, "c", args.repeats)
            ratios.append(py_best / c_best)
        print(f"\nspeedup (py best / c best): min {min(ratios):.1f}x, "
              f"median {statistics.median(ratios):.1f}x, max {max(ratios):.1f}x")


if __name__ == "__main__":
    main()
