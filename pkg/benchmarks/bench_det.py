"""Timing comparison of the determinant backends on realistic kernels.

Builds the secular kernel for a few graphs, evaluates batched determinants
and log-derivatives through both implementations, and prints a table of
per-batch wall times plus the speedup. The numpy fallback is always
present; the compiled extension is skipped with a note if it is not built.

Usage: python3 benchmarks/bench_det.py [--batch 64 512 4096] [--repeats 7]
"""

import argparse
import time

import numpy as np

from qgres import _detpy
from qgres.fixtures import double_edge_two_leads, five_edge_two_leads, ring
from qgres.secular import build_secular

try:
    from qgres import _detcore
except ImportError:
    _detcore = None


def _bench(impl, fn_name, kernel, lams, lengths, repeats):
    fn = getattr(impl, fn_name)
    args = (kernel.n, kernel.rows, kernel.cols, kernel.coefs,
            kernel._signed_len(lengths), lams)
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--batch", type=int, nargs="+", default=[64, 512, 4096])
    ap.add_argument("--repeats", type=int, default=7)
    opts = ap.parse_args()

    graphs = {
        "double-edge (n=6)": double_edge_two_leads(),
        "five-edge (n=12)": five_edge_two_leads(),
        "ring-12 (n=24)": ring(12),
    }
    rng = np.random.default_rng(0)

    print(f"{'graph':<20} {'call':<12} {'batch':>6} {'numpy':>10} "
          f"{'compiled':>10} {'speedup':>8}")
    for label, g in graphs.items():
        kernel = build_secular(g).kernel
        lengths = g.lengths
        for batch in opts.batch:
            lams = (rng.uniform(0.5, 20.0, batch)
                    - 1j * rng.uniform(0.0, 2.0, batch)).astype(complex)
            for call in ("det_many", "logder_many"):
                t_py = _bench(_detpy, call, kernel, lams, lengths, opts.repeats)
                if _detcore is None:
                    print(f"{label:<20} {call:<12} {batch:>6} {t_py*1e3:>8.2f}ms "
                          f"{'(not built)':>10} {'-':>8}")
                    continue
                t_c = _bench(_detcore, call, kernel, lams, lengths, opts.repeats)
                print(f"{label:<20} {call:<12} {batch:>6} {t_py*1e3:>8.2f}ms "
                      f"{t_c*1e3:>8.2f}ms {t_py/t_c:>7.1f}x")


if __name__ == "__main__":
    main()
