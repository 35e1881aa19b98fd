"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--n 1000] [--k 850] [--repeat 5]

Both backends are imported directly, so the script does not depend on which
one ``ldpc_lattice.kernels`` picked. Outputs agree bit for bit; the script
checks this before timing.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from ldpc_lattice import _pykernels
from ldpc_lattice.kernels import MESSAGE_CLIP
from ldpc_lattice.lattice import LatticeBasis, encode, llr_from_observation, EXACT_LLR_GAIN
from ldpc_lattice.shaping import ShapingSpec

try:
    from ldpc_lattice import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--k", type=int, default=850)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sigma", type=float, default=0.5,
                    help="noise level; 0.5 keeps the decoder running all 50 iterations")
    ap.add_argument("--batch", type=int, default=200, help="words per tree-search call")
    ap.add_argument("--M", type=int, default=5)
    args = ap.parse_args(argv)

    basis = LatticeBasis.regular(args.n, args.k, 3, seed=1)
    rp, ev, cp, ve = basis.H._edge_arrays()
    rng = np.random.default_rng(0)
    spec = ShapingSpec.uniform(basis.n, 8, "nested", args.M)
    b = np.ascontiguousarray(spec.sample(rng, args.batch))
    L = np.ascontiguousarray(spec.L)
    P = np.ascontiguousarray(basis.P, dtype=np.int64)
    y = encode(basis, np.zeros(basis.n, dtype=np.int64)) + rng.normal(0, args.sigma, basis.n)
    llr = np.ascontiguousarray(EXACT_LLR_GAIN * llr_from_observation(y, args.sigma ** 2))

    backends = {"numpy": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled extension not available; timing numpy only")

    ref_spa = ref_ms = None
    print(f"code ({basis.n},{basis.k}), sigma={args.sigma}, M={args.M}, batch={args.batch}")
    iters = None
    print(f"{'kernel':<10}{'backend':<10}{'median s':>12}{'speedup':>10}")
    base = {}
    for kernel in ("spa", "m_search"):
        for name, mod in backends.items():
            if kernel == "spa":
                fn = lambda: mod.spa(rp, ev, cp, ve, llr, 50, MESSAGE_CLIP)  # noqa: E731
                res = fn()
                key = (res[0].tobytes(), res[1], res[2])
                ref_spa = ref_spa or key
                iters = res[2]
                assert key == ref_spa, "backends disagree on spa"
            else:
                fn = lambda: mod.m_search(b, L, P, basis.k, args.M)  # noqa: E731
                res = fn().tobytes()
                ref_ms = ref_ms or res
                assert res == ref_ms, "backends disagree on m_search"
            t = _time(fn, args.repeat)
            base.setdefault(kernel, t)
            print(f"{kernel:<10}{name:<10}{t:>12.5f}{base[kernel] / t:>10.1f}x")
    print(f"spa ran {iters} iterations")


if __name__ == "__main__":
    main()
