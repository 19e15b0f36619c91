"""Compare the compiled and pure-Python fixed point enumeration kernels.

Run: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

from cyclegkm import kernels
from cyclegkm.cyclequiver import NilpotentRep, coefficient_quiver
from cyclegkm.cylinder import lambda_
from cyclegkm.momentgraph import _closure_order

CASES = [
    ("cycle n=2 U(1,4)+U(2,2)+U(2,2), e=(2,2)", "n=2; U(1,4)+U(2,2)+U(2,2)", (2, 2), False),
    ("cycle n=3 five strings, e=(3,3,3)", "n=3; U(1,4)+U(2,4)+U(3,3)+U(1,3)+U(2,2)", (3, 3, 3), False),
    ("semisimple n=1 S^14, e=(7)", "n=1; " + "+".join(["S(1)"] * 14), (7,), False),
    ("cylinder Lambda(U(1,6)+U(2,6)+U(1,6)), grid of a sub", "n=2; U(1,6)+U(2,6)+U(1,6)", None, True),
]


def instance(text, e, upstairs):
    M = NilpotentRep.parse(text)
    if upstairs:
        C = lambda_(M)
        Q = C.coeff
        sub = lambda_(NilpotentRep(M.n, ((1, 6), (2, 6)), M.N), M.N)
        target = sub.dims()
    else:
        Q = coefficient_quiver(M)
        target = {v: x for v, x in zip(range(1, M.n + 1), e)}
    verts = Q.vertices()
    vid = {v: i for i, v in enumerate(verts)}
    succ = [[Q.index[t] for t in Q.successors(lab)] for lab in Q.labels]
    vertex = [vid[Q.vertex_of[lab]] for lab in Q.labels]
    tgt = [target.get(v, 0) for v in verts]
    return succ, vertex, tgt, _closure_order(Q)


def best_of(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    try:
        from cyclegkm._ckernels import enumerate_closed as compiled
    except ImportError:
        compiled = None
        print("compiled kernel not built; only the Python timings are shown")
    print(f"{'case':58s} {'points':>8s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, text, e, up in CASES:
        inst = instance(text, e, up)
        tp, rp = best_of(kernels.enumerate_closed_py, inst, args.repeat)
        if compiled is not None:
            tc, rc = best_of(compiled, [list(map(list, inst[0])), *map(list, inst[1:])], args.repeat)
            assert sorted(rc) == sorted(rp), name
            print(f"{name:58s} {len(rp):8d} {tp:10.4f} {tc:10.4f} {tp / tc:7.1f}x")
        else:
            print(f"{name:58s} {len(rp):8d} {tp:10.4f} {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
