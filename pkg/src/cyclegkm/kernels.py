"""Hot combinatorial kernels with a compiled fast path.

The compiled module ``cyclegkm._ckernels`` is used when it was built; the pure
Python versions below are the reference implementation and the fallback.
Set CYCLEGKM_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os
from typing import Sequence

__all__ = ["enumerate_closed", "enumerate_closed_py", "BACKEND"]


def enumerate_closed_py(
    succ: Sequence[Sequence[int]],
    vertex: Sequence[int],
    target: Sequence[int],
    order: Sequence[int],
) -> list[tuple[int, ...]]:
    """All successor-closed index sets with target[v] members at each vertex v.

    order must list every label after all of its successors.
    """
    nlab = len(vertex)
    nv = len(target)
    remaining = [0] * nv
    for v in vertex:
        remaining[v] += 1
    if any(remaining[v] < target[v] for v in range(nv)):
        return []
    count = [0] * nv
    inside = [False] * nlab
    chosen: list[int] = []
    out: list[tuple[int, ...]] = []

    def rec(pos: int) -> None:
        if pos == nlab:
            out.append(tuple(sorted(chosen)))
            return
        x = order[pos]
        v = vertex[x]
        remaining[v] -= 1
        if count[v] < target[v] and all(inside[y] for y in succ[x]):
            inside[x] = True
            count[v] += 1
            chosen.append(x)
            rec(pos + 1)
            chosen.pop()
            count[v] -= 1
            inside[x] = False
        if count[v] + remaining[v] >= target[v]:
            rec(pos + 1)
        remaining[v] += 1

    rec(0)
    return out


try:
    if os.environ.get("CYCLEGKM_PURE"):
        raise ImportError("pure Python kernels requested")
    from ._ckernels import enumerate_closed as _c_enumerate_closed

    def enumerate_closed(succ, vertex, target, order):
        return _c_enumerate_closed(
            [list(s) for s in succ], list(vertex), list(target), list(order)
        )

    BACKEND = "cython"
except ImportError:
    enumerate_closed = enumerate_closed_py
    BACKEND = "python"
