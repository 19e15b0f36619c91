import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclegkm import kernels
from cyclegkm.cyclequiver import NilpotentRep, coefficient_quiver
from cyclegkm.cylinder import lambda_
from cyclegkm.momentgraph import _closure_order, fixed_points


def brute_force(Q, target):
    """Oracle: every subset of the right size, filtered by closure and counts."""
    total = sum(target.values())
    out = []
    for combo in itertools.combinations(Q.labels, total):
        s = set(combo)
        if Q.is_closed(s) and Q.dims(s) == {v: target.get(v, 0) for v in Q.vertices()}:
            out.append(frozenset(s))
    return sorted(out, key=sorted)


def kernel_args(Q, target):
    verts = Q.vertices()
    vid = {v: i for i, v in enumerate(verts)}
    succ = [[Q.index[t] for t in Q.successors(lab)] for lab in Q.labels]
    vertex = [vid[Q.vertex_of[lab]] for lab in Q.labels]
    return succ, vertex, [target.get(v, 0) for v in verts], _closure_order(Q)


@st.composite
def instances(draw):
    n = draw(st.integers(1, 3))
    k = draw(st.integers(1, 3))
    summ = tuple((draw(st.integers(1, n)), draw(st.integers(1, 4))) for _ in range(k))
    M = NilpotentRep(n, summ, 4)
    dims = [0] * n
    for b in M.basis():
        dims[M.vertex(b) - 1] += 1
    e = {v: draw(st.integers(0, dims[v - 1])) for v in range(1, n + 1)}
    return M, e


@settings(max_examples=60, deadline=None)
@given(instances())
def test_fixed_points_match_brute_force(inst):
    M, e = inst
    Q = coefficient_quiver(M)
    assert fixed_points(Q, e) == brute_force(Q, e)


@settings(max_examples=40, deadline=None)
@given(instances())
def test_backends_agree(inst):
    M, e = inst
    args = kernel_args(coefficient_quiver(M), e)
    py = kernels.enumerate_closed_py(*args)
    assert sorted(kernels.enumerate_closed(*args)) == sorted(py)


def test_compiled_backend_agrees_on_cylinder():
    pytest.importorskip("cyclegkm._ckernels")
    from cyclegkm._ckernels import enumerate_closed as compiled

    M = NilpotentRep.parse("n=2; U(1,4)+U(2,3)+U(1,2)")
    C = lambda_(M)
    target = lambda_(NilpotentRep(2, ((1, 2), (2, 3)), 4), 4).dims()
    succ, vertex, tgt, order = kernel_args(C.coeff, target)
    assert sorted(compiled(succ, vertex, tgt, order)) == sorted(kernels.enumerate_closed_py(succ, vertex, tgt, order))


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_infeasible_target_is_empty():
    assert kernels.enumerate_closed_py([[]], [0], [2], [0]) == []
