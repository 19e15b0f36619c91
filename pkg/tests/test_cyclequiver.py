import math

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclegkm.cyclequiver import (
    BasisVector,
    NilpotentRep,
    coefficient_quiver,
    dimension_vector,
    hom_dim,
    iso_type,
    stratum_dim,
)


def dense_hom_dim(N, M):
    """Oracle: solve phi_{v+1} N_a = M_a phi_v with dense exact matrices."""
    n = N.n
    nb = {v: [b for b in N.basis() if N.vertex(b) == v] for v in range(1, n + 1)}
    mb = {v: [b for b in M.basis() if M.vertex(b) == v] for v in range(1, n + 1)}

    def arrow(R, basis, v):
        w = v % n + 1
        A = sympy.zeros(len(basis[w]), len(basis[v]))
        for c, b in enumerate(basis[v]):
            s = R.succ(b)
            if s is not None:
                A[basis[w].index(s), c] = 1
        return A

    unknowns = []
    for v in range(1, n + 1):
        unknowns += [(v, r, c) for r in range(len(mb[v])) for c in range(len(nb[v]))]
    if not unknowns:
        return 0
    idx = {u: i for i, u in enumerate(unknowns)}
    rows = []
    for v in range(1, n + 1):
        w = v % n + 1
        Na, Ma = arrow(N, nb, v), arrow(M, mb, v)
        for r in range(len(mb[w])):
            for c in range(len(nb[v])):
                row = [0] * len(unknowns)
                for k in range(len(nb[w])):
                    row[idx[(w, r, k)]] += Na[k, c]
                for k in range(len(mb[v])):
                    row[idx[(v, k, c)]] -= Ma[r, k]
                rows.append(row)
    rank = sympy.Matrix(rows).rank() if rows else 0
    return len(unknowns) - rank


def test_parse_forms():
    M = NilpotentRep.parse("n=2; U(1,4)+U(2,2)+U(2,2); N=4")
    assert M.summands == ((1, 4), (2, 2), (2, 2)) and M.N == 4
    assert NilpotentRep.parse("n=2; U(1;2)+U(2;2)").summands == ((2, 2), (1, 2))
    assert NilpotentRep.parse("n=3; S(2)+S(3)").summands == ((2, 1), (3, 1))
    with pytest.raises(ValueError):
        NilpotentRep.parse("U(1,2)")
    with pytest.raises(ValueError):
        NilpotentRep.parse("n=2; U(3,1)")
    with pytest.raises(ValueError):
        NilpotentRep.parse("n=2; U(1,5); N=4")


def test_weights_and_vertices(golden_M):
    M = golden_M
    assert dimension_vector(M) == (4, 4)
    assert M.weight(BasisVector(1, 3)).render() == "e1+2d"
    assert M.weight(BasisVector(3, 2)).render() == "e3+d"
    assert [M.vertex(BasisVector(1, k)) for k in range(1, 5)] == [1, 2, 1, 2]
    assert M.vertex(BasisVector(2, 1)) == 2


def test_coefficient_quiver_strings(golden_M):
    Q = coefficient_quiver(golden_M)
    assert len(Q.labels) == 8
    assert sum(len(a) for a in Q.arrows.values()) == 5
    assert Q.is_closed({BasisVector(1, 4)})
    assert not Q.is_closed({BasisVector(1, 3)})


def test_iso_type_and_strata(golden_M, golden_graph):
    M = golden_M
    S = {BasisVector(1, 2), BasisVector(1, 3), BasisVector(1, 4), BasisVector(3, 2)}
    T = iso_type(S, M)
    assert str(T) == "U_1(1) + U_2(3)"
    assert stratum_dim(T, M) == 3
    # with the vertices swapped, S_2 + U_1(3) is not the type of any fixed point
    # and its stratum formula does not give the three-dimensional stratum
    swapped = NilpotentRep(2, ((1, 3), (2, 1)), 4)
    types = {iso_type(S, M).type_key() for S in golden_graph.fixed_points}
    assert swapped.type_key() not in types
    assert stratum_dim(swapped, M) == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_end_dimension_formula(n):
    for l in range(1, 3 * n + 1):
        for i in range(1, n + 1):
            U = NilpotentRep(n, ((i, l),))
            assert hom_dim(U, U) == math.ceil(l / n)


def reps(n_max=3, l_max=4, k_max=3):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, n_max))
        k = draw(st.integers(1, k_max))
        summ = tuple((draw(st.integers(1, n)), draw(st.integers(1, l_max))) for _ in range(k))
        return NilpotentRep(n, summ, l_max)

    return build()


@settings(max_examples=40, deadline=None)
@given(reps(), st.data())
def test_hom_matches_dense_oracle(M, data):
    l = data.draw(st.integers(1, 4))
    i = data.draw(st.integers(1, M.n))
    N = NilpotentRep(M.n, ((i, l),), 4)
    assert hom_dim(N, M) == dense_hom_dim(N, M)
    assert hom_dim(M, N) == dense_hom_dim(M, N)


@settings(max_examples=40, deadline=None)
@given(reps(k_max=2), reps(k_max=2))
def test_hom_additive(A, B):
    if A.n != B.n:
        return
    X = NilpotentRep(A.n, ((1, 2),), 4)
    S = A.direct_sum(B)
    assert hom_dim(X, S) == hom_dim(X, A) + hom_dim(X, B)
    assert hom_dim(S, X) == hom_dim(A, X) + hom_dim(B, X)
