from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclegkm.cyclequiver import NilpotentRep, coefficient_quiver, dimension_vector
from cyclegkm.cylinder import (
    CylinderQuiver,
    component_graph,
    desing_components,
    fiber,
    gaussian_binomial,
    gsub,
    lambda_,
    lift,
    poly_mul,
    proj_inj_simple,
    res,
    res_points,
    resolution_check,
    simple_resolution_check,
    tower_profile,
)
from cyclegkm.momentgraph import moment_graph, poincare_polynomial

from conftest import GOLDEN_E, GOLDEN_TEXT


def q_binomial_oracle(b, a):
    """Oracle: count a-subsets of range(b) by inversions against the complement."""
    from itertools import combinations

    coeffs = [0] * (a * (b - a) + 1)
    for sub in combinations(range(b), a):
        inv = sum(1 for x in sub for y in range(b) if y not in sub and y < x)
        coeffs[inv] += 1
    return coeffs


@st.composite
def small_reps(draw, n_max=3, l_max=4):
    n = draw(st.integers(1, n_max))
    k = draw(st.integers(1, 3))
    summ = tuple((draw(st.integers(1, n)), draw(st.integers(1, l_max))) for _ in range(k))
    return NilpotentRep(n, summ, l_max)


def test_cylinder_quiver_shape():
    Q = CylinderQuiver(2, 3)
    assert len(Q.vertices()) == 6
    assert Q.wrap(0) == 2 and Q.wrap(3) == 1
    kinds = [a[0] for a in Q.arrows()]
    assert kinds.count("alpha") == 4 and kinds.count("beta") == 4


def test_lambda_dimensions():
    U = NilpotentRep(2, ((1, 3),), 4)
    C = lambda_(U)
    assert C.total_dim() == 6
    dims = C.dims()
    assert [dims[(1, k)] for k in (1, 2, 3, 4)] == [2, 1, 1, 0]
    assert [dims[(2, k)] for k in (1, 2, 3, 4)] == [1, 1, 0, 0]
    assert sum(v for (i, k), v in dims.items() if k == 1) == 3
    assert lambda_(NilpotentRep.parse(GOLDEN_TEXT)).total_dim() == 16
    with pytest.raises(ValueError):
        lambda_(NilpotentRep(2, ((1, 5),), 5), 4)


@settings(max_examples=50, deadline=None)
@given(small_reps())
def test_res_inverts_lambda(M):
    assert res(lambda_(M)).type_key() == M.type_key()


@settings(max_examples=50, deadline=None)
@given(small_reps())
def test_lambda_total_dimension(M):
    assert lambda_(M).total_dim() == sum(l * (l + 1) // 2 for _, l in M.summands)


@settings(max_examples=50, deadline=None)
@given(small_reps())
def test_resolutions_hold(M):
    assert resolution_check(M)["ok"]


@pytest.mark.parametrize("n,N", [(1, 3), (2, 2), (2, 4), (3, 3), (4, 4), (3, 5)])
def test_simple_resolutions_hold(n, N):
    assert simple_resolution_check(n, N) == []


def test_projective_support_size():
    # total dimension is k + (k+1) + ... + N
    assert proj_inj_simple("projective", 1, 3, 4, 4).total_dim() == 7
    assert proj_inj_simple("projective", 2, 1, 3, 3).total_dim() == 6
    with pytest.raises(ValueError):
        proj_inj_simple("projective", 5, 1, 4, 4)
    with pytest.raises(ValueError):
        proj_inj_simple("flat", 1, 1, 2, 2)


def test_injective_top_is_lambda_of_uniserial():
    n, N = 3, 3
    for j in range(1, n + 1):
        inj = proj_inj_simple("injective", j, 1, n, N).dims()
        lam = lambda_(NilpotentRep(n, ((j, N),), N)).dims()
        assert sum(inj.values()) == sum(lam.values())


def test_quotient_needs_subrepresentation():
    M = NilpotentRep(2, ((1, 2),), 2)
    C = lambda_(M)
    sub = lift([b for b in M.basis() if b.k == 2], M)
    assert C.quotient(sub).total_dim() == C.total_dim() - len(sub)
    top = [lab for lab in C.coeff.labels if lab[0].k == 1]
    with pytest.raises(ValueError):
        C.quotient(top)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lemma_mode_counts(n):
    M = NilpotentRep(n, tuple((i, n) for i in range(1, n + 1)), n)
    for k in range(n + 1):
        assert len(gsub(M, [k] * n).types) == comb(n, k)


def test_lemma_mode_with_multiplicity():
    M = NilpotentRep.parse("n=2; U(1,4)+U(1,4)+U(2,4); N=4")
    res_ = gsub(M, (2, 2))
    assert res_.proven
    for T in res_.types:
        assert list(dimension_vector(T)) == [2, 2]
    assert len(res_.types) == 2


def test_lemma_mode_rejects_bad_input(golden_M):
    with pytest.raises(ValueError):
        gsub(golden_M, GOLDEN_E)
    with pytest.raises(ValueError):
        gsub(NilpotentRep.parse("n=2; U(1,4)+U(2,4)"), (1, 2))
    with pytest.raises(ValueError):
        gsub(golden_M, GOLDEN_E, "guess")


def test_explicit_mode(golden_M, golden_graph, golden_types):
    r = gsub(golden_M, GOLDEN_E, "explicit", golden_types, graph=golden_graph)
    assert r.proven and [T.type_key() for T in r.types] == [T.type_key() for T in golden_types]
    with pytest.raises(ValueError):
        gsub(golden_M, GOLDEN_E, "explicit", [])
    with pytest.raises(ValueError, match="not the type"):
        gsub(golden_M, GOLDEN_E, "explicit", [NilpotentRep(2, ((1, 3), (2, 1)), 4)], graph=golden_graph)


def test_heuristic_mode_recovers_golden(golden_M, golden_graph, golden_types):
    r = gsub(golden_M, GOLDEN_E, "heuristic", graph=golden_graph)
    assert not r.proven
    assert sorted(T.type_key() for T in r.types) == sorted(T.type_key() for T in golden_types)


def test_golden_components(golden_components):
    counts = [len(cg.fixed_points) for _, cg in golden_components]
    assert counts == [3, 6, 3]
    assert [poincare_polynomial(cg) for _, cg in golden_components] == [[1, 1, 1], [1, 2, 2, 1], [1, 1, 1]]
    for comp, cg in golden_components:
        assert all(d == comp.dimension() for d in cg.degrees())
        assert tower_profile(comp)["poincare"] == poincare_polynomial(cg)
    assert golden_components[0][1].names == ["p6_1", "p7_1", "p8_1"]
    assert golden_components[2][1].names == ["p1_3", "p2_3", "p5_3"]


def test_component_points_restrict_to_downstairs(golden_components, golden_graph):
    down = set(golden_graph.fixed_points)
    for comp, cg in golden_components:
        for W in cg.fixed_points:
            p = res_points(W)
            assert p in down
            assert lift(p, comp.M) <= W


def test_unnamed_component_graph(golden_components):
    comp, _ = golden_components[0]
    g = component_graph(comp)
    assert g.names == ["u1_1", "u2_1", "u3_1"]


def test_desing_rejects_wrong_dimension(golden_M):
    with pytest.raises(ValueError):
        desing_components(golden_M, GOLDEN_E, [NilpotentRep(2, ((1, 3),), 4)])
    with pytest.raises(ValueError):
        desing_components(golden_M, GOLDEN_E, [])


def test_fibers_over_golden_points(golden_components, golden_graph):
    comp, _ = golden_components[0]
    nonempty = [golden_graph.names[j] for j, S in enumerate(golden_graph.fixed_points) if fiber(comp, S)["nonempty"]]
    assert nonempty == ["p6", "p7", "p8"]
    f = fiber(comp, golden_graph.fixed_points[7])
    assert f["dimension"] == 0 and len(f["preimages"]) == 1
    assert fiber(comp, golden_graph.fixed_points[0])["dimension"] is None


def test_fiber_with_positive_dimension():
    # U(2) in U(2) + U(2) over the Jordan loop: the socle point has a P^1 fiber
    M = NilpotentRep.parse("n=1; U(1,2)+U(1,2)")
    T = NilpotentRep(1, ((1, 2),), 2)
    (comp,) = desing_components(M, [2], [T])
    g = moment_graph(coefficient_quiver(M), {1: 2})
    got = {tuple(sorted(map(str, S))): fiber(comp, S) for S in g.fixed_points}
    assert got[("b12", "b22")]["dimension"] == 1
    assert len(got[("b12", "b22")]["preimages"]) == 2
    assert got[("b11", "b12")]["dimension"] == 0
    prof = tower_profile(comp)
    assert prof["dimension"] == comp.dimension() == 2
    assert prof["poincare"] == [1, 2, 1]
    assert len(comp.fixed_points()) == 4


@pytest.mark.parametrize("b,a", [(2, 1), (4, 2), (5, 2), (6, 3), (3, 0), (3, 3)])
def test_gaussian_binomial(b, a):
    assert gaussian_binomial(b, a) == q_binomial_oracle(b, a)


def test_poly_mul():
    assert poly_mul([1, 1], [1, 1]) == [1, 2, 1]
    assert poly_mul([1], [3, 0, 2]) == [3, 0, 2]


@settings(max_examples=25, deadline=None)
@given(small_reps(n_max=2, l_max=3), st.data())
def test_tower_matches_upstairs_graph(M, data):
    dims = list(dimension_vector(M))
    e = [data.draw(st.integers(0, x)) for x in dims]
    g = moment_graph(coefficient_quiver(M), dict(enumerate(e, 1)))
    if not g.fixed_points:
        return
    types = gsub(M, e, "heuristic", graph=g).types
    if not types:
        return
    for comp in desing_components(M, e, types):
        cg = component_graph(comp, g)
        prof = tower_profile(comp)
        assert prof["poincare"] == poincare_polynomial(cg)
        assert all(d == prof["dimension"] for d in cg.degrees())
