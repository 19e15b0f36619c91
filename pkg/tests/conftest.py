import pytest

from cyclegkm.cyclequiver import NilpotentRep, coefficient_quiver, iso_type, stratum_dim
from cyclegkm.cylinder import component_graph, desing_components, gsub
from cyclegkm.exactalg import Cocharacter
from cyclegkm.momentgraph import moment_graph

GOLDEN_TEXT = "n=2; U(1,4)+U(2,2)+U(2,2); N=4"
GOLDEN_E = (2, 2)
# cocharacter that reproduces the reference order p1..p8
GOLDEN_CHI = Cocharacter(2, (1, 4, 5))
GOLDEN_TYPES = ["n=2; U(1,4)", "n=2; S(1)+U(2,3)", "n=2; U(2,2)+U(2,2)"]

# p1..p8 as label sets, in the reference order
GOLDEN_POINTS = [
    {"b31", "b22", "b14", "b32"},
    {"b21", "b22", "b14", "b32"},
    {"b13", "b31", "b14", "b32"},
    {"b21", "b13", "b22", "b14"},
    {"b21", "b31", "b22", "b32"},
    {"b12", "b13", "b14", "b32"},
    {"b12", "b13", "b22", "b14"},
    {"b11", "b12", "b13", "b14"},
]


def build_golden_graph(M, chi=GOLDEN_CHI, seed=0):
    Q = coefficient_quiver(M)
    return moment_graph(
        Q,
        {1: GOLDEN_E[0], 2: GOLDEN_E[1]},
        chi,
        order_key=lambda S: (stratum_dim(iso_type(S, M), M),),
        type_of=lambda S: str(iso_type(S, M)),
        seed=seed,
    )


@pytest.fixture(scope="session")
def golden_M():
    return NilpotentRep.parse(GOLDEN_TEXT)


@pytest.fixture(scope="session")
def golden_graph(golden_M):
    return build_golden_graph(golden_M)


@pytest.fixture(scope="session")
def golden_types(golden_M):
    return [NilpotentRep(2, NilpotentRep.parse(t).summands, golden_M.N) for t in GOLDEN_TYPES]


@pytest.fixture(scope="session")
def golden_components(golden_M, golden_graph, golden_types):
    gs = gsub(golden_M, GOLDEN_E, "explicit", golden_types, graph=golden_graph)
    comps = desing_components(golden_M, GOLDEN_E, gs)
    return [(c, component_graph(c, golden_graph, chi=GOLDEN_CHI)) for c in comps]


def names_of(S):
    return {str(b) for b in S}


# acceptance criterion -> list of (part, ok, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def acceptance_lines():
    lines = []
    for crit in sorted(ACCEPTANCE, key=lambda c: (int(c[0]), c)):
        parts = ACCEPTANCE[crit]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name} {'ok' if good else 'FAIL'}: {text}" for name, good, text in parts)
        lines.append(f"{'PASS' if ok else 'FAIL'} {crit} {detail}".rstrip())
    return lines


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines():
        terminalreporter.write_line(line)
