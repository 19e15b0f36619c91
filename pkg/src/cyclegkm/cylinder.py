"""Cylinder quiver, the functor Lambda, resolutions and desingularization components.

A label of Lambda(M) is a pair (b, k): the image of the basis vector
pred^(k-1)(b) under the (k-1)-fold path map, living at the cylinder vertex
(vertex(b) - k + 1 mod n, k). alpha sends (b, k) to (succ b, k + 1) and beta
sends (b, k) to (b, k - 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .cyclequiver import (
    BasisVector,
    CoefficientQuiver,
    NilpotentRep,
    coefficient_quiver,
    dimension_vector,
    hom_dim,
    iso_type,
    stratum_dim,
)
from .exactalg import Cocharacter
from .momentgraph import MomentGraph, choose_cocharacter, fixed_points, moment_graph

__all__ = [
    "CylinderQuiver",
    "CylinderRep",
    "lambda_",
    "res",
    "res_points",
    "lift",
    "proj_inj_simple",
    "resolution_check",
    "simple_resolution_check",
    "gsub",
    "GsubResult",
    "DesingComponent",
    "desing_components",
    "component_graph",
    "fiber",
    "tower_profile",
    "gaussian_binomial",
    "poly_mul",
]

Grid = dict  # (i, k) -> int


@dataclass(frozen=True)
class CylinderQuiver:
    n: int
    N: int

    def vertices(self) -> list[tuple[int, int]]:
        return [(i, k) for k in range(1, self.N + 1) for i in range(1, self.n + 1)]

    def wrap(self, i: int) -> int:
        return (i - 1) % self.n + 1

    def arrows(self) -> list[tuple[str, tuple[int, int], tuple[int, int]]]:
        out = []
        for i, k in self.vertices():
            if k < self.N:
                out.append(("alpha", (i, k), (i, k + 1)))
            if k >= 2:
                out.append(("beta", (i, k), (self.wrap(i + 1), k - 1)))
        return out


@dataclass
class CylinderRep:
    """A coordinate cylinder representation: labels on the grid with alpha/beta arrows."""

    quiver: CylinderQuiver
    coeff: CoefficientQuiver
    source: NilpotentRep | None = None

    @property
    def n(self) -> int:
        return self.quiver.n

    @property
    def N(self) -> int:
        return self.quiver.N

    def dims(self, subset: Iterable | None = None) -> Grid:
        out = {v: 0 for v in self.quiver.vertices()}
        for lab in self.coeff.labels if subset is None else subset:
            out[self.coeff.vertex_of[lab]] += 1
        return out

    def total_dim(self) -> int:
        return len(self.coeff.labels)

    def quotient(self, sub: Iterable) -> "CylinderRep":
        """M/U for a coordinate subrepresentation U: complement labels, induced arrows."""
        s = set(sub)
        if not self.coeff.is_closed(s):
            raise ValueError("quotient needs a subrepresentation")
        keep = tuple(lab for lab in self.coeff.labels if lab not in s)
        ks = set(keep)
        arrows = {
            kind: {a: b for a, b in amap.items() if a in ks and b in ks}
            for kind, amap in self.coeff.arrows.items()
        }
        q = CoefficientQuiver(
            keep,
            {lab: self.coeff.vertex_of[lab] for lab in keep},
            {lab: self.coeff.weight_of[lab] for lab in keep},
            arrows,
            self.coeff.d,
        )
        return CylinderRep(self.quiver, q, None)


def lambda_(M: NilpotentRep, N: int | None = None) -> CylinderRep:
    N = N or M.N
    if any(l > N for _, l in M.summands):
        raise ValueError(f"representation is not {N}-nilpotent")
    Q = CylinderQuiver(M.n, N)
    labels = [(b, k) for b in M.basis() for k in range(1, min(b.k, N) + 1)]
    vertex_of = {(b, k): (Q.wrap(M.vertex(b) - k + 1), k) for b, k in labels}
    weight_of = {(b, k): M.weight(b) for b, k in labels}
    present = set(labels)
    alpha, beta = {}, {}
    for b, k in labels:
        s = M.succ(b)
        if s is not None and (s, k + 1) in present:
            alpha[(b, k)] = (s, k + 1)
        if k >= 2:
            beta[(b, k)] = (b, k - 1)
    coeff = CoefficientQuiver(tuple(labels), vertex_of, weight_of, {"alpha": alpha, "beta": beta}, M.d)
    return CylinderRep(Q, coeff, M)


def res(C: CylinderRep) -> NilpotentRep:
    """Level-1 restriction with the composites beta o alpha as arrow maps."""
    co = C.coeff
    level1 = [lab for lab in co.labels if co.vertex_of[lab][1] == 1]
    step = {}
    for lab in level1:
        a = co.arrows.get("alpha", {}).get(lab)
        if a is not None:
            b = co.arrows.get("beta", {}).get(a)
            if b is not None:
                step[lab] = b
    has_pred = set(step.values())
    strings = []
    for lab in level1:
        if lab in has_pred:
            continue
        length = 1
        cur = lab
        while cur in step:
            cur = step[cur]
            length += 1
        strings.append((co.vertex_of[lab][0], length))
    return NilpotentRep(C.n, tuple(strings), C.N)


def res_points(W: Iterable) -> frozenset:
    """Downstairs fixed point underlying an upstairs one: its level-1 labels."""
    return frozenset(b for b, k in W if k == 1)


def lift(p: Iterable[BasisVector], M: NilpotentRep, N: int | None = None) -> frozenset:
    """Lambda of a coordinate subrepresentation, as cylinder labels."""
    N = N or M.N
    s = set(p)
    out = set()
    for b in s:
        cur, k = b, 1
        while cur is not None and k <= N:
            out.add((cur, k))
            cur = M.succ(cur)
            k += 1
    return frozenset(out)


def _support(kind: str, i: int, k: int, N: int) -> list[tuple[int, int]]:
    """Lifted band-quiver support of S, P (V(i,k;N-k)) or I (W(i,k;N-k)).

    The injective region is also bounded by j >= i - (N - k); without it I_{j,1}
    is larger than the projective-injective Lambda(U(j;N)).
    """
    if kind == "simple":
        return [(i, k)]
    ell = N - k
    pts = []
    if kind == "projective":
        for r in range(1, N + 1):
            for s in range(i + k, i + k + ell + 1):
                j = s - r
                if j >= i:
                    pts.append((j, r))
    elif kind == "injective":
        for r in range(1, N + 1):
            for s in range(i - ell + 1, i + k + 1):
                j = s - r
                if i - ell <= j <= i:
                    pts.append((j, r))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return pts


def proj_inj_simple(kind: str, i: int, k: int, n: int, N: int) -> CylinderRep:
    """S_{i,k}, P_{i,k} or I_{i,k}: the push-down of the band-quiver support."""
    if not (1 <= i <= n and 1 <= k <= N):
        raise ValueError(f"anchor ({i},{k}) outside the cylinder Z_{n} x [{N}]")
    Q = CylinderQuiver(n, N)
    pts = _support(kind, i, k, N)
    ps = set(pts)
    alpha = {(j, r): (j, r + 1) for j, r in pts if (j, r + 1) in ps}
    beta = {(j, r): (j + 1, r - 1) for j, r in pts if (j + 1, r - 1) in ps}
    from .exactalg import Character

    coeff = CoefficientQuiver(
        tuple(sorted(pts)),
        {p: (Q.wrap(p[0]), p[1]) for p in pts},
        {p: Character.zero(0) for p in pts},
        {"alpha": alpha, "beta": beta},
        0,
    )
    return CylinderRep(Q, coeff, None)


def _pi_dims(kind: str, i: int, k: int, n: int, N: int) -> Grid:
    Q = CylinderQuiver(n, N)
    if k > N:
        return {v: 0 for v in Q.vertices()}
    return proj_inj_simple(kind, Q.wrap(i), k, n, N).dims()


def resolution_check(M: NilpotentRep, N: int | None = None) -> dict:
    """Dimension-level check of the length-one resolutions of every summand."""
    N = N or M.N
    n = M.n
    mismatches = []
    for i, ell in M.summands:
        lam = lambda_(NilpotentRep(n, ((i, ell),), N), N).dims()
        p1 = _pi_dims("projective", i, 1, n, N)
        p2 = _pi_dims("projective", i, ell + 1, n, N)
        j = (i + ell - 2) % n + 1
        i1 = _pi_dims("injective", j, 1, n, N)
        i2 = _pi_dims("injective", j - ell, ell + 1, n, N)
        for v in lam:
            if lam[v] != p1[v] - p2[v]:
                mismatches.append({"summand": [i, ell], "side": "projective", "vertex": list(v)})
            if lam[v] != i1[v] - i2[v]:
                mismatches.append({"summand": [i, ell], "side": "injective", "vertex": list(v)})
    return {"ok": not mismatches, "mismatches": mismatches}


def simple_resolution_check(n: int, N: int) -> list[tuple[int, int]]:
    """Grid anchors where the alternating dimension identity for S_{i,k} fails."""
    Q = CylinderQuiver(n, N)
    bad = []
    zero = {v: 0 for v in Q.vertices()}
    for i, k in Q.vertices():
        lhs = _pi_dims("projective", i, k, n, N)
        s = _pi_dims("simple", i, k, n, N)
        a = _pi_dims("projective", i + 1, k - 1, n, N) if k >= 2 else zero
        b = _pi_dims("projective", i, k + 1, n, N)
        c = _pi_dims("projective", i + 1, k, n, N) if k >= 2 else zero
        if any(lhs[v] != s[v] + a[v] + b[v] - c[v] for v in Q.vertices()):
            bad.append((i, k))
    return bad


@dataclass
class GsubResult:
    types: list[NilpotentRep]
    mode: str
    proven: bool  # False for heuristic output


def _lemma_params(M: NilpotentRep, e: Sequence[int]) -> tuple[int, int, list[int]]:
    lengths = {l for _, l in M.summands}
    if len(lengths) != 1:
        raise ValueError("lemma410 mode needs all summands of one length")
    L = lengths.pop()
    if L % M.n:
        raise ValueError("lemma410 mode needs summand length a multiple of n")
    omega = L // M.n
    if len(set(e)) != 1 or e[0] % omega:
        raise ValueError("lemma410 mode needs e = (omega k, ..., omega k)")
    k = e[0] // omega
    d = [0] * M.n
    for i, l in M.summands:
        d[(i + l - 2) % M.n] += 1
    return omega, k, d


def _cell_dims_by_type(M: NilpotentRep, g: MomentGraph) -> dict:
    out: dict = {}
    od = g.outdegrees()
    for S, c in zip(g.fixed_points, od):
        key = iso_type(S, M).type_key()
        out[key] = max(out.get(key, 0), c)
    return out


def gsub(
    M: NilpotentRep,
    e: Sequence[int],
    mode: str = "lemma410",
    explicit: Sequence[NilpotentRep] | None = None,
    graph: MomentGraph | None = None,
) -> GsubResult:
    e = list(e)
    if mode == "lemma410":
        omega, k, d = _lemma_params(M, e)
        L = omega * M.n
        out = []
        for p in product(*(range(di + 1) for di in d)):
            if sum(p) == k:
                ends = [(i, L) for i, pi in enumerate(p, 1) for _ in range(pi)]
                out.append(NilpotentRep.from_end(M.n, ends, M.N))
        return GsubResult(out, mode, True)
    if mode == "explicit":
        if not explicit:
            raise ValueError("explicit gsub mode needs a nonempty list of types")
        if graph is None:
            graph = moment_graph(coefficient_quiver(M), dict(enumerate(e, 1)))
        cells = _cell_dims_by_type(M, graph)
        out = []
        for T in explicit:
            T = NilpotentRep(M.n, T.summands, M.N)
            key = T.type_key()
            if key not in cells:
                raise ValueError(f"{T} is not the type of any fixed point")
            sd = stratum_dim(T, M)
            if sd < cells[key]:
                raise ValueError(f"{T}: stratum dimension {sd} below a cell of that type")
            out.append(T)
        return GsubResult(out, mode, True)
    if mode == "heuristic":
        if graph is None:
            graph = moment_graph(coefficient_quiver(M), dict(enumerate(e, 1)))
        cells = _cell_dims_by_type(M, graph)
        types = {key: NilpotentRep(M.n, key, M.N) for key in cells}
        sdim = {key: stratum_dim(T, M) for key, T in types.items()}
        tests = [NilpotentRep(M.n, ((i, l),), M.N) for i in range(1, M.n + 1) for l in range(1, M.N + 1)]
        homs = {key: [hom_dim(X, T) for X in tests] for key, T in types.items()}
        out = []
        for key in sorted(types):
            if cells[key] != sdim[key]:
                continue
            dominated = any(
                sdim[o] > sdim[key] and all(a <= b for a, b in zip(homs[o], homs[key]))
                for o in types
                if o != key
            )
            if not dominated:
                out.append(types[key])
        return GsubResult(out, mode, False)
    raise ValueError(f"unknown gsub mode {mode!r}")


@dataclass
class DesingComponent:
    generic_type: NilpotentRep
    target: Grid
    ambient: CylinderRep
    index: int = 1
    _points: list | None = field(default=None, repr=False)

    @property
    def M(self) -> NilpotentRep:
        return self.ambient.source

    def fixed_points(self) -> list[frozenset]:
        if self._points is None:
            self._points = fixed_points(self.ambient.coeff, self.target)
        return self._points

    def dimension(self) -> int:
        return sum(a * (b - a) for _, a, b in _tower_factors(self))


def desing_components(M: NilpotentRep, e: Sequence[int], types: Sequence[NilpotentRep] | GsubResult) -> list[DesingComponent]:
    if isinstance(types, GsubResult):
        types = types.types
    if not types:
        raise ValueError("desingularization needs at least one generic type")
    amb = lambda_(M)
    out = []
    for c, T in enumerate(types, 1):
        T = NilpotentRep(M.n, T.summands, M.N)
        if list(dimension_vector(T)) != list(e):
            raise ValueError(f"{T} does not have dimension vector {tuple(e)}")
        target = lambda_(T, M.N).dims()
        ad = amb.dims()
        if any(target[v] > ad[v] for v in target):
            raise ValueError(f"Lambda({T}) does not fit into Lambda(M)")
        out.append(DesingComponent(T, target, amb, c))
    return out


def component_graph(
    comp: DesingComponent,
    downstairs: MomentGraph | None = None,
    chi: Cocharacter | None = None,
    seed: int = 0,
) -> MomentGraph:
    """Upstairs moment graph; points named p<j>_<c> after their downstairs image."""
    Q = comp.ambient.coeff
    if chi is None:
        chi = downstairs.cocharacter if downstairs is not None else choose_cocharacter(Q)
    g = moment_graph(Q, comp.target, chi, points=comp.fixed_points(), seed=seed)
    if downstairs is not None:
        names = []
        seen: dict[str, int] = {}
        for W in g.fixed_points:
            base = downstairs.names[downstairs.index_of(res_points(W))]
            seen[base] = seen.get(base, 0) + 1
            names.append((base, seen[base]))
        counts = {b: c for b, c in seen.items()}
        g.names = [
            f"{b}_{comp.index}" if counts[b] == 1 else f"{b}_{comp.index}.{r}" for b, r in names
        ]
        g.types = [str(iso_type(res_points(W), comp.M)) for W in g.fixed_points]
    else:
        g.names = [f"u{i}_{comp.index}" for i in range(1, len(g.fixed_points) + 1)]
    return g


def fiber(comp: DesingComponent, p: Iterable[BasisVector], chi: Cocharacter | None = None) -> dict:
    """Fiber of the component's desingularization over a downstairs fixed point."""
    p = frozenset(p)
    M = comp.M
    U = lift(p, M, M.N)
    ud = comp.ambient.dims(U)
    diff = {v: comp.target[v] - ud[v] for v in comp.target}
    grid = {f"{i},{k}": diff[(i, k)] for i, k in sorted(diff, key=lambda v: (v[1], v[0]))}
    if any(x < 0 for x in diff.values()):
        return {"dims": grid, "nonempty": False, "dimension": None, "preimages": []}
    Qt = comp.ambient.quotient(U)
    pts = fixed_points(Qt.coeff, diff)
    if not pts:
        return {"dims": grid, "nonempty": False, "dimension": None, "preimages": []}
    g = moment_graph(Qt.coeff, diff, chi or choose_cocharacter(Qt.coeff, d=Qt.coeff.d), points=pts)
    pre = sorted((frozenset(W | U) for W in pts), key=lambda s: sorted(s))
    return {
        "dims": grid,
        "nonempty": True,
        "dimension": max(g.outdegrees()),
        "preimages": pre,
    }


def _tower_factors(comp: DesingComponent) -> list[tuple[tuple[int, int], int, int]]:
    """Per grid vertex (i, k): the fiber Gr_a(C^b) of X_k -> X_(k+1)."""
    n, N = comp.ambient.n, comp.ambient.N
    m = comp.ambient.dims()
    t = comp.target
    Q = comp.ambient.quiver

    def at(g, i, k):
        return g[(Q.wrap(i), k)] if 1 <= k <= N else 0

    out = []
    for k in range(N, 0, -1):
        for i in range(1, n + 1):
            a = at(t, i, k) - at(t, i - 1, k + 1)
            b = at(t, i, k + 1) + at(m, i, k) - at(m, i, k + 1) - at(t, i - 1, k + 1)
            out.append(((i, k), a, b))
    return out


def gaussian_binomial(b: int, a: int) -> list[int]:
    """Coefficients of the q-binomial [b choose a]."""
    if a < 0 or a > b:
        return [0]
    num = [1]
    for j in range(a):
        num = poly_mul(num, [1] + [0] * (b - j - 1) + [-1])  # 1 - q^(b-j)
    den = [1]
    for j in range(a):
        den = poly_mul(den, [1] + [0] * j + [-1])  # 1 - q^(j+1)
    return _poly_div_exact(num, den)


def poly_mul(p: Sequence[int], q: Sequence[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_div_exact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out)):
        c = num[i] // den[0]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    if any(num):
        raise ArithmeticError("inexact polynomial division")
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def tower_profile(comp: DesingComponent) -> dict:
    """Grassmann-bundle tower of the component, with total dimension and Poincare polynomial."""
    levels = []
    poincare = [1]
    total = 0
    for (i, k), a, b in _tower_factors(comp):
        if a < 0 or b < a:
            raise ValueError(f"inconsistent tower factor at ({i},{k}): Gr_{a}(C^{b})")
        if not levels or levels[-1]["level"] != k:
            levels.append({"level": k, "factors": []})
        levels[-1]["factors"].append({"vertex": i, "sub": a, "ambient": b})
        total += a * (b - a)
        poincare = poly_mul(poincare, gaussian_binomial(b, a))
    return {"levels": levels, "dimension": total, "poincare": poincare}
