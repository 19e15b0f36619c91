"""Equivariant cohomology: GKM classes, Euler classes, local indices, triangular bases.

Euler classes follow Eu(y, Y) = (-1)^dim Y * (product of tangent weights) at
smooth points. The tangent weight of an outgoing edge is its stored label and
of an incoming edge the negated label. EulerTable stores inverse Euler classes,
the quantities that add up over resolutions and components.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .cyclequiver import NilpotentRep, iso_type, stratum_dim
from .cylinder import DesingComponent, component_graph, desing_components, res_points
from .exactalg import (
    Character,
    Cocharacter,
    Polynomial,
    RationalFunction,
    divides,
    parse_rational_function,
    rf_sum,
)
from .momentgraph import MomentGraph

__all__ = [
    "EquivariantClass",
    "EulerTable",
    "Filtration",
    "CellClosure",
    "EulerUndetermined",
    "gkm_check",
    "euler_smooth",
    "euler_via_resolution",
    "cell_closures",
    "populate_euler_table",
    "local_index",
    "basis_solve",
    "basis_verify",
    "sign_table",
    "unsigned_factors",
]


class EulerUndetermined(KeyError):
    """Raised when an Euler class needed by a computation has no rule and no user datum."""

    def __init__(self, missing: Sequence[tuple[str, str]]):
        self.missing = list(missing)
        super().__init__(f"euler class undetermined for {self.missing}")


@dataclass
class EquivariantClass:
    values: list[Polynomial]
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.names:
            self.names = [f"p{i}" for i in range(1, len(self.values) + 1)]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Polynomial:
        return self.values[i]

    def is_homogeneous(self) -> bool:
        degs = {v.degree() for v in self.values if not v.is_zero()}
        return len(degs) <= 1 and all(v.is_homogeneous() for v in self.values)

    def degree(self) -> int | None:
        degs = {v.degree() for v in self.values if not v.is_zero()}
        return degs.pop() if len(degs) == 1 else None

    def to_dict(self) -> dict:
        return {name: v.render() for name, v in zip(self.names, self.values)}

    @classmethod
    def constant(cls, g: MomentGraph, c: int = 1) -> "EquivariantClass":
        return cls([Polynomial.constant(c, g.d) for _ in g.fixed_points], list(g.names))


def gkm_check(f: EquivariantClass, g: MomentGraph) -> tuple[bool, list[dict]]:
    """Edge divisibility f_src - f_dst in (label)."""
    if len(f) != len(g.fixed_points):
        raise ValueError(f"class has {len(f)} entries, graph has {len(g.fixed_points)} fixed points")
    bad = []
    for e in g.edges:
        diff = f[e.src] - f[e.dst]
        if not divides(e.label, diff):
            bad.append({"src": g.names[e.src], "dst": g.names[e.dst], "label": e.label.render(), "difference": diff.render()})
    return not bad, bad


def tangent_weights(x: int, g: MomentGraph) -> list[Character]:
    return [e.label for e in g.out_edges(x)] + [-e.label for e in g.in_edges(x)]


def euler_smooth(x: int, g: MomentGraph, dim: int) -> Polynomial:
    """(-1)^dim times the product of tangent weights; refuses uncertified points."""
    weights = tangent_weights(x, g)
    if len(weights) != dim:
        raise ValueError(f"{g.names[x]} has degree {len(weights)} != {dim}: not certified smooth")
    p = Polynomial.product(weights, g.d)
    return p.scale(-1) if dim % 2 else p


def euler_via_resolution(
    x: Iterable,
    comps: Sequence[tuple[DesingComponent, MomentGraph]],
) -> dict:
    """Inverse Euler class at a downstairs fixed point summed over smooth resolutions.

    Only components of the largest dimension through x contribute, so the sum
    stays homogeneous. Returns {"inverse": Eu^-1, "euler": Eu or None, "terms": [...]};
    euler is None when the summed inverse vanishes or its numerator does not split.
    """
    x = frozenset(x)
    found = []
    for comp, cg in comps:
        dim = comp.dimension()
        for j, W in enumerate(cg.fixed_points):
            if res_points(W) == x:
                found.append((dim, j, cg))
    if not found:
        raise ValueError("fixed point is not in the image of any listed component")
    top = max(dim for dim, _, _ in found)
    terms = []
    for dim, j, cg in found:
        if dim == top:
            eu = euler_smooth(j, cg, dim)
            terms.append((cg.names[j], RationalFunction.one(cg.d) / RationalFunction.from_polynomial(eu)))
    d = comps[0][1].d
    inv = rf_sum([t for _, t in terms], d)
    try:
        euler = None if inv.is_zero() else inv.reciprocal()
    except ValueError:
        euler = None
    return {"inverse": inv, "euler": euler, "terms": terms}


@dataclass
class Filtration:
    """Fixed points x_1..x_m; Z_i is the prefix {x_1..x_i}."""

    names: list[str]

    @classmethod
    def from_graph(cls, g: MomentGraph) -> "Filtration":
        return cls(list(g.names))

    def Z(self, i: int) -> list[int]:
        """0-based indices of the points of Z_i (i is 1-based)."""
        return list(range(i))

    def check(self, g: MomentGraph) -> list[str]:
        pos = {name: k for k, name in enumerate(self.names)}
        bad = []
        for e in g.edges:
            if pos[g.names[e.dst]] >= pos[g.names[e.src]]:
                bad.append(f"{g.names[e.src]}->{g.names[e.dst]}")
        return bad


class EulerTable:
    """Inverse Euler classes keyed by (fixed point name, subvariety id)."""

    def __init__(self, d: int):
        self.d = d
        self.inverse: dict[tuple[str, str], RationalFunction] = {}
        self.methods: dict[str, str] = {}

    def set(self, point: str, sub: str, inv: RationalFunction) -> None:
        self.inverse[(point, sub)] = inv

    def get(self, point: str, sub: str) -> RationalFunction:
        try:
            return self.inverse[(point, sub)]
        except KeyError:
            raise EulerUndetermined([(point, sub)]) from None

    def has(self, point: str, sub: str) -> bool:
        return (point, sub) in self.inverse

    def euler(self, point: str, sub: str) -> RationalFunction:
        return self.get(point, sub).reciprocal()

    def to_dict(self, orient: Cocharacter | None = None) -> dict:
        out: dict = {}
        for (pt, sub), v in sorted(self.inverse.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            out.setdefault(sub, {})[pt] = v.render(orient)
        return {"d": self.d, "inverse_euler": out, "methods": dict(sorted(self.methods.items()))}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "EulerTable":
        t = cls(int(data["d"]))
        for sub, entries in data.get("inverse_euler", {}).items():
            for pt, text in entries.items():
                t.set(pt, sub, parse_rational_function(text, t.d))
        t.methods.update(data.get("methods", {}))
        return t

    @classmethod
    def from_json(cls, text: str) -> "EulerTable":
        return cls.from_dict(json.loads(text))

    def merge(self, other: "EulerTable") -> None:
        for k, v in other.inverse.items():
            self.inverse.setdefault(k, v)


@dataclass
class CellClosure:
    """Closure of the cell of one fixed point with its inverse Euler classes."""

    top: int
    dim: int
    points: frozenset  # downstairs indices
    method: str  # component, stratum, smooth-subgraph, undetermined
    inverse: dict = field(default_factory=dict)  # downstairs index -> RationalFunction
    generic_type: str = ""


def _localization_consistent(g: MomentGraph, points: Sequence, inverse: Sequence, dim: int) -> bool:
    """Localization test for a smooth compact closure of dimension dim.

    With c the tautological first Chern class, sum c^k / Eu must vanish for
    k < dim and be constant for k = dim. A regular graph alone does not
    certify smoothness; this rejects closures that fail integration.
    """
    if dim == 0:
        return True
    c1 = []
    for S in points:
        chi = Character.zero(g.d)
        for b in S:
            chi = chi + g.quiver.weight_of[b]
        c1.append(RationalFunction.from_character(chi))
    power = [RationalFunction.one(g.d)] * len(points)
    for k in range(dim + 1):
        s = rf_sum([p * inv for p, inv in zip(power, inverse)], g.d)
        if k < dim and not s.is_zero():
            return False
        if k == dim and not (s.is_polynomial() and s.to_polynomial().is_constant()):
            return False
        power = [p * c for p, c in zip(power, c1)]
    return True


def _stratum_closure(
    g: MomentGraph, M: NilpotentRep, j: int, T: NilpotentRep, index: int
) -> tuple[frozenset, dict] | None:
    """Resolve the stratum closure of T via Gr_{dim Lambda T}(Lambda M); None if not certified smooth."""
    dims = g.quiver.dims(g.fixed_points[0])
    e = [dims.get(v, 0) for v in range(1, M.n + 1)]
    comp = desing_components(M, e, [T])[0]
    comp.index = index
    cg = component_graph(comp, g, chi=g.cocharacter)
    dim = comp.dimension()
    if any(deg != dim for deg in cg.degrees()) or max(cg.outdegrees(), default=0) != dim:
        return None
    one = RationalFunction.one(g.d)
    upstairs = [one / RationalFunction.from_polynomial(euler_smooth(k, cg, dim)) for k in range(len(cg.fixed_points))]
    if not _localization_consistent(cg, cg.fixed_points, upstairs, dim):
        return None
    pre: dict[int, list] = {}
    for k, W in enumerate(cg.fixed_points):
        pre.setdefault(g.index_of(res_points(W)), []).append(upstairs[k])
    if len(pre.get(j, [])) != 1:
        return None
    # a cell can leave its stratum; the cell closure only reaches points below j
    if not set(pre) <= set(g.descendants(j)) | {j}:
        return None
    inverse = {x: rf_sum(v, g.d) for x, v in pre.items()}
    return frozenset(inverse), inverse


def cell_closures(
    g: MomentGraph,
    M: NilpotentRep,
    generic: Sequence[NilpotentRep] = (),
    user: EulerTable | None = None,
) -> list[CellClosure]:
    """Closures of all cells of g under the Euler class policy.

    Stratum closures (cell dimension equals the stratum dimension of the type)
    are resolved by the Lambda-construction; other cells fall back to the
    reachable subgraph when it is regular of the cell dimension and passes
    the localization test; else the
    closure is undetermined unless a user table has "cell-closure:x" entries.
    """
    od = g.outdegrees()
    gen_keys = {NilpotentRep(M.n, T.summands, M.N).type_key() for T in generic}
    out = []
    for j, S in enumerate(g.fixed_points):
        T = iso_type(S, M)
        sd = stratum_dim(T, M)
        name = g.names[j]
        if od[j] == 0:
            out.append(CellClosure(j, 0, frozenset([j]), "point", {j: RationalFunction.one(g.d)}, str(T)))
            continue
        if od[j] == sd:
            res = _stratum_closure(g, M, j, T, j + 1)
            if res is not None:
                method = "component" if T.type_key() in gen_keys else "stratum"
                out.append(CellClosure(j, od[j], res[0], method, res[1], str(T)))
                continue
        reach = sorted(g.descendants(j))
        sub = g.induced(reach)
        if all(deg == od[j] for deg in sub.degrees()):
            inverse = {}
            for k, x in enumerate(reach):
                inverse[x] = RationalFunction.one(g.d) / RationalFunction.from_polynomial(euler_smooth(k, sub, od[j]))
            points = [g.fixed_points[x] for x in reach]
            if _localization_consistent(g, points, [inverse[x] for x in reach], od[j]):
                out.append(CellClosure(j, od[j], frozenset(reach), "smooth-subgraph", inverse, str(T)))
                continue
        key = f"cell-closure:{name}"
        if user is not None and any(s == key for _, s in user.inverse):
            inverse = {g.names.index(pt): v for (pt, s), v in user.inverse.items() if s == key}
            out.append(CellClosure(j, od[j], frozenset(inverse), "user", inverse, str(T)))
            continue
        out.append(CellClosure(j, od[j], frozenset(reach), "undetermined", {}, str(T)))
    return out


def z_components(closures: Sequence[CellClosure], i: int) -> list[CellClosure]:
    """Maximal cell closures among the first i, by fixed point containment."""
    cands = list(closures[:i])
    out = []
    for c in cands:
        if any(o is not c and c.points < o.points for o in cands):
            continue
        if any(o is not c and c.points == o.points and o.top > c.top for o in cands):
            continue
        out.append(c)
    return out


def populate_euler_table(
    g: MomentGraph,
    closures: Sequence[CellClosure],
    user: EulerTable | None = None,
    policy: str = "equidim",
) -> tuple[EulerTable, list[tuple[str, str]]]:
    """Inverse Euler classes Eu^-1(x_j, Z_i) for all x_j in Z_i.

    policy "cell": Z_i contributes through the closure of its newest cell only.
    policy "equidim": all maximal closures in Z_i of dimension dim W_i.
    Returns the table and the list of undetermined keys.
    """
    table = EulerTable(g.d)
    if user is not None:
        table.merge(user)
    missing: list[tuple[str, str]] = []
    for c in closures:
        table.methods[f"cell-closure:{g.names[c.top]}"] = c.method
        for x, v in c.inverse.items():
            table.set(g.names[x], f"cell-closure:{g.names[c.top]}", v)
    m = len(g.fixed_points)
    for i in range(1, m + 1):
        sub = f"Z_{i}"
        if policy == "cell":
            used = [closures[i - 1]]
        elif policy == "equidim":
            used = [c for c in z_components(closures, i) if c.dim == closures[i - 1].dim]
        else:
            raise ValueError(f"unknown policy {policy!r}")
        table.methods[sub] = "+".join(f"{g.names[c.top]}:{c.method}" for c in used)
        for x in range(i):
            if table.has(g.names[x], sub):
                continue
            terms = []
            undetermined = False
            for c in used:
                if c.method == "undetermined":
                    if x in c.points:
                        undetermined = True
                    continue
                if x in c.inverse:
                    terms.append(c.inverse[x])
            if undetermined:
                missing.append((g.names[x], sub))
                continue
            table.set(g.names[x], sub, rf_sum(terms, g.d))
    return table, missing


def local_index(f: EquivariantClass, i: int, filt: Filtration, eu: EulerTable) -> RationalFunction:
    """Sum over x_j in Z_i of f_{x_j} * Eu^-1(x_j, Z_i); i is 1-based."""
    terms = []
    missing = []
    for j in filt.Z(i):
        if f[j].is_zero():
            continue
        key = (filt.names[j], f"Z_{i}")
        if key not in eu.inverse:
            missing.append(key)
            continue
        terms.append(RationalFunction.from_polynomial(f[j]) * eu.inverse[key])
    if missing:
        raise EulerUndetermined(missing)
    return rf_sum(terms, eu.d)


def basis_solve(g: MomentGraph, filt: Filtration, eu: EulerTable) -> list[EquivariantClass]:
    """The triangular basis theta^(i) determined by the local index conditions."""
    m = len(g.fixed_points)
    d = g.d
    out = []
    for i in range(1, m + 1):
        vals = [Polynomial.zero(d) for _ in range(m)]
        diag_inv = eu.get(filt.names[i - 1], f"Z_{i}")
        diag = diag_inv.reciprocal()
        if not diag.is_polynomial():
            raise ArithmeticError(f"Eu({filt.names[i - 1]}, Z_{i}) is not a polynomial: {diag}")
        vals[i - 1] = diag.to_polynomial()
        for j in range(i + 1, m + 1):
            terms = []
            missing = []
            for k in range(i - 1, j - 1):
                if vals[k].is_zero():
                    continue
                key = (filt.names[k], f"Z_{j}")
                if key not in eu.inverse:
                    missing.append(key)
                    continue
                terms.append(RationalFunction.from_polynomial(vals[k]) * eu.inverse[key])
            if missing:
                raise EulerUndetermined(missing)
            s = rf_sum(terms, d)
            if s.is_zero():
                continue
            own = eu.get(filt.names[j - 1], f"Z_{j}")
            val = -(s / own)
            if not val.is_polynomial():
                raise ArithmeticError(f"theta^({i}) at {filt.names[j - 1]} is not polynomial: {val}")
            vals[j - 1] = val.to_polynomial()
        out.append(EquivariantClass(vals, list(filt.names)))
    return out


def unsigned_factors(p: Polynomial) -> tuple | None:
    """Sorted sign-normalized linear factors with multiplicity, or None if not a product of linear forms."""
    from .exactalg import linear_factorization

    if p.is_zero():
        return ("0",)
    scalar, facs = linear_factorization(p)
    if facs is None:
        return None
    items = []
    for ch, mult in facs.items():
        items.extend([ch.sign_normalized()[1].render()] * mult)
    return (str(abs(scalar)),) + tuple(sorted(items))


def basis_verify(classes: Sequence[EquivariantClass], g: MomentGraph, filt: Filtration | None = None) -> dict:
    """GKM membership, triangularity, diagonal, degree and free-basis checks."""
    filt = filt or Filtration.from_graph(g)
    m = len(g.fixed_points)
    od = g.outdegrees()
    report = {"classes": [], "ok": True}
    if len(classes) != m:
        report["ok"] = False
        report["count"] = f"{len(classes)} classes for {m} fixed points"
    diag_nonzero = True
    for i, f in enumerate(classes[:m]):
        gk, bad = gkm_check(f, g)
        tri = all(f[j].is_zero() for j in range(i))
        expected = Polynomial.product([e.label for e in g.out_edges(i)], g.d)
        diag = f[i]
        diag_ok = diag == expected or diag == expected.scale(-1)
        hom = f.is_homogeneous() and (f.degree() == od[i])
        if diag.is_zero():
            diag_nonzero = False
        entry = {
            "class": i + 1,
            "gkm": gk,
            "triangular": tri,
            "diagonal": diag_ok,
            "homogeneous_degree": hom,
        }
        if bad:
            entry["violations"] = bad
        report["classes"].append(entry)
        if not (gk and tri and diag_ok and hom):
            report["ok"] = False
    report["free_basis"] = diag_nonzero and len(classes) == m
    report["ok"] = report["ok"] and report["free_basis"] and not filt.check(g)
    return report


def sign_table(g: MomentGraph, display: Mapping[tuple[str, str], Character] | None = None) -> list[dict]:
    """Per edge: stored label, display label and the sign relating them."""
    rows = []
    for e in g.edges:
        key = (g.names[e.src], g.names[e.dst])
        disp = display.get(key, e.label) if display else e.label
        if disp == e.label:
            sign = 1
        elif disp == -e.label:
            sign = -1
        else:
            sign = 0  # not a sign change: the display label differs
        rows.append({"src": key[0], "dst": key[1], "stored": e.label.render(), "display": disp.render(), "sign": sign})
    return rows
