"""Torus fixed points, moment graphs, cells and graph export.

Works on any CoefficientQuiver: the cycle coefficient quiver of a nilpotent
representation or the cylinder coefficient quiver of its Lambda-image.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .cyclequiver import CoefficientQuiver
from .exactalg import Character, Cocharacter, pairing
from .kernels import enumerate_closed

__all__ = [
    "FixedPoint",
    "Edge",
    "MomentGraph",
    "fixed_points",
    "candidate_labels",
    "choose_cocharacter",
    "moment_graph",
    "cells",
    "poincare_polynomial",
    "smoothness_report",
    "export",
    "GraphDocument",
    "label_text",
]

FixedPoint = frozenset


def label_text(lab) -> str:
    """b11 for cycle labels, b11^2 for cylinder label (b, level)."""
    if isinstance(lab, tuple) and len(lab) == 2 and isinstance(lab[0], tuple):
        b, k = lab
        return f"{label_text(b)}^{k}"
    if isinstance(lab, tuple) and len(lab) == 2:
        c, k = lab
        return f"b{c}{k}" if c < 10 and k < 10 else f"b({c},{k})"
    return str(lab)


def _closure_order(Q: CoefficientQuiver) -> list[int]:
    """Label indices with every label listed after all of its successors."""
    idx = Q.index
    n = len(Q.labels)
    succ = [[idx[t] for t in Q.successors(lab)] for lab in Q.labels]
    indeg = [0] * n  # number of unprocessed successors
    preds: list[list[int]] = [[] for _ in range(n)]
    for i, ss in enumerate(succ):
        indeg[i] = len(ss)
        for j in ss:
            preds[j].append(i)
    ready = [i for i in range(n) if indeg[i] == 0]
    out = []
    while ready:
        ready.sort()
        i = ready.pop(0)
        out.append(i)
        for p in preds[i]:
            indeg[p] -= 1
            if indeg[p] == 0:
                ready.append(p)
    if len(out) != n:
        raise ValueError("coefficient quiver has an oriented cycle")
    return out


def fixed_points(Q: CoefficientQuiver, target: Mapping) -> list[FixedPoint]:
    """Successor-closed label sets with the prescribed count per vertex, sorted."""
    verts = Q.vertices()
    for v in target:
        if v not in verts and target[v]:
            return []
    vid = {v: i for i, v in enumerate(verts)}
    tgt = [int(target.get(v, 0)) for v in verts]
    succ = [[Q.index[t] for t in Q.successors(lab)] for lab in Q.labels]
    vertex = [vid[Q.vertex_of[lab]] for lab in Q.labels]
    raw = enumerate_closed(succ, vertex, tgt, _closure_order(Q))
    pts = [frozenset(Q.labels[i] for i in r) for r in raw]
    return sorted(pts, key=lambda s: sorted(s))


def candidate_labels(Q: CoefficientQuiver) -> set[Character]:
    """All nonzero weight differences between labels at a common vertex."""
    by_v: dict = {}
    for lab in Q.labels:
        by_v.setdefault(Q.vertex_of[lab], []).append(Q.weight_of[lab])
    out = set()
    for ws in by_v.values():
        for a in ws:
            for b in ws:
                diff = b - a
                if not diff.is_zero():
                    out.add(diff)
    return out


def choose_cocharacter(Q: CoefficientQuiver | None = None, labels: Iterable[Character] | None = None,
                       d: int | None = None) -> Cocharacter:
    """chi = (K; 1, 2, ..., d) with K the least integer > d * span pairing every label nonzero."""
    labs = set(labels) if labels is not None else set()
    if Q is not None:
        labs |= candidate_labels(Q)
        d = Q.d
    if d is None:
        d = next(iter(labs)).d if labs else 0
    span = max((abs(a.delta) for a in labs), default=0)
    K = d * span + 1
    eps = tuple(range(1, d + 1))
    while True:
        chi = Cocharacter(K, eps)
        if all(pairing(chi, a) != 0 for a in labs):
            return chi
        K += 1


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: Character  # pairing-positive
    matching: tuple  # pairs (a in src, m(a) in dst)


@dataclass
class MomentGraph:
    quiver: CoefficientQuiver
    fixed_points: list[FixedPoint]
    edges: list[Edge]
    cocharacter: Cocharacter
    names: list[str] = field(default_factory=list)
    types: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.names:
            self.names = [f"p{i}" for i in range(1, len(self.fixed_points) + 1)]
        if not self.types:
            self.types = [""] * len(self.fixed_points)

    @property
    def d(self) -> int:
        return self.quiver.d

    def index_of(self, S: Iterable) -> int:
        return self.fixed_points.index(frozenset(S))

    def out_edges(self, i: int) -> list[Edge]:
        return [e for e in self.edges if e.src == i]

    def in_edges(self, i: int) -> list[Edge]:
        return [e for e in self.edges if e.dst == i]

    def adjacent(self, i: int) -> list[Edge]:
        return [e for e in self.edges if i in (e.src, e.dst)]

    def outdegrees(self) -> list[int]:
        out = [0] * len(self.fixed_points)
        for e in self.edges:
            out[e.src] += 1
        return out

    def degrees(self) -> list[int]:
        out = [0] * len(self.fixed_points)
        for e in self.edges:
            out[e.src] += 1
            out[e.dst] += 1
        return out

    def descendants(self, i: int) -> set[int]:
        """Fixed points reachable from i along oriented edges (i included)."""
        seen = {i}
        stack = [i]
        while stack:
            x = stack.pop()
            for e in self.edges:
                if e.src == x and e.dst not in seen:
                    seen.add(e.dst)
                    stack.append(e.dst)
        return seen

    def induced(self, keep: Sequence[int]) -> "MomentGraph":
        """Subgraph on the given fixed points (kept in the given order)."""
        pos = {old: new for new, old in enumerate(keep)}
        edges = [
            Edge(pos[e.src], pos[e.dst], e.label, e.matching)
            for e in self.edges
            if e.src in pos and e.dst in pos
        ]
        return MomentGraph(
            self.quiver,
            [self.fixed_points[i] for i in keep],
            edges,
            self.cocharacter,
            [self.names[i] for i in keep],
            [self.types[i] for i in keep],
        )

    def reordered(self, order: Sequence[int]) -> "MomentGraph":
        return self.induced(order)

    def is_topologically_ordered(self) -> bool:
        return all(e.dst < e.src for e in self.edges)

    def is_acyclic(self) -> bool:
        n = len(self.fixed_points)
        succ = [[] for _ in range(n)]
        indeg = [0] * n
        for e in self.edges:
            succ[e.src].append(e.dst)
            indeg[e.dst] += 1
        ready = [i for i in range(n) if indeg[i] == 0]
        seen = 0
        while ready:
            x = ready.pop()
            seen += 1
            for y in succ[x]:
                indeg[y] -= 1
                if indeg[y] == 0:
                    ready.append(y)
        return seen == n


def _grow_matching(Q: CoefficientQuiver, S: FixedPoint, a, b) -> dict | None:
    """Close the seed a -> b under all arrows (forward and backward); None on failure."""
    m = {a: b}
    img = {b}
    queue = [(a, b)]
    while queue:
        x, y = queue.pop()
        for kind, amap in Q.arrows.items():
            fx, fy = amap.get(x), amap.get(y)
            if fx is None:
                if fy is not None and (fy not in S or fy in m):
                    return None
            elif fx in m:
                if m[fx] != fy:
                    return None
            elif fy is None or fy in S:
                pass
            else:
                if fy in img:
                    return None
                m[fx] = fy
                img.add(fy)
                queue.append((fx, fy))
            inv = Q.preds[kind]
            px, py = inv.get(x), inv.get(y)
            if px is not None and px in S and px not in m:
                if py is None or py in S or py in img:
                    return None
                m[px] = py
                img.add(py)
                queue.append((px, py))
    return m


def family_is_subrepresentation(Q: CoefficientQuiver, S: FixedPoint, m: Mapping, t: int | Fraction) -> bool:
    """Is span(S minus A, a + t m(a)) closed under every arrow at this t?"""
    inv = {y: x for x, y in m.items()}
    gens: list[dict] = [{s: 1} for s in S if s not in m]
    gens += [{x: 1, y: t} for x, y in m.items()]
    for g in gens:
        for amap in Q.arrows.values():
            v: dict = {}
            for lab, c in g.items():
                tl = amap.get(lab)
                if tl is not None:
                    v[tl] = v.get(tl, 0) + c
            v = {k: c for k, c in v.items() if c}
            for lab, c in v.items():
                if lab in S and lab not in m:
                    continue
                if lab in m:
                    if v.get(m[lab], 0) != c * t:
                        return False
                elif lab in inv:
                    if v.get(inv[lab], 0) * t != c:
                        return False
                else:
                    return False
    return True


def moment_graph(
    Q: CoefficientQuiver,
    target: Mapping | None = None,
    chi: Cocharacter | None = None,
    *,
    points: Sequence[FixedPoint] | None = None,
    order_key: Callable[[FixedPoint], tuple] | None = None,
    type_of: Callable[[FixedPoint], str] | None = None,
    seed: int = 0,
    prefix: str = "p",
) -> MomentGraph:
    """Fixed points joined by matched-move edges, oriented by chi, topologically ordered."""
    if points is None:
        if target is None:
            raise ValueError("moment_graph needs a target dimension vector or explicit points")
        points = fixed_points(Q, target)
    points = list(points)
    if chi is None:
        chi = choose_cocharacter(Q)
    pid = {S: i for i, S in enumerate(points)}
    rng = random.Random(seed)
    edges: dict = {}
    wt = Q.weight_of
    diffs: dict = {}

    def diff(x, y):
        key = (x, y)
        if key not in diffs:
            diffs[key] = wt[y] - wt[x]
        return diffs[key]

    for S in points:
        inside = sorted(S)
        outside = [lab for lab in Q.labels if lab not in S]
        for a in inside:
            for b in outside:
                if Q.vertex_of[a] != Q.vertex_of[b]:
                    continue
                alpha = diff(a, b)
                if alpha.is_zero():
                    continue
                m = _grow_matching(Q, S, a, b)
                if m is None:
                    continue
                if any(diff(x, y) != alpha for x, y in m.items()):
                    raise AssertionError("matched pairs with different characters")
                S2 = frozenset((S - set(m)) | set(m.values()))
                if S2 not in pid:
                    continue
                key = (frozenset((pid[S], pid[S2])), alpha.sign_normalized()[1])
                if key in edges:
                    continue
                if not all(
                    family_is_subrepresentation(Q, S, m, rng.randint(2, 10**9))
                    for _ in range(3)
                ):
                    continue
                p = pairing(chi, alpha)
                if p == 0:
                    raise ValueError(f"cocharacter {chi} is not generic: pairs to zero with {alpha}")
                pairs = tuple(sorted(m.items()))
                if p > 0:
                    edges[key] = (pid[S], pid[S2], alpha, pairs)
                else:
                    edges[key] = (pid[S2], pid[S], -alpha, tuple(sorted((y, x) for x, y in pairs)))
    raw = [Edge(s, t, lab, mt) for s, t, lab, mt in edges.values()]
    g = MomentGraph(Q, points, raw, chi)
    g = g.reordered(topological_order(g, order_key))
    g.names = [f"{prefix}{i}" for i in range(1, len(points) + 1)]
    if type_of is not None:
        g.types = [type_of(S) for S in g.fixed_points]
    return g


def topological_order(g: MomentGraph, order_key: Callable[[FixedPoint], tuple] | None = None) -> list[int]:
    """Targets first; ties broken by (cell dimension, order_key, sorted labels)."""
    n = len(g.fixed_points)
    outdeg = g.outdegrees()
    waiting = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    for e in g.edges:
        waiting[e.src] += 1
        preds[e.dst].append(e.src)

    def key(i):
        S = g.fixed_points[i]
        extra = order_key(S) if order_key else ()
        return (outdeg[i],) + tuple(extra) + (tuple(sorted(S)),)

    ready = [i for i in range(n) if waiting[i] == 0]
    order = []
    while ready:
        ready.sort(key=key)
        x = ready.pop(0)
        order.append(x)
        for p in preds[x]:
            waiting[p] -= 1
            if waiting[p] == 0:
                ready.append(p)
    if len(order) != n:
        raise ValueError("oriented moment graph has a cycle")
    return order


def cells(g: MomentGraph) -> dict[str, int]:
    return dict(zip(g.names, g.outdegrees()))


def poincare_polynomial(g: MomentGraph) -> list[int]:
    """Coefficients [b_0, b_1, ...] of sum_x q^outdeg(x)."""
    od = g.outdegrees()
    coeffs = [0] * (max(od, default=0) + 1)
    for k in od:
        coeffs[k] += 1
    return coeffs


def poly_text(coeffs: Sequence[int], var: str = "q") -> str:
    parts = []
    for k, c in enumerate(coeffs):
        if not c:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}{mono}")
    return " + ".join(parts) or "0"


def smoothness_report(g: MomentGraph, ambient_dim: int) -> list[dict]:
    out = []
    degs = g.degrees()
    for i, name in enumerate(g.names):
        labels = [e.label for e in g.adjacent(i)]
        regular = all(
            not labels[a].is_proportional(labels[b]) for a in range(len(labels)) for b in range(a + 1, len(labels))
        )
        out.append(
            {
                "point": name,
                "degree": degs[i],
                "singular_candidate": degs[i] > ambient_dim,
                "gkm_regular": regular,
            }
        )
    return out


@dataclass
class GraphDocument:
    """Serializable view of a moment graph."""

    vertices: list[dict]
    edges: list[dict]
    cocharacter: list[int]

    @classmethod
    def from_graph(cls, g: MomentGraph) -> "GraphDocument":
        od = g.outdegrees()
        verts = [
            {
                "id": g.names[i],
                "labels": [label_text(lab) for lab in sorted(S)],
                "type": g.types[i],
                "cell_dim": od[i],
            }
            for i, S in enumerate(g.fixed_points)
        ]
        edges = [
            {
                "src": g.names[e.src],
                "dst": g.names[e.dst],
                "label": e.label.render(),
                "display_label": e.label.render(),
            }
            for e in g.edges
        ]
        edges.sort(key=lambda x: (g.names.index(x["src"]), g.names.index(x["dst"])), reverse=True)
        return cls(verts, edges, g.cocharacter.as_list())

    @classmethod
    def from_json(cls, text: str) -> "GraphDocument":
        data = json.loads(text)
        for k in ("vertices", "edges", "cocharacter"):
            if k not in data:
                raise ValueError(f"graph JSON lacks {k!r}")
        return cls(data["vertices"], data["edges"], data["cocharacter"])

    def to_dict(self) -> dict:
        return {"vertices": self.vertices, "edges": self.edges, "cocharacter": self.cocharacter}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_dot(self) -> str:
        lines = ["digraph moment_graph {", "  rankdir=TB;"]
        for v in self.vertices:
            lab = f"{v['id']}\\n{{{','.join(v['labels'])}}}"
            lines.append(f'  "{v["id"]}" [label="{lab}", cell_dim={v["cell_dim"]}];')
        for e in self.edges:
            lines.append(f'  "{e["src"]}" -> "{e["dst"]}" [label="{e["display_label"]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_tikz(self) -> str:
        rows: dict[int, list[str]] = {}
        for v in self.vertices:
            rows.setdefault(v["cell_dim"], []).append(v["id"])
        pos = {}
        for dim, ids in rows.items():
            for j, vid in enumerate(ids):
                pos[vid] = (2.0 * j - (len(ids) - 1), 1.5 * dim)
        lines = ["\\begin{tikzpicture}[>=stealth]"]
        for v in self.vertices:
            x, y = pos[v["id"]]
            lines.append(f"  \\node ({v['id']}) at ({x:.2f},{y:.2f}) {{${_tex_name(v['id'])}$}};")
        for e in self.edges:
            lines.append(
                f"  \\draw[->] ({e['src']}) -- node[midway, font=\\tiny, fill=white] "
                f"{{${_tex_label(e['display_label'])}$}} ({e['dst']});"
            )
        lines.append("\\end{tikzpicture}")
        return "\n".join(lines) + "\n"


def _tex_name(name: str) -> str:
    if name[:1] == "p" and name[1:].replace("_", "").isdigit():
        return "p_{" + name[1:].replace("_", ",") + "}"
    return name


def _tex_label(text: str) -> str:
    import re

    text = re.sub(r"e(\d+)", r"\\epsilon_{\1}", text)
    return text.replace("d", "\\delta")


def export(g: MomentGraph | GraphDocument, fmt: str) -> str:
    doc = g if isinstance(g, GraphDocument) else GraphDocument.from_graph(g)
    if fmt == "json":
        return doc.to_json()
    if fmt == "dot":
        return doc.to_dot()
    if fmt == "tikz":
        return doc.to_tikz()
    raise ValueError(f"unknown export format {fmt!r}; expected dot, tikz or json")
