"""Nilpotent representations of the equioriented cycle quiver.

Vertices are 1..n with arrows i -> i+1 (mod n). A representation is an ordered
direct sum of strings U_i(l); the c-th summand carries the torus coordinate
eps_c and its k-th basis vector has weight eps_c + (k-1) * delta.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, NamedTuple, Sequence

from .exactalg import Character

__all__ = [
    "CycleQuiver",
    "NilpotentRep",
    "BasisVector",
    "CoefficientQuiver",
    "dimension_vector",
    "coefficient_quiver",
    "hom_dim",
    "stratum_dim",
    "iso_type",
    "exact_rank",
]


@dataclass(frozen=True)
class CycleQuiver:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cycle quiver needs n >= 1")

    def wrap(self, v: int) -> int:
        """Reduce an integer vertex into 1..n."""
        return (v - 1) % self.n + 1


class BasisVector(NamedTuple):
    c: int  # summand index, 1-based
    k: int  # position in the string, 1-based

    def __str__(self) -> str:
        return f"b{self.c}{self.k}" if self.c < 10 and self.k < 10 else f"b({self.c},{self.k})"


@dataclass(frozen=True)
class NilpotentRep:
    n: int
    summands: tuple[tuple[int, int], ...]
    N: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        summ = tuple((int(i), int(l)) for i, l in self.summands)
        object.__setattr__(self, "summands", summ)
        for i, l in summ:
            if not 1 <= i <= self.n:
                raise ValueError(f"start vertex {i} outside 1..{self.n}")
            if l < 1:
                raise ValueError(f"string length {l} must be >= 1")
        bound = self.N or max((l for _, l in summ), default=1)
        object.__setattr__(self, "N", bound)
        if any(l > bound for _, l in summ):
            raise ValueError(f"summand longer than the nilpotency bound N={bound}")

    @classmethod
    def from_end(cls, n: int, ends: Iterable[tuple[int, int]], N: int = 0) -> "NilpotentRep":
        """Build from U(j; l) notation (strings ending at vertex j)."""
        return cls(n, tuple((((j - l) % n) + 1, l) for j, l in ends), N)

    @classmethod
    def parse(cls, text: str) -> "NilpotentRep":
        """Parse "n=2; U(1,4)+U(2,2)+U(2,2); N=4".

        U(i,l) is the string of length l starting at i; U(j;l) ends at j; S(i) is simple.
        """
        N = None
        items: list[tuple[int, int]] = []
        body = text
        m = re.search(r"\bn\s*=\s*(\d+)", body)
        if not m:
            raise ValueError(f"missing n=... in {text!r}")
        n = int(m.group(1))
        m = re.search(r"\bN\s*=\s*(\d+)", body)
        if m:
            N = int(m.group(1))
        for tok in re.finditer(r"([US])\(\s*(\d+)\s*(?:([,;])\s*(\d+)\s*)?\)", body):
            kind, a, sep, b = tok.groups()
            if kind == "S":
                items.append((int(a), 1))
            elif sep == ",":
                items.append((int(a), int(b)))
            elif sep == ";":
                l = int(b)
                items.append((((int(a) - l) % n) + 1, l))
            else:
                raise ValueError(f"malformed summand {tok.group(0)!r}")
        return cls(n, tuple(items), N or 0)

    @property
    def quiver(self) -> CycleQuiver:
        return CycleQuiver(self.n)

    @property
    def d(self) -> int:
        return len(self.summands)

    def is_zero(self) -> bool:
        return not self.summands

    def basis(self) -> list[BasisVector]:
        return [BasisVector(c, k) for c, (_, l) in enumerate(self.summands, 1) for k in range(1, l + 1)]

    def vertex(self, b: BasisVector) -> int:
        i, _ = self.summands[b.c - 1]
        return (i + b.k - 2) % self.n + 1

    def weight(self, b: BasisVector, d: int | None = None) -> Character:
        d = self.d if d is None else d
        return Character(b.k - 1, tuple(1 if j == b.c - 1 else 0 for j in range(d)))

    def succ(self, b: BasisVector) -> BasisVector | None:
        _, l = self.summands[b.c - 1]
        return BasisVector(b.c, b.k + 1) if b.k < l else None

    def pred(self, b: BasisVector) -> BasisVector | None:
        return BasisVector(b.c, b.k - 1) if b.k > 1 else None

    def direct_sum(self, other: "NilpotentRep") -> "NilpotentRep":
        if other.n != self.n:
            raise ValueError("direct sum of representations of different cycles")
        return NilpotentRep(self.n, self.summands + other.summands, max(self.N, other.N))

    def canonical(self) -> "NilpotentRep":
        return NilpotentRep(self.n, tuple(sorted(self.summands)), self.N)

    def type_key(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.summands))

    def text(self) -> str:
        inner = "+".join(f"U({i},{l})" for i, l in self.summands) or "0"
        return f"n={self.n}; {inner}; N={self.N}"

    def __str__(self) -> str:
        if not self.summands:
            return "0"
        return " + ".join(f"U_{i}({l})" for i, l in self.summands)


def dimension_vector(M: NilpotentRep) -> tuple[int, ...]:
    dims = [0] * M.n
    for b in M.basis():
        dims[M.vertex(b) - 1] += 1
    return tuple(dims)


@dataclass
class CoefficientQuiver:
    """Labelled basis with vertices, weights and partial arrow maps.

    arrows maps an arrow kind to a dict label -> target label; each label has
    at most one outgoing and one incoming arrow per kind.
    """

    labels: tuple[Hashable, ...]
    vertex_of: dict
    weight_of: dict
    arrows: dict[str, dict]
    d: int
    index: dict = field(init=False)
    preds: dict[str, dict] = field(init=False)

    def __post_init__(self):
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.preds = {}
        for kind, amap in self.arrows.items():
            inv = {}
            for s, t in amap.items():
                if t in inv:
                    raise ValueError(f"two {kind}-arrows into {t}")
                inv[t] = s
            self.preds[kind] = inv

    def successors(self, lab) -> list:
        return [amap[lab] for amap in self.arrows.values() if lab in amap]

    def vertices(self) -> list:
        seen = []
        for lab in self.labels:
            v = self.vertex_of[lab]
            if v not in seen:
                seen.append(v)
        return sorted(seen)

    def dims(self, subset: Iterable | None = None) -> dict:
        out = {v: 0 for v in self.vertices()}
        for lab in self.labels if subset is None else subset:
            out[self.vertex_of[lab]] += 1
        return out

    def is_closed(self, subset: Iterable) -> bool:
        s = set(subset)
        return all(t in s for lab in s for t in self.successors(lab))


def coefficient_quiver(M: NilpotentRep) -> CoefficientQuiver:
    labels = tuple(M.basis())
    succ = {b: M.succ(b) for b in labels if M.succ(b) is not None}
    return CoefficientQuiver(
        labels=labels,
        vertex_of={b: M.vertex(b) for b in labels},
        weight_of={b: M.weight(b) for b in labels},
        arrows={"a": succ},
        d=M.d,
    )


def exact_rank(rows: Sequence[dict]) -> int:
    """Rank over Q of sparse rows given as {column: coefficient}."""
    pivots: dict = {}
    rank = 0
    for row in rows:
        r = {k: Fraction(v) for k, v in row.items() if v}
        while r:
            col = min(r)
            if col not in pivots:
                c = r[col]
                pivots[col] = {k: v / c for k, v in r.items()}
                rank += 1
                break
            piv = pivots[col]
            f = r[col]
            for k, v in piv.items():
                nv = r.get(k, 0) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    return rank


def hom_dim(N: NilpotentRep, M: NilpotentRep) -> int:
    """dim Hom(N, M) from the linear system phi_{v+1} N_a = M_a phi_v."""
    if N.n != M.n:
        raise ValueError("hom_dim needs representations of the same cycle")
    nb = N.basis()
    mb = M.basis()
    m_at: dict[int, list] = {}
    for m in mb:
        m_at.setdefault(M.vertex(m), []).append(m)
    unknowns: dict = {}
    for b in nb:
        for m in m_at.get(N.vertex(b), []):
            unknowns[(m, b)] = len(unknowns)
    rows = []
    n = N.n
    for b in nb:
        w = N.vertex(b) % n + 1
        sb = N.succ(b)
        for m2 in m_at.get(w, []):
            row: dict[int, int] = {}
            if sb is not None:
                row[unknowns[(m2, sb)]] = 1
            pm = M.pred(m2)
            if pm is not None:
                key = unknowns[(pm, b)]
                row[key] = row.get(key, 0) - 1
            if any(row.values()):
                rows.append(row)
    return len(unknowns) - exact_rank(rows)


def stratum_dim(N: NilpotentRep, M: NilpotentRep) -> int:
    val = hom_dim(N, M) - hom_dim(N, N)
    if val < 0:
        raise ValueError(f"{N} is not a subrepresentation type of {M} (stratum dimension {val})")
    return val


def iso_type(S: Iterable[BasisVector], M: NilpotentRep) -> NilpotentRep:
    """Isomorphism type of the coordinate subrepresentation spanned by S."""
    s = set(S)
    for b in s:
        nb = M.succ(b)
        if nb is not None and nb not in s:
            raise ValueError(f"label set is not successor-closed at {b}")
    out = []
    for b in s:
        p = M.pred(b)
        if p is not None and p in s:
            continue
        length = 1
        cur = b
        while (nxt := M.succ(cur)) is not None:
            length += 1
            cur = nxt
        out.append((M.vertex(b), length))
    return NilpotentRep(M.n, tuple(sorted(out)), M.N)


def U(i: int, l: int, n: int, N: int = 0) -> NilpotentRep:
    """The indecomposable U_i(l)."""
    return NilpotentRep(n, ((i, l),), N)


def lemma_generic_types(n: int, omega: int, d: Sequence[int], k: int) -> list[tuple[tuple[int, ...], NilpotentRep]]:
    """C_k(d) with representatives U_p = sum_i U(i; omega n)^{p_i}."""
    from itertools import product

    L = omega * n
    out = []
    for p in product(*(range(di + 1) for di in d)):
        if sum(p) != k:
            continue
        ends = [(i, L) for i, pi in enumerate(p, 1) for _ in range(pi)]
        out.append((p, NilpotentRep.from_end(n, ends, L)))
    return out


def lemma_representation(n: int, omega: int, d: Sequence[int]) -> NilpotentRep:
    L = omega * n
    ends = [(i, L) for i, di in enumerate(d, 1) for _ in range(di)]
    return NilpotentRep.from_end(n, ends, L)
