"""Exact arithmetic over the character lattice of T = (C*)^(d+1).

Coordinates are ordered (delta, eps_1, ..., eps_d) everywhere: a Character
stores the delta coefficient separately, a Polynomial stores exponent tuples
of length d + 1 with the delta exponent first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Character",
    "Cocharacter",
    "Polynomial",
    "RationalFunction",
    "pairing",
    "rf_sum",
    "divides",
    "parse_character",
    "parse_polynomial",
    "parse_rational_function",
]


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True, order=True)
class Character:
    """Linear character delta_coeff * delta + sum_c eps[c-1] * eps_c."""

    delta: int
    eps: tuple[int, ...]

    @classmethod
    def zero(cls, d: int) -> "Character":
        return cls(0, (0,) * d)

    @classmethod
    def eps_unit(cls, c: int, d: int) -> "Character":
        """eps_c with 1-based c."""
        if not 1 <= c <= d:
            raise ValueError(f"eps index {c} outside 1..{d}")
        return cls(0, tuple(1 if j == c - 1 else 0 for j in range(d)))

    @classmethod
    def delta_unit(cls, d: int) -> "Character":
        return cls(1, (0,) * d)

    @property
    def d(self) -> int:
        return len(self.eps)

    def is_zero(self) -> bool:
        return self.delta == 0 and not any(self.eps)

    def _check(self, other: "Character") -> None:
        if len(other.eps) != len(self.eps):
            raise ValueError(f"character dimension mismatch: {self.d} vs {other.d}")

    def __add__(self, other: "Character") -> "Character":
        self._check(other)
        return Character(self.delta + other.delta, tuple(a + b for a, b in zip(self.eps, other.eps)))

    def __sub__(self, other: "Character") -> "Character":
        return self + (-other)

    def __neg__(self) -> "Character":
        return Character(-self.delta, tuple(-a for a in self.eps))

    def scale(self, k: int) -> "Character":
        return Character(k * self.delta, tuple(k * a for a in self.eps))

    def content(self) -> int:
        return reduce(math.gcd, self.eps, abs(self.delta))

    def sign_normalized(self) -> tuple[int, "Character"]:
        """Return (s, chi) with self = s * chi and chi in canonical sign.

        Canonical sign: the last nonzero eps coefficient is positive, or the
        delta coefficient is positive when the eps part vanishes.
        """
        for a in reversed(self.eps):
            if a:
                return (1, self) if a > 0 else (-1, -self)
        if self.delta < 0:
            return -1, -self
        return 1, self

    def is_proportional(self, other: "Character") -> bool:
        self._check(other)
        a = (self.delta,) + self.eps
        b = (other.delta,) + other.eps
        return all(x * y2 == y * x2 for (x, y), (x2, y2) in _pairs(a, b))

    def to_polynomial(self) -> "Polynomial":
        return Polynomial.from_character(self)

    def render(self, star: bool = False) -> str:
        """Display text: positive eps terms, negative eps terms, then delta."""
        pos = [(c, a) for c, a in enumerate(self.eps, 1) if a > 0]
        neg = [(c, a) for c, a in enumerate(self.eps, 1) if a < 0]
        parts: list[str] = []
        mul = "*" if star else ""
        for c, a in pos + neg:
            body = f"e{c}" if abs(a) == 1 else f"{abs(a)}{mul}e{c}"
            parts.append(("-" if a < 0 else "+") + body)
        if self.delta:
            a = self.delta
            body = "d" if abs(a) == 1 else f"{abs(a)}{mul}d"
            parts.append(("-" if a < 0 else "+") + body)
        if not parts:
            return "0"
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text

    def __str__(self) -> str:
        return self.render()


def _pairs(a: Sequence[int], b: Sequence[int]):
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            yield (a[i], b[i]), (a[j], b[j])


@dataclass(frozen=True)
class Cocharacter:
    delta: int
    eps: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.eps)

    def as_list(self) -> list[int]:
        return [self.delta, *self.eps]

    def __str__(self) -> str:
        return f"({self.delta}; {', '.join(map(str, self.eps))})"


def pairing(chi: Cocharacter, alpha: Character) -> int:
    if chi.d != alpha.d:
        raise ValueError(f"pairing dimension mismatch: cocharacter d={chi.d}, character d={alpha.d}")
    return chi.delta * alpha.delta + sum(a * b for a, b in zip(chi.eps, alpha.eps))


Exp = tuple[int, ...]


class Polynomial:
    """Sparse polynomial in (delta, eps_1..eps_d) with Fraction coefficients."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exp, Fraction | int] | None = None):
        self.nvars = nvars
        clean: dict[Exp, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != nvars:
                    raise ValueError("exponent length mismatch")
                if c:
                    clean[e] = Fraction(c)
        self.terms = clean
        self._hash = None

    @property
    def d(self) -> int:
        return self.nvars - 1

    @classmethod
    def zero(cls, d: int) -> "Polynomial":
        return cls(d + 1)

    @classmethod
    def constant(cls, c: Fraction | int, d: int) -> "Polynomial":
        return cls(d + 1, {(0,) * (d + 1): Fraction(c)})

    @classmethod
    def one(cls, d: int) -> "Polynomial":
        return cls.constant(1, d)

    @classmethod
    def from_character(cls, chi: Character) -> "Polynomial":
        nv = chi.d + 1
        terms: dict[Exp, Fraction] = {}
        for idx, a in enumerate((chi.delta,) + chi.eps):
            if a:
                e = [0] * nv
                e[idx] = 1
                terms[tuple(e)] = Fraction(a)
        return cls(nv, terms)

    @classmethod
    def product(cls, chars: Iterable[Character], d: int) -> "Polynomial":
        out = cls.one(d)
        for c in chars:
            out = out * cls.from_character(c)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomial dimension mismatch")
            return other
        if isinstance(other, Character):
            return Polynomial.from_character(other)
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other, self.d)
        return NotImplemented

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.one(self.d)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.d)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def scale(self, c: Fraction | int) -> "Polynomial":
        return Polynomial(self.nvars, {e: v * c for e, v in self.terms.items()})

    def content(self) -> Fraction:
        """Positive rational g with self / g integral and primitive; sign of the leading term."""
        if not self.terms:
            return Fraction(0)
        nums = [c.numerator for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        g = Fraction(reduce(math.gcd, nums, 0), reduce(_lcm, dens, 1))
        lead = self.terms[self.leading_exponent()]
        return g if lead > 0 else -g

    def leading_exponent(self) -> Exp:
        return max(self.terms, key=_render_key)

    def evaluate(self, point: Sequence[Fraction | int]) -> Fraction:
        """Evaluate at point = (delta, eps_1..eps_d)."""
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= Fraction(x) ** k
            total += v
        return total

    def divide_linear(self, alpha: Character) -> "Polynomial | None":
        """Exact quotient self / alpha, or None when alpha does not divide self."""
        if alpha.is_zero():
            raise ValueError("division by the zero character")
        coeffs = (alpha.delta,) + alpha.eps
        v = next(i for i, a in enumerate(coeffs) if a)
        cv = Fraction(coeffs[v])
        rem = dict(self.terms)
        quot: dict[Exp, Fraction] = {}
        while rem:
            e = max(rem, key=lambda x: (x[v], x))
            if e[v] == 0:
                return None
            c = rem.pop(e)
            qe = list(e)
            qe[v] -= 1
            qe = tuple(qe)
            qc = c / cv
            quot[qe] = quot.get(qe, 0) + qc
            for idx, a in enumerate(coeffs):
                if a and idx != v:
                    te = list(qe)
                    te[idx] += 1
                    te = tuple(te)
                    nv = rem.get(te, 0) - qc * a
                    if nv:
                        rem[te] = nv
                    else:
                        rem.pop(te, None)
        return Polynomial(self.nvars, quot)

    def render(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for e in sorted(self.terms, key=_render_key, reverse=True):
            c = self.terms[e]
            mono = _mono_text(e)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_coeff(a)}*{mono}"
            out.append(sign + body)
        text = "".join(out)
        return text[1:] if text.startswith("+") else text

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"Polynomial({self.render()!r})"


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _render_key(e: Exp):
    # total degree, then eps_1..eps_d exponents, then delta
    return (sum(e),) + e[1:] + e[:1]


def _mono_text(e: Exp) -> str:
    parts = []
    names = [f"e{c}" for c in range(1, len(e))] + ["d"]
    exps = list(e[1:]) + [e[0]]
    for name, k in zip(names, exps):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


class RationalFunction:
    """scalar * numerator / prod(factor^mult) with linear denominator factors.

    Canonical form: numerator primitive with positive leading coefficient,
    denominator factors primitive, sign-normalized, sorted, and coprime to the
    numerator (checked by trial division).
    """

    __slots__ = ("d", "scalar", "numerator", "denominator")

    def __init__(
        self,
        scalar: Fraction | int,
        numerator: Polynomial,
        denominator: Iterable[tuple[Character, int]] = (),
        *,
        canonical: bool = False,
    ):
        self.d = numerator.d
        self.scalar = Fraction(scalar)
        self.numerator = numerator
        self.denominator: tuple[tuple[Character, int], ...] = tuple(denominator)
        if not canonical:
            self._canonicalize()

    @classmethod
    def zero(cls, d: int) -> "RationalFunction":
        return cls(0, Polynomial.zero(d))

    @classmethod
    def one(cls, d: int) -> "RationalFunction":
        return cls(1, Polynomial.one(d))

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls(1, p)

    @classmethod
    def from_character(cls, chi: Character) -> "RationalFunction":
        return cls(1, Polynomial.from_character(chi))

    @classmethod
    def inverse_product(cls, chars: Iterable[Character], d: int, scalar: Fraction | int = 1) -> "RationalFunction":
        """scalar / prod(chars)."""
        counts: dict[Character, int] = {}
        for c in chars:
            if c.is_zero():
                raise ZeroDivisionError("zero character in denominator")
            counts[c] = counts.get(c, 0) + 1
        return cls(scalar, Polynomial.one(d), counts.items())

    def _canonicalize(self) -> None:
        num = self.numerator
        scalar = self.scalar
        if scalar == 0 or num.is_zero():
            self.scalar = Fraction(0)
            self.numerator = Polynomial.zero(self.d)
            self.denominator = ()
            return
        merged: dict[Character, int] = {}
        for chi, m in self.denominator:
            if m < 0:
                raise ValueError("negative multiplicity")
            if m == 0:
                continue
            if chi.is_zero():
                raise ZeroDivisionError("zero character in denominator")
            g = chi.content()
            s, base = Character(chi.delta // g, tuple(a // g for a in chi.eps)).sign_normalized()
            scalar /= Fraction(s * g) ** m
            merged[base] = merged.get(base, 0) + m
        for base in list(merged):
            while merged[base] and (q := num.divide_linear(base)) is not None:
                num = q
                merged[base] -= 1
            if not merged[base]:
                del merged[base]
        g = num.content()
        if g != 1:
            num = num.scale(1 / g)
            scalar *= g
        self.scalar = scalar
        self.numerator = num
        self.denominator = tuple(sorted(merged.items()))

    def is_zero(self) -> bool:
        return self.scalar == 0

    def is_polynomial(self) -> bool:
        return not self.denominator

    def to_polynomial(self) -> Polynomial:
        if self.denominator:
            raise ValueError(f"not a polynomial: {self.render()}")
        return self.numerator.scale(self.scalar)

    def denominator_degree(self) -> int:
        return sum(m for _, m in self.denominator)

    def degree(self) -> int:
        """Numerator degree minus denominator degree (for homogeneous values)."""
        if self.is_zero():
            return -1
        return self.numerator.degree() - self.denominator_degree()

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if other.d != self.d:
                raise ValueError("rational function dimension mismatch")
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.from_polynomial(other)
        if isinstance(other, Character):
            return RationalFunction.from_character(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction(other, Polynomial.one(self.d))
        return NotImplemented

    def __add__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_sum([self, other])

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.scalar, self.numerator, self.denominator, canonical=True)

    def __sub__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rf_sum([self, -other])

    def __rsub__(self, other) -> "RationalFunction":
        return (-self) + other

    def __mul__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(
            self.scalar * other.scalar,
            self.numerator * other.numerator,
            self.denominator + other.denominator,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._coerce(other) * self.reciprocal()

    def reciprocal(self) -> "RationalFunction":
        """1 / self; the numerator must split into linear factors."""
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero")
        c, factors = linear_factorization(self.numerator)
        if factors is None:
            raise ValueError(f"numerator does not split into linear factors: {self.numerator}")
        num = Polynomial.product([chi for chi, m in self.denominator for _ in range(m)], self.d)
        return RationalFunction(1 / (self.scalar * c), num, factors.items())

    def __eq__(self, other) -> bool:
        if isinstance(other, (Polynomial, Character, int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return (
            self.d == other.d
            and self.scalar == other.scalar
            and self.numerator == other.numerator
            and self.denominator == other.denominator
        )

    def __hash__(self) -> int:
        return hash((self.scalar, self.numerator, self.denominator))

    def equals_up_to_sign(self, other: "RationalFunction") -> bool:
        return self == other or self == -other

    def evaluate(self, point: Sequence[Fraction | int]) -> Fraction:
        den = Fraction(1)
        for chi, m in self.denominator:
            v = Polynomial.from_character(chi).evaluate(point)
            if v == 0:
                raise ZeroDivisionError("evaluation point lies on a denominator hyperplane")
            den *= v**m
        return self.scalar * self.numerator.evaluate(point) / den

    def render(self, orient: "Cocharacter | None" = None) -> str:
        """Canonical text; with orient, denominator factors are shown pairing-positive."""
        if self.is_zero():
            return "0"
        scalar = self.scalar
        factors: list[tuple[Character, int]] = []
        for chi, m in self.denominator:
            if orient is not None and pairing(orient, chi) < 0:
                chi = -chi
                scalar *= (-1) ** m
            factors.append((chi, m))
        num = self.numerator.scale(scalar)
        num_text = num.render()
        if not factors:
            return num_text
        if len(num.terms) > 1:
            num_text = f"({num_text})"
        den_parts = []
        for chi, m in factors:
            t = f"({chi.render(star=True)})"
            den_parts.append(t if m == 1 else f"{t}^{m}")
        return f"{num_text} / ({'*'.join(den_parts)})"

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"RationalFunction({self.render()!r})"


def rf_sum(terms: Sequence[RationalFunction], d: int | None = None) -> RationalFunction:
    """Exact sum over the common factored denominator, then canonicalized."""
    if d is None:
        if not terms:
            raise ValueError("rf_sum of an empty list needs d")
        d = terms[0].d
    terms = [t for t in terms if not t.is_zero()]
    if not terms:
        return RationalFunction.zero(d)
    common: dict[Character, int] = {}
    for t in terms:
        if t.d != d:
            raise ValueError("rational function dimension mismatch")
        for chi, m in t.denominator:
            common[chi] = max(common.get(chi, 0), m)
    total = Polynomial.zero(d)
    for t in terms:
        own = dict(t.denominator)
        missing = [chi for chi, m in common.items() for _ in range(m - own.get(chi, 0))]
        total = total + t.numerator.scale(t.scalar) * Polynomial.product(missing, d)
    return RationalFunction(1, total, common.items())


def divides(alpha: Character, p: Polynomial) -> bool:
    if alpha.is_zero():
        raise ValueError("divides: alpha must be nonzero")
    return p.divide_linear(alpha) is not None


def linear_factorization(p: Polynomial) -> tuple[Fraction, "dict[Character, int] | None"]:
    """Split p = c * prod(chi^m) into primitive sign-normalized characters.

    Returns (c, None) when p has a factor of degree >= 2.
    """
    if p.is_zero():
        raise ValueError("cannot factor zero")
    if p.is_constant():
        return p.constant_value(), {}
    import sympy

    syms = _symbols(p.d)
    expr = sum(
        (sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*[s**k for s, k in zip(syms, e)]))
        for e, c in p.terms.items()
    )
    coeff, facs = sympy.factor_list(sympy.expand(expr), *syms)
    scalar = Fraction(int(sympy.numer(coeff)), int(sympy.denom(coeff)))
    out: dict[Character, int] = {}
    for f, m in facs:
        poly = sympy.Poly(f, *syms)
        if poly.total_degree() != 1:
            return scalar, None
        chi, c = _character_from_linear(poly, syms, p.d)
        scalar *= c**m
        out[chi] = out.get(chi, 0) + m
    return scalar, out


def _symbols(d: int):
    import sympy

    return sympy.symbols(["d"] + [f"e{c}" for c in range(1, d + 1)])


def _character_from_linear(poly, syms, d: int) -> tuple[Character, Fraction]:
    coeffs = []
    for s in syms:
        c = poly.coeff_monomial(s)
        coeffs.append(Fraction(int(c.p), int(c.q)))
    if poly.coeff_monomial(1) != 0:
        raise ValueError("affine factor with constant term")
    den = reduce(_lcm, (c.denominator for c in coeffs), 1)
    ints = [int(c * den) for c in coeffs]
    g = reduce(math.gcd, ints)
    chi = Character(ints[0] // g, tuple(a // g for a in ints[1:]))
    s, chi = chi.sign_normalized()
    return chi, Fraction(s * g, den)


def _sympy_expr(text: str, d: int):
    import sympy
    from sympy.parsing.sympy_parser import parse_expr, standard_transformations

    syms = _symbols(d)
    local = {str(s): s for s in syms}
    cleaned = text.replace("^", "**")
    # "3d" style coefficients are allowed in character text
    import re

    cleaned = re.sub(r"(\d)\s*([ed])", r"\1*\2", cleaned)
    expr = parse_expr(cleaned, local_dict=local, transformations=standard_transformations, evaluate=True)
    extra = expr.free_symbols - set(syms)
    if extra:
        raise ValueError(f"unknown symbols {sorted(map(str, extra))} for d={d}")
    return sympy.together(expr), syms


def parse_polynomial(text: str, d: int) -> Polynomial:
    import sympy

    expr, syms = _sympy_expr(text, d)
    num, den = sympy.fraction(expr)
    if den.free_symbols:
        raise ValueError(f"not a polynomial: {text!r}")
    poly = sympy.Poly(sympy.expand(num / den), *syms)
    terms = {}
    for mon, c in poly.terms():
        c = sympy.Rational(c)
        terms[tuple(mon)] = Fraction(int(c.p), int(c.q))
    return Polynomial(d + 1, terms)


def parse_character(text: str, d: int) -> Character:
    p = parse_polynomial(text, d)
    if p.is_zero():
        return Character.zero(d)
    if p.degree() != 1 or not p.is_homogeneous():
        raise ValueError(f"not a linear character: {text!r}")
    coeffs = [0] * (d + 1)
    for e, c in p.terms.items():
        if c.denominator != 1:
            raise ValueError(f"non-integral character coefficient in {text!r}")
        coeffs[e.index(1)] = int(c)
    return Character(coeffs[0], tuple(coeffs[1:]))


def parse_rational_function(text: str, d: int) -> RationalFunction:
    import sympy

    expr, syms = _sympy_expr(text, d)
    num, den = sympy.fraction(expr)
    num_poly = parse_polynomial(str(sympy.expand(num)), d)
    den_poly = parse_polynomial(str(sympy.expand(den)), d)
    c, factors = linear_factorization(den_poly)
    if factors is None:
        raise ValueError(f"denominator is not a product of linear characters: {text!r}")
    return RationalFunction(1 / c, num_poly, factors.items())
