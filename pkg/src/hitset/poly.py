"""Sparse multivariate and dense univariate polynomials over a prime field."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

from .field import Field

DEFAULT_TERM_BUDGET = 2_000_000
_PASCAL_ROWS = 1024


class BudgetExceeded(RuntimeError):
    pass


def term_budget() -> int:
    raw = os.environ.get("PIT_TERM_BUDGET")
    return int(raw) if raw else DEFAULT_TERM_BUDGET


@lru_cache(maxsize=64)
def _pascal(p: int) -> list[list[int]]:
    rows = [[1]]
    for n in range(1, _PASCAL_ROWS + 1):
        prev = rows[-1]
        row = [1] * (n + 1)
        for k in range(1, n):
            row[k] = (prev[k - 1] + prev[k]) % p
        rows.append(row)
    return rows


def binom_mod(n: int, k: int, p: int) -> int:
    """binom(n, k) mod p; Pascal rows for small n, exact integers beyond."""
    if k < 0 or k > n:
        return 0
    if n <= _PASCAL_ROWS:
        return _pascal(p)[n][k]
    return comb(n, k) % p


def binom_vec(b: Sequence[int], a: Sequence[int], p: int) -> int:
    out = 1
    for bi, ai in zip(b, a):
        out = out * binom_mod(bi, ai, p) % p
        if not out:
            return 0
    return out


class UniPoly:
    """Dense univariate polynomial; coeffs[i] multiplies z^i."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: Field, coeffs: Iterable[int] = ()):
        p = field.p
        cs = [c % p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls, field: Field) -> "UniPoly":
        return cls(field, [0, 1])

    @classmethod
    def const(cls, field: Field, c: int) -> "UniPoly":
        return cls(field, [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, z: int) -> int:
        p = self.field.p
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * z + c) % p
        return acc

    def __add__(self, g: "UniPoly") -> "UniPoly":
        a, b = self.coeffs, g.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return UniPoly(self.field, out)

    def __neg__(self) -> "UniPoly":
        return UniPoly(self.field, [-c for c in self.coeffs])

    def __sub__(self, g: "UniPoly") -> "UniPoly":
        return self + (-g)

    def __mul__(self, g) -> "UniPoly":
        if isinstance(g, int):
            return UniPoly(self.field, [c * g for c in self.coeffs])
        if not self.coeffs or not g.coeffs:
            return UniPoly(self.field)
        p = self.field.p
        out = [0] * (len(self.coeffs) + len(g.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(g.coeffs):
                    out[i + j] += a * b
        return UniPoly(self.field, [c % p for c in out])

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "UniPoly":
        result = UniPoly(self.field, [1])
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def compose(self, g: "UniPoly") -> "UniPoly":
        """self(g(z)) by Horner."""
        acc = UniPoly(self.field)
        for c in reversed(self.coeffs):
            acc = acc * g + UniPoly(self.field, [c])
        return acc

    def hasse(self, k: int) -> "UniPoly":
        p = self.field.p
        return UniPoly(self.field, [binom_mod(i, k, p) * c for i, c in enumerate(self.coeffs)][k:])

    def __eq__(self, g) -> bool:
        return isinstance(g, UniPoly) and self.field == g.field and self.coeffs == g.coeffs

    def __hash__(self):
        return hash((self.field.p, self.coeffs))

    def __repr__(self):
        return f"UniPoly({list(self.coeffs)}, p={self.field.p})"


def _add_exps(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


class SparsePoly:
    """Multivariate polynomial stored as {exponent tuple: nonzero coefficient}."""

    __slots__ = ("field", "arity", "terms")

    def __init__(self, field: Field, arity: int, terms: Mapping[tuple, int] | None = None):
        self.field = field
        self.arity = arity
        p = field.p
        clean = {}
        if terms:
            for a, c in terms.items():
                if len(a) != arity:
                    raise ValueError(f"exponent {a} does not have length {arity}")
                c %= p
                if c:
                    clean[tuple(a)] = c
        self.terms = clean

    @classmethod
    def _raw(cls, field: Field, arity: int, terms: dict) -> "SparsePoly":
        # terms already reduced, nonzero, keyed by tuples
        f = cls.__new__(cls)
        f.field = field
        f.arity = arity
        f.terms = terms
        return f

    @classmethod
    def zero(cls, field: Field, arity: int) -> "SparsePoly":
        return cls._raw(field, arity, {})

    @classmethod
    def const(cls, field: Field, arity: int, c: int) -> "SparsePoly":
        return cls(field, arity, {(0,) * arity: c})

    @classmethod
    def var(cls, field: Field, arity: int, i: int, power: int = 1) -> "SparsePoly":
        a = [0] * arity
        a[i] = power
        return cls(field, arity, {tuple(a): 1})

    @classmethod
    def monomial(cls, field: Field, exps: Sequence[int], c: int = 1) -> "SparsePoly":
        return cls(field, len(exps), {tuple(exps): c})

    def _check(self, g: "SparsePoly"):
        if g.field != self.field or g.arity != self.arity:
            raise ValueError("field or arity mismatch")

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def coeff(self, a: Sequence[int]) -> int:
        if len(a) != self.arity:
            raise ValueError("exponent length mismatch")
        return self.terms.get(tuple(a), 0)

    def __eq__(self, g) -> bool:
        return (isinstance(g, SparsePoly) and self.field == g.field
                and self.arity == g.arity and self.terms == g.terms)

    def __hash__(self):
        return hash((self.field.p, self.arity, frozenset(self.terms.items())))

    def __add__(self, g: "SparsePoly") -> "SparsePoly":
        self._check(g)
        p = self.field.p
        out = dict(self.terms)
        for a, c in g.terms.items():
            v = (out.get(a, 0) + c) % p
            if v:
                out[a] = v
            else:
                out.pop(a, None)
        return SparsePoly._raw(self.field, self.arity, out)

    def __neg__(self) -> "SparsePoly":
        p = self.field.p
        return SparsePoly._raw(self.field, self.arity, {a: p - c for a, c in self.terms.items()})

    def __sub__(self, g: "SparsePoly") -> "SparsePoly":
        return self + (-g)

    def scale(self, c: int) -> "SparsePoly":
        p = self.field.p
        c %= p
        if not c:
            return SparsePoly.zero(self.field, self.arity)
        return SparsePoly._raw(self.field, self.arity, {a: v * c % p for a, v in self.terms.items()})

    def __mul__(self, g) -> "SparsePoly":
        if isinstance(g, int):
            return self.scale(g)
        self._check(g)
        p = self.field.p
        budget = term_budget()
        out: dict = {}
        for a, c in self.terms.items():
            for b, e in g.terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = out.get(k, 0) + c * e
            if len(out) > budget:
                raise BudgetExceeded(f"product exceeds {budget} terms")
        return SparsePoly._raw(self.field, self.arity, {a: c % p for a, c in out.items() if c % p})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "SparsePoly":
        result = SparsePoly.const(self.field, self.arity, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __call__(self, point: Sequence[int]) -> int:
        return eval_poly(self, point)

    def ind_degrees(self) -> list[int]:
        deg = [0] * self.arity
        for a in self.terms:
            for i, x in enumerate(a):
                if x > deg[i]:
                    deg[i] = x
        return deg

    def total_degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def support_sizes(self) -> list[int]:
        return sorted({sum(1 for x in a if x) for a in self.terms})

    def substitute(self, assignment: Mapping[int, int]) -> "SparsePoly":
        """Fix the given variables to constants and drop them from the arity."""
        p = self.field.p
        keep = [i for i in range(self.arity) if i not in assignment]
        out: dict = {}
        for a, c in self.terms.items():
            for i, v in assignment.items():
                if a[i]:
                    c = c * pow(v, a[i], p) % p
            if c:
                k = tuple(a[i] for i in keep)
                out[k] = (out.get(k, 0) + c) % p
        return SparsePoly._raw(self.field, len(keep), {a: c for a, c in out.items() if c})

    def embed(self, arity: int, positions: Sequence[int]) -> "SparsePoly":
        """Rename variable i to positions[i] inside a larger arity."""
        out = {}
        for a, c in self.terms.items():
            k = [0] * arity
            for i, x in enumerate(a):
                k[positions[i]] = x
            out[tuple(k)] = c
        return SparsePoly._raw(self.field, arity, out)

    def to_json(self) -> dict:
        return {
            "p": self.field.p,
            "arity": self.arity,
            "terms": [{"exponents": list(a), "coeff": c} for a, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "SparsePoly":
        field = Field(doc["p"])
        return cls(field, doc["arity"], {tuple(t["exponents"]): t["coeff"] for t in doc["terms"]})

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for a, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(a) if e)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def poly_arith(f: SparsePoly, g: SparsePoly, op: str) -> SparsePoly:
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")


def coeff(f: SparsePoly, a: Sequence[int]) -> int:
    return f.coeff(a)


def eval_poly(f: SparsePoly, point: Sequence[int]) -> int:
    if len(point) != f.arity:
        raise ValueError(f"point has length {len(point)}, expected {f.arity}")
    p = f.field.p
    pts = [v % p for v in point]
    cache: dict = {}
    total = 0
    for a, c in f.terms.items():
        for i, e in enumerate(a):
            if e:
                key = (i, e)
                v = cache.get(key)
                if v is None:
                    v = cache[key] = pow(pts[i], e, p)
                c = c * v % p
                if not c:
                    break
        total += c
    return total % p


def hasse_derivative(f: SparsePoly, b: Sequence[int]) -> SparsePoly:
    """sum over c of binom(b+c, b) coeff_{x^(b+c)}(f) x^c."""
    if len(b) != f.arity:
        raise ValueError("exponent length mismatch")
    p = f.field.p
    b = tuple(b)
    out = {}
    for a, c in f.terms.items():
        if all(x >= y for x, y in zip(a, b)):
            v = c * binom_vec(a, b, p) % p
            if v:
                out[tuple(x - y for x, y in zip(a, b))] = v
    return SparsePoly._raw(f.field, f.arity, out)


def _expand_shift(f: SparsePoly, emit):
    p = f.field.p
    n = f.arity
    for a, c in f.terms.items():
        # product over i of sum_k binom(a_i, k) x^k t^(a_i-k)
        partial = [((), c)]
        for i in range(n):
            nxt = []
            for ks, v in partial:
                for k in range(a[i] + 1):
                    w = v * binom_mod(a[i], k, p) % p
                    if w:
                        nxt.append((ks + (k,), w))
            partial = nxt
        for ks, v in partial:
            emit(a, ks, v)


def shift(f: SparsePoly, alpha: Sequence[int] | None = None) -> SparsePoly:
    """f(x + alpha); with alpha None, the symbolic f(x + t) in 2n variables (x then t)."""
    p = f.field.p
    n = f.arity
    out: dict = {}
    if alpha is None:
        def emit(a, ks, v):
            key = tuple(ks) + tuple(x - k for x, k in zip(a, ks))
            out[key] = (out.get(key, 0) + v) % p
        _expand_shift(f, emit)
        return SparsePoly(f.field, 2 * n, out)
    if len(alpha) != n:
        raise ValueError("shift point length mismatch")
    al = [x % p for x in alpha]

    def emit(a, ks, v):
        for i in range(n):
            e = a[i] - ks[i]
            if e:
                v = v * pow(al[i], e, p) % p
                if not v:
                    return
        out[ks] = (out.get(ks, 0) + v) % p
    _expand_shift(f, emit)
    return SparsePoly(f.field, n, out)


@dataclass(frozen=True)
class PolyMap:
    """A polynomial map F^m -> F^n given by n components in m variables."""

    in_arity: int
    components: tuple

    def __post_init__(self):
        for g in self.components:
            if g.arity != self.in_arity:
                raise ValueError("component arity mismatch")

    @property
    def out_arity(self) -> int:
        return len(self.components)

    @classmethod
    def identity(cls, field: Field, n: int) -> "PolyMap":
        return cls(n, tuple(SparsePoly.var(field, n, i) for i in range(n)))

    def __call__(self, point: Sequence[int]) -> list[int]:
        return [eval_poly(g, point) for g in self.components]


def compose(f: SparsePoly, g: PolyMap) -> SparsePoly:
    if g.out_arity != f.arity:
        raise ValueError(f"map has {g.out_arity} outputs, polynomial has {f.arity} variables")
    field = f.field
    m = g.in_arity
    if any(c.field != field for c in g.components):
        raise ValueError("field mismatch")
    powers: dict = {}

    def power(i: int, e: int) -> SparsePoly:
        key = (i, e)
        if key not in powers:
            powers[key] = g.components[i] if e == 1 else power(i, e - 1) * g.components[i]
        return powers[key]

    total = SparsePoly.zero(field, m)
    for a, c in sorted(f.terms.items()):
        term = SparsePoly.const(field, m, c)
        for i, e in enumerate(a):
            if e:
                term = term * power(i, e)
                if term.is_zero():
                    break
        total = total + term
    return total


def kronecker_substitute(f: SparsePoly, z_block: Sequence[int], base: int,
                         y_block: Sequence[int] | None = None) -> SparsePoly:
    """Replace z_j by y_j^base; the z variables are removed, the others keep their order."""
    z_block = list(z_block)
    if y_block is None:
        y_block = [i for i in range(f.arity) if i not in z_block][: len(z_block)]
    y_block = list(y_block)
    if len(y_block) != len(z_block) or set(y_block) & set(z_block):
        raise ValueError("y and z blocks must be disjoint and of equal size")
    deg = f.ind_degrees()
    for i in y_block + z_block:
        if deg[i] >= base:
            raise ValueError(f"variable {i} has degree {deg[i]} >= base {base}; substitution not injective")
    keep = [i for i in range(f.arity) if i not in set(z_block)]
    pos = {v: k for k, v in enumerate(keep)}
    p = f.field.p
    out: dict = {}
    for a, c in f.terms.items():
        k = [a[i] for i in keep]
        for y, z in zip(y_block, z_block):
            k[pos[y]] += base * a[z]
        k = tuple(k)
        out[k] = (out.get(k, 0) + c) % p
    return SparsePoly(f.field, len(keep), out)
