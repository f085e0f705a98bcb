"""Circuit models: ROABPs, set-multilinear ABPs and diagonal circuits."""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from itertools import product
from math import comb
from typing import Sequence

from . import linalg
from .field import Field
from .poly import BudgetExceeded, SparsePoly, UniPoly, hasse_derivative, term_budget

Coeffs = tuple  # coefficient tuple of a univariate or linear form


def _trim(cs: Sequence[int], p: int) -> tuple:
    cs = [c % p for c in cs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def _horner(cs: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(cs):
        acc = (acc * x + c) % p
    return acc


def _vecmat(v: Sequence[int], M: Sequence[Sequence[int]], p: int) -> list[int]:
    out = [0] * len(M[0])
    for a, va in enumerate(v):
        if va:
            for b, m in enumerate(M[a]):
                out[b] += va * m
    return [x % p for x in out]


def _check_guard(d: int, n: int):
    budget = term_budget()
    if d ** n > budget:
        raise BudgetExceeded(f"d^n = {d}^{n} exceeds the expansion budget {budget}")


@dataclass(frozen=True)
class MatrixRoabp:
    """Matrix-valued ROABP: prod_i layers[i](x_{order[i]}), entries univariate of degree < d."""

    field: Field
    n: int
    d: int
    r: int
    order: tuple
    layers: tuple  # layers[i][a][b] = coefficient tuple (low degree first)
    commutative: bool = False

    def __post_init__(self):
        p = self.field.p
        if sorted(self.order) != list(range(self.n)):
            raise ValueError(f"order {self.order} is not a permutation of range({self.n})")
        if len(self.layers) != self.n:
            raise ValueError(f"expected {self.n} layers, got {len(self.layers)}")
        clean = []
        for i, L in enumerate(self.layers):
            if len(L) != self.r or any(len(row) != self.r for row in L):
                raise ValueError(f"layer {i} is not {self.r}x{self.r}")
            rows = tuple(tuple(_trim(e, p) for e in row) for row in L)
            for row in rows:
                for e in row:
                    if len(e) > self.d:
                        raise ValueError(f"layer {i} entry has degree >= d={self.d}")
            clean.append(rows)
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "layers", tuple(clean))

    def layer_at(self, i: int, x: int) -> list[list[int]]:
        p = self.field.p
        return [[_horner(e, x, p) for e in row] for row in self.layers[i]]

    def eval_matrix(self, point: Sequence[int]) -> list[list[int]]:
        if len(point) != self.n:
            raise ValueError(f"point has length {len(point)}, expected {self.n}")
        p = self.field.p
        M = linalg.identity(self.r)
        for i in range(self.n):
            M = linalg.matmul(M, self.layer_at(i, point[self.order[i]]), p)
        return M

    def layer_poly(self, i: int, a: int, b: int) -> SparsePoly:
        var = self.order[i]
        return SparsePoly(self.field, self.n,
                          {tuple(k if j == var else 0 for j in range(self.n)): c
                           for k, c in enumerate(self.layers[i][a][b])})

    def expand_rows(self, start: list[SparsePoly]) -> list[SparsePoly]:
        """start (a row of polynomials) times the layer product."""
        _check_guard(self.d, self.n)
        v = start
        for i in range(self.n):
            nxt = []
            for b in range(self.r):
                acc = SparsePoly.zero(self.field, self.n)
                for a in range(self.r):
                    if not v[a].is_zero() and self.layers[i][a][b]:
                        acc = acc + v[a] * self.layer_poly(i, a, b)
                nxt.append(acc)
            v = nxt
        return v

    def expand(self) -> list[list[SparsePoly]]:
        rows = []
        for a in range(self.r):
            e = [SparsePoly.const(self.field, self.n, int(a == b)) for b in range(self.r)]
            rows.append(self.expand_rows(e))
        return rows

    def reordered(self, perm: Sequence[int]) -> "MatrixRoabp":
        """Layers taken in the order perm (layer k of the result is layer perm[k])."""
        return MatrixRoabp(self.field, self.n, self.d, self.r,
                           tuple(self.order[k] for k in perm),
                           tuple(self.layers[k] for k in perm), self.commutative)

    def to_json(self) -> dict:
        return {"kind": "matrix-roabp", "p": self.field.p, "n": self.n, "d": self.d, "r": self.r,
                "order": list(self.order),
                "layers": [[[list(e) for e in row] for row in L] for L in self.layers]}


@dataclass(frozen=True)
class Roabp:
    """Scalar ROABP left * prod_i layers[i](x_{order[i]}) * right."""

    field: Field
    n: int
    d: int
    r: int
    order: tuple
    layers: tuple
    left: tuple
    right: tuple
    commutative: bool = False
    matrix: MatrixRoabp = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = self.field.p
        m = MatrixRoabp(self.field, self.n, self.d, self.r, self.order, self.layers, self.commutative)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "order", m.order)
        object.__setattr__(self, "layers", m.layers)
        if len(self.left) != self.r or len(self.right) != self.r:
            raise ValueError("boundary vectors must have length r")
        object.__setattr__(self, "left", tuple(x % p for x in self.left))
        object.__setattr__(self, "right", tuple(x % p for x in self.right))

    def __call__(self, point: Sequence[int]) -> int:
        return roabp_eval(self, point)

    def expand(self) -> SparsePoly:
        start = [SparsePoly.const(self.field, self.n, c) for c in self.left]
        row = self.matrix.expand_rows(start)
        total = SparsePoly.zero(self.field, self.n)
        for v, c in zip(row, self.right):
            if c:
                total = total + v.scale(c)
        return total

    def reordered(self, perm: Sequence[int]) -> "Roabp":
        m = self.matrix.reordered(perm)
        return Roabp(self.field, self.n, self.d, self.r, m.order, m.layers, self.left, self.right,
                     self.commutative)

    def with_order(self, order: Sequence[int]) -> "Roabp":
        """Same layers, read under a different variable order."""
        return Roabp(self.field, self.n, self.d, self.r, tuple(order), self.layers, self.left,
                     self.right, self.commutative)

    def to_json(self) -> dict:
        doc = self.matrix.to_json()
        doc.update(kind="roabp", left=list(self.left), right=list(self.right))
        return doc


def roabp_eval(m: Roabp, point: Sequence[int]) -> int:
    if len(point) != m.n:
        raise ValueError(f"point has length {len(point)}, expected {m.n}")
    p = m.field.p
    v = list(m.left)
    for i in range(m.n):
        v = _vecmat(v, m.matrix.layer_at(i, point[m.order[i]]), p)
    return sum(a * b for a, b in zip(v, m.right)) % p


def roabp_expand(m: Roabp | MatrixRoabp):
    return m.expand()


@dataclass(frozen=True)
class Smabp:
    """Set-multilinear ABP: left * prod_i M_i(x_i) * right with M_i linear in the set x_i."""

    field: Field
    d: int
    n: int
    r: int
    layers: tuple  # layers[i][a][b] = n coefficients of a linear form in set i
    partition: tuple  # partition[i] = the n global variable indices of set i
    left: tuple = None
    right: tuple = None

    def __post_init__(self):
        p = self.field.p
        if len(self.layers) != self.d or len(self.partition) != self.d:
            raise ValueError(f"expected {self.d} layers and sets")
        flat = [v for s in self.partition for v in s]
        if sorted(flat) != list(range(self.d * self.n)) or any(len(s) != self.n for s in self.partition):
            raise ValueError("partition must split range(d*n) into d sets of size n")
        clean = []
        for L in self.layers:
            if len(L) != self.r or any(len(row) != self.r for row in L):
                raise ValueError(f"layers must be {self.r}x{self.r}")
            rows = []
            for row in L:
                for e in row:
                    if len(e) != self.n:
                        raise ValueError(f"linear forms need {self.n} coefficients")
                rows.append(tuple(tuple(c % p for c in e) for e in row))
            clean.append(tuple(rows))
        object.__setattr__(self, "layers", tuple(clean))
        object.__setattr__(self, "partition", tuple(tuple(s) for s in self.partition))
        e0 = tuple(int(i == 0) for i in range(self.r))
        object.__setattr__(self, "left", tuple(x % p for x in (self.left or e0)))
        object.__setattr__(self, "right", tuple(x % p for x in (self.right or e0)))

    @property
    def nvars(self) -> int:
        return self.d * self.n

    def __call__(self, point: Sequence[int]) -> int:
        p = self.field.p
        v = list(self.left)
        for L, s in zip(self.layers, self.partition):
            M = [[sum(c * point[x] for c, x in zip(e, s)) % p for e in row] for row in L]
            v = _vecmat(v, M, p)
        return sum(a * b for a, b in zip(v, self.right)) % p

    def expand(self) -> SparsePoly:
        N = self.nvars
        v = [SparsePoly.const(self.field, N, c) for c in self.left]
        for L, s in zip(self.layers, self.partition):
            forms = [[SparsePoly(self.field, N, {tuple(int(k == x) for k in range(N)): c
                                                 for c, x in zip(e, s)}) for e in row] for row in L]
            v = [sum((v[a] * forms[a][b] for a in range(self.r)), SparsePoly.zero(self.field, N))
                 for b in range(self.r)]
        total = SparsePoly.zero(self.field, N)
        for f, c in zip(v, self.right):
            total = total + f.scale(c)
        return total

    def to_json(self) -> dict:
        return {"kind": "smabp", "p": self.field.p, "n": self.n, "d": self.d, "r": self.r,
                "layers": [[[list(e) for e in row] for row in L] for L in self.layers],
                "partition": [list(s) for s in self.partition],
                "left": list(self.left), "right": list(self.right)}


def smabp_to_roabp(s: Smabp) -> Roabp:
    """Width-2r multilinear ROABP from the gadgets [[I, A x], [0, I]]."""
    r, n = s.r, s.n
    w = 2 * r
    order = []
    layers = []
    for i, (L, part) in enumerate(zip(s.layers, s.partition)):
        for j, var in enumerate(part):
            # gadget: identity on the diagonal blocks, A_ij x in the upper right block
            G = [[[0, 0] for _ in range(w)] for _ in range(w)]
            for a in range(w):
                G[a][a][0] = 1
            for a in range(r):
                for b in range(r):
                    G[a][r + b][1] = L[a][b][j]
            if j == 0 and i > 0:
                # fold QP = [[0, 0], [I, 0]] into the first layer of the block
                G = [[[0, 0] for _ in range(w)] for _ in range(r)] + G[:r]
            order.append(var)
            layers.append(tuple(tuple(tuple(e) for e in row) for row in G))
    left = tuple(s.left) + (0,) * r
    right = (0,) * r + tuple(s.right)
    return Roabp(s.field, s.nvars, 2, w, tuple(order), tuple(layers), left, right)


@dataclass(frozen=True)
class DiagonalCircuit:
    """sum_i (c_i0 + sum_j c_ij x_j)^{power_i}."""

    field: Field
    n: int
    terms: tuple  # ((c0, c1, ..., cn), power)

    def __post_init__(self):
        p = self.field.p
        clean = []
        for coeffs, power in self.terms:
            if len(coeffs) != self.n + 1:
                raise ValueError(f"affine forms need {self.n + 1} coefficients")
            if power < 0:
                raise ValueError("powers must be >= 0")
            clean.append((tuple(c % p for c in coeffs), int(power)))
        object.__setattr__(self, "terms", tuple(clean))

    @property
    def degree(self) -> int:
        return max((k for _, k in self.terms), default=0)

    def __call__(self, point: Sequence[int]) -> int:
        p = self.field.p
        total = 0
        for coeffs, k in self.terms:
            L = (coeffs[0] + sum(c * x for c, x in zip(coeffs[1:], point))) % p
            total += pow(L, k, p)
        return total % p

    def expand(self) -> SparsePoly:
        budget = term_budget()
        total = SparsePoly.zero(self.field, self.n)
        for coeffs, k in self.terms:
            if comb(self.n + k, k) > budget:
                raise BudgetExceeded(f"power {k} in {self.n} variables exceeds the budget")
            L = SparsePoly.const(self.field, self.n, coeffs[0])
            for j, c in enumerate(coeffs[1:]):
                L = L + SparsePoly.var(self.field, self.n, j).scale(c)
            total = total + L ** k
        return total

    def to_json(self) -> dict:
        return {"kind": "diagonal", "p": self.field.p, "n": self.n, "d": self.degree,
                "terms": [{"coeffs": list(c), "power": k} for c, k in self.terms]}


def diagonal_to_poly(c: DiagonalCircuit) -> SparsePoly:
    return c.expand()


def derivative_vectors(f: SparsePoly) -> list[SparsePoly]:
    """All Hasse derivatives d_{x^a} f with a below the individual degrees of f."""
    degs = f.ind_degrees()
    count = 1
    for e in degs:
        count *= e + 1
    if count > term_budget():
        raise BudgetExceeded(f"{count} derivative exponents exceed the budget")
    return [hasse_derivative(f, a) for a in product(*(range(e + 1) for e in degs))]


def partial_derivative_dim(f: SparsePoly) -> int:
    if f.is_zero():
        return 0
    index = {}
    rows = []
    for g in derivative_vectors(f):
        if g.is_zero():
            continue
        row = {}
        for a, c in g.terms.items():
            if a not in index:
                index[a] = len(index)
            row[index[a]] = c
        rows.append(row)
    dense = [[row.get(j, 0) for j in range(len(index))] for row in rows]
    return linalg.rank(dense, f.field.p)


def roabp_from_poly(f: SparsePoly, order: Sequence[int] | None = None) -> Roabp:
    """A ROABP for f in the given order whose width is at most dim of its derivative span.

    Cut k keeps a basis of the coefficient polynomials of prefix monomials (a restriction of
    the derivative span); each layer expresses a basis element through the next cut's basis.
    """
    field, n, p = f.field, f.arity, f.field.p
    order = list(range(n)) if order is None else list(order)
    degs = f.ind_degrees()
    d = max(degs, default=0) + 1

    def suffix_coeffs(k: int) -> dict:
        # prefix monomial -> polynomial (dict) in the remaining variables
        groups: dict = {}
        pre, suf = order[:k], order[k:]
        for a, c in f.terms.items():
            key = tuple(a[v] for v in pre)
            groups.setdefault(key, {})[tuple(a[v] for v in suf)] = c
        return groups

    def basis_of(polys: list[dict]) -> list[dict]:
        monos = sorted({m for g in polys for m in g})
        idx = {m: i for i, m in enumerate(monos)}
        vecs = []
        chosen = []
        for g in polys:
            v = [0] * len(monos)
            for m, c in g.items():
                v[idx[m]] = c
            if linalg.rank(vecs + [v], p) > len(vecs):
                vecs.append(v)
                chosen.append(g)
        return chosen

    if f.is_zero():
        zero = (((),),)
        return Roabp(field, n, 1, 1, tuple(order), tuple(zero for _ in range(n)), (0,), (0,))
    bases = [[{tuple(a[v] for v in order): c for a, c in f.terms.items()}]]
    for k in range(1, n + 1):
        bases.append(basis_of(list(suffix_coeffs(k).values())))
    width = max(len(b) for b in bases)
    layers = []
    for k in range(n):
        cur, nxt = bases[k], bases[k + 1]
        monos = sorted({m for g in nxt for m in g})
        idx = {m: i for i, m in enumerate(monos)}
        vecs = []
        for g in nxt:
            v = [0] * len(monos)
            for m, c in g.items():
                v[idx[m]] = c
            vecs.append(v)
        L = [[[0] * d for _ in range(width)] for _ in range(width)]
        for a, g in enumerate(cur):
            # split g by the exponent of the next variable
            parts: dict = {}
            for m, c in g.items():
                parts.setdefault(m[0], {})[m[1:]] = c
            for e, h in parts.items():
                target = [0] * len(monos)
                for m, c in h.items():
                    target[idx[m]] = c
                lam = linalg.solve_in_span(vecs, target, p)
                if lam is None:
                    raise ArithmeticError("coefficient polynomial outside the next basis")
                for b, c in enumerate(lam):
                    L[a][b][e] = (L[a][b][e] + c) % p
        layers.append(tuple(tuple(tuple(e) for e in row) for row in L))
    left = tuple(int(i == 0) for i in range(width))
    # the last cut's basis consists of nonzero constants
    consts = [g[()] for g in bases[n]]
    right = tuple(consts) + (0,) * (width - len(consts))
    return Roabp(field, n, d, width, tuple(order), tuple(layers), left, right)


def random_model(kind: str, n: int, d: int, r: int, seed: int, field: Field):
    """Seeded random instance.

    kind: roabp (random order), matrix-roabp, commutative (diagonal layers, flagged), smabp
    (d sets of n variables), diagonal (r terms of power <= d).
    """
    rng = random.Random(seed)
    p = field.p

    def rnd() -> int:
        return rng.randrange(p)

    if kind in ("roabp", "matrix-roabp", "commutative"):
        order = list(range(n))
        rng.shuffle(order)
        layers = []
        for _ in range(n):
            if kind == "commutative":
                L = [[tuple(rnd() for _ in range(d)) if a == b else () for b in range(r)]
                     for a in range(r)]
            else:
                L = [[tuple(rnd() for _ in range(d)) for _ in range(r)] for _ in range(r)]
            layers.append(L)
        if kind == "matrix-roabp":
            return MatrixRoabp(field, n, d, r, tuple(order), tuple(layers))
        left = tuple(rnd() for _ in range(r))
        right = tuple(rnd() for _ in range(r))
        return Roabp(field, n, d, r, tuple(order), tuple(layers), left, right,
                     commutative=kind == "commutative")
    if kind == "smabp":
        perm = list(range(n * d))
        rng.shuffle(perm)
        partition = [perm[i * n:(i + 1) * n] for i in range(d)]
        layers = [[[tuple(rnd() for _ in range(n)) for _ in range(r)] for _ in range(r)]
                  for _ in range(d)]
        left = tuple(rnd() for _ in range(r))
        right = tuple(rnd() for _ in range(r))
        return Smabp(field, d, n, r, layers, partition, left, right)
    if kind == "diagonal":
        terms = [(tuple(rnd() for _ in range(n + 1)), rng.randint(0, d)) for _ in range(r)]
        return DiagonalCircuit(field, n, terms)
    raise ValueError(f"unknown model kind {kind!r}")


def model_from_json(doc: dict):
    field = Field(doc["p"])
    kind = doc["kind"]
    if kind in ("roabp", "matrix-roabp"):
        layers = tuple(tuple(tuple(tuple(e) for e in row) for row in L) for L in doc["layers"])
        if kind == "matrix-roabp":
            return MatrixRoabp(field, doc["n"], doc["d"], doc["r"], tuple(doc["order"]), layers)
        return Roabp(field, doc["n"], doc["d"], doc["r"], tuple(doc["order"]), layers,
                     tuple(doc["left"]), tuple(doc["right"]))
    if kind == "smabp":
        return Smabp(field, doc["d"], doc["n"], doc["r"], doc["layers"], doc["partition"],
                     tuple(doc["left"]) if "left" in doc else None,
                     tuple(doc["right"]) if "right" in doc else None)
    if kind == "diagonal":
        return DiagonalCircuit(field, doc["n"], tuple((tuple(t["coeffs"]), t["power"]) for t in doc["terms"]))
    raise ValueError(f"unknown kind {kind!r}")
