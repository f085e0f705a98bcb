"""Polynomial maps used as hitting-set generators, their certification, and the indexable
interpolation cubes (hitting sets) they induce."""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass
from itertools import combinations, product
from math import comb, prod
from typing import Mapping, Sequence

import numpy as np

from .field import Field, FieldError, smallest_prime_at_least
from .poly import BudgetExceeded, PolyMap, SparsePoly, compose, term_budget
from .rank import lg_ceil, lg_floor


class GeneratorMap:
    """A polynomial map from seed variables to F^n.

    seeds: seed variable names; blocks: named groups of seed indices; t_block/s_block: the
    monomial block and the selector block used by certification; s_nodes: for selector seeds,
    the number of interpolation nodes (the node values are 0, 1, ..., count-1).
    """

    field: Field
    seeds: tuple
    out_arity: int
    blocks: dict
    t_block: tuple = ()
    s_block: tuple = ()
    s_nodes: dict = {}
    note: str = "explicit polynomial map"
    certificate: dict | None = None

    def evaluate(self, point: Sequence[int]) -> list[int]:
        raise NotImplementedError

    def degree_table(self) -> list[list[int]]:
        """deg[i][v]: bound on the degree of component i in seed v."""
        raise NotImplementedError

    def materialize(self) -> list[SparsePoly]:
        raise NotImplementedError

    def lazy_nodes(self) -> dict:
        """Selector seeds whose node set is too large to expand: seed index -> node count."""
        return {}

    def specialize(self, assignment: Mapping[int, int]) -> "GeneratorMap":
        if not assignment:
            return self
        return Specialized(self, dict(assignment))

    def degree_profile(self) -> list[int]:
        table = self.degree_table()
        return [max((row[v] for row in table), default=0) for v in range(len(self.seeds))]

    def renamed(self, names: Sequence[str]) -> "GeneratorMap":
        g = copy.copy(self)
        g.seeds = tuple(names)
        return g

    def __call__(self, point):
        return self.evaluate(point)

    def sample_point(self, rng: random.Random) -> list[int]:
        """A generic seed point: uniform values, lazy selector seeds uniform over their nodes."""
        lazy = self.lazy_nodes()
        p = self.field.p
        return [rng.randrange(lazy[v]) if v in lazy else rng.randrange(p)
                for v in range(len(self.seeds))]

    def to_json(self, with_components: bool = False) -> dict:
        doc = {"p": self.field.p, "seeds": list(self.seeds), "out_arity": self.out_arity,
               "blocks": {k: list(v) for k, v in self.blocks.items()},
               "degree_profile": self.degree_profile(), "note": self.note,
               "certificate": self.certificate}
        if with_components:
            doc["components"] = [f.to_json() for f in self.materialize()]
        return doc


class PolyGenerator(GeneratorMap):
    """Generator with explicitly stored SparsePoly components."""

    def __init__(self, field: Field, seeds: Sequence[str], components: Sequence[SparsePoly],
                 blocks: dict | None = None, t_block=(), s_block=(), s_nodes=None,
                 note: str = "explicit polynomial map"):
        self.field = field
        self.seeds = tuple(seeds)
        self.components = tuple(components)
        for c in self.components:
            if c.arity != len(self.seeds) or c.field != field:
                raise ValueError("component arity or field mismatch")
        self.out_arity = len(self.components)
        self.blocks = dict(blocks or {})
        self.t_block = tuple(t_block)
        self.s_block = tuple(s_block)
        self.s_nodes = dict(s_nodes or {})
        self.note = note
        self.certificate = None
        self._table = None

    def evaluate(self, point):
        if len(point) != len(self.seeds):
            raise ValueError(f"seed point has length {len(point)}, expected {len(self.seeds)}")
        p = self.field.p
        pts = [v % p for v in point]
        cache: dict = {}
        out = []
        for f in self.components:
            total = 0
            for a, c in f.terms.items():
                for i, e in enumerate(a):
                    if e:
                        key = (i, e)
                        v = cache.get(key)
                        if v is None:
                            v = cache[key] = pow(pts[i], e, p)
                        c = c * v % p
                total += c
            out.append(total % p)
        return out

    def degree_table(self):
        if self._table is None:
            self._table = [f.ind_degrees() for f in self.components]
        return self._table

    def materialize(self):
        return list(self.components)

    def specialize(self, assignment):
        if not assignment:
            return self
        keep = [v for v in range(len(self.seeds)) if v not in assignment]
        pos = {v: k for k, v in enumerate(keep)}

        def remap(idx):
            return tuple(pos[v] for v in idx if v in pos)
        return PolyGenerator(self.field, [self.seeds[v] for v in keep],
                             [f.substitute(assignment) for f in self.components],
                             {k: remap(v) for k, v in self.blocks.items()},
                             remap(self.t_block), remap(self.s_block),
                             {pos[v]: c for v, c in self.s_nodes.items() if v in pos}, self.note)


class KSGenerator(GeneratorMap):
    """x_i <- prod_j t_j^(k_j^i mod q), with k_j selected by Lagrange indicators of s_j over Z_q."""

    def __init__(self, field: Field, n: int, m: int, q: int, d: int | None = None,
                 s: int | None = None):
        if field.p <= q:
            raise FieldError(f"F_{field.p} cannot host the {q} selector nodes of Z_{q}")
        self.field = field
        self.n, self.m, self.q = n, m, q
        self.d, self.sparsity = d, s
        self.seeds = tuple([f"t{j + 1}" for j in range(m)] + [f"s{j + 1}" for j in range(m)])
        self.out_arity = n
        self.blocks = {"t": tuple(range(m)), "s": tuple(range(m, 2 * m))}
        self.t_block = self.blocks["t"]
        self.s_block = self.blocks["s"]
        self.s_nodes = {v: q for v in self.s_block}
        self.note = f"KS map, candidate set Z_{q}, lazy selector interpolation"
        self.certificate = None
        self._weights = None

    def exponents_at(self, ks: Sequence[int]) -> list[tuple]:
        q = self.q
        return [tuple(pow(k, i + 1, q) for k in ks) for i in range(self.n)]

    def _bary_weights(self):
        # weights w_k = 1 / prod_{j != k} (k - j) over nodes 0..q-1: w_k = 1/(k! (q-1-k)! (-1)^(q-1-k))
        if self._weights is None:
            p, q = self.field.p, self.q
            if q > 10**6:
                raise BudgetExceeded(f"selector evaluation off the nodes needs O({q}) work")
            fact = [1] * q
            for i in range(1, q):
                fact[i] = fact[i - 1] * i % p
            w = []
            for k in range(q):
                v = fact[k] * fact[q - 1 - k] % p
                if (q - 1 - k) % 2:
                    v = -v % p
                w.append(pow(v, -1, p))
            self._weights = w
        return self._weights

    def _selector_values(self, sv: int) -> dict:
        """{k: L_k(sv)} for the nodes 0..q-1 (sparse when sv is a node)."""
        p, q = self.field.p, self.q
        if sv < q:
            return {sv: 1}
        w = self._bary_weights()
        inv = [pow((sv - k) % p, -1, p) for k in range(q)]
        ell = 1
        for k in range(q):
            ell = ell * (sv - k) % p
        return {k: ell * w[k] % p * inv[k] % p for k in range(q)}

    def evaluate(self, point):
        p, q, m = self.field.p, self.q, self.m
        pts = [v % p for v in point]
        out = [1] * self.n
        for j in range(m):
            t = pts[j]
            sel = self._selector_values(pts[m + j])
            for i in range(self.n):
                acc = 0
                for k, lv in sel.items():
                    acc += lv * pow(t, pow(k, i + 1, q), p)
                out[i] = out[i] * acc % p
        return out

    def degree_table(self):
        D = self.q - 1
        return [[D] * (2 * self.m) for _ in range(self.n)]

    def lazy_nodes(self):
        return dict(self.s_nodes)

    def materialize(self):
        if self.q * self.q * self.m > term_budget():
            raise BudgetExceeded(f"KS map over Z_{self.q} is too large to expand")
        from .field import lagrange_indicator
        field, q, m = self.field, self.q, self.m
        nodes = list(range(q))
        L = [lagrange_indicator(field, nodes, k) for k in range(q)]
        comps = []
        for i in range(self.n):
            f = SparsePoly.const(field, 2 * m, 1)
            for j in range(m):
                g = {}
                for k in range(q):
                    e = pow(k, i + 1, q)
                    for deg, c in enumerate(L[k].coeffs):
                        a = [0] * (2 * m)
                        a[j] = e
                        a[m + j] = deg
                        key = tuple(a)
                        g[key] = (g.get(key, 0) + c) % field.p
                f = f * SparsePoly(field, 2 * m, g)
            comps.append(f)
        return comps

    def specialize(self, assignment):
        if not assignment:
            return self
        q, m, p = self.q, self.m, self.field.p
        s_fixed = all(m + j in assignment and assignment[m + j] % p < q for j in range(m))
        if not s_fixed:
            return Specialized(self, dict(assignment))
        ks = [assignment[m + j] % p for j in range(m)]
        keep = [j for j in range(m) if j not in assignment]
        comps = []
        for exps in self.exponents_at(ks):
            c = 1
            a = []
            for j in range(m):
                if j in assignment:
                    c = c * pow(assignment[j], exps[j], p) % p
                else:
                    a.append(exps[j])
            comps.append(SparsePoly(self.field, len(keep), {tuple(a): c}))
        names = [self.seeds[j] for j in keep]
        return PolyGenerator(self.field, names, comps, {"t": tuple(range(len(keep)))},
                             tuple(range(len(keep))), (), {}, f"KS map at k = {ks}")


class Specialized(GeneratorMap):
    """base with some seeds fixed to constants."""

    def __init__(self, base: GeneratorMap, assignment: dict):
        self.base = base
        self.assignment = {v: x % base.field.p for v, x in assignment.items()}
        self.field = base.field
        self.keep = [v for v in range(len(base.seeds)) if v not in assignment]
        pos = {v: k for k, v in enumerate(self.keep)}
        self.pos = pos
        self.seeds = tuple(base.seeds[v] for v in self.keep)
        self.out_arity = base.out_arity
        self.blocks = {k: tuple(pos[v] for v in idx if v in pos) for k, idx in base.blocks.items()}
        self.t_block = tuple(pos[v] for v in base.t_block if v in pos)
        self.s_block = tuple(pos[v] for v in base.s_block if v in pos)
        self.s_nodes = {pos[v]: c for v, c in base.s_nodes.items() if v in pos}
        self.note = base.note + f"; specialized at {self.assignment}"
        self.certificate = None

    def full_point(self, point):
        full = [0] * len(self.base.seeds)
        for v, x in self.assignment.items():
            full[v] = x
        for k, v in enumerate(self.keep):
            full[v] = point[k]
        return full

    def evaluate(self, point):
        return self.base.evaluate(self.full_point(point))

    def degree_table(self):
        return [[row[v] for v in self.keep] for row in self.base.degree_table()]

    def lazy_nodes(self):
        return {self.pos[v]: c for v, c in self.base.lazy_nodes().items() if v in self.pos}

    def materialize(self):
        return [f.substitute(self.assignment) for f in self.base.materialize()]


class Scaled(GeneratorMap):
    """u * base, with u a fresh seed placed first."""

    def __init__(self, base: GeneratorMap, name: str = "u"):
        self.base = base
        self.field = base.field
        self.seeds = (name,) + tuple(base.seeds)
        self.out_arity = base.out_arity
        shift1 = lambda idx: tuple(v + 1 for v in idx)  # noqa: E731
        self.blocks = {"u": (0,), **{k: shift1(v) for k, v in base.blocks.items()}}
        self.t_block = shift1(base.t_block)
        self.s_block = shift1(base.s_block)
        self.s_nodes = {v + 1: c for v, c in base.s_nodes.items()}
        self.note = "u * (" + base.note + ")"
        self.certificate = None

    def evaluate(self, point):
        p = self.field.p
        u = point[0] % p
        return [u * x % p for x in self.base.evaluate(point[1:])]

    def degree_table(self):
        return [[1] + row for row in self.base.degree_table()]

    def lazy_nodes(self):
        return {v + 1: c for v, c in self.base.lazy_nodes().items()}

    def materialize(self):
        k = len(self.seeds)
        u = SparsePoly.var(self.field, k, 0)
        return [u * f.embed(k, range(1, k)) for f in self.base.materialize()]

    def specialize(self, assignment):
        if not assignment:
            return self
        inner = {v - 1: x for v, x in assignment.items() if v > 0}
        base = self.base.specialize(inner)
        if 0 in assignment:
            return _ConstScaled(base, assignment[0])
        return Scaled(base, self.seeds[0])


class _ConstScaled(GeneratorMap):
    def __init__(self, base: GeneratorMap, c: int):
        self.base = base
        self.c = c % base.field.p
        self.field = base.field
        self.seeds = base.seeds
        self.out_arity = base.out_arity
        self.blocks = base.blocks
        self.t_block, self.s_block, self.s_nodes = base.t_block, base.s_block, base.s_nodes
        self.note = f"{self.c} * ({base.note})"
        self.certificate = None

    def evaluate(self, point):
        p = self.field.p
        return [self.c * x % p for x in self.base.evaluate(point)]

    def degree_table(self):
        if self.c == 0:
            return [[0] * len(self.seeds) for _ in range(self.out_arity)]
        return self.base.degree_table()

    def lazy_nodes(self):
        return self.base.lazy_nodes()

    def materialize(self):
        return [f.scale(self.c) for f in self.base.materialize()]

    def specialize(self, assignment):
        return _ConstScaled(self.base.specialize(assignment), self.c) if assignment else self


class Sum(GeneratorMap):
    """Component-wise sum of maps on disjoint seed blocks (seeds concatenated)."""

    def __init__(self, parts: Sequence[GeneratorMap], out_arity: int | None = None,
                 field: Field | None = None, note: str | None = None):
        self.parts = list(parts)
        if not self.parts and (out_arity is None or field is None):
            raise ValueError("an empty sum needs out_arity and field")
        self.field = field or self.parts[0].field
        self.out_arity = out_arity if out_arity is not None else self.parts[0].out_arity
        if any(g.out_arity != self.out_arity or g.field != self.field for g in self.parts):
            raise ValueError("summands must share field and output arity")
        seeds, blocks, tb, sb, sn = [], {}, [], [], {}
        self.offsets = []
        for g in self.parts:
            off = len(seeds)
            self.offsets.append(off)
            seeds.extend(g.seeds)
            for k, idx in g.blocks.items():
                blocks[k] = blocks.get(k, ()) + tuple(v + off for v in idx)
            tb.extend(v + off for v in g.t_block)
            sb.extend(v + off for v in g.s_block)
            sn.update({v + off: c for v, c in g.s_nodes.items()})
        if len(set(seeds)) != len(seeds):
            raise ValueError("summands must use disjoint seed names")
        self.seeds = tuple(seeds)
        self.blocks = blocks
        self.t_block, self.s_block, self.s_nodes = tuple(tb), tuple(sb), sn
        self.note = note or " + ".join(g.note for g in self.parts) or "zero map"
        self.certificate = None

    def _split(self, point):
        out = []
        for g, off in zip(self.parts, self.offsets):
            out.append(point[off:off + len(g.seeds)])
        return out

    def evaluate(self, point):
        if len(point) != len(self.seeds):
            raise ValueError(f"seed point has length {len(point)}, expected {len(self.seeds)}")
        p = self.field.p
        total = [0] * self.out_arity
        for g, sub in zip(self.parts, self._split(point)):
            for i, x in enumerate(g.evaluate(sub)):
                total[i] += x
        return [x % p for x in total]

    def degree_table(self):
        rows = [[] for _ in range(self.out_arity)]
        for g in self.parts:
            for i, row in enumerate(g.degree_table()):
                rows[i].extend(row)
        return rows

    def lazy_nodes(self):
        out = {}
        for g, off in zip(self.parts, self.offsets):
            out.update({v + off: c for v, c in g.lazy_nodes().items()})
        return out

    def materialize(self):
        k = len(self.seeds)
        total = [SparsePoly.zero(self.field, k) for _ in range(self.out_arity)]
        for g, off in zip(self.parts, self.offsets):
            pos = range(off, off + len(g.seeds))
            for i, f in enumerate(g.materialize()):
                total[i] = total[i] + f.embed(k, pos)
        return total

    def specialize(self, assignment):
        if not assignment:
            return self
        parts = []
        for g, off in zip(self.parts, self.offsets):
            sub = {v - off: x for v, x in assignment.items() if off <= v < off + len(g.seeds)}
            parts.append(g.specialize(sub))
        return Sum(parts, self.out_arity, self.field, self.note)


class Projection(GeneratorMap):
    """The first k components of base."""

    def __init__(self, base: GeneratorMap, k: int):
        self.base, self.k = base, k
        self.field, self.seeds = base.field, base.seeds
        self.out_arity = k
        self.blocks, self.t_block, self.s_block = base.blocks, base.t_block, base.s_block
        self.s_nodes = base.s_nodes
        self.note = f"first {k} components of ({base.note})"
        self.certificate = base.certificate

    def evaluate(self, point):
        return self.base.evaluate(point)[: self.k]

    def degree_table(self):
        return self.base.degree_table()[: self.k]

    def lazy_nodes(self):
        return self.base.lazy_nodes()

    def materialize(self):
        return self.base.materialize()[: self.k]

    def specialize(self, assignment):
        return Projection(self.base.specialize(assignment), self.k) if assignment else self


def identity_generator(field: Field, n: int, prefix: str = "x") -> PolyGenerator:
    comps = [SparsePoly.var(field, n, i) for i in range(n)]
    return PolyGenerator(field, [f"{prefix}{i + 1}" for i in range(n)], comps,
                         {"t": tuple(range(n))}, tuple(range(n)), (), {}, "identity map")


def sv_generator(field: Field, n: int, ell: int, prefix: str = "") -> PolyGenerator:
    """(G_k) = sum_j L_k(z_j) y_j with Lagrange indicators over xi_0..xi_n = 0..n."""
    from .field import lagrange_indicator
    if field.p <= n:
        raise FieldError(f"SV map on {n} variables needs |F| > {n}, got {field.p}")
    nodes = field.elements(n + 1)
    L = [lagrange_indicator(field, nodes, k) for k in range(n + 1)]
    arity = 2 * ell
    comps = []
    for k in range(1, n + 1):
        terms: dict = {}
        for j in range(ell):
            for deg, c in enumerate(L[k].coeffs):
                a = [0] * arity
                a[j] = 1
                a[ell + j] = deg
                terms[tuple(a)] = c
        comps.append(SparsePoly(field, arity, terms))
    seeds = [f"{prefix}y{j + 1}" for j in range(ell)] + [f"{prefix}z{j + 1}" for j in range(ell)]
    return PolyGenerator(field, seeds, comps,
                         {"y": tuple(range(ell)), "z": tuple(range(ell, arity))},
                         tuple(range(ell)), tuple(range(ell, arity)),
                         {v: n + 1 for v in range(ell, arity)}, f"SV map, n={n}, ell={ell}")


def ks_modulus(n: int, s: int) -> int:
    return smallest_prime_at_least(2 * n * s * s + 1)


def ks_generator(field: Field, n: int, d: int, s: int, m: int = 1, q: int | None = None) -> KSGenerator:
    """KS map for sparsity s; q defaults to the smallest prime >= 2 n s^2 + 1."""
    if q is None:
        q = ks_modulus(n, s)
    return KSGenerator(field, n, m, q, d, s)


def total_degree_monomials(n: int, D: int) -> np.ndarray:
    """All exponent vectors in n variables of total degree < D, as rows."""
    out = []

    def rec(prefix, left, k):
        if k == n:
            out.append(prefix)
            return
        for e in range(left):
            rec(prefix + [e], left - e, k + 1)
    rec([], D, 0)
    return np.array(out, dtype=np.int64).reshape(len(out), n)


def ind_degree_monomials(k: int, d: int) -> np.ndarray:
    return np.array(list(product(range(d), repeat=k)), dtype=np.int64).reshape(-1, k)


def _node_components(g: GeneratorMap, s_values: Sequence[int]):
    """Components of g with the selector block fixed: list of (coeff, exponents over t) or None."""
    if isinstance(g, KSGenerator):
        return [(1, e) for e in g.exponents_at(s_values)]
    spec = g.specialize(dict(zip(g.s_block, s_values)))
    t_pos = [spec.seeds.index(g.seeds[v]) for v in g.t_block]
    out = []
    for f in spec.materialize():
        if len(f.terms) == 0:
            out.append(None)
            continue
        if len(f.terms) > 1:
            out.append("multi")
            continue
        (a, c), = f.terms.items()
        if any(e for i, e in enumerate(a) if i not in t_pos):
            out.append("multi")
            continue
        out.append((c, tuple(a[i] for i in t_pos)))
    return out


def _distinct_images(comps, idx: Sequence[int], monos: np.ndarray) -> bool:
    """Monomials (rows over idx) map to nonzero, pairwise distinct t-monomials."""
    if monos.shape[0] <= 1 and not monos.any():
        return True
    for col, i in enumerate(idx):
        if monos[:, col].any():
            c = comps[i]
            if c is None or c == "multi":
                return False
    used = [i for col, i in enumerate(idx) if monos[:, col].any()]
    if not used:
        return monos.shape[0] == 1
    E = np.array([comps[i][1] for i in idx], dtype=object)
    images = monos.astype(object) @ E
    keys = {tuple(row) for row in images.tolist()}
    return len(keys) == monos.shape[0]


def _node_points(g: GeneratorMap):
    return product(*(range(g.s_nodes.get(v, 1)) for v in g.s_block))


def certify_monomial_map(g: GeneratorMap, kind: str, bound: int, ell: int | None = None,
                         max_points: int | None = None) -> bool:
    """kind "ell-wise": every S of size <= ell is separated (ind-deg < bound) by some selector
    node; kind "total-degree": one node separates every monomial of total degree < bound.
    On success the witness is stored in g.certificate."""
    n = g.out_arity
    budget = max_points if max_points is not None else term_budget()
    cache: dict = {}

    def comps_at(pt):
        if pt not in cache:
            cache[pt] = _node_components(g, pt)
        return cache[pt]

    if kind == "total-degree":
        monos = total_degree_monomials(n, bound)
        if monos.shape[0] > budget:
            raise BudgetExceeded(f"{monos.shape[0]} monomials exceed the budget")
        for count, pt in enumerate(_node_points(g)):
            if count >= budget:
                raise BudgetExceeded("selector cube exceeds the budget")
            comps = _node_components(g, pt)
            if _distinct_images(comps, range(n), monos):
                g.certificate = {"kind": "total-degree", "D": bound, "node": list(pt)}
                return True
        return False
    if kind == "ell-wise":
        if ell is None:
            raise ValueError("ell-wise certification needs ell")
        k = min(ell, n)
        monos = ind_degree_monomials(k, bound)
        witnesses = {}
        for S in combinations(range(n), k):
            for count, pt in enumerate(_node_points(g)):
                if count >= budget:
                    raise BudgetExceeded("selector cube exceeds the budget")
                if _distinct_images(comps_at(pt), S, monos):
                    witnesses[S] = list(pt)
                    break
            else:
                return False
        g.certificate = {"kind": "ell-wise", "ell": ell, "d": bound,
                         "witnesses": {",".join(map(str, S)): w for S, w in witnesses.items()}}
        return True
    raise ValueError(f"unknown certification kind {kind!r}")


def ks_total_degree_map(field: Field, n: int, D: int) -> KSGenerator:
    """KS map certified as a total-degree-<D independent monomial map on n variables.

    The sparsity s is the exact number of monomials of total degree < D.
    """
    s = comb(n + D - 1, n)
    g = ks_generator(field, n, D, s)
    if not certify_monomial_map(g, "total-degree", D):
        raise ArithmeticError(f"no KS node separates total degree < {D} in {n} variables")
    return g


@dataclass(frozen=True)
class HashFamily:
    n: int
    m: int
    q: int
    members: tuple  # (a, b) pairs
    ell: int

    def __call__(self, h: int, i: int) -> int:
        a, b = self.members[h]
        return (a * i + b) % self.q % self.m

    def __len__(self):
        return len(self.members)

    def injective_on(self, h: int, S: Sequence[int]) -> bool:
        return len({self(h, i) for i in S}) == len(S)

    def good_member(self, S: Sequence[int]) -> int | None:
        return next((h for h in range(len(self)) if self.injective_on(h, S)), None)


def hash_range(ell: int) -> int:
    return 1 << lg_ceil(ell * ell)


def pairwise_hash_family(n: int, ell: int) -> HashFamily:
    """i -> ((a i + b) mod q) mod m over 0-based i, q the smallest prime >= n, m = 2^ceil(lg ell^2);
    certified perfect for every ell-subset."""
    m = hash_range(ell)
    q = smallest_prime_at_least(max(n, 2))
    members = tuple((a, b) for a in range(1, q) for b in range(q))
    fam = HashFamily(n, m, q, members, ell)
    for S in combinations(range(n), min(ell, n)):
        if fam.good_member(S) is None:
            raise ArithmeticError(f"hash family is not perfect on {S}")
    return fam


def hashing_generator(field: Field, n: int, m: int, ell: int, fam: HashFamily) -> PolyGenerator:
    """(G^H)_i = sum_h L_{i}(z_{h(i)}) y_{h(i)} [u = eta_h]; seeds y1..ym, z1..zm, u."""
    from .field import lagrange_indicator
    if field.p < max(len(fam), n + 1):
        raise FieldError(f"hashing map needs |F| > max(|H|, n) = {max(len(fam), n)}")
    sv_nodes = field.elements(n + 1)
    L = [lagrange_indicator(field, sv_nodes, k) for k in range(n + 1)]
    etas = field.elements(len(fam))
    U = [lagrange_indicator(field, etas, h) for h in range(len(fam))]
    arity = 2 * m + 1
    p = field.p
    comps = []
    for i in range(n):
        terms: dict = {}
        for h in range(len(fam)):
            b = fam(h, i)
            for dz, cz in enumerate(L[i + 1].coeffs):
                for du, cu in enumerate(U[h].coeffs):
                    a = [0] * arity
                    a[b] = 1
                    a[m + b] = dz
                    a[2 * m] = du
                    key = tuple(a)
                    terms[key] = (terms.get(key, 0) + cz * cu) % p
        comps.append(SparsePoly(field, arity, terms))
    seeds = [f"y{j + 1}" for j in range(m)] + [f"z{j + 1}" for j in range(m)] + ["u"]
    return PolyGenerator(field, seeds, comps,
                         {"y": tuple(range(m)), "z": tuple(range(m, 2 * m)), "u": (2 * m,)},
                         tuple(range(m)), tuple(range(m, 2 * m)),
                         {v: n + 1 for v in range(m, 2 * m)},
                         f"hashing map, n={n}, m={m}, |H|={len(fam)}")


def merge_reduce_generator(N: int, d: int, r: int, base: GeneratorMap) -> GeneratorMap:
    """sum_{i < lg N} u_i * base(t_i, s_i) with fresh seeds per copy."""
    if N < 1 or N & (N - 1):
        raise ValueError(f"N = {N} is not a power of two")
    need = 2 * d * (lg_floor(r * r) + 1)
    cert = base.certificate or {}
    if cert.get("kind") != "total-degree" or cert.get("D", 0) < need:
        raise ValueError(f"base map must be certified total-degree < {need}")
    if base.out_arity != N:
        raise ValueError("base map must have N outputs")
    copies = []
    for i in range(lg_floor(N)):
        g = base.renamed([f"{name}_{i + 1}" for name in base.seeds])
        copies.append(Scaled(g, f"u{i + 1}"))
    return Sum(copies, N, base.field, f"merge-reduce of {lg_floor(N)} copies of ({base.note})")


def unknown_order_generator(field: Field, N: int, d: int, r: int, with_sv: bool = True) -> GeneratorMap:
    """Merge-reduce over the certified KS total-degree map, plus SV_{N, floor(lg r^2) + 1}.

    N is padded to a power of two; the extra components are dropped.
    with_sv=False gives the corrupted control without the SV part.
    """
    Np = 1 << lg_ceil(N)
    D = 2 * d * (lg_floor(r * r) + 1)
    base = ks_total_degree_map(field, Np, D)
    parts = [merge_reduce_generator(Np, d, r, base)]
    if with_sv:
        parts.append(sv_generator(field, Np, lg_floor(r * r) + 1))
    g: GeneratorMap = Sum(parts, Np, field, "unknown-order map" if with_sv else "merge-reduce only")
    g.certificate = {"ks_modulus": base.q, "ks_node": base.certificate["node"], "D": D}
    if Np != N:
        g = Projection(g, N)
    return g


def unknown_order_field_bound(N: int, d: int, r: int) -> int:
    """Smallest admissible |F| for the unknown-order hitting set of ind-deg < d polynomials."""
    Np = 1 << lg_ceil(N)
    D = 2 * d * (lg_floor(r * r) + 1)
    q = ks_modulus(Np, comb(Np + D - 1, Np))
    # cube values 1..Dv+1 with Dv <= N (d-1) (q-1) for the KS seeds
    return max(q + 1, N * max(d - 1, 1) * (q - 1) + 2, Np + 1)


def commutative_generator(field: Field, n: int, d: int, r: int) -> PolyGenerator:
    if field.p <= n * d:
        raise FieldError(f"commutative map needs |F| > nd = {n * d}")
    return sv_generator(field, n, 1 + 2 * lg_floor(r * r))


class VariableReducer:
    """Maps m bucket variables to fewer seeds; build returns a PolyGenerator with m outputs."""

    name = "abstract"
    deterministic = True

    def build(self, field: Field, m: int, deg_bound: int, width: int) -> PolyGenerator:
        raise NotImplementedError

    def failure_probability(self, field: Field, degree: int) -> float:
        return 0.0


class GridReducer(VariableReducer):
    """No reduction: the m variables are seeds and their full interpolation cube is used."""

    name = "grid"

    def build(self, field, m, deg_bound, width):
        g = identity_generator(field, m, "y")
        g.note = f"{self.name} reducer on {m} variables"
        return g


class IdentityReducer(GridReducer):
    name = "identity"


class RandomReducer(VariableReducer):
    """Seeded random line y = a + b w; not deterministic, fails with probability <= deg/p."""

    name = "random"
    deterministic = False

    def __init__(self, seed: int):
        self.seed = seed

    def build(self, field, m, deg_bound, width):
        rng = random.Random(self.seed)
        comps = []
        for _ in range(m):
            a, b = rng.randrange(field.p), rng.randrange(1, field.p)
            comps.append(SparsePoly(field, 1, {(0,): a, (1,): b}))
        return PolyGenerator(field, ["w"], comps, {"w": (0,)}, (0,), (), {},
                             f"random line reducer (seed {self.seed})")

    def failure_probability(self, field, degree):
        return degree / field.p


def hplusfs_generator(field: Field, n: int, d: int, r: int, ell: int,
                      reducer: VariableReducer) -> PolyGenerator:
    """Hashing map into m = 2^ceil(lg ell^2) buckets, z <- y^(d n^2), then the reducer on y."""
    ell = max(ell, 1)
    m = hash_range(ell)
    fam = pairwise_hash_family(n, ell)
    gh = hashing_generator(field, n, m, ell, fam)
    D = d * n * n
    # Kronecker substitution z_j <- y_j^D on the components (a ring map)
    k_arity = m + 1
    comps = []
    for f in gh.components:
        terms: dict = {}
        for a, c in f.terms.items():
            key = tuple(a[j] + D * a[m + j] for j in range(m)) + (a[2 * m],)
            terms[key] = (terms.get(key, 0) + c) % field.p
        comps.append(SparsePoly(field, k_arity, terms))
    red = reducer.build(field, m, d * d * n ** 4, r)
    if red.out_arity != m:
        raise ValueError(f"reducer returned {red.out_arity} outputs, expected {m}")
    w = len(red.seeds)
    inner = [f.embed(w + 1, range(w)) for f in red.components] + [SparsePoly.var(field, w + 1, w)]
    pm = PolyMap(w + 1, tuple(inner))
    final = [compose(f, pm) for f in comps]
    seeds = list(red.seeds) + ["u"]
    g = PolyGenerator(field, seeds, final, {"w": tuple(range(w)), "u": (w,)}, tuple(range(w)), (),
                      {}, f"hashing map (m={m}, |H|={len(fam)}) after z <- y^{D}, {reducer.name} reducer")
    g.certificate = {"m": m, "family_size": len(fam), "kronecker_base": D, "reducer": reducer.name,
                     "deterministic": reducer.deterministic}
    return g


class PointSet:
    """An indexable finite point set."""

    field: Field
    size: int

    def point(self, index: int) -> list[int]:
        raise NotImplementedError

    def __iter__(self):
        for i in range(self.size):
            yield self.point(i)

    def points(self, start: int, stop: int):
        for i in range(max(start, 0), min(stop, self.size)):
            yield self.point(i)


def _mixed_radix(index: int, radices: Sequence[int]) -> list[int]:
    out = [0] * len(radices)
    for v in range(len(radices) - 1, -1, -1):
        index, out[v] = divmod(index, radices[v])
    return out


class HittingSet(PointSet):
    """The cube giving seed v the values 1..D_v+1, mapped through the generator.

    D_v = sum_i bounds[i] * deg_v(G_i) bounds the degree of f o G in v for every f with
    individual degree <= bounds[i] in x_i.
    """

    def __init__(self, g: GeneratorMap, f_degree_bounds: Sequence[int]):
        if len(f_degree_bounds) != g.out_arity:
            raise ValueError(f"need {g.out_arity} degree bounds, got {len(f_degree_bounds)}")
        self.generator = g
        self.field = g.field
        self.bounds = list(f_degree_bounds)
        table = g.degree_table()
        nseeds = len(g.seeds)
        self.seed_degrees = [sum(b * table[i][v] for i, b in enumerate(self.bounds))
                             for v in range(nseeds)]
        self.radices = [D + 1 for D in self.seed_degrees]
        need = max(self.radices, default=0) + 1
        if g.field.p < need:
            raise FieldError(f"F_{g.field.p} cannot host {need - 1} nonzero values per seed "
                             f"(needs p >= {need})")
        self.size = prod(self.radices)

    def seed_point(self, index: int) -> list[int]:
        if not 0 <= index < self.size:
            raise IndexError(index)
        return [x + 1 for x in _mixed_radix(index, self.radices)]

    def point(self, index: int) -> list[int]:
        return self.generator.evaluate(self.seed_point(index))

    def accounting(self) -> dict:
        return {"size": self.size, "seeds": list(self.generator.seeds),
                "seed_degrees": self.seed_degrees, "values_per_seed": self.radices,
                "p": self.field.p, "note": self.generator.note}


def gen_to_hitting_set(g: GeneratorMap, f_degree_bounds: Sequence[int]) -> HittingSet:
    return HittingSet(g, f_degree_bounds)


def required_prime_bound(g: GeneratorMap, f_degree_bounds: Sequence[int]) -> int:
    """Smallest |F| for which the hitting set of g fits (values 1..D_v+1)."""
    table = g.degree_table()
    Ds = [sum(b * table[i][v] for i, b in enumerate(f_degree_bounds)) for v in range(len(g.seeds))]
    return max(Ds, default=0) + 2
