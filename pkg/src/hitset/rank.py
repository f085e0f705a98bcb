"""Derivative matrices, rank concentration, Wronskians, transfer matrices, rank condensers,
the partial-ID lemma, isolating differential operators and greedy minimal bases."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations, product
from typing import Hashable, Sequence

from . import linalg
from .field import Field
from .poly import (BudgetExceeded, SparsePoly, UniPoly, binom_mod, binom_vec, shift,
                   term_budget)


def lg_floor(x: int) -> int:
    """floor(log2 x) for x >= 1, by bit length."""
    if x < 1:
        raise ValueError(f"lg of {x}")
    return x.bit_length() - 1


def lg_ceil(x: int) -> int:
    if x < 1:
        raise ValueError(f"lg of {x}")
    return (x - 1).bit_length()


def support(a: Sequence[int]) -> int:
    return sum(1 for x in a if x)


def monomial_grid(n: int, d: int) -> list[tuple]:
    """All exponent vectors in {0..d-1}^n, lexicographic."""
    return list(product(range(d), repeat=n))


@dataclass(frozen=True)
class DerivMatrix:
    rows: tuple
    cols: int
    entries: tuple
    anchor: tuple

    def rank(self, p: int) -> int:
        return linalg.rank(self.entries, p)

    def restricted(self, keep) -> list:
        return [e for a, e in zip(self.rows, self.entries) if keep(a)]


def deriv_matrix(fvec: Sequence[SparsePoly], rows: Sequence[Sequence[int]],
                 alpha: Sequence[int]) -> DerivMatrix:
    if not fvec:
        raise ValueError("empty polynomial vector")
    n, field = fvec[0].arity, fvec[0].field
    for f in fvec:
        if f.arity != n or f.field != field:
            raise ValueError("arity or field mismatch")
    rows = [tuple(a) for a in rows]
    if len(set(rows)) != len(rows):
        raise ValueError("duplicate rows")
    shifted = [shift(f, alpha) for f in fvec]
    entries = tuple(tuple(g.terms.get(a, 0) for g in shifted) for a in rows)
    return DerivMatrix(tuple(rows), len(fvec), entries, tuple(alpha))


def _check_concentration_inputs(fvec, d):
    field = fvec[0].field
    for f in fvec:
        degs = f.ind_degrees()
        if any(e >= d for e in degs):
            raise ValueError(f"individual degree {max(degs)} is not < d={d}")
    total = max(f.total_degree() for f in fvec)
    if field.p <= total:
        raise ValueError(f"field size {field.p} must exceed the degree {total}")
    n = fvec[0].arity
    if d ** n > term_budget():
        raise BudgetExceeded(f"{d}^{n} derivative rows exceed the budget")


def is_rank_concentrated(fvec: Sequence[SparsePoly], ell: int, alpha: Sequence[int], d: int) -> bool:
    """Rank of the support-<=ell rows equals the rank of all rows of the full grid."""
    _check_concentration_inputs(fvec, d)
    p = fvec[0].field.p
    M = deriv_matrix(fvec, monomial_grid(fvec[0].arity, d), alpha)
    full = M.rank(p)
    low = linalg.rank(M.restricted(lambda a: support(a) <= ell), p)
    return low == full


def concentration_support(fvec: Sequence[SparsePoly], alpha: Sequence[int], d: int) -> int:
    """Smallest ell with support-ell concentration at alpha."""
    _check_concentration_inputs(fvec, d)
    p = fvec[0].field.p
    n = fvec[0].arity
    M = deriv_matrix(fvec, monomial_grid(n, d), alpha)
    full = M.rank(p)
    for ell in range(n + 1):
        if linalg.rank(M.restricted(lambda a: support(a) <= ell), p) == full:
            return ell
    return n


def wronskian_matrix(fs: Sequence[UniPoly], t: int) -> list[list[int]]:
    """Rows i < r: Hasse derivatives d_{x^i}(f_j) evaluated at t."""
    r = len(fs)
    return [[f.hasse(i)(t) for f in fs] for i in range(r)]


def wronskian_rank(fs: Sequence[UniPoly]) -> int:
    """Rank over F(t) of the Wronskian, certified by evaluation at r*d + 1 points.

    Every minor has degree <= r*d in t, so a nonzero minor survives at one of the points.
    """
    if not fs:
        return 0
    field = fs[0].field
    r = len(fs)
    d = max(max(f.degree, 0) for f in fs)
    if field.p <= r * d:
        raise ValueError(f"characteristic {field.p} must exceed r*d = {r * d}")
    best = 0
    for t in range(r * d + 1):
        best = max(best, linalg.rank(wronskian_matrix(fs, t), field.p))
        if best == r:
            break
    return best


def coefficient_rank(fs: Sequence[UniPoly]) -> int:
    if not fs:
        return 0
    width = max(len(f.coeffs) for f in fs)
    return linalg.rank([list(f.coeffs) + [0] * (width - len(f.coeffs)) for f in fs], fs[0].field.p)


def transfer_rows(n: int, d: int, rows) -> list[tuple]:
    grid = monomial_grid(n, d)
    if rows == "all":
        return grid
    kind, s = rows
    if kind == "support":
        return [a for a in grid if support(a) <= s]
    if kind == "rank":
        return [a for a in grid if support(a) <= lg_floor(s)]
    raise ValueError(f"unknown row spec {rows!r}")


def transfer_matrix(field: Field, n: int, d: int, rows="all", t: Sequence[int] | None = None):
    """T_{a,b} = binom(b, a) t^(b - a) on the grid {0..d-1}^n (lex order).

    rows: "all", ("support", s) or ("rank", r) for the support-<=floor(lg r) rows.
    With t None the entries are SparsePoly in n variables t; otherwise ints.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    p = field.p
    cols = monomial_grid(n, d)
    out = []
    for a in transfer_rows(n, d, rows):
        row = []
        for b in cols:
            if any(x > y for x, y in zip(a, b)):
                row.append(0 if t is not None else SparsePoly.zero(field, n))
                continue
            c = binom_vec(b, a, p)
            e = tuple(y - x for x, y in zip(a, b))
            if t is None:
                row.append(SparsePoly(field, n, {e: c}))
            else:
                for ti, ei in zip(t, e):
                    c = c * pow(ti, ei, p) % p
                row.append(c)
        out.append(row)
    return out


def coefficient_vector(f: SparsePoly, d: int) -> list[int]:
    return [f.terms.get(a, 0) for a in monomial_grid(f.arity, d)]


def check_code_distance(H: Sequence[Sequence[int]], r: int, p: int, budget: int | None = None) -> bool:
    """Every r columns of H are linearly independent."""
    cols = linalg.transpose(H)
    if r > len(cols):
        raise ValueError("r exceeds the column count")
    from math import comb
    limit = budget if budget is not None else term_budget()
    if comb(len(cols), r) > limit:
        raise BudgetExceeded(f"binom({len(cols)}, {r}) subsets exceed the budget")
    for T in combinations(range(len(cols)), r):
        if linalg.rank([cols[j] for j in T], p) < r:
            return False
    return True


def multiplicative_order(g: int, p: int) -> int:
    n = p - 1
    order = n
    q = 2
    m = n
    primes = []
    while q * q <= m:
        if m % q == 0:
            primes.append(q)
            while m % q == 0:
                m //= q
        q += 1
    if m > 1:
        primes.append(m)
    for q in primes:
        while order % q == 0 and pow(g, order // q, p) == 1:
            order //= q
    return order


def primitive_root(field: Field, min_order: int = 0) -> int:
    """Smallest generator of F_p^*; its order p-1 must exceed min_order."""
    p = field.p
    if p == 2:
        if min_order >= 1:
            raise ValueError("F_2 has no element of order > 1")
        return 1
    if p - 1 <= min_order:
        raise ValueError(f"F_{p}^* has no element of order > {min_order}")
    for g in range(2, p):
        if multiplicative_order(g, p) == p - 1:
            return g
    raise ArithmeticError("no primitive root found")


def dual_rs_parity(field: Field, r: int, m: int) -> list[list[int]]:
    """H_{ij} = w^(ij), i < r, j < m, with w of multiplicative order > m."""
    w = primitive_root(field, m)
    p = field.p
    return [[pow(w, i * j, p) for j in range(m)] for i in range(r)]


@dataclass(frozen=True)
class CondenserSpec:
    """E(t) = Lambda^{-1} H W with Lambda, W diagonal matrices of monomials in t."""

    field: Field
    lam: tuple  # one exponent tuple per row of H
    H: tuple
    W: tuple  # one exponent tuple per column of H
    r: int
    variant: str = "recipe"
    block: tuple = ()  # known-basis rows P_d (column indices of H)

    def __post_init__(self):
        object.__setattr__(self, "H", tuple(tuple(x % self.field.p for x in row) for row in self.H))
        object.__setattr__(self, "lam", tuple(tuple(a) for a in self.lam))
        object.__setattr__(self, "W", tuple(tuple(a) for a in self.W))
        if len(self.lam) != len(self.H) or any(len(row) != len(self.W) for row in self.H):
            raise ValueError("Lambda, H, W dimensions disagree")
        nv = {len(a) for a in self.lam + self.W}
        if len(nv) > 1:
            raise ValueError("monomials use different numbers of t variables")

    @property
    def tvars(self) -> int:
        return len(self.W[0]) if self.W else 0

    def weights_distinct(self) -> bool:
        ws = [self.W[j] for j in (self.block or range(len(self.W)))]
        return len(set(ws)) == len(ws)

    def code_ok(self) -> bool:
        return check_code_distance(self.H, min(self.r, len(self.W)), self.field.p)

    def at(self, t: Sequence[int]) -> list[list[int]]:
        p = self.field.p

        def mono(a):
            v = 1
            for ti, e in zip(t, a):
                v = v * pow(ti, e, p) % p
            return v
        wv = [mono(a) for a in self.W]
        out = []
        for row, a in zip(self.H, self.lam):
            li = pow(mono(a), -1, p)
            out.append([li * h * w % p for h, w in zip(row, wv)])
        return out

    def cube_sizes(self) -> list[int]:
        """|C_i| = spread + 1 where spread covers every rank s <= r."""
        sizes = []
        for i in range(self.tvars):
            degs = sorted(a[i] for a in self.W)
            spread = 0
            for s in range(1, min(self.r, len(degs)) + 1):
                spread = max(spread, sum(degs[-s:]) - sum(degs[:s]))
            sizes.append(spread + 1)
        return sizes


@dataclass
class RankReport:
    rank_M: int
    rank_EM: int
    trials: int
    cube: list = dc_field(default_factory=list)
    point: list | None = None

    @property
    def preserved(self) -> bool:
        return self.rank_M == self.rank_EM

    def to_json(self) -> dict:
        return {"rank_M": self.rank_M, "rank_EM": self.rank_EM, "trials": self.trials,
                "cube": self.cube}


def condense(spec: CondenserSpec, M: Sequence[Sequence[int]], mode="symbolic-cert") -> RankReport:
    """rank(M) against rank(E(t) M); mode is "symbolic-cert" or a point t0."""
    p = spec.field.p
    if len(M) != len(spec.W):
        raise ValueError(f"M has {len(M)} rows, the condenser expects {len(spec.W)}")
    rm = linalg.rank(M, p)
    if mode != "symbolic-cert":
        t0 = list(mode)
        return RankReport(rm, linalg.rank(linalg.matmul(spec.at(t0), M, p), p), 1, [], t0)
    sizes = spec.cube_sizes()
    if any(s > p - 1 for s in sizes):
        raise ValueError(f"F_{p} cannot host a cube of nonzero values of sizes {sizes}")
    best, trials, last = -1, 0, None
    for pt in product(*(range(1, s + 1) for s in sizes)):
        trials += 1
        last = list(pt)
        k = linalg.rank(linalg.matmul(spec.at(pt), M, p), p)
        best = max(best, k)
        if best == rm:
            break
    return RankReport(rm, max(best, 0), trials, sizes, last)


def recipe_spec(field: Field, H: Sequence[Sequence[int]], r: int,
                weights: Sequence[Sequence[int]] | None = None,
                lam: Sequence[Sequence[int]] | None = None) -> CondenserSpec:
    """Default univariate weights W_j = t^j and Lambda = I."""
    m = len(H[0])
    W = [tuple(w) for w in weights] if weights is not None else [(j,) for j in range(m)]
    nv = len(W[0])
    L = [tuple(a) for a in lam] if lam is not None else [(0,) * nv for _ in H]
    return CondenserSpec(field, tuple(L), tuple(map(tuple, H)), tuple(W), r)


def transfer_spec(field: Field, n: int, d: int, r: int, g_exps: Sequence[Sequence[int]]) -> CondenserSpec:
    """T_r(g(t)) written as Lambda^{-1} T_r(1) W with t_i <- t^{g_exps[i]} (monomial map)."""
    rows = transfer_rows(n, d, ("rank", r))
    cols = monomial_grid(n, d)
    H = transfer_matrix(field, n, d, ("rank", r), [1] * n)
    m = len(g_exps[0])

    def image(a):
        return tuple(sum(a[i] * g_exps[i][k] for i in range(n)) for k in range(m))
    return CondenserSpec(field, tuple(image(a) for a in rows), tuple(map(tuple, H)),
                         tuple(image(b) for b in cols), r)


def partial_id(strings: Sequence[Sequence[Hashable]]) -> tuple[int, list[int]]:
    """(i0, S) with |S| <= floor(lg r) and strings[i0]|_S unlike every other string|_S.

    Follows the recursive proof: take the smallest disagreeing coordinate, keep the
    least frequent symbol class (ties to the smallest symbol), recurse on it.
    """
    strs = [tuple(s) for s in strings]
    if len(set(strs)) != len(strs):
        raise ValueError("strings must be distinct")
    if not strs:
        raise ValueError("need at least one string")
    if len({len(s) for s in strs}) != 1:
        raise ValueError("strings must have equal length")
    live = list(range(len(strs)))
    S: list[int] = []
    while len(live) > 1:
        j = next(c for c in range(len(strs[0])) if len({strs[i][c] for i in live}) > 1)
        classes: dict = {}
        for i in live:
            classes.setdefault(strs[i][j], []).append(i)
        sym = min(classes, key=lambda s: (len(classes[s]), s))
        live = classes[sym]
        S.append(j)
    return live[0], sorted(S)


def partial_id_valid(strings, i0: int, S: Sequence[int]) -> bool:
    r = len(strings)
    if len(S) > (lg_floor(r) if r else 0):
        return False
    target = tuple(strings[i0][j] for j in S)
    return all(tuple(strings[i][j] for j in S) != target for i in range(r) if i != i0)


@dataclass(frozen=True)
class DiffOperator:
    """Finite combination sum_a c_a d_{x^a} of Hasse derivatives."""

    field: Field
    arity: int
    terms: tuple  # ((exponent tuple, coefficient), ...), nonzero coefficients

    @classmethod
    def make(cls, field: Field, arity: int, terms: dict) -> "DiffOperator":
        p = field.p
        return cls(field, arity, tuple(sorted((tuple(a), c % p) for a, c in terms.items() if c % p)))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def variables(self) -> set:
        return {i for a, _ in self.terms for i, e in enumerate(a) if e}

    def on_monomial(self, b: Sequence[int], point: Sequence[int] | None = None) -> int:
        """Delta(x^b) evaluated at point (default all ones)."""
        p = self.field.p
        total = 0
        for a, c in self.terms:
            v = c * binom_vec(b, a, p) % p
            if v and point is not None:
                for bi, ai, x in zip(b, a, point):
                    v = v * pow(x, bi - ai, p) % p
            total += v
        return total % p

    def apply(self, f: SparsePoly, point: Sequence[int]) -> int:
        g = shift(f, point)
        return sum(c * g.terms.get(a, 0) for a, c in self.terms) % self.field.p

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """Product of operators in disjoint variables."""
        if self.variables() & other.variables():
            raise ValueError("operators share variables")
        out: dict = {}
        p = self.field.p
        for a, c in self.terms:
            for b, e in other.terms:
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = (out.get(k, 0) + c * e) % p
        return DiffOperator.make(self.field, self.arity, out)


def univar_isolating_coeffs(field: Field, d: int, j: int) -> list[int]:
    """Row j of the inverse of D_{k,i} = binom(i, k) (k, i < d)."""
    if not 0 <= j < d:
        raise ValueError(f"need 0 <= j < d, got j={j}, d={d}")
    p = field.p
    D = [[binom_mod(i, k, p) for i in range(d)] for k in range(d)]
    return linalg.inverse(D, p)[j]


def univar_isolating_operator(field: Field, d: int, j: int, var: int = 0,
                              arity: int = 1) -> DiffOperator:
    cs = univar_isolating_coeffs(field, d, j)
    terms = {}
    for k, c in enumerate(cs):
        a = [0] * arity
        a[var] = k
        terms[tuple(a)] = c
    return DiffOperator.make(field, arity, terms)


def isolating_operator(field: Field, monomials: Sequence[Sequence[int]], d: int) -> tuple[int, DiffOperator]:
    """(i0, Delta) with Delta(x^{b_i})(1) = [i == i0], Delta supported on floor(lg r) variables."""
    n = len(monomials[0])
    i0, S = partial_id(monomials)
    op = DiffOperator.make(field, n, {(0,) * n: 1})
    for j in S:
        op = op.compose(univar_isolating_operator(field, d, monomials[i0][j], j, n))
    return i0, op


def isolating_family(field: Field, monomials: Sequence[Sequence[int]], d: int):
    """(pi, ops): ops[i](x^{b_{pi[j]}})(1) is 1 for j = i and 0 for j < i (0-based)."""
    mons = [tuple(b) for b in monomials]
    if len(set(mons)) != len(mons):
        raise ValueError("duplicate monomials")
    if any(e >= d for b in mons for e in b):
        raise ValueError(f"individual degree must be < d={d}")
    r = len(mons)
    pi = [0] * r
    ops: list = [None] * r
    remaining = list(range(r))
    for i in range(r - 1, -1, -1):
        k, op = isolating_operator(field, [mons[x] for x in remaining], d)
        pi[i] = remaining[k]
        ops[i] = op
        remaining.pop(k)
    return pi, ops


def application_matrix(ops: Sequence[DiffOperator], monomials, pi) -> list[list[int]]:
    return [[op.on_monomial(monomials[pi[j]]) for j in range(len(pi))] for op in ops]


def _weight_key(order: str):
    if order == "lex":
        return lambda w: tuple(w)
    if order == "deglex":
        return lambda w: (sum(w), tuple(w))
    raise ValueError(f"unknown order {order!r}")


def greedy_min_basis(M: Sequence[Sequence[int]], weights: Sequence[Sequence[int]], p: int,
                     order: str = "lex", block: Sequence[int] | None = None) -> list[int]:
    """Greedy weight-minimal column basis; columns in `block` must carry distinct weights that
    are below every other weight, and span the column space."""
    key = _weight_key(order)
    cols = linalg.transpose(M)
    m = len(cols)
    I = list(range(m)) if block is None else list(block)
    wI = [key(weights[j]) for j in I]
    if len(set(wI)) != len(wI):
        raise ValueError("weights on the block must be pairwise distinct")
    others = [key(weights[j]) for j in range(m) if j not in set(I)]
    if others and wI and max(wI) >= min(others):
        raise ValueError("block weights must lie strictly below all other weights")
    rk = linalg.rank(cols, p)
    if linalg.rank([cols[j] for j in I], p) != rk:
        raise ValueError("the block does not span the column space")
    chosen: list[int] = []
    for j in sorted(range(m), key=lambda j: (key(weights[j]), j)):
        if linalg.rank([cols[k] for k in chosen] + [cols[j]], p) > len(chosen):
            chosen.append(j)
            if len(chosen) == rk:
                break
    return sorted(chosen)
