import random
from itertools import product
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from hitset.field import Field
from hitset.poly import (PolyMap, SparsePoly, UniPoly, binom_mod, coeff, compose, eval_poly,
                         hasse_derivative, kronecker_substitute, poly_arith, shift)

from strategies import naive_eval, naive_shift_terms, sparse_polys

F7, F2, F101 = Field(7), Field(2), Field(101)


def var(F, n, i, k=1):
    return SparsePoly.var(F, n, i, k)


def test_poly_arith_examples():
    x1, x2 = var(F7, 2, 0), var(F7, 2, 1)
    assert poly_arith(x1, x2, "mul") == SparsePoly.monomial(F7, (1, 1))
    assert poly_arith(x1, SparsePoly.zero(F7, 2), "add") == x1
    one = SparsePoly.const(F7, 1, 1)
    y = var(F7, 1, 0)
    assert (y + one) * (y - one) == SparsePoly(F7, 1, {(2,): 1, (0,): 6})


def test_arity_and_field_mismatch():
    with pytest.raises(ValueError):
        var(F7, 1, 0) + var(F7, 2, 0)
    with pytest.raises(ValueError):
        var(F7, 1, 0) + var(F101, 1, 0)


def test_coeff_examples():
    f = SparsePoly(F7, 2, {(2, 1): 3})
    assert coeff(f, (2, 1)) == 3
    assert coeff(f, (0, 0)) == 0
    with pytest.raises(ValueError):
        coeff(f, (1,))


def test_zero_coefficients_pruned():
    f = SparsePoly(F7, 1, {(1,): 7, (0,): 0, (2,): 3})
    assert f.terms == {(2,): 3}


@given(sparse_polys(arity=2), sparse_polys(arity=2), st.tuples(st.integers(0, 3), st.integers(0, 3)))
def test_coeff_linearity(f, g, a):
    if f.field != g.field:
        g = SparsePoly(f.field, 2, g.terms)
    assert coeff(f + g, a) == (coeff(f, a) + coeff(g, a)) % f.field.p


@given(sparse_polys(), st.data())
def test_eval_matches_naive(f, data):
    pt = data.draw(st.lists(st.integers(0, f.field.p - 1), min_size=f.arity, max_size=f.arity))
    assert eval_poly(f, pt) == naive_eval(f.terms, pt, f.field.p)


def test_eval_examples():
    f = SparsePoly(F7, 2, {(1, 1): 1, (0, 0): 1})
    assert eval_poly(f, (2, 3)) == 0
    assert eval_poly(SparsePoly.zero(F7, 3), (1, 2, 3)) == 0


def test_hasse_examples():
    x = var(F101, 1, 0)
    assert hasse_derivative(x ** 3, (2,)) == x.scale(3)
    f = SparsePoly(F101, 2, {(2, 1): 5, (0, 3): 2})
    assert hasse_derivative(f, (0, 0)) == f
    y = var(F2, 1, 0)
    assert hasse_derivative(y ** 2, (2,)) == SparsePoly.const(F2, 1, 1)


def test_binomials_by_pascal_in_char_p():
    for p in (2, 3, 5):
        for n in range(12):
            for k in range(n + 1):
                assert binom_mod(n, k, p) == comb(n, k) % p


def test_shift_examples():
    x = var(F101, 1, 0)
    sym = shift(x ** 2)
    # x-block then t-block: x^2 + 2 t x + t^2
    assert sym == SparsePoly(F101, 2, {(2, 0): 1, (1, 1): 2, (0, 2): 1})
    f = SparsePoly(F101, 2, {(1, 1): 1})
    assert shift(f, (0, 0)) == f
    assert shift(f, (1, 1)) == SparsePoly(F101, 2, {(1, 1): 1, (1, 0): 1, (0, 1): 1, (0, 0): 1})


@given(sparse_polys(), st.data())
def test_shift_matches_binomial_oracle(f, data):
    alpha = data.draw(st.lists(st.integers(0, 200), min_size=f.arity, max_size=f.arity))
    assert shift(f, alpha).terms == naive_shift_terms(f.terms, alpha, f.field.p)


@given(sparse_polys(), st.data())
def test_shift_roundtrip(f, data):
    alpha = data.draw(st.lists(st.integers(0, 200), min_size=f.arity, max_size=f.arity))
    assert shift(shift(f, alpha), [-a for a in alpha]) == f


@given(sparse_polys(), st.data())
def test_symbolic_shift_coefficients_are_hasse(f, data):
    n = f.arity
    a = data.draw(st.tuples(*[st.integers(0, 3) for _ in range(n)]))
    sym = shift(f)
    in_t = SparsePoly(f.field, n, {e[n:]: c for e, c in sym.terms.items() if e[:n] == a})
    assert in_t == hasse_derivative(f, a)


@given(sparse_polys(arity=1), st.integers(0, 3), st.integers(0, 3))
def test_hasse_composition_one_variable(f, a, b):
    p = f.field.p
    lhs = hasse_derivative(hasse_derivative(f, (b,)), (a,))
    assert lhs == hasse_derivative(f, (a + b,)).scale(comb(a + b, a) % p)


@given(sparse_polys(arity=2), st.integers(0, 3), st.integers(0, 3))
def test_hasse_disjoint_blocks(f, a, b):
    lhs = hasse_derivative(hasse_derivative(f, (a, 0)), (0, b))
    assert lhs == hasse_derivative(f, (a, b))


def test_compose_examples():
    f = SparsePoly(F7, 2, {(1, 1): 1, (0, 1): 3})
    assert compose(f, PolyMap.identity(F7, 2)) == f
    y = var(F7, 1, 0)
    assert compose(SparsePoly.monomial(F7, (1, 1)), PolyMap(1, (y, y))) == y ** 2


def test_compose_with_sv_at_fixed_z():
    from hitset.generators import sv_generator
    g = sv_generator(F101, 2, 1)
    # z1 <- 2 = xi_2 places y1 in coordinate 2: x1 + x2 -> y1
    spec = g.specialize({1: 2})
    comps = spec.materialize()
    f = var(F101, 2, 0) + var(F101, 2, 1)
    assert compose(f, PolyMap(len(spec.seeds), tuple(comps))) == var(F101, 1, 0)


@settings(max_examples=60)
@given(sparse_polys(p=101, arity=2, max_deg=2), st.data())
def test_compose_evaluation_and_degree(f, data):
    m = 2
    comps = tuple(data.draw(sparse_polys(p=101, arity=m, max_deg=2, max_terms=3)) for _ in range(2))
    g = PolyMap(m, comps)
    h = compose(f, g)
    s = data.draw(st.lists(st.integers(0, 100), min_size=m, max_size=m))
    assert eval_poly(h, s) == eval_poly(f, [eval_poly(c, s) for c in comps])
    dg = max([c.total_degree() for c in comps] + [0])
    assert h.is_zero() or h.total_degree() <= f.total_degree() * dg


def test_kronecker_examples():
    # variables (y1, z1)
    z = var(F7, 2, 1)
    y = var(F7, 2, 0)
    assert kronecker_substitute(z, [1], 3) == SparsePoly(F7, 1, {(3,): 1})
    assert kronecker_substitute(y + z, [1], 3) == SparsePoly(F7, 1, {(1,): 1, (3,): 1})
    with pytest.raises(ValueError):
        kronecker_substitute(var(F7, 2, 1, 3), [1], 3)


@given(st.data())
def test_kronecker_preserves_monomials(data):
    D = data.draw(st.integers(2, 4))
    f = data.draw(sparse_polys(p=101, arity=4, max_deg=D - 1))
    g = kronecker_substitute(f, [2, 3], D)
    # distinct monomials have distinct images, so terms map one-to-one
    images = {(a[0] + D * a[2], a[1] + D * a[3]) for a in f.terms}
    assert len(images) == len(f.terms)
    assert g.terms == {(a[0] + D * a[2], a[1] + D * a[3]): c for a, c in f.terms.items()}
    assert g.is_zero() == f.is_zero()


def test_unipoly_compose_and_hasse():
    F = F101
    f = UniPoly(F, [1, 2, 3])
    g = UniPoly(F, [0, 1, 1])
    h = f.compose(g)
    for z in range(10):
        assert h(z) == f(g(z))
    assert UniPoly(F, [0, 0, 0, 1]).hasse(2) == UniPoly(F, [0, 3])


def test_json_roundtrip():
    rng = random.Random(4)
    f = SparsePoly(F101, 3, {tuple(rng.randrange(3) for _ in range(3)): rng.randrange(101) for _ in range(6)})
    assert SparsePoly.from_json(f.to_json()) == f
