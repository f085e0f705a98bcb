import random
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from hitset.field import Field
from hitset.models import (DiagonalCircuit, MatrixRoabp, Roabp, Smabp, diagonal_to_poly,
                           model_from_json, partial_derivative_dim, random_model, roabp_eval,
                           roabp_expand, roabp_from_poly, smabp_to_roabp)
from hitset.poly import BudgetExceeded, SparsePoly, eval_poly, hasse_derivative

from strategies import gauss_rank, naive_rank

F7, F101 = Field(7), Field(101)


def naive_roabp_eval(m: Roabp, point):
    """Row vector times each layer evaluated by direct power sums."""
    p = m.field.p
    v = list(m.left)
    for i, L in enumerate(m.layers):
        x = point[m.order[i]]
        M = [[sum(c * x ** k for k, c in enumerate(e)) % p for e in row] for row in L]
        v = [sum(v[a] * M[a][b] for a in range(m.r)) % p for b in range(m.r)]
    return sum(a * b for a, b in zip(v, m.right)) % p


def naive_smabp_eval(s: Smabp, point):
    p = s.field.p
    v = list(s.left)
    for L, part in zip(s.layers, s.partition):
        M = [[sum(c * point[x] for c, x in zip(e, part)) % p for e in row] for row in L]
        v = [sum(v[a] * M[a][b] for a in range(s.r)) % p for b in range(s.r)]
    return sum(a * b for a, b in zip(v, s.right)) % p


def x_layer(r=1):
    return (((0, 1),),)


def test_roabp_small_examples():
    m = Roabp(F101, 1, 2, 1, (0,), (x_layer(),), (1,), (1,))
    assert m.expand() == SparsePoly.var(F101, 1, 0)
    assert roabp_eval(m, [5]) == 5
    z = Roabp(F101, 1, 2, 1, (0,), (x_layer(),), (0,), (1,))
    assert z.expand().is_zero()
    # width 1, prod (x_i + 1), at 0 -> 1
    L = (((1, 1),),)
    prod_ = Roabp(F101, 3, 2, 1, (0, 1, 2), (L, L, L), (1,), (1,))
    assert prod_([0, 0, 0]) == 1
    assert prod_.expand() == SparsePoly(F101, 3, {a: 1 for a in __import__("itertools").product((0, 1), repeat=3)})


def test_roabp_validation():
    with pytest.raises(ValueError):
        Roabp(F101, 2, 2, 1, (0, 0), (x_layer(), x_layer()), (1,), (1,))
    with pytest.raises(ValueError):
        Roabp(F101, 1, 1, 1, (0,), (x_layer(),), (1,), (1,))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_roabp_expand_matches_eval(seed):
    m = random_model("roabp", 2, 3, 2, seed, F101)
    f = roabp_expand(m)
    rng = random.Random(seed)
    for _ in range(20):
        pt = [rng.randrange(101) for _ in range(2)]
        assert eval_poly(f, pt) == m(pt) == naive_roabp_eval(m, pt)


def test_matrix_roabp_expand_matches_eval():
    m = random_model("matrix-roabp", 3, 2, 2, 5, F101)
    E = m.expand()
    rng = random.Random(1)
    for _ in range(10):
        pt = [rng.randrange(101) for _ in range(3)]
        M = m.eval_matrix(pt)
        assert [[eval_poly(e, pt) for e in row] for row in E] == M


def test_expansion_budget(monkeypatch):
    monkeypatch.setenv("PIT_TERM_BUDGET", "10")
    m = random_model("roabp", 4, 2, 1, 0, F101)
    with pytest.raises(BudgetExceeded):
        m.expand()


def test_smabp_examples():
    one_layer = Smabp(F101, 1, 2, 1, [[[(1, 1)]]], [[0, 1]], (1,), (1,))
    ro = smabp_to_roabp(one_layer)
    assert ro.r == 2
    assert ro.expand() == SparsePoly(F101, 2, {(1, 0): 1, (0, 1): 1})
    zero = Smabp(F101, 2, 2, 1, [[[(0, 0)]], [[(0, 0)]]], [[0, 1], [2, 3]], (1,), (1,))
    assert smabp_to_roabp(zero).expand().is_zero()


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 2), st.integers(0, 10 ** 6))
def test_smabp_to_roabp_matches(n, d, r, seed):
    s = random_model("smabp", n, d, r, seed, F101)
    ro = smabp_to_roabp(s)
    assert ro.r == 2 * r and ro.d == 2
    assert ro.expand() == s.expand()
    rng = random.Random(seed)
    pt = [rng.randrange(101) for _ in range(n * d)]
    assert ro(pt) == s(pt) == naive_smabp_eval(s, pt)


def test_diagonal_examples():
    c = DiagonalCircuit(F7, 1, [((1, 1), 2)])
    assert diagonal_to_poly(c) == SparsePoly(F7, 1, {(2,): 1, (1,): 2, (0,): 1})
    assert DiagonalCircuit(F7, 2, [((3, 1, 4), 0)]).expand() == SparsePoly.const(F7, 2, 1)
    cube = DiagonalCircuit(F101, 2, [((0, 1, 1), 3)]).expand()
    assert cube.terms == {(3, 0): 1, (2, 1): 3, (1, 2): 3, (0, 3): 1}


def _dim_oracle(f):
    """Enumerate every Hasse derivative and row-reduce by brute-force minors."""
    degs = f.ind_degrees()
    from itertools import product
    ders = [hasse_derivative(f, a) for a in product(*(range(e + 1) for e in degs))]
    monos = sorted({m for g in ders for m in g.terms})
    rows = [[g.coeff(m) for m in monos] for g in ders if not g.is_zero()]
    return gauss_rank(rows, f.field.p) if rows else 0


def test_partial_derivative_dim_examples():
    x1x2 = SparsePoly(F101, 2, {(1, 1): 1})
    assert partial_derivative_dim(x1x2) == 4 == _dim_oracle(x1x2)
    # the two rank oracles agree on a tiny case
    assert naive_rank([[1, 0], [2, 0]], 101) == gauss_rank([[1, 0], [2, 0]], 101) == 1
    assert partial_derivative_dim(SparsePoly.zero(F101, 2)) == 0
    sq = DiagonalCircuit(F101, 2, [((0, 1, 1), 2)]).expand()
    assert partial_derivative_dim(sq) == 3 == _dim_oracle(sq)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_diagonal_dim_and_rebuilt_roabp(seed):
    c = random_model("diagonal", 2, 3, 2, seed, F101)
    f = c.expand()
    dim = partial_derivative_dim(f)
    assert dim == _dim_oracle(f)
    assert dim <= max(len(f.terms), 0) or f.is_zero()
    ro = roabp_from_poly(f)
    assert ro.expand() == f
    assert f.is_zero() or ro.r <= dim


def test_random_model_seed_determinism():
    for kind in ("roabp", "matrix-roabp", "commutative", "smabp", "diagonal"):
        a = random_model(kind, 3, 2, 2, 9, F101)
        b = random_model(kind, 3, 2, 2, 9, F101)
        assert a == b


def test_commutative_instances_are_order_free():
    m = random_model("commutative", 3, 2, 2, 3, F101)
    assert m.commutative
    f = m.expand()
    for perm in permutations(range(3)):
        assert m.reordered(perm).expand() == f


def test_width_one_is_product_of_univariates():
    m = random_model("roabp", 3, 3, 1, 11, F101)
    expected = SparsePoly.const(F101, 3, m.left[0] * m.right[0])
    for i, L in enumerate(m.layers):
        v = m.order[i]
        expected = expected * SparsePoly(F101, 3, {tuple(k if j == v else 0 for j in range(3)): c
                                                   for k, c in enumerate(L[0][0])})
    assert m.expand() == expected


def test_json_roundtrip_models():
    for kind in ("roabp", "matrix-roabp", "smabp", "diagonal"):
        m = random_model(kind, 2, 2, 2, 1, F101)
        back = model_from_json(m.to_json())
        assert back.expand() == m.expand()
