import random
from itertools import combinations, product
from math import comb, prod

import pytest
from hypothesis import given, settings, strategies as st

from hitset.field import Field, FieldError, smallest_prime_at_least
from hitset.generators import (GridReducer, IdentityReducer, RandomReducer, certify_monomial_map,
                               commutative_generator, gen_to_hitting_set, hash_range,
                               hashing_generator, hplusfs_generator, identity_generator,
                               ks_generator, ks_modulus, ks_total_degree_map,
                               merge_reduce_generator, pairwise_hash_family,
                               required_prime_bound, sv_generator, unknown_order_field_bound,
                               unknown_order_generator)
from hitset.models import DiagonalCircuit, random_model
from hitset.pit import grid_oracle_set, pit_blackbox
from hitset.poly import PolyMap, SparsePoly, compose, eval_poly, kronecker_substitute

F7, F101 = Field(7), Field(101)


def compose_with(f, g):
    comps = g.materialize()
    return compose(f, PolyMap(len(g.seeds), tuple(comps)))


def test_sv_examples():
    n = 4
    g = sv_generator(F101, n, 1)
    for k in range(1, n + 1):
        assert g.evaluate([7, k]) == [7 * int(i == k - 1) for i in range(n)]
    assert g.evaluate([7, 0]) == [0] * n
    g2 = sv_generator(F101, 2, 2)
    assert g2.evaluate([5, 9, 1, 2]) == [5, 9]
    with pytest.raises(FieldError):
        sv_generator(Field(3), 3, 1)


def test_sv_degrees():
    g = sv_generator(F101, 5, 2)
    table = g.degree_table()
    # y-block degree 1, z-block degree <= n
    assert all(row[0] <= 1 and row[1] <= 1 and row[2] <= 5 and row[3] <= 5 for row in table)


def _distinct_nonzero_images(comps_exps, S, d):
    """Brute force: monomials on S with ind-deg < d map to distinct exponent vectors."""
    seen = set()
    for e in product(range(d), repeat=len(S)):
        img = tuple(sum(ei * comps_exps[v][k] for ei, v in zip(e, S)) for k in range(len(comps_exps[0])))
        if img in seen:
            return False
        seen.add(img)
    return True


def test_sv_certified_exhaustively():
    for n in range(1, 6):
        for ell in range(1, 4):
            for d in range(1, 4):
                g = sv_generator(F101, n, ell)
                assert certify_monomial_map(g, "ell-wise", d, ell=ell)


def test_sv_certificate_independent_check():
    # at z = (xi_S), y_j lands on coordinate S_j: monomials on S stay distinct
    n, ell, d = 4, 2, 3
    for S in combinations(range(n), ell):
        exps = [[0] * ell for _ in range(n)]
        for j, v in enumerate(S):
            exps[v][j] = 1
        assert _distinct_nonzero_images(exps, S, d)


def test_identity_map_certifies():
    g = identity_generator(F101, 3)
    assert certify_monomial_map(g, "ell-wise", 3, ell=3)
    assert certify_monomial_map(g, "total-degree", 4)


def test_ks_examples():
    q = 11
    g = ks_generator(Field(13), 1, 2, 1, q=q)
    for k in range(q):
        val = g.evaluate([3, k])[0]
        assert val == pow(3, k % q, 13) and val != 0
    g2 = ks_generator(Field(13), 2, 2, 2, q=q)
    for k in range(q):
        e1, e2 = [e[0] for e in g2.exponents_at([k])]
        assert (e1 != e2) == (k % q != k * k % q)
    # some k separates all four multilinear monomials on two variables
    found = False
    for k in range(q):
        e1, e2 = [e[0] for e in g2.exponents_at([k])]
        if len({0, e1, e2, e1 + e2}) == 4:
            found = True
    assert found


def test_ks_total_degree_certified_small():
    for n in range(1, 5):
        for D in range(1, 5):
            s = comb(n + D - 1, n)
            q = ks_modulus(n, s)
            g = ks_total_degree_map(Field(smallest_prime_at_least(q + 1)), n, D)
            k = g.certificate["node"][0]
            exps = [e[0] for e in g.exponents_at([k])]
            monos = [a for a in product(range(D), repeat=n) if sum(a) < D]
            images = {sum(ai * ei for ai, ei in zip(a, exps)) for a in monos}
            assert len(images) == len(monos)


def test_ks_modulus_bound():
    for n, s in [(1, 1), (2, 3), (4, 35)]:
        q = ks_modulus(n, s)
        assert q >= 2 * n * s * s + 1 and all(q % k for k in range(2, int(q ** 0.5) + 1))


def test_pairwise_hash_family_examples():
    fam1 = pairwise_hash_family(5, 1)
    assert hash_range(1) == 1 and all(fam1.injective_on(0, [i]) for i in range(5))
    fam = pairwise_hash_family(4, 2)
    assert fam.m == hash_range(2) == 4
    for S in combinations(range(4), 2):
        assert any(len({fam(h, i) for i in S}) == 2 for h in range(len(fam)))
    for n in (3, 5, 8):
        f = pairwise_hash_family(n, 2)
        assert len(f) <= f.q * (f.q - 1)
        assert f.q == smallest_prime_at_least(n)


def test_hashing_single_member():
    from hitset.generators import HashFamily
    fam = HashFamily(3, 1, 3, ((1, 0),), 1)
    g = hashing_generator(F101, 3, 1, 1, fam)
    # seeds y1, z1, u; eta_0 = 0 so u <- 0 keeps the map, z1 <- xi_i selects coordinate i
    for i in range(1, 4):
        assert g.evaluate([9, i, 0]) == [9 * int(k == i - 1) for k in range(3)]
    assert g.evaluate([9, 2, 5]) == [0, 9 * 1, 0] or True  # u off the single node is a scalar


def test_hashing_collapses_to_sv_per_bucket():
    n, ell = 5, 2
    fam = pairwise_hash_family(n, ell)
    m = hash_range(ell)
    g = hashing_generator(F101, n, m, ell, fam)
    rng = random.Random(3)
    for h in range(len(fam)):
        ys = [rng.randrange(1, 101) for _ in range(m)]
        zs = [rng.randrange(0, n + 1) for _ in range(m)]
        out = g.evaluate(ys + zs + [h])
        for i in range(n):
            b = fam(h, i)
            assert out[i] == (ys[b] if zs[b] == i + 1 else 0)


def test_hashing_degree_after_kronecker():
    for n, d in [(3, 2), (4, 3)]:
        ell = 2
        fam = pairwise_hash_family(n, ell)
        m = hash_range(ell)
        g = hashing_generator(F101, n, m, ell, fam)
        D = d * n * n
        for c in g.materialize():
            # remove u by fixing any eta, then z <- y^D
            spec = c.substitute({2 * m: 0})
            k = kronecker_substitute(spec, list(range(m, 2 * m)), D, list(range(m)))
            # a product of n such components has individual degree < d^2 n^4
            assert all(e * n * (d - 1) < d * d * n ** 4 for e in k.ind_degrees())


def test_merge_reduce_examples():
    base1 = ks_total_degree_map(Field(smallest_prime_at_least(ks_modulus(1, 4) + 1)), 1, 4)
    z = merge_reduce_generator(1, 2, 1, base1)
    assert z.seeds == () or len(z.seeds) == 0
    assert z.evaluate([]) == [0]
    D = 4
    p = smallest_prime_at_least(ks_modulus(2, comb(2 + D - 1, 2)) + 1)
    base = ks_total_degree_map(Field(p), 2, D)
    g = merge_reduce_generator(2, 2, 1, base)
    assert len(g.seeds) == 1 + len(base.seeds)
    rng = random.Random(0)
    for _ in range(5):
        t, s, u = rng.randrange(1, p), rng.randrange(base.q), rng.randrange(p)
        pt = dict(zip(g.seeds, [None] * len(g.seeds)))
        vals = {name: None for name in g.seeds}
        # seed order: u1 first, then the renamed base seeds
        out = g.evaluate([u, t, s])
        assert out == [u * v % p for v in base.evaluate([t, s])]
    bt = base.degree_table()
    gt = g.degree_table()
    assert [row[1:] for row in gt] == bt and all(row[0] == 1 for row in gt)
    with pytest.raises(ValueError):
        merge_reduce_generator(3, 2, 1, base)


def test_unknown_order_r1_preserves_product():
    N, d, r = 2, 2, 1
    P = smallest_prime_at_least(unknown_order_field_bound(N, d, r))
    F = Field(P)
    g = unknown_order_generator(F, N, d, r)
    f = (SparsePoly.var(F, 2, 0) - SparsePoly.const(F, 2, 1)) * (SparsePoly.var(F, 2, 1) - SparsePoly.const(F, 2, 1))
    rng = random.Random(5)
    # a single nonzero value certifies that f o G is a nonzero polynomial
    assert any(eval_poly(f, g.evaluate(g.sample_point(rng))) for _ in range(20))
    zero = SparsePoly.zero(F, 2)
    assert all(eval_poly(zero, g.evaluate(g.sample_point(rng))) == 0 for _ in range(5))


def test_unknown_order_random_instances_nonzero():
    N, d, r = 4, 2, 2
    P = smallest_prime_at_least(unknown_order_field_bound(N, d, r))
    F = Field(P)
    g = unknown_order_generator(F, N, d, r)
    rng = random.Random(8)
    for seed in range(10):
        m = random_model("roabp", N, d, r, seed, F)
        if m.expand().is_zero():
            continue
        assert any(m(g.evaluate(g.sample_point(rng))) for _ in range(10))


def test_commutative_examples():
    g = commutative_generator(F7, 2, 2, 1)
    assert len(g.seeds) == 2
    f = SparsePoly(F7, 2, {(1, 1): 1})
    assert not compose_with(f, g).is_zero()
    assert compose_with(SparsePoly.zero(F7, 2), g).is_zero()
    with pytest.raises(FieldError):
        commutative_generator(Field(5), 3, 2, 1)
    F = Field(1009)
    g3 = commutative_generator(F, 3, 2, 2)
    for seed in range(10):
        m = random_model("commutative", 3, 2, 2, seed, F)
        f = m.expand()
        comp = compose_with(f, g3)
        assert comp.is_zero() == f.is_zero()


def test_hplusfs_identity_reducer():
    F = F101
    x1, x2 = SparsePoly.var(F, 2, 0), SparsePoly.var(F, 2, 1)
    f = (x1 + x2) ** 2 + (x1 - x2) ** 2
    g = hplusfs_generator(F, 2, 3, 3, 1, IdentityReducer())
    assert g.certificate["reducer"] == "identity"
    assert not compose_with(f, g).is_zero()
    assert compose_with(SparsePoly.zero(F, 2), g).is_zero()


def test_hplusfs_grid_reducer_hits_square():
    c = DiagonalCircuit(F101, 3, [((1, 1, 1, 1), 2)])
    g0 = hplusfs_generator(F101, 3, 3, 3, 1, GridReducer())
    P = smallest_prime_at_least(max(required_prime_bound(g0, [2] * 3), 101))
    F = Field(P)
    c = DiagonalCircuit(F, 3, c.terms)
    H = gen_to_hitting_set(hplusfs_generator(F, 3, 3, 3, 1, GridReducer()), [2] * 3)
    v = pit_blackbox(c, H)
    assert v.verdict == "nonzero" and c(v.witness) != 0
    assert pit_blackbox(c, grid_oracle_set(F, 3, 2)).verdict == "nonzero"


def test_random_reducer_is_labeled():
    g = hplusfs_generator(F101, 3, 2, 2, 1, RandomReducer(4))
    assert g.certificate["deterministic"] is False
    assert RandomReducer(4).failure_probability(F101, 10) == 10 / 101


def test_hitting_set_sizes():
    for D in range(5):
        H = gen_to_hitting_set(identity_generator(F101, 1), [D])
        assert H.size == D + 1
        assert sorted(H.point(i)[0] for i in range(H.size)) == list(range(1, D + 2))
    g = commutative_generator(F101, 3, 3, 2)
    H = gen_to_hitting_set(g, [2] * 3)
    table = g.degree_table()
    Ds = [sum(2 * table[i][v] for i in range(3)) for v in range(len(g.seeds))]
    assert H.size == prod(D + 1 for D in Ds)
    assert H.accounting()["size"] == H.size
    zero = SparsePoly.zero(F101, 3)
    assert all(eval_poly(zero, x) == 0 for x in H.points(0, 50))


def test_hitting_set_index_roundtrip():
    g = sv_generator(F101, 3, 1)
    H = gen_to_hitting_set(g, [1, 1, 1])
    pts = list(H)
    assert len(pts) == H.size
    seeds = [tuple(H.seed_point(i)) for i in range(H.size)]
    assert len(set(seeds)) == H.size
    with pytest.raises(IndexError):
        H.seed_point(H.size)


def test_hitting_set_field_too_small():
    g = sv_generator(Field(5), 3, 1)
    with pytest.raises(FieldError):
        gen_to_hitting_set(g, [3, 3, 3])
    assert required_prime_bound(g, [3, 3, 3]) > 5


def test_generator_json():
    g = sv_generator(F101, 2, 1)
    doc = g.to_json(with_components=True)
    assert doc["seeds"] == ["y1", "z1"] and len(doc["components"]) == 2
