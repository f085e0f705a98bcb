import pytest
from hypothesis import given, strategies as st

from hitset.field import (Felt, Field, FieldError, field_arith, is_prime, lagrange_indicator,
                          make_field, smallest_prime_at_least)


def _trial_prime(n):
    return n >= 2 and all(n % k for k in range(2, int(n ** 0.5) + 1))


def test_make_field_examples():
    assert make_field(7).p == 7
    assert make_field(101).p == 101
    with pytest.raises(FieldError):
        make_field(6)
    with pytest.raises(FieldError):
        make_field(1)


def test_field_arith_examples():
    F = Field(7)
    assert field_arith(Felt(3, F), Felt(5, F), "mul") == 1
    with pytest.raises(ZeroDivisionError):
        field_arith(Felt(0, F), None, "inv")
    assert field_arith(Felt(2, F), 5, "pow") == 4
    # naive repeated multiplication
    v = 1
    for _ in range(5):
        v = v * 2 % 7
    assert v == 4


def test_mixed_fields_rejected():
    with pytest.raises(FieldError):
        Felt(1, Field(5)) + Felt(1, Field(7))


@pytest.mark.parametrize("bound,expected", [(2, 2), (10, 11), (1000, 1009)])
def test_smallest_prime_examples(bound, expected):
    assert smallest_prime_at_least(bound) == expected


@given(st.integers(2, 20000))
def test_smallest_prime_matches_trial_division(b):
    q = smallest_prime_at_least(b)
    assert q >= b and _trial_prime(q)
    assert not any(_trial_prime(k) for k in range(b, q))


@given(st.integers(0, 10 ** 6))
def test_is_prime_matches_trial_division(n):
    assert is_prime(n) == _trial_prime(n)


@given(st.sampled_from([2, 3, 7, 101, 65537]), st.integers(1, 10 ** 9))
def test_inverse(p, a):
    F = Field(p)
    a %= p
    if a:
        assert a * F.inv(a) % p == 1


@given(st.sampled_from([7, 101]), st.integers(0, 100), st.integers(0, 30))
def test_pow_against_repeated_multiplication(p, a, e):
    F = Field(p)
    v = 1
    for _ in range(e):
        v = v * a % p
    assert field_arith(Felt(a % p, F), e, "pow") == v


def test_lagrange_examples():
    F = Field(7)
    L = lagrange_indicator(F, [0, 1], 1)
    assert list(L.coeffs) == [0, 1]
    L0 = lagrange_indicator(F, [0, 1, 2], 0)
    assert [L0(x) for x in (0, 1, 2)] == [1, 0, 0]
    with pytest.raises(FieldError):
        lagrange_indicator(F, [1, 8], 0)


@given(st.sampled_from([5, 7, 101]), st.data())
def test_lagrange_delta_property(p, data):
    F = Field(p)
    pts = data.draw(st.lists(st.integers(0, p - 1), min_size=1, max_size=min(p, 6), unique=True))
    for k in range(len(pts)):
        L = lagrange_indicator(F, pts, k)
        assert L.degree <= len(pts) - 1
        assert [L(x) for x in pts] == [int(j == k) for j in range(len(pts))]
