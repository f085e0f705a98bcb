"""Prime fields, prime search and Lagrange indicator polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

_TRIAL_LIMIT = 10**12
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class FieldError(ValueError):
    pass


def _trial_division(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    if n % 3 == 0:
        return n == 3
    k = 5
    root = isqrt(n)
    while k <= root:
        if n % k == 0 or n % (k + 2) == 0:
            return False
        k += 6
    return True


def _miller_rabin(n: int) -> bool:
    # deterministic for n < 3.3e24 with these bases
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    if n < _TRIAL_LIMIT:
        return _trial_division(n)
    if any(n % q == 0 for q in _MR_BASES):
        return False
    return _miller_rabin(n)


def smallest_prime_at_least(bound: int) -> int:
    if bound < 2:
        raise FieldError(f"bound must be >= 2, got {bound}")
    n = bound
    while not is_prime(n):
        n += 1
    return n


@dataclass(frozen=True)
class Field:
    """The prime field F_p. Elements are plain ints in [0, p) internally."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise FieldError(f"modulus {self.p!r} is not prime")

    def __call__(self, value: int) -> "Felt":
        return Felt(value % self.p, self)

    def reduce(self, value: int) -> int:
        return value % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def neg(self, a: int) -> int:
        return -a % self.p

    def elements(self, count: int, start: int = 0) -> list[int]:
        """The constants start, start+1, ... as field elements; they must be distinct."""
        if start + count > self.p:
            raise FieldError(f"F_{self.p} has no {count} distinct constants from {start}")
        return list(range(start, start + count))

    def __repr__(self):
        return f"Field({self.p})"


def make_field(p: int) -> Field:
    return Field(p)


@dataclass(frozen=True)
class Felt:
    """A field element bound to its field."""

    value: int
    field: Field

    def _other(self, b) -> int:
        if isinstance(b, Felt):
            if b.field != self.field:
                raise FieldError("elements of different fields")
            return b.value
        if isinstance(b, int):
            return b % self.field.p
        return NotImplemented

    def __add__(self, b):
        return Felt((self.value + self._other(b)) % self.field.p, self.field)

    __radd__ = __add__

    def __sub__(self, b):
        return Felt((self.value - self._other(b)) % self.field.p, self.field)

    def __rsub__(self, b):
        return Felt((self._other(b) - self.value) % self.field.p, self.field)

    def __mul__(self, b):
        return Felt(self.value * self._other(b) % self.field.p, self.field)

    __rmul__ = __mul__

    def __truediv__(self, b):
        return self * Felt(self._other(b), self.field).inv()

    def __rtruediv__(self, b):
        return Felt(self._other(b), self.field) * self.inv()

    def __neg__(self):
        return Felt(-self.value % self.field.p, self.field)

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        return Felt(pow(self.value, e, self.field.p), self.field)

    def inv(self) -> "Felt":
        return Felt(self.field.inv(self.value), self.field)

    def __eq__(self, b):
        if isinstance(b, Felt):
            return self.field == b.field and self.value == b.value
        if isinstance(b, int):
            return self.value == b % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.field.p))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"


def field_arith(a: Felt, b: Felt | int | None, op: str) -> Felt:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown op {op!r}")


def lagrange_indicator(field: Field, points: list[int], k: int):
    """Coefficients of L_k with L_k(points[j]) = [j == k], as a UniPoly."""
    from .poly import UniPoly

    p = field.p
    pts = [x % p for x in points]
    if len(set(pts)) != len(pts):
        raise FieldError("interpolation points must be distinct")
    if not 0 <= k < len(pts):
        raise IndexError(f"index {k} out of range for {len(pts)} points")
    num = [1]
    denom = 1
    xk = pts[k]
    for j, xj in enumerate(pts):
        if j == k:
            continue
        # num *= (z - xj)
        nxt = [0] * (len(num) + 1)
        for i, c in enumerate(num):
            nxt[i + 1] = (nxt[i + 1] + c) % p
            nxt[i] = (nxt[i] - c * xj) % p
        num = nxt
        denom = denom * (xk - xj) % p
    scale = pow(denom, -1, p)
    return UniPoly(field, [c * scale % p for c in num])
