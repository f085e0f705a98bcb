"""Bit-parallel partial-ID kernel for exhaustive runs over binary string families.

A family of distinct strings in {0,1}^n (n <= 6) is a 64-bit mask over the 2^n strings;
string value v has coordinate c equal to bit c of v. The recursion is the one of
rank.partial_id: smallest disagreeing coordinate, least frequent symbol, ties to 0.
"""

from __future__ import annotations

from functools import lru_cache

import numba as nb
import numpy as np
from numba import types
from numba.extending import intrinsic


@intrinsic
def _popc(typingctx, x):
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctpop(args[0])
    return sig, codegen


@intrinsic
def _ctz(typingctx, x):
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.cttz(args[0], context.get_constant(types.boolean, True))
    return sig, codegen


@lru_cache(maxsize=None)
def tables(n: int):
    """Coordinate masks M[j] (strings with bit j set) and cylinders CYL[S, v & S]."""
    N = 1 << n
    M = np.zeros(max(n, 1), np.uint64)
    for j in range(n):
        for v in range(N):
            if v >> j & 1:
                M[j] |= np.uint64(1) << np.uint64(v)
    CYL = np.zeros((N, N), np.uint64)
    for S in range(N):
        for v in range(N):
            CYL[S, v & S] |= np.uint64(1) << np.uint64(v)
    return M, CYL


@nb.njit(cache=True, inline="always")
def solve_mask(F, r, M):
    """(value of i0, S mask) for the family mask F with r members."""
    S = np.uint64(0)
    T = F
    m = r
    j = 0
    while m > 1:
        A = T & M[j]
        while A == 0 or A == T:
            j += 1
            A = T & M[j]
        c1 = np.int64(_popc(A))
        if c1 < m - c1:
            T = A
            m = c1
        else:
            T = T ^ A
            m = m - c1
        S |= np.uint64(1) << np.uint64(j)
        j += 1
    return _ctz(T), S


@nb.njit(cache=True)
def _run(n, r, M, CYL):
    N = 1 << n
    c = np.zeros(r + 1, np.int64)
    Fs = np.zeros(r + 1, np.uint64)
    lr = 0
    t = r
    while t > 1:
        t >>= 1
        lr += 1
    bad = 0
    cnt = 0
    first_bad = np.uint64(0)
    one = np.uint64(1)
    depth = 0
    c[0] = -1
    while depth >= 0:
        c[depth] += 1
        if c[depth] > N - r + depth:
            depth -= 1
            continue
        prev = Fs[depth - 1] if depth > 0 else np.uint64(0)
        Fs[depth] = prev | (one << np.uint64(c[depth]))
        if depth == r - 1:
            for x in range(c[depth], N):
                F = prev | (one << np.uint64(x))
                v0, S = solve_mask(F, r, M)
                if _popc(S) > lr or _popc(F & CYL[S, v0 & S]) != 1:
                    if bad == 0:
                        first_bad = F
                    bad += 1
            cnt += N - c[depth]
            depth -= 1
        else:
            depth += 1
            c[depth] = c[depth - 1]
    return cnt, bad, first_bad


def exhaustive(n: int, r: int) -> tuple[int, int, int]:
    """Run every family of r distinct strings in {0,1}^n: (families, failures, first failing mask)."""
    if not 1 <= n <= 6:
        raise ValueError("the mask kernel needs 1 <= n <= 6")
    if not 1 <= r <= 1 << n:
        raise ValueError(f"r must be in [1, {1 << n}]")
    M, CYL = tables(n)
    cnt, bad, first = _run(n, r, M, CYL)
    return int(cnt), int(bad), int(first)


def solve_family(values, n: int) -> tuple[int, list[int]]:
    """Kernel result for a family given as ints: (value of i0, sorted coordinates S)."""
    M, _ = tables(n)
    F = np.uint64(0)
    for v in values:
        F |= np.uint64(1) << np.uint64(v)
    v0, S = solve_mask(F, len(values), M)
    return int(v0), [j for j in range(n) if int(S) >> j & 1]
