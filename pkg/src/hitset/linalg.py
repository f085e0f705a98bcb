"""Exact linear algebra over F_p on lists of int rows."""

from __future__ import annotations

from typing import Sequence

Matrix = list[list[int]]


def rref(rows: Sequence[Sequence[int]], p: int) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    A = [[x % p for x in row] for row in rows]
    if not A:
        return A, []
    ncols = len(A[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        pr = A[r]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], pr)]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank(rows: Sequence[Sequence[int]], p: int) -> int:
    A = [[x % p for x in row] for row in rows if any(x % p for x in row)]
    if not A:
        return 0
    ncols = len(A[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        pr = [x * inv % p for x in A[r]]
        A[r] = pr
        for i in range(r + 1, len(A)):
            if A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], pr)]
        r += 1
        if r == len(A):
            break
    return r


def transpose(A: Sequence[Sequence[int]]) -> Matrix:
    return [list(col) for col in zip(*A)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], p: int) -> Matrix:
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) % p for col in Bt] for row in A]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def inverse(A: Sequence[Sequence[int]], p: int) -> Matrix:
    n = len(A)
    aug = [list(row) + e for row, e in zip(A, identity(n))]
    R, piv = rref(aug, p)
    if piv[:n] != list(range(n)) or len(R) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def det(A: Sequence[Sequence[int]], p: int) -> int:
    M = [[x % p for x in row] for row in A]
    n = len(M)
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = -d
        d = d * M[c][c] % p
        inv = pow(M[c][c], -1, p)
        for i in range(c + 1, n):
            if M[i][c]:
                f = M[i][c] * inv % p
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[c])]
    return d % p


def nullspace(A: Sequence[Sequence[int]], p: int, ncols: int | None = None) -> Matrix:
    """Basis of {v : A v = 0}."""
    if ncols is None:
        ncols = len(A[0])
    R, piv = rref(A, p) if A else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for row, pc in zip(R, piv):
            v[pc] = -row[fc] % p
        basis.append(v)
    return basis


def solve_in_span(basis: Sequence[Sequence[int]], target: Sequence[int], p: int) -> list[int] | None:
    """Coefficients lam with sum lam_i basis_i = target, or None."""
    k = len(basis)
    if k == 0:
        return [] if not any(x % p for x in target) else None
    # columns are basis vectors
    aug = [[basis[j][i] for j in range(k)] + [target[i]] for i in range(len(target))]
    R, piv = rref(aug, p)
    if k in piv:
        return None
    lam = [0] * k
    for row, pc in zip(R, piv):
        lam[pc] = row[k]
    return lam
