"""Exact dense linear algebra on raw field values."""

from __future__ import annotations

from typing import Sequence

from .field import Field, Raw


def rank(rows: Sequence[Sequence[Raw]], f: Field) -> int:
    mat = [list(r) for r in rows if any(r)]
    if not mat:
        return 0
    ncols = len(mat[0])
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = f.inv(mat[r][col])
        prow = [f.mul(x, inv) for x in mat[r]]
        mat[r] = prow
        for i in range(len(mat)):
            if i != r and mat[i][col]:
                factor = mat[i][col]
                row = mat[i]
                mat[i] = [f.sub(a, f.mul(factor, b)) for a, b in zip(row, prow)]
        r += 1
        if r == len(mat):
            break
    return r


def det_bareiss(matrix: Sequence[Sequence[Raw]], f: Field) -> Raw:
    """Fraction-free (Bareiss) elimination with row pivoting.

    Every division is exact; over Q with integer input no fractions appear.
    """
    n = len(matrix)
    if n == 0:
        return f.one
    a = [list(r) for r in matrix]
    sign = 1
    prev = f.one
    for k in range(n - 1):
        if not a[k][k]:
            piv = next((i for i in range(k + 1, n) if a[i][k]), None)
            if piv is None:
                return f.zero
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                num = f.sub(f.mul(akk, row_i[j]), f.mul(aik, row_k[j]))
                row_i[j] = f.div(num, prev)
            row_i[k] = f.zero
        prev = akk
    d = a[n - 1][n - 1]
    return d if sign > 0 else f.neg(d)


def det_gauss(matrix: Sequence[Sequence[Raw]], f: Field) -> Raw:
    """Plain Gaussian elimination with field division."""
    n = len(matrix)
    a = [list(r) for r in matrix]
    det = f.one
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            return f.zero
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = f.neg(det)
        det = f.mul(det, a[k][k])
        inv = f.inv(a[k][k])
        for i in range(k + 1, n):
            if a[i][k]:
                factor = f.mul(a[i][k], inv)
                a[i] = [f.sub(x, f.mul(factor, y)) for x, y in zip(a[i], a[k])]
    return det


def mat_mul(a, b, f: Field):
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    return [
        [f.sum(f.mul(a[i][k], b[k][j]) for k in range(m)) for j in range(p)]
        for i in range(n)
    ]


def identity(n: int, f: Field):
    return [[f.one if i == j else f.zero for j in range(n)] for i in range(n)]
