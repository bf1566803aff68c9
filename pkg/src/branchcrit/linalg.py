"""Exact ranks over F_p and over the rationals for small dense integer matrices."""

from __future__ import annotations

from typing import List, Sequence

Matrix = Sequence[Sequence[int]]


def rank_mod_p(A: Matrix, p: int) -> int:
    rows = [[x % p for x in row] for row in A]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(rows)) if rows[k][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        prow = [x * inv % p for x in rows[r]]
        rows[r] = prow
        for k in range(r + 1, len(rows)):
            f = rows[k][c]
            if f:
                rows[k] = [(x - f * y) % p for x, y in zip(rows[k], prow)]
        r += 1
        if r == len(rows):
            break
    return r


def rank_rational(A: Matrix) -> int:
    """Fraction-free (Bareiss) elimination; exact for integer input."""
    rows: List[List[int]] = [list(map(int, row)) for row in A]
    if not rows:
        return 0
    m, ncols = len(rows), len(rows[0])
    r = 0
    prev = 1
    for c in range(ncols):
        piv = next((k for k in range(r, m) if rows[k][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        pv = pr[c]
        for k in range(r + 1, m):
            row = rows[k]
            f = row[c]
            rows[k] = [(pv * x - f * y) // prev for x, y in zip(row, pr)]
        prev = pv
        r += 1
        if r == m:
            break
    return r


def transpose(A: Matrix) -> List[List[int]]:
    return [list(col) for col in zip(*A)] if A else []


def hstack(blocks: Sequence[Matrix], nrows: int) -> List[List[int]]:
    out = [[] for _ in range(nrows)]
    for B in blocks:
        for k in range(nrows):
            out[k].extend(B[k])
    return out
