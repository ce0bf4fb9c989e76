"""Small dense linear algebra over exact rationals (tolerance-aware in float mode)."""

from __future__ import annotations

from typing import Sequence

from .core import sign, to_number


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form. Returns ``(matrix, pivot_columns)``."""
    M = [[to_number(x) for x in row] for row in rows]
    if not M:
        return [], []
    ncols = len(M[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(M):
            break
        p = next((i for i in range(r, len(M)) if sign(M[i][c]) != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        M[r] = [x / piv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M, pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple]:
    """Basis of ``{x : rows . x = 0}``; one vector per free column, in column order."""
    if not rows:
        return [tuple(to_number(1 if k == c else 0) for k in range(ncols)) for c in range(ncols)]
    M, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [to_number(0)] * ncols
        x[f] = to_number(1)
        for r, pc in enumerate(pivots):
            x[pc] = -M[r][f]
        basis.append(tuple(x))
    return basis


def solve_linear(A: Sequence[Sequence], b: Sequence):
    """Return ``(x, rank)`` for ``A x = b`` with free variables set to 0, or ``(None, rank)``."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    M, pivots = rref(aug, n + 1)
    if n in pivots:
        return None, len(pivots) - 1
    x = [to_number(0)] * n
    for r, pc in enumerate(pivots):
        x[pc] = M[r][n]
    return tuple(x), len(pivots)
