"""Integer matrices: Smith normal form with unimodular transforms."""

from __future__ import annotations

from dataclasses import dataclass


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a, b):
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)] for i in range(len(a))]


def matvec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


@dataclass
class SmithForm:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular and ``D`` diagonal.

    The diagonal entries ``d_1 | d_2 | ... | d_rank`` are positive.
    ``Uinv`` and ``Vinv`` are the exact inverses of ``U`` and ``V``.
    """

    D: list
    U: list
    V: list
    Uinv: list
    Vinv: list
    rank: int

    @property
    def invariants(self):
        return [self.D[i][i] for i in range(self.rank)]


def smith_normal_form(A) -> SmithForm:
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, row)) for row in A]
    U, Uinv = identity(m), identity(m)
    V, Vinv = identity(n), identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        for row in Uinv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(i, j, c):
        # row_i += c * row_j
        D[i] = [x + c * y for x, y in zip(D[i], D[j])]
        U[i] = [x + c * y for x, y in zip(U[i], U[j])]
        for row in Uinv:
            row[j] -= c * row[i]

    def add_col(i, j, c):
        # col_i += c * col_j
        for row in D:
            row[i] += c * row[j]
        for row in V:
            row[i] += c * row[j]
        Vinv[j] = [x - c * y for x, y in zip(Vinv[j], Vinv[i])]

    def negate_row(i):
        D[i] = [-x for x in D[i]]
        U[i] = [-x for x in U[i]]
        for row in Uinv:
            row[i] = -row[i]

    t = 0
    while t < min(m, n):
        entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            changed = False
            for i in range(t + 1, m):
                if D[i][t]:
                    q = D[i][t] // D[t][t]
                    add_row(i, t, -q)
                    if D[i][t]:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, n):
                if D[t][j]:
                    q = D[t][j] // D[t][t]
                    add_col(j, t, -q)
                    if D[t][j]:
                        swap_cols(t, j)
                        changed = True
            if changed:
                continue
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if D[t][t] < 0:
            negate_row(t)
        t += 1
    return SmithForm(D, U, V, Uinv, Vinv, t)


def lattice_index(rows, ambient_rank):
    """Index of the span of ``rows`` inside a saturated rank-``ambient_rank`` lattice.

    Returns ``None`` when the span has smaller rank (infinite index).
    """
    if not rows:
        return None if ambient_rank else 1
    snf = smith_normal_form(rows)
    if snf.rank < ambient_rank:
        return None
    out = 1
    for d in snf.invariants:
        out *= d
    return out


def solve_integer(A, b):
    """An integer solution ``x`` of ``A x = b`` or ``None``."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return []
    snf = smith_normal_form(A)
    c = matvec(snf.U, b)
    y = [0] * n
    for i in range(m):
        if i < snf.rank:
            d = snf.D[i][i]
            if c[i] % d:
                return None
            y[i] = c[i] // d
        elif c[i]:
            return None
    return matvec(snf.V, y)
