"""Smith normal form over the integers, with the unimodular transforms.

Entries are Python ints throughout, so coefficient growth never overflows.
"""

from __future__ import annotations

Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(a: Matrix, ncols: int | None = None) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(D, U, V)`` with ``U @ a @ V == D`` diagonal, diagonal entries nonnegative
    and each dividing the next.

    ``ncols`` is needed when ``a`` has no rows.
    """
    m = len(a)
    n = len(a[0]) if m else (ncols or 0)
    d = [list(map(int, row)) for row in a]
    u = identity(m)
    v = identity(n)

    def swap_rows(i: int, j: int) -> None:
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src: int, dst: int, q: int) -> None:
        # row dst += q * row src
        if q:
            d[dst] = [x + q * y for x, y in zip(d[dst], d[src])]
            u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src: int, dst: int, q: int) -> None:
        if q:
            for row in d:
                row[dst] += q * row[src]
            for row in v:
                row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            pivot = None
            for i in range(t, m):
                for j in range(t, n):
                    if d[i][j] and (pivot is None or abs(d[i][j]) < abs(d[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                return _finish(d, u, v, m, n)
            swap_rows(t, pivot[0])
            swap_cols(t, pivot[1])
            p = d[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = d[i][t] // p
                add_row(t, i, -q)
                if d[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = d[t][j] // p
                add_col(t, j, -q)
                if d[t][j]:
                    dirty = True
            if dirty:
                continue
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if d[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return _finish(d, u, v, m, n)


def _finish(d: Matrix, u: Matrix, v: Matrix, m: int, n: int) -> tuple[Matrix, Matrix, Matrix]:
    for t in range(min(m, n)):
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return d, u, v


def diagonal(d: Matrix) -> list[int]:
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(cols)] for i in range(len(a))]
