"""Exact linear algebra over the rationals and over the integers.

Matrices are tuples of row tuples.  Rational routines work with
``fractions.Fraction`` entries, lattice routines with plain ``int``.
Everything is exact; singularity and inconsistency are decided exactly,
never by thresholding.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def to_matrix(rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(to_fraction(x) for x in row) for row in rows)


def zeros(k: int) -> Vector:
    return (Fraction(0),) * k


def identity(k: int) -> Matrix:
    return tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(k))
        for i in range(k)
    )


def vec_add(a: Sequence, b: Sequence) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Sequence, b: Sequence) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(c, a: Sequence) -> Vector:
    return tuple(c * x for x in a)


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def mat_vec(m: Sequence[Sequence], v: Sequence) -> Vector:
    return tuple(dot(row, v) for row in m)


def vec_mat(v: Sequence, m: Sequence[Sequence]) -> Vector:
    cols = len(m[0]) if m else 0
    return tuple(
        sum((v[i] * m[i][j] for i in range(len(m))), Fraction(0)) for j in range(cols)
    )


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    return tuple(vec_mat(row, b) for row in a)


def transpose(m: Sequence[Sequence]) -> Matrix:
    if not m:
        return ()
    return tuple(tuple(row[j] for row in m) for j in range(len(m[0])))


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form and the pivot column indices."""
    work = [list(row) for row in to_matrix(rows)]
    if not work:
        return (), ()
    nrows, ncols = len(work), len(work[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = 1 / work[r][c]
        work[r] = [x * inv for x in work[r]]
        for i in range(nrows):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in work), tuple(pivots)


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[Vector]:
    """Solve ``a x = b`` for a matrix of full column rank.

    Returns the unique solution, or ``None`` when the system is
    inconsistent.  Raises ``ValueError`` if the column rank is deficient,
    since then "the" solution is not well defined.
    """
    a = to_matrix(a)
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    aug = tuple(row + (to_fraction(x),) for row, x in zip(a, b))
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    if len(pivots) < ncols:
        raise ValueError("coefficient matrix does not have full column rank")
    x = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        x[c] = red[r][-1]
    # consistency of the remaining equations
    for i in range(len(pivots), nrows):
        if red[i][-1] != 0:
            return None
    return tuple(x)


def nullspace(rows: Sequence[Sequence]) -> list[Vector]:
    """Basis of the rational kernel of the row-matrix acting on columns."""
    rows = to_matrix(rows)
    if not rows:
        return []
    ncols = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(tuple(v))
    return basis


def invert(m: Sequence[Sequence]) -> Matrix:
    m = to_matrix(m)
    k = len(m)
    aug = tuple(row + ident_row for row, ident_row in zip(m, identity(k)))
    red, pivots = rref(aug)
    if pivots != tuple(range(k)):
        raise ValueError("matrix is singular")
    return tuple(row[k:] for row in red)


def solve_right_inverse(g: Sequence[Sequence]) -> Matrix:
    """For ``g`` of full row rank, a matrix ``p`` with ``g p = I``."""
    g = to_matrix(g)
    gt = transpose(g)
    gram = mat_mul(g, gt)
    return mat_mul(gt, invert(gram))


def int_det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(rows)
    if n == 0:
        return 1
    m = [[int(x) for x in row] for row in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if pivot is None:
                return 0
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def integer_solve(
    rows: Sequence[Sequence[int]], rhs: Sequence[int], ncols: int
) -> Optional[tuple[tuple[int, ...], list[tuple[int, ...]]]]:
    """Integral solutions of ``rows . v = rhs`` over ``Z^ncols``.

    Returns ``(particular, kernel_basis)`` describing the full solution
    set ``particular + Z kernel_basis``, or ``None`` when no integral
    solution exists.  Works by unimodular column reduction: the matrix is
    brought to column echelon form while the same operations act on an
    identity matrix, after which the echelon system is solved by exact
    divisions and the identity columns over the vanishing echelon columns
    span the kernel lattice.
    """
    nrows = len(rows)
    # column-major copies
    m = [[int(rows[i][j]) for i in range(nrows)] for j in range(ncols)]
    u = [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]

    def col_op(j, k, q):
        # column_j -= q * column_k
        m[j] = [a - q * b for a, b in zip(m[j], m[k])]
        u[j] = [a - q * b for a, b in zip(u[j], u[k])]

    c = 0
    pivot_of_row: list[Optional[int]] = [None] * nrows
    for r in range(nrows):
        # gcd-reduce row r across columns c..ncols-1
        while True:
            nz = [j for j in range(c, ncols) if m[j][r] != 0]
            if not nz:
                break
            pivot = min(nz, key=lambda j: abs(m[j][r]))
            if pivot != c:
                m[c], m[pivot] = m[pivot], m[c]
                u[c], u[pivot] = u[pivot], u[c]
            done = True
            for j in range(c + 1, ncols):
                if m[j][r] != 0:
                    q = m[j][r] // m[c][r]
                    col_op(j, c, q)
                    if m[j][r] != 0:
                        done = False
            if done:
                break
        if c < ncols and m[c][r] != 0:
            pivot_of_row[r] = c
            c += 1

    # back-solve the echelon system; remaining positions stay 0
    y = [0] * ncols
    for r in range(nrows):
        p = pivot_of_row[r]
        acc = sum(m[j][r] * y[j] for j in range(c) if j != p)
        if p is None:
            if acc != int(rhs[r]):
                return None
        else:
            num = int(rhs[r]) - acc
            if num % m[p][r] != 0:
                return None
            y[p] = num // m[p][r]

    particular = tuple(
        sum(u[j][i] * y[j] for j in range(ncols)) for i in range(ncols)
    )
    kernel = []
    for j in range(c, ncols):
        if any(m[j][r] != 0 for r in range(nrows)):
            raise AssertionError("column reduction left a nonzero column")
        vec = list(u[j])
        lead = next((x for x in vec if x != 0), 1)
        if lead < 0:
            vec = [-x for x in vec]
        kernel.append(tuple(vec))
    kernel.sort()
    return particular, kernel


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Z-basis of the lattice ``{v in Z^ncols : rows . v = 0}``."""
    solved = integer_solve(rows, [0] * len(rows), ncols)
    assert solved is not None
    return solved[1]
