"""Exact polyhedral predicates and lattice point enumeration.

A linear constraint in ``n`` variables is a row ``(coeffs, bound, strict)``
encoding ``sum(coeffs[i]*x[i]) <= bound`` (``<`` when ``strict``).  All
coefficients are ``fractions.Fraction``.  The workhorse is Fourier-Motzkin
elimination, which is exact and, at the problem sizes arising here (at
most a handful of variables after equalities are eliminated), entirely
adequate.  Feasibility questions about convex position are phrased in the
separating-functional form so that the eliminated system lives in the
ambient dimension, not in the number of generators.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .linalg import nullspace, rref, to_fraction, to_matrix

Row = tuple[tuple[Fraction, ...], Fraction, bool]

_ZERO = Fraction(0)


def make_row(coeffs: Sequence, bound, strict: bool = False) -> Row:
    return (tuple(to_fraction(c) for c in coeffs), to_fraction(bound), bool(strict))


def _reduce(rows: Sequence[Row]) -> Optional[list[Row]]:
    """Drop trivial rows, normalise scale, and deduplicate.

    Returns ``None`` when a row is identically false.
    """
    best: dict[tuple, tuple[Fraction, bool]] = {}
    for coeffs, bound, strict in rows:
        lead = next((c for c in coeffs if c != 0), None)
        if lead is None:
            if bound < 0 or (strict and bound == 0):
                return None
            continue
        scale = abs(lead)
        key = tuple(c / scale for c in coeffs)
        b = bound / scale
        if key in best:
            ob, ostrict = best[key]
            if b < ob or (b == ob and strict):
                best[key] = (b, strict or (b == ob and ostrict))
        else:
            best[key] = (b, strict)
    out = [(k, b, s) for k, (b, s) in best.items()]
    out.sort()
    return out


def eliminate_last(rows: Sequence[Row], nvars: int) -> Optional[list[Row]]:
    """Project out the last variable by Fourier-Motzkin combination."""
    k = nvars - 1
    lowers, uppers, zeros = [], [], []
    for coeffs, bound, strict in rows:
        c = coeffs[k]
        if c > 0:
            uppers.append((coeffs, bound, strict))
        elif c < 0:
            lowers.append((coeffs, bound, strict))
        else:
            zeros.append((coeffs[:k], bound, strict))
    for lc, lb, ls in lowers:
        for uc, ub, us in uppers:
            a, b = uc[k], -lc[k]
            coeffs = tuple(a * lc[i] + b * uc[i] for i in range(k))
            zeros.append((coeffs, a * lb + b * ub, ls or us))
    return _reduce(zeros)


def projection_chain(rows: Sequence[Row], nvars: int) -> Optional[list[list[Row]]]:
    """Systems ``S[k]`` over variables ``x_0..x_{k-1}`` for k = nvars..1.

    ``S[k]`` is stored at index ``k``; index 0 is unused.  Returns ``None``
    when the system is infeasible.
    """
    current = _reduce(rows)
    if current is None:
        return None
    chain: list[Optional[list[Row]]] = [None] * (nvars + 1)
    chain[nvars] = current
    for k in range(nvars, 0, -1):
        nxt = eliminate_last(chain[k], k)
        if nxt is None:
            return None
        chain[k - 1] = nxt
    return chain  # type: ignore[return-value]


def feasible(rows: Sequence[Row], nvars: int) -> bool:
    return projection_chain(rows, nvars) is not None


def _bounds_at(
    rows: Sequence[Row], prefix: Sequence[Fraction], k: int
) -> Optional[tuple[Optional[tuple[Fraction, bool]], Optional[tuple[Fraction, bool]]]]:
    """Bounds on ``x_{k-1}`` once ``x_0..x_{k-2}`` are fixed to ``prefix``."""
    lo: Optional[tuple[Fraction, bool]] = None
    hi: Optional[tuple[Fraction, bool]] = None
    for coeffs, bound, strict in rows:
        c = coeffs[k - 1]
        if c == 0:
            continue
        rest = sum((coeffs[i] * prefix[i] for i in range(k - 1)), _ZERO)
        val = (bound - rest) / c
        if c > 0:
            if hi is None or val < hi[0] or (val == hi[0] and strict):
                hi = (val, strict)
        else:
            if lo is None or val > lo[0] or (val == lo[0] and strict):
                lo = (val, strict)
    return lo, hi


def witness(rows: Sequence[Row], nvars: int) -> Optional[tuple[Fraction, ...]]:
    """A rational point satisfying all rows, or ``None``."""
    chain = projection_chain(rows, nvars)
    if chain is None:
        return None
    point: list[Fraction] = []
    for k in range(1, nvars + 1):
        lo, hi = _bounds_at(chain[k], point, k)
        if lo is None and hi is None:
            point.append(_ZERO)
        elif lo is None:
            point.append(hi[0] - 1)
        elif hi is None:
            point.append(lo[0] + 1)
        elif lo[0] == hi[0]:
            point.append(lo[0])
        else:
            point.append((lo[0] + hi[0]) / 2)
    return tuple(point)


def integer_points(rows: Sequence[Row], nvars: int) -> Iterator[tuple[int, ...]]:
    """All integer points of the constraint region, in lexicographic order.

    The projection chain supplies exact per-variable bounds, so the walk
    never visits a branch that cannot contain a solution.
    """
    if nvars == 0:
        if _reduce(rows) is not None:
            yield ()
        return
    chain = projection_chain(rows, nvars)
    if chain is None:
        return

    def descend(prefix: list[Fraction], k: int) -> Iterator[tuple[int, ...]]:
        lo, hi = _bounds_at(chain[k], prefix, k)
        if lo is None or hi is None:
            raise ValueError("enumeration region is unbounded")
        lo_val, lo_strict = lo
        hi_val, hi_strict = hi
        lo_int = math.floor(lo_val) + 1 if lo_strict else math.ceil(lo_val)
        hi_int = math.ceil(hi_val) - 1 if hi_strict else math.floor(hi_val)
        for v in range(lo_int, hi_int + 1):
            prefix.append(Fraction(v))
            if k == nvars:
                yield tuple(int(x) for x in prefix)
            else:
                yield from descend(prefix, k + 1)
            prefix.pop()

    yield from descend([], 1)


# ---------------------------------------------------------------------------
# convex-position predicates


def _affine_solutions(a, b, ncols: int):
    """Solution set of ``a x = b`` as ``(particular, basis)`` or ``None``."""
    a = to_matrix(a)
    if not a:
        particular = (_ZERO,) * ncols
        basis = [
            tuple(Fraction(1) if i == j else _ZERO for i in range(ncols))
            for j in range(ncols)
        ]
        return particular, basis
    aug = tuple(row + (to_fraction(x),) for row, x in zip(a, b))
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    particular = [_ZERO] * ncols
    for r, c in enumerate(pivots):
        particular[c] = red[r][-1]
    return tuple(particular), nullspace(a)


def in_cone(target: Sequence, generators: Sequence[Sequence]) -> bool:
    """Is ``target`` a nonnegative rational combination of ``generators``?"""
    gens = [tuple(to_fraction(x) for x in g) for g in generators]
    target = tuple(to_fraction(x) for x in target)
    if all(x == 0 for x in target):
        return True
    if not gens:
        return False
    n = len(target)
    a = tuple(tuple(g[i] for g in gens) for i in range(n))
    sol = _affine_solutions(a, target, len(gens))
    if sol is None:
        return False
    particular, basis = sol
    nfree = len(basis)
    rows = []
    for i in range(len(gens)):
        coeffs = tuple(-v[i] for v in basis)
        rows.append((coeffs, particular[i], False))
    return feasible(rows, nfree)


def _cone_has_nonzero(rows: Sequence[Row], nvars: int) -> bool:
    """Does a homogeneous inequality system admit a nonzero solution?

    A cone contains a nonzero vector iff it contains one with some
    coordinate at least 1 in absolute value, which is a scale-free test.
    """
    for k in range(nvars):
        for sign in (1, -1):
            extra = tuple(
                Fraction(-sign) if i == k else _ZERO for i in range(nvars)
            )
            if feasible(list(rows) + [(extra, Fraction(-1), False)], nvars):
                return True
    return False


def separates_from_hull(point: Sequence, others: Sequence[Sequence]) -> bool:
    """Is there a functional strictly larger at ``point`` than on ``others``?

    Equivalent to ``point`` not lying in the convex hull of ``others``;
    strict separation of a point from finitely many points is scale-free,
    so the gap may be normalised to 1.
    """
    point = tuple(to_fraction(x) for x in point)
    n = len(point)
    rows = [
        (tuple(to_fraction(o[i]) - point[i] for i in range(n)), Fraction(-1), False)
        for o in others
    ]
    return feasible(rows, n)


def on_hull_boundary(point: Sequence, points: Sequence[Sequence]) -> bool:
    """Does some nonzero functional attain its maximum over ``points`` at
    ``point``?  True exactly when ``point`` is not interior to the hull."""
    point = tuple(to_fraction(x) for x in point)
    n = len(point)
    rows = [
        (tuple(to_fraction(p[i]) - point[i] for i in range(n)), _ZERO, False)
        for p in points
    ]
    reduced = _reduce(rows)
    if reduced is None:
        return False
    return _cone_has_nonzero(reduced, n)


def positively_spans(vectors: Sequence[Sequence], n: int) -> bool:
    """Do the vectors positively span all of Q^n?

    Equivalent to the origin lying interior to their convex hull, and to
    the nonexistence of a nonzero functional that is nonpositive on all
    of them.
    """
    rows = [
        (tuple(to_fraction(v[i]) for i in range(n)), _ZERO, False) for v in vectors
    ]
    reduced = _reduce(rows)
    if reduced is None:
        return False
    return not _cone_has_nonzero(reduced, n)
