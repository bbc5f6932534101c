"""Truncated formal power series over the rationals with curve-class
exponents.

A :class:`NovikovSeries` is a finite sum ``sum c_d x^d`` where ``d`` runs
over integral curve classes of a fixed :class:`~.toric_lattice.ToricData`
with nonnegative coordinates in the curve basis, truncated at a fixed
ample degree ``N``.  Whether the formal variable is read as the flat
coordinate ``q`` or the mirror coordinate ``y`` is recorded one level up,
on :class:`DivisorSeries` and :class:`MirrorMap`; the coefficient
arithmetic is identical in both readings.

All arithmetic is exact.  Equality of series is literal equality of the
coefficient dictionaries and is the test predicate used everywhere.
"""

from __future__ import annotations

import heapq
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

from . import linalg
from .errors import (
    ContextMismatch,
    InconsistentAtOrder,
    NonUnit,
    NonzeroConstantTerm,
    SingularConstantPart,
    UnboundedRegion,
)
from .toric_lattice import CurveClass, ToricData

_ZERO = Fraction(0)
_ONE = Fraction(1)

Exponent = tuple[int, ...]


class NovikovSeries:
    """A truncated exponent-indexed power series with rational coefficients.

    Instances are immutable.  ``terms`` maps :class:`CurveClass` to
    coefficient; internally exponents are raw coordinate tuples.
    """

    __slots__ = ("data", "order", "_t", "_by_degree")

    def __init__(self, data: ToricData, order: int, terms: Mapping = ()):
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        self.data = data
        self.order = int(order)
        clean: dict[Exponent, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, value in items:
            coords = key.coords if isinstance(key, CurveClass) else tuple(key)
            value = linalg.to_fraction(value)
            if value == 0:
                continue
            if any(x < 0 for x in data.gamma_of(coords)):
                raise ValueError(
                    f"exponent {coords} lies outside the support cone"
                )
            deg = data.degree_of(coords)
            if deg < 0:
                raise ValueError(f"exponent {coords} has negative degree")
            if deg > self.order:
                continue  # silently truncated
            clean[coords] = clean.get(coords, _ZERO) + value
        self._t = {k: v for k, v in clean.items() if v != 0}
        self._by_degree = None

    # -- construction -----------------------------------------------------

    @staticmethod
    def zero(data: ToricData, order: int) -> "NovikovSeries":
        return _make(data, order, {})

    @staticmethod
    def one(data: ToricData, order: int) -> "NovikovSeries":
        return _make(data, order, {(0,) * data.rank: _ONE})

    @staticmethod
    def monomial(data: ToricData, order: int, d, coeff=1) -> "NovikovSeries":
        return NovikovSeries(data, order, [(d, coeff)])

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> dict[CurveClass, Fraction]:
        return {CurveClass(k): v for k, v in self._t.items()}

    @property
    def is_zero(self) -> bool:
        return not self._t

    @property
    def constant_term(self) -> Fraction:
        return self._t.get((0,) * self.data.rank, _ZERO)

    def coefficient(self, d) -> Fraction:
        coords = d.coords if isinstance(d, CurveClass) else tuple(d)
        return self._t.get(coords, _ZERO)

    def min_degree(self) -> Optional[Fraction]:
        """Smallest ample degree carrying a term, ``None`` for zero."""
        if not self._t:
            return None
        return min(self.data.degree_of(k) for k in self._t)

    def support(self) -> list[CurveClass]:
        keys = sorted(self._t, key=lambda k: (self.data.degree_of(k), k))
        return [CurveClass(k) for k in keys]

    def _sorted_items(self):
        if self._by_degree is None:
            self._by_degree = sorted(
                self._t.items(), key=lambda kv: (self.data.degree_of(kv[0]), kv[0])
            )
        return self._by_degree

    def __repr__(self):
        if not self._t:
            return "<series 0>"
        bits = []
        for k, v in self._sorted_items()[:6]:
            bits.append(f"{v}*x^{k}")
        more = " + ..." if len(self._t) > 6 else ""
        return f"<series {' + '.join(bits)}{more}>"

    # -- ring operations ---------------------------------------------------

    def _check_same(self, other: "NovikovSeries") -> None:
        if self.data is not other.data or self.order != other.order:
            raise ContextMismatch(
                "series belong to different gradings or truncation orders"
            )

    def __eq__(self, other):
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return (
            self.data is other.data
            and self.order == other.order
            and self._t == other._t
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = NovikovSeries.monomial(
                self.data, self.order, (0,) * self.data.rank, other
            )
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        self._check_same(other)
        out = dict(self._t)
        for k, v in other._t.items():
            s = out.get(k, _ZERO) + v
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return _make(self.data, self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return _make(self.data, self.order, {k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-Fraction(other))
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return NovikovSeries.zero(self.data, self.order)
            return _make(self.data, self.order, {k: c * v for k, v in self._t.items()})
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        self._check_same(other)
        return _make(
            self.data, self.order, _convolve(self, other, Fraction(self.order))
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def restrict(self, max_degree) -> "NovikovSeries":
        """Drop every term of ample degree above ``max_degree``."""
        cap = linalg.to_fraction(max_degree)
        return _make(
            self.data,
            self.order,
            {k: v for k, v in self._t.items() if self.data.degree_of(k) <= cap},
        )

    def theta(self, i: int) -> "NovikovSeries":
        """Logarithmic derivative along the i-th basis direction.

        Each monomial is scaled by the pairing of its exponent with
        ``p_{i+1}``; this is the exponent-side avatar of
        ``y_i d/dy_i``.
        """
        out = {}
        for k, v in self._t.items():
            w = v * self.data.gamma_of(k)[i]
            if w != 0:
                out[k] = w
        return _make(self.data, self.order, out)

    def shifted(self, d, scale=1) -> "NovikovSeries":
        """Multiply by ``scale * x^d``, truncating at the order."""
        coords = d.coords if isinstance(d, CurveClass) else tuple(d)
        scale = linalg.to_fraction(scale)
        out = {}
        cap = Fraction(self.order)
        for k, v in self._t.items():
            nk = tuple(a + b for a, b in zip(k, coords))
            if self.data.degree_of(nk) <= cap:
                out[nk] = v * scale
        return _make(self.data, self.order, out)


def _make(data: ToricData, order: int, terms: dict) -> NovikovSeries:
    s = NovikovSeries.__new__(NovikovSeries)
    s.data = data
    s.order = order
    s._t = terms
    s._by_degree = None
    return s


def _convolve(a: NovikovSeries, b: NovikovSeries, cutoff: Fraction) -> dict:
    data = a.data
    cap = min(cutoff, Fraction(a.order))
    out: dict[Exponent, Fraction] = {}
    bi = b._sorted_items()
    for ka, va in a._sorted_items():
        budget = cap - data.degree_of(ka)
        if budget < 0:
            break
        for kb, vb in bi:
            if data.degree_of(kb) > budget:
                break
            nk = tuple(x + y for x, y in zip(ka, kb))
            s = out.get(nk, _ZERO) + va * vb
            if s == 0:
                out.pop(nk, None)
            else:
                out[nk] = s
    return out


def mul(a: NovikovSeries, b: NovikovSeries, cutoff=None) -> NovikovSeries:
    """Product truncated at the ample degree ``cutoff`` (default: order)."""
    a._check_same(b)
    cap = Fraction(a.order) if cutoff is None else linalg.to_fraction(cutoff)
    return _make(a.data, a.order, _convolve(a, b, cap))


def _positive_min_degree(s: NovikovSeries) -> Fraction:
    delta = s.min_degree()
    if delta is None:
        raise ValueError("zero series has no minimal degree")
    if delta <= 0:
        raise UnboundedRegion(
            "series has a nonzero term of nonpositive ample degree; "
            "the truncation grading cannot bound its powers"
        )
    return delta


def exp(s: NovikovSeries) -> NovikovSeries:
    """Exponential of a series with vanishing constant term."""
    if s.constant_term != 0:
        raise NonzeroConstantTerm("exp needs a vanishing constant term")
    one = NovikovSeries.one(s.data, s.order)
    if s.is_zero:
        return one
    depth = int(Fraction(s.order) / _positive_min_degree(s))
    acc = one
    for k in range(depth, 0, -1):
        acc = one + mul(acc, s) / k
    return acc


def log_unit(u: NovikovSeries) -> NovikovSeries:
    """Logarithm of a series with constant term exactly 1."""
    if u.constant_term != 1:
        raise NonUnit("log needs constant term 1")
    v = u - 1
    if v.is_zero:
        return NovikovSeries.zero(u.data, u.order)
    depth = int(Fraction(u.order) / _positive_min_degree(v))
    one = NovikovSeries.one(u.data, u.order)
    acc = one / depth
    for k in range(depth - 1, 0, -1):
        acc = one / k - mul(v, acc)
    return mul(v, acc)


def invert_unit(u: NovikovSeries) -> NovikovSeries:
    """Multiplicative inverse of a series with invertible constant term."""
    c = u.constant_term
    if c == 0:
        raise NonUnit("inverse needs a nonzero constant term")
    one = NovikovSeries.one(u.data, u.order)
    v = one - u / c
    if v.is_zero:
        return one / c
    depth = int(Fraction(u.order) / _positive_min_degree(v))
    acc = one
    for _ in range(depth):
        acc = one + mul(v, acc)
    return acc / c


# ---------------------------------------------------------------------------
# vector-valued series


@dataclass(frozen=True)
class DivisorSeries:
    """A series with values in the second cohomology: one component per
    nef-basis element, plus a tag naming the coordinates the series is
    expanded in."""

    components: tuple[NovikovSeries, ...]
    coords: str  # "y" or "q"

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.coords not in ("y", "q"):
            raise ValueError("coordinates must be 'y' or 'q'")
        if not self.components:
            raise ValueError("empty divisor series")
        first = self.components[0]
        for c in self.components[1:]:
            first._check_same(c)
        if len(self.components) != first.data.rank:
            raise ValueError("one component per nef basis element required")

    @property
    def data(self) -> ToricData:
        return self.components[0].data

    @property
    def order(self) -> int:
        return self.components[0].order

    @staticmethod
    def constant(data: ToricData, order: int, p_coords, coords: str) -> "DivisorSeries":
        comps = tuple(
            NovikovSeries.monomial(data, order, (0,) * data.rank, x)
            for x in p_coords
        )
        return DivisorSeries(comps, coords)

    def constant_p_coords(self) -> tuple[Fraction, ...]:
        return tuple(c.constant_term for c in self.components)

    def scaled_by(self, factor: NovikovSeries) -> "DivisorSeries":
        return DivisorSeries(
            tuple(mul(factor, c) for c in self.components), self.coords
        )

    def __add__(self, other: "DivisorSeries") -> "DivisorSeries":
        if self.coords != other.coords:
            raise ContextMismatch("divisor series in different coordinates")
        return DivisorSeries(
            tuple(a + b for a, b in zip(self.components, other.components)),
            self.coords,
        )

    def __sub__(self, other: "DivisorSeries") -> "DivisorSeries":
        if self.coords != other.coords:
            raise ContextMismatch("divisor series in different coordinates")
        return DivisorSeries(
            tuple(a - b for a, b in zip(self.components, other.components)),
            self.coords,
        )

    def __mul__(self, scalar) -> "DivisorSeries":
        return DivisorSeries(
            tuple(c * scalar for c in self.components), self.coords
        )

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)


@dataclass(frozen=True, eq=False)
class MirrorMap:
    """An invertible logarithmic change of variables.

    Forward direction: ``log q_i = log y_i + g_i(y)``; inverse direction:
    ``log y_i = log q_i + h_i(q)``.  Components have zero constant term
    and only carry exponents of anticanonical degree zero.  Instances
    compare by identity (they key substitution caches); compare
    ``.components`` for value equality.
    """

    components: tuple[NovikovSeries, ...]
    direction: str  # "forward" or "inverse"

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.direction not in ("forward", "inverse"):
            raise ValueError("direction must be 'forward' or 'inverse'")
        if not self.components:
            raise ValueError("empty map")
        first = self.components[0]
        for c in self.components[1:]:
            first._check_same(c)
        if len(self.components) != first.data.rank:
            raise ValueError("one component per nef basis element required")
        data = first.data
        for c in self.components:
            if c.constant_term != 0:
                raise NonzeroConstantTerm("coordinate change must fix the origin")
            for k in c._t:
                if sum(data.pairings_of(k)) != 0:
                    raise ValueError(
                        "coordinate change is not homogeneous: exponent "
                        f"{k} has nonzero anticanonical degree"
                    )

    @property
    def data(self) -> ToricData:
        return self.components[0].data

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def is_identity(self) -> bool:
        return all(c.is_zero for c in self.components)

    @staticmethod
    def identity(data: ToricData, order: int, direction: str) -> "MirrorMap":
        comps = tuple(NovikovSeries.zero(data, order) for _ in range(data.rank))
        return MirrorMap(comps, direction)


# ---------------------------------------------------------------------------
# substitution and inversion of coordinate changes

_EXP_CACHES: "weakref.WeakKeyDictionary[MirrorMap, dict]" = weakref.WeakKeyDictionary()


def _substitute_terms(
    f: NovikovSeries, h_components: Sequence[NovikovSeries], cache: dict
) -> NovikovSeries:
    data = f.data
    order = f.order
    cap = Fraction(order)
    acc: dict[Exponent, Fraction] = {}
    for k, coeff in f._sorted_items():
        budget = cap - data.degree_of(k)
        if budget < 0:
            break
        prod: Optional[NovikovSeries] = None
        for a, t in enumerate(data.gamma_of(k)):
            if t == 0:
                continue
            factor = cache.get((a, t))
            if factor is None:
                factor = exp(h_components[a] * t)
                cache[(a, t)] = factor
            if prod is None:
                prod = factor.restrict(budget)
            else:
                prod = mul(prod, factor, cutoff=budget)
        if prod is None:
            s = acc.get(k, _ZERO) + coeff
            if s == 0:
                acc.pop(k, None)
            else:
                acc[k] = s
            continue
        for ke, ve in prod._t.items():
            nk = tuple(x + y for x, y in zip(k, ke))
            s = acc.get(nk, _ZERO) + coeff * ve
            if s == 0:
                acc.pop(nk, None)
            else:
                acc[nk] = s
    return _make(data, order, acc)


def substitute(f: NovikovSeries, h: MirrorMap) -> NovikovSeries:
    """Rewrite a series through an inverse coordinate change.

    Each monomial ``x^d`` becomes ``x^d exp(sum_i <p_i, d> h_i)``; this is
    the truncation-exact form of substituting ``log(old_i) = log(new_i) +
    h_i(new)`` monomial by monomial, and it is a ring morphism.
    """
    if h.direction != "inverse":
        raise ValueError("substitution needs an inverse-direction map")
    if f.data is not h.data or f.order != h.order:
        raise ContextMismatch("series and map live over different contexts")
    cache = _EXP_CACHES.setdefault(h, {})
    return _substitute_terms(f, h.components, cache)


def invert_coordinate_change(g: MirrorMap) -> MirrorMap:
    """Invert a forward coordinate change by fixed-point iteration.

    The inverse components solve ``h = -g(y(q))``; starting from zero,
    each sweep extends the agreement with the true inverse by at least
    the minimal positive degree occurring in ``g``, so the iteration
    reaches a fixed point within the truncation order.
    """
    if g.direction != "forward":
        raise ValueError("can only invert a forward map")
    data, order = g.data, g.order
    if g.is_identity:
        return MirrorMap.identity(data, order, "inverse")
    delta = min(_positive_min_degree(c) for c in g.components if not c.is_zero)
    max_sweeps = int(Fraction(order) / delta) + 2
    current = [NovikovSeries.zero(data, order) for _ in range(data.rank)]
    for _ in range(max_sweeps):
        cache: dict = {}
        updated = [
            -_substitute_terms(c, current, cache) for c in g.components
        ]
        if all(u == c for u, c in zip(updated, current)):
            break
        current = updated
    else:
        raise AssertionError("coordinate-change inversion did not stabilise")
    h = MirrorMap(tuple(current), "inverse")
    cache = _EXP_CACHES.setdefault(h, {})
    for gi, hi in zip(g.components, h.components):
        if not (_substitute_terms(gi, h.components, cache) + hi).is_zero:
            raise AssertionError("coordinate-change inversion failed to verify")
    return h


# ---------------------------------------------------------------------------
# order-by-order linear solving


def solve_linear_series(
    a: Sequence[Sequence[NovikovSeries]], rhs: Sequence[NovikovSeries]
) -> list[NovikovSeries]:
    """Solve ``a x = rhs`` over the truncated series ring.

    The constant part of ``a`` must have full column rank; the solution is
    then unique and is found degree by degree.  Coefficients of the
    unknowns at a given exponent are determined by one exact rational
    solve fed by the already-determined lower-degree coefficients.
    Raises :class:`SingularConstantPart` or :class:`InconsistentAtOrder`.
    """
    nrows = len(a)
    if nrows == 0 or len(rhs) != nrows:
        raise ValueError("shape mismatch between matrix and right-hand side")
    ncols = len(a[0])
    ref = rhs[0]
    data, order = ref.data, ref.order
    for row in a:
        if len(row) != ncols:
            raise ValueError("ragged series matrix")
        for entry in row:
            ref._check_same(entry)
    for entry in rhs:
        ref._check_same(entry)

    zero_exp = (0,) * data.rank
    a0 = tuple(
        tuple(entry.constant_term for entry in row) for row in a
    )
    # factor the constant part once: t . a0 = e with e in reduced form
    aug = tuple(
        row + tuple(_ONE if i == j else _ZERO for j in range(nrows))
        for i, row in enumerate(a0)
    )
    red, pivots = linalg.rref(aug)
    pivots = tuple(p for p in pivots if p < ncols)
    if len(pivots) < ncols:
        raise SingularConstantPart(
            "constant coefficient matrix does not have full column rank"
        )
    transform = tuple(row[ncols:] for row in red)

    # nonconstant matrix terms, bucketed by column
    column_terms: list[list[tuple[int, Exponent, Fraction]]] = [
        [] for _ in range(ncols)
    ]
    for i, row in enumerate(a):
        for j, entry in enumerate(row):
            for k, v in entry._t.items():
                if k == zero_exp:
                    continue
                if data.degree_of(k) <= 0:
                    raise UnboundedRegion(
                        "matrix entry carries a nonzero exponent of "
                        "nonpositive degree; degree-by-degree solving "
                        "cannot terminate"
                    )
                column_terms[j].append((i, k, v))

    residual: dict[Exponent, list[Fraction]] = {}
    heap: list[tuple[Fraction, Exponent]] = []
    queued: set[Exponent] = set()

    def touch(k: Exponent) -> list[Fraction]:
        got = residual.get(k)
        if got is None:
            got = [_ZERO] * nrows
            residual[k] = got
            heapq.heappush(heap, (data.degree_of(k), k))
            queued.add(k)
        return got

    for i, entry in enumerate(rhs):
        for k, v in entry._t.items():
            row = touch(k)
            row[i] = row[i] + v

    solution: list[dict[Exponent, Fraction]] = [{} for _ in range(ncols)]
    cap = Fraction(order)
    while heap:
        _, k = heapq.heappop(heap)
        b = residual.pop(k)
        queued.discard(k)
        c = [linalg.dot(trow, b) for trow in transform]
        for i in range(len(pivots), nrows):
            if c[i] != 0:
                raise InconsistentAtOrder(data.degree_of(k))
        x = [_ZERO] * ncols
        for row_idx, col in enumerate(pivots):
            x[col] = c[row_idx]
        for j in range(ncols):
            if x[j] == 0:
                continue
            solution[j][k] = x[j]
            for i, e, v in column_terms[j]:
                nk = tuple(p + q for p, q in zip(k, e))
                if data.degree_of(nk) > cap:
                    continue
                row = touch(nk)
                row[i] = row[i] - v * x[j]
    return [_make(data, order, dict(s)) for s in solution]
