"""Fans of smooth projective toric varieties and their curve lattices.

A variety enters as a :class:`FanInput`: primitive ray generators, maximal
cones, and optionally a curve basis (rows of ray relations, equivalently
pairings of basis curve classes with the toric divisors) and a
polarisation vector.  :func:`validate_fan` checks smoothness,
completeness and the nef hypotheses exactly and produces an immutable
:class:`ToricData` carrying the divisor matrix, the wall curve classes
generating the effective cone, the fan-polytope vertex flags, and exact
conversion data between the internal integral curve coordinates and the
user-facing basis.

Conventions: ray and cone indices are 0-based in code (the file format is
1-based); a curve class is an integer coordinate vector with respect to a
basis of the relation lattice of the rays; its pairing vector against the
divisors is the corresponding integer relation itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg, polyhedra
from .errors import (
    BadCurveBasis,
    Incomplete,
    NonSmooth,
    NotAmple,
    NotNef,
    UnboundedRegion,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class CurveClass:
    """An integral curve class in the canonical coordinates of a fan."""

    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(x) for x in self.coords))

    def __add__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "CurveClass":
        return CurveClass(tuple(-a for a in self.coords))

    def scaled(self, k: int) -> "CurveClass":
        return CurveClass(tuple(k * a for a in self.coords))

    @property
    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)


@dataclass(frozen=True)
class FanInput:
    """Raw fan data as supplied by the user or the catalog.

    ``curve_basis`` rows are pairing vectors: row ``a`` lists the pairings
    of the basis class with the divisors ``D_1..D_m``; the same matrix,
    read by columns, expresses each divisor in the dual basis.  ``ample``
    is a vector in that dual basis.
    """

    dimension: int
    rays: tuple[tuple[int, ...], ...]
    max_cones: tuple[tuple[int, ...], ...]
    curve_basis: Optional[tuple[tuple[Fraction, ...], ...]] = None
    ample: Optional[tuple[Fraction, ...]] = None
    name: str = ""

    def __post_init__(self):
        n = int(self.dimension)
        if n < 1:
            raise ValueError("dimension must be at least 1")
        rays = tuple(tuple(int(x) for x in ray) for ray in self.rays)
        if not rays:
            raise ValueError("no rays given")
        for idx, ray in enumerate(rays):
            if len(ray) != n:
                raise ValueError(f"ray {idx + 1} does not have {n} coordinates")
            if all(x == 0 for x in ray):
                raise ValueError(f"ray {idx + 1} is zero")
            if math.gcd(*ray) != 1:
                raise ValueError(f"ray {idx + 1} is not primitive")
        if len(set(rays)) != len(rays):
            raise ValueError("rays are not pairwise distinct")
        cones = tuple(tuple(sorted(int(i) for i in cone)) for cone in self.max_cones)
        if not cones:
            raise ValueError("no maximal cones given")
        for cone in cones:
            if len(cone) != n or len(set(cone)) != n:
                raise ValueError(f"maximal cone {cone} must have {n} distinct rays")
            if any(i < 0 or i >= len(rays) for i in cone):
                raise ValueError(f"maximal cone {cone} references a missing ray")
        if len(set(cones)) != len(cones):
            raise ValueError("maximal cones are not pairwise distinct")
        basis = self.curve_basis
        if basis is not None:
            basis = tuple(
                tuple(linalg.to_fraction(x) for x in row) for row in basis
            )
            for row in basis:
                if len(row) != len(rays):
                    raise ValueError("curve basis rows must have one entry per ray")
        ample = self.ample
        if ample is not None:
            ample = tuple(linalg.to_fraction(x) for x in ample)
        object.__setattr__(self, "dimension", n)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "max_cones", tuple(sorted(cones)))
        object.__setattr__(self, "curve_basis", basis)
        object.__setattr__(self, "ample", ample)


@dataclass(frozen=True, eq=False)
class ToricData:
    """A validated fan together with its curve-lattice bookkeeping.

    Instances are immutable and safe to share between threads; the private
    cache only memoises pure derived values.  Series built over different
    instances are never mixed, even if the instances describe the same
    fan.
    """

    fan_input: FanInput
    rank: int
    canonical_basis: tuple[tuple[int, ...], ...]
    divisor_matrix: tuple[tuple[Fraction, ...], ...]
    c1: tuple[Fraction, ...]
    wall_classes: tuple[CurveClass, ...]
    ample_class: tuple[Fraction, ...]
    vertex_flags: tuple[bool, ...]
    gamma_of_canonical: tuple[tuple[Fraction, ...], ...]
    canonical_of_gamma: tuple[tuple[Fraction, ...], ...]
    _cache: dict = field(default_factory=dict, repr=False)

    # -- basic shape ----------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.fan_input.dimension

    @property
    def ray_count(self) -> int:
        return len(self.fan_input.rays)

    @property
    def rays(self) -> tuple[tuple[int, ...], ...]:
        return self.fan_input.rays

    @property
    def name(self) -> str:
        return self.fan_input.name

    def zero_class(self) -> CurveClass:
        return CurveClass((0,) * self.rank)

    # -- pairings and coordinates ---------------------------------------
    #
    # The tuple-level accessors are the memoised workhorses; the series
    # layer keys its term dictionaries by raw coordinate tuples and calls
    # these directly.

    def pairings_of(self, coords: tuple[int, ...]) -> tuple[int, ...]:
        memo = self._cache.setdefault("pairing", {})
        got = memo.get(coords)
        if got is None:
            got = tuple(
                sum(v * self.canonical_basis[i][j] for i, v in enumerate(coords))
                for j in range(self.ray_count)
            )
            memo[coords] = got
        return got

    def gamma_of(self, coords: tuple[int, ...]) -> tuple[Fraction, ...]:
        memo = self._cache.setdefault("gamma", {})
        got = memo.get(coords)
        if got is None:
            got = linalg.vec_mat(
                tuple(Fraction(v) for v in coords), self.gamma_of_canonical
            )
            memo[coords] = got
        return got

    def degree_of(self, coords: tuple[int, ...]) -> Fraction:
        memo = self._cache.setdefault("degree", {})
        got = memo.get(coords)
        if got is None:
            got = linalg.dot(self.ample_class, self.gamma_of(coords))
            memo[coords] = got
        return got

    def pairing_vector(self, d: CurveClass) -> tuple[int, ...]:
        """Pairings of ``d`` with the toric divisors ``D_1..D_m``."""
        return self.pairings_of(d.coords)

    def gamma_coords(self, d: CurveClass) -> tuple[Fraction, ...]:
        """Coordinates of ``d`` in the user-facing curve basis."""
        return self.gamma_of(d.coords)

    def eta_degree(self, d: CurveClass) -> Fraction:
        return self.degree_of(d.coords)

    def c1_degree(self, d: CurveClass) -> int:
        return sum(self.pairing_vector(d))

    def divisor_pairing(self, p_coords: Sequence, d: CurveClass) -> Fraction:
        """Pairing of the divisor class ``sum_a p_coords[a] p_a`` with ``d``."""
        return linalg.dot(
            tuple(linalg.to_fraction(x) for x in p_coords), self.gamma_coords(d)
        )

    def divisor_p_coords(self, j: int) -> tuple[Fraction, ...]:
        """The class of ``D_{j+1}`` in the dual nef basis (column ``j``)."""
        return tuple(row[j] for row in self.divisor_matrix)

    def class_from_pairings(self, pairings: Sequence[int]) -> CurveClass:
        """The curve class with the given divisor pairings."""
        if len(pairings) != self.ray_count:
            raise ValueError("pairing vector has the wrong length")
        kt = linalg.transpose(
            tuple(tuple(Fraction(x) for x in row) for row in self.canonical_basis)
        )
        sol = linalg.solve(kt, [Fraction(int(x)) for x in pairings])
        if sol is None:
            raise ValueError("pairings do not define a curve class of this fan")
        coords = []
        for x in sol:
            if x.denominator != 1:
                raise ValueError("pairings define a non-integral class")
            coords.append(int(x))
        return CurveClass(tuple(coords))

    def class_from_gamma(self, coords: Sequence) -> CurveClass:
        """The integral class with the given curve-basis coordinates."""
        v = linalg.vec_mat(
            tuple(linalg.to_fraction(x) for x in coords), self.canonical_of_gamma
        )
        out = []
        for x in v:
            if x.denominator != 1:
                raise ValueError("coordinates do not define an integral class")
            out.append(int(x))
        return CurveClass(tuple(out))

    def sort_key(self, d: CurveClass):
        return (self.eta_degree(d), d.coords)


# ---------------------------------------------------------------------------
# constraint vocabulary for enumeration


@dataclass(frozen=True)
class Constraint:
    """A linear condition on the divisor pairings of a curve class.

    ``row`` has one rational entry per ray; the constrained quantity is
    ``sum_j row[j] * <D_{j+1}, d>``.
    """

    row: tuple[Fraction, ...]
    op: str  # one of <=, <, >=, >, =
    rhs: Fraction

    @staticmethod
    def divisor(j: int, op: str, rhs, m: int) -> "Constraint":
        row = tuple(_ONE if i == j else _ZERO for i in range(m))
        return Constraint(row, op, linalg.to_fraction(rhs))

    @staticmethod
    def anticanonical(op: str, rhs, m: int) -> "Constraint":
        return Constraint((_ONE,) * m, op, linalg.to_fraction(rhs))

    def holds(self, value: Fraction) -> bool:
        if self.op == "<=":
            return value <= self.rhs
        if self.op == "<":
            return value < self.rhs
        if self.op == ">=":
            return value >= self.rhs
        if self.op == ">":
            return value > self.rhs
        if self.op == "=":
            return value == self.rhs
        raise ValueError(f"unknown comparison {self.op!r}")


# ---------------------------------------------------------------------------
# validation


def _check_smooth(fan: FanInput) -> None:
    for cone in fan.max_cones:
        det = linalg.int_det([fan.rays[i] for i in cone])
        if det not in (1, -1):
            raise NonSmooth(
                f"maximal cone {tuple(i + 1 for i in cone)} has determinant {det}"
            )


def _walls(fan: FanInput) -> dict[frozenset, list[tuple[int, ...]]]:
    incidence: dict[frozenset, list[tuple[int, ...]]] = {}
    for cone in fan.max_cones:
        for drop in cone:
            facet = frozenset(i for i in cone if i != drop)
            incidence.setdefault(facet, []).append(cone)
    return incidence


def _check_complete(fan: FanInput) -> dict[frozenset, list[tuple[int, ...]]]:
    used = set()
    for cone in fan.max_cones:
        used.update(cone)
    missing = set(range(len(fan.rays))) - used
    if missing:
        raise Incomplete(
            f"ray {min(missing) + 1} does not belong to any maximal cone"
        )
    incidence = _walls(fan)
    for facet, cones in incidence.items():
        if len(cones) != 2:
            raise Incomplete(
                f"wall {tuple(i + 1 for i in sorted(facet))} lies in "
                f"{len(cones)} maximal cones instead of 2"
            )
    # adjacency connectivity
    index = {cone: k for k, cone in enumerate(fan.max_cones)}
    seen = {0}
    stack = [fan.max_cones[0]]
    while stack:
        cone = stack.pop()
        for facet in (frozenset(i for i in cone if i != d) for d in cone):
            for neighbour in incidence[facet]:
                k = index[neighbour]
                if k not in seen:
                    seen.add(k)
                    stack.append(neighbour)
    if len(seen) != len(fan.max_cones):
        raise Incomplete("maximal cones do not form a connected family")
    return incidence


def _wall_relations(
    fan: FanInput, incidence: dict[frozenset, list[tuple[int, ...]]]
) -> list[tuple[int, ...]]:
    """Primitive integral ray relations across the walls, as pairing rows."""
    n = fan.dimension
    m = len(fan.rays)
    relations = set()
    for facet, (sigma, sigma_prime) in sorted(
        incidence.items(), key=lambda kv: tuple(sorted(kv[0]))
    ):
        support = sorted(set(sigma) | set(sigma_prime))
        mat = tuple(
            tuple(Fraction(fan.rays[i][k]) for i in support) for k in range(n)
        )
        kernel = linalg.nullspace(mat)
        if len(kernel) != 1:
            raise Incomplete(
                f"rays around wall {tuple(i + 1 for i in sorted(facet))} admit "
                "more than one relation"
            )
        rel = kernel[0]
        opposite = [i for i in support if i not in facet]
        pos = support.index(opposite[0])
        if rel[pos] < 0:
            rel = tuple(-x for x in rel)
        if any(rel[support.index(i)] <= 0 for i in opposite):
            raise Incomplete(
                "maximal cones on both sides of wall "
                f"{tuple(i + 1 for i in sorted(facet))} overlap"
            )
        scale = math.lcm(*(x.denominator for x in rel))
        ints = [int(x * scale) for x in rel]
        g = math.gcd(*ints)
        ints = [x // g for x in ints]
        full = [0] * m
        for pos, i in enumerate(support):
            full[i] = ints[pos]
        relations.add(tuple(full))
    return sorted(relations)


def _extremal(classes: list[CurveClass], rank: int) -> list[CurveClass]:
    """Drop generators that are nonnegative combinations of the others.

    The membership tests run in the free dimension left after the cone
    equalities, so they are skipped (conservatively keeping redundant
    generators, which is harmless) when that dimension gets large.
    """
    if len(classes) - rank > 4:
        return classes
    kept = list(classes)
    changed = True
    while changed:
        changed = False
        for w in list(kept):
            others = [c.coords for c in kept if c is not w]
            if others and polyhedra.in_cone(w.coords, others):
                kept.remove(w)
                changed = True
    return kept


def validate_fan(fan_input: FanInput) -> ToricData:
    """Check all fan hypotheses exactly and assemble a :class:`ToricData`.

    Raises :class:`NonSmooth`, :class:`Incomplete`, :class:`NotNef`,
    :class:`NotAmple` or :class:`BadCurveBasis` when the input fails the
    corresponding hypothesis.
    """
    fan = fan_input
    n = fan.dimension
    m = len(fan.rays)

    _check_smooth(fan)
    incidence = _check_complete(fan)

    # relation lattice of the rays
    ray_columns = tuple(
        tuple(fan.rays[j][k] for j in range(m)) for k in range(n)
    )
    kernel = linalg.integer_kernel(ray_columns, m)
    r = len(kernel)
    if r != m - n:
        raise Incomplete("rays do not span the ambient lattice")
    canonical = tuple(kernel)

    # wall curve classes in canonical coordinates
    relation_rows = _wall_relations(fan, incidence)
    kt = linalg.transpose(
        tuple(tuple(Fraction(x) for x in row) for row in canonical)
    )
    wall_classes = []
    for row in relation_rows:
        sol = linalg.solve(kt, [Fraction(x) for x in row])
        assert sol is not None and all(x.denominator == 1 for x in sol)
        wall_classes.append(CurveClass(tuple(int(x) for x in sol)))
    wall_classes = sorted(set(wall_classes), key=lambda d: d.coords)
    wall_classes = _extremal(wall_classes, r)
    wall_classes.sort(key=lambda d: d.coords)

    # curve basis / divisor matrix
    if fan.curve_basis is not None:
        basis = fan.curve_basis
        if len(basis) != r:
            raise BadCurveBasis(
                f"curve basis has {len(basis)} rows, expected rank {r}"
            )
        for a, row in enumerate(basis):
            residual = [
                sum(row[j] * fan.rays[j][k] for j in range(m)) for k in range(n)
            ]
            if any(x != 0 for x in residual):
                raise BadCurveBasis(
                    f"curve basis row {a + 1} is not a relation among the rays"
                )
        if linalg.rank(basis) != r:
            raise BadCurveBasis("curve basis rows are linearly dependent")
    else:
        basis = _default_curve_basis(canonical, wall_classes, r, m)
    divisor_matrix = tuple(tuple(row) for row in basis)

    # conversion matrices between canonical and curve-basis coordinates
    gt = linalg.transpose(divisor_matrix)
    gamma_rows = []
    for krow in canonical:
        sol = linalg.solve(gt, [Fraction(x) for x in krow])
        if sol is None:
            raise BadCurveBasis("curve basis does not span the relation lattice")
        gamma_rows.append(sol)
    gamma_of_canonical = tuple(gamma_rows)
    canonical_of_gamma = linalg.invert(gamma_of_canonical)

    c1 = tuple(sum(row) for row in divisor_matrix)

    def gamma_of(d: CurveClass) -> tuple[Fraction, ...]:
        return linalg.vec_mat(
            tuple(Fraction(x) for x in d.coords), gamma_of_canonical
        )

    def pairings_of(d: CurveClass) -> tuple[int, ...]:
        return tuple(
            sum(v * canonical[i][jj] for i, v in enumerate(d.coords))
            for jj in range(m)
        )

    # nef hypotheses: every basis class pairs nonnegatively with every wall,
    # and so does the anticanonical class
    for w in wall_classes:
        coords = gamma_of(w)
        for a, x in enumerate(coords):
            if x < 0:
                raise NotNef(
                    f"basis class p_{a + 1} pairs negatively with the wall "
                    f"class of pairings {pairings_of(w)}"
                )
        if sum(pairings_of(w)) < 0:
            raise NotNef(
                "anticanonical class pairs negatively with the wall class "
                f"of pairings {pairings_of(w)}"
            )

    # fan polytope geometry
    if not polyhedra.positively_spans(fan.rays, n):
        raise NotNef("origin is not interior to the fan polytope")
    flags = []
    for i in range(m):
        others = [fan.rays[j] for j in range(m) if j != i]
        if not polyhedra.on_hull_boundary(fan.rays[i], fan.rays):
            raise NotNef(f"ray {i + 1} lies interior to the fan polytope")
        flags.append(polyhedra.separates_from_hull(fan.rays[i], others))

    # polarisation
    if fan.ample is not None:
        if len(fan.ample) != r:
            raise NotAmple(f"ample vector has {len(fan.ample)} entries, expected {r}")
        ample = fan.ample
        for w in wall_classes:
            if linalg.dot(ample, gamma_of(w)) <= 0:
                raise NotAmple(
                    "supplied class is not positive on the wall class of "
                    f"pairings {pairings_of(w)}"
                )
    else:
        ample = _default_ample(gamma_of, wall_classes, r)

    # exactness spot check of the fan sequence on the wall classes
    for w in wall_classes:
        pv = pairings_of(w)
        for k in range(n):
            assert sum(pv[j] * fan.rays[j][k] for j in range(m)) == 0

    return ToricData(
        fan_input=fan,
        rank=r,
        canonical_basis=canonical,
        divisor_matrix=divisor_matrix,
        c1=c1,
        wall_classes=tuple(wall_classes),
        ample_class=tuple(ample),
        vertex_flags=tuple(flags),
        gamma_of_canonical=gamma_of_canonical,
        canonical_of_gamma=canonical_of_gamma,
    )


def _default_curve_basis(canonical, wall_classes, r, m):
    """Pick a curve basis when none is supplied.

    The extremal wall classes are used whenever they happen to form a
    lattice basis (then the dual basis is nef by construction); otherwise
    the canonical kernel basis is kept with signs flipped towards the
    effective cone, and validation decides whether the result is nef.
    """
    if len(wall_classes) == r:
        mat = [w.coords for w in wall_classes]
        if abs(linalg.int_det(mat)) == 1:
            return tuple(
                tuple(
                    Fraction(
                        sum(w.coords[i] * canonical[i][j] for i in range(r))
                    )
                    for j in range(m)
                )
                for w in wall_classes
            )
    rows = []
    for a in range(r):
        vals = [w.coords[a] for w in wall_classes]
        sign = -1 if (vals and all(v <= 0 for v in vals) and any(v < 0 for v in vals)) else 1
        rows.append(tuple(Fraction(sign * x) for x in canonical[a]))
    return tuple(rows)


def _default_ample(gamma_of, wall_classes, r):
    """An interior polarisation found by exact linear feasibility.

    Solves ``<eta, w> >= 1`` for every wall class together with
    ``eta_a >= 1``; the latter keeps the ample degree positive on the
    whole support monoid of series exponents, which the truncation
    bookkeeping relies on.
    """
    rows = []
    for w in wall_classes:
        coords = gamma_of(w)
        rows.append(polyhedra.make_row([-x for x in coords], -1))
    for a in range(r):
        unit = [_ZERO] * r
        unit[a] = Fraction(-1)
        rows.append(polyhedra.make_row(unit, -1))
    point = polyhedra.witness(rows, r)
    if point is None:
        raise NotAmple("no rational polarisation is positive on all walls")
    return point


# ---------------------------------------------------------------------------
# public operations beyond validation


def wall_curve_classes(data: ToricData) -> list[CurveClass]:
    """Generators of the cone of effective curve classes."""
    return list(data.wall_classes)


def fan_polytope_vertices(data: ToricData) -> frozenset[int]:
    """Indices (0-based) of rays that are vertices of the fan polytope."""
    return frozenset(i for i, flag in enumerate(data.vertex_flags) if flag)


def build_associated_bundle(data: ToricData, j: int) -> ToricData:
    """The toric total space of the bundle attached to the rotation about
    the divisor ``D_{j+1}``.

    Rays are the base rays at height zero plus the two fibre rays; each
    maximal cone of the base contributes one cone over each fibre ray.
    The curve basis is the section class followed by the lifted base
    classes, and the polarisation gains a fibre component of 1.
    """
    fan = data.fan_input
    n, m, r = fan.dimension, data.ray_count, data.rank
    if not 0 <= j < m:
        raise ValueError(f"ray index {j} out of range")
    rays = [ray + (0,) for ray in fan.rays]
    rays.append((0,) * n + (1,))
    rays.append(fan.rays[j] + (-1,))
    cones = []
    for cone in fan.max_cones:
        cones.append(cone + (m,))
        cones.append(cone + (m + 1,))

    section_row = [_ZERO] * (m + 2)
    section_row[j] = Fraction(-1)
    section_row[m] = _ONE
    section_row[m + 1] = _ONE
    basis = [tuple(section_row)]
    for row in data.divisor_matrix:
        basis.append(tuple(row) + (_ZERO, _ZERO))

    ample = (_ONE,) + tuple(data.ample_class)
    name = f"{fan.name}|bundle{j + 1}" if fan.name else f"bundle{j + 1}"
    lifted = FanInput(
        dimension=n + 1,
        rays=tuple(rays),
        max_cones=tuple(cones),
        curve_basis=tuple(basis),
        ample=ample,
        name=name,
    )
    bundle = validate_fan(lifted)
    assert bundle.rank == r + 1
    return bundle


def enumerate_classes(
    data: ToricData,
    constraints: Sequence[Constraint],
    max_degree,
) -> list[CurveClass]:
    """Integral classes satisfying the constraints with ample degree in
    ``(0, max_degree]``.

    The search region is the exact bounding box of the wall-class cone
    sliced at the degree bound; equality constraints are removed first by
    an integral change of coordinates, and the remaining inequalities
    prune the walk through the box.  Every emitted class is re-checked
    against the original constraints.
    """
    max_degree = linalg.to_fraction(max_degree)
    r = data.rank
    for w in data.wall_classes:
        if data.eta_degree(w) <= 0:
            raise UnboundedRegion(
                "polarisation is not positive on the wall class of pairings "
                f"{data.pairing_vector(w)}"
            )

    cache_key = (
        "enumerate",
        tuple((c.row, c.op, c.rhs) for c in constraints),
        max_degree,
    )
    got = data._cache.get(cache_key)
    if got is not None:
        return list(got)

    # bounding box of the sliced wall cone, in canonical coordinates
    vertices = [(_ZERO,) * r]
    for w in data.wall_classes:
        scale = max_degree / data.eta_degree(w)
        vertices.append(tuple(scale * x for x in w.coords))
    box_lo = [min(v[i] for v in vertices) for i in range(r)]
    box_hi = [max(v[i] for v in vertices) for i in range(r)]

    # constraint rows over canonical coordinates
    def canonical_row(pairing_row):
        return tuple(
            sum(
                Fraction(data.canonical_basis[i][jj]) * pairing_row[jj]
                for jj in range(data.ray_count)
            )
            for i in range(r)
        )

    degree_row = tuple(
        linalg.dot(data.gamma_of_canonical[i], data.ample_class) for i in range(r)
    )

    eq_rows: list[tuple[tuple[int, ...], int]] = []
    ineq: list[polyhedra.Row] = []
    for c in constraints:
        coeffs = canonical_row(c.row)
        if c.op == "=":
            ints, rhs = _integralise(coeffs, c.rhs)
            eq_rows.append((ints, rhs))
        elif c.op == "<=":
            ineq.append((coeffs, c.rhs, False))
        elif c.op == "<":
            ineq.append((coeffs, c.rhs, True))
        elif c.op == ">=":
            ineq.append((tuple(-x for x in coeffs), -c.rhs, False))
        elif c.op == ">":
            ineq.append((tuple(-x for x in coeffs), -c.rhs, True))
        else:
            raise ValueError(f"unknown comparison {c.op!r}")

    for i in range(r):
        unit_pos = tuple(_ONE if k == i else _ZERO for k in range(r))
        unit_neg = tuple(-_ONE if k == i else _ZERO for k in range(r))
        ineq.append((unit_pos, box_hi[i], False))
        ineq.append((unit_neg, -box_lo[i], False))
    ineq.append((degree_row, max_degree, False))
    ineq.append((tuple(-x for x in degree_row), _ZERO, True))

    if eq_rows:
        solved = linalg.integer_solve(
            [row for row, _ in eq_rows], [rhs for _, rhs in eq_rows], r
        )
        if solved is None:
            data._cache[cache_key] = ()
            return []
        origin, lattice = solved
        free = len(lattice)
        reduced = []
        for coeffs, bound, strict in ineq:
            shift = sum(
                (coeffs[i] * origin[i] for i in range(r)), _ZERO
            )
            row = tuple(
                sum((coeffs[i] * vec[i] for i in range(r)), _ZERO)
                for vec in lattice
            )
            reduced.append((row, bound - shift, strict))
        points = [
            tuple(
                origin[i] + sum(t[k] * lattice[k][i] for k in range(free))
                for i in range(r)
            )
            for t in polyhedra.integer_points(reduced, free)
        ]
    else:
        points = list(polyhedra.integer_points(ineq, r))

    result = []
    for v in points:
        d = CurveClass(v)
        deg = data.eta_degree(d)
        if not (0 < deg <= max_degree):
            continue
        pv = data.pairing_vector(d)
        values = (
            sum((c.row[jj] * pv[jj] for jj in range(data.ray_count)), _ZERO)
            for c in constraints
        )
        if all(c.holds(value) for c, value in zip(constraints, values)):
            result.append(d)
    result.sort(key=data.sort_key)
    data._cache[cache_key] = tuple(result)
    return result


def _integralise(coeffs, rhs):
    """Clear denominators from an equality row."""
    scale = math.lcm(*(x.denominator for x in coeffs), rhs.denominator)
    ints = tuple(int(x * scale) for x in coeffs)
    return ints, int(rhs * scale)
