"""The logarithmic frame and the two families of invertible elements.

The frame consists of the cohomology-valued series representing the
logarithmic vector fields of the mirror coordinates; pushing the divisor
matrix through it gives one family of elements, which satisfies the same
linear relations as the toric divisors.  Multiplying by the exponential
of the negated correction term and rewriting in the flat coordinates
gives the other family, which in general satisfies only the
multiplicative relations.  Both families have the divisor class as
constant term.

Each element is computed twice, by structurally different routes, and the
results are required to agree term by term.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import RouteMismatch
from .mirror_engine import (
    correction_term_g0,
    inverse_mirror_map,
    leading_asymptotics,
    mirror_map,
    _single_negative_classes,
)
from .series_ring import DivisorSeries, NovikovSeries, exp, substitute
from .toric_lattice import CurveClass, ToricData

_ZERO = Fraction(0)


def logarithmic_frame(data: ToricData, order: int) -> list[DivisorSeries]:
    """The frame series: unit vectors corrected by the coordinate-change
    Jacobian, expanded in the mirror coordinates."""
    g = mirror_map(data, order)
    r = data.rank
    frame = []
    for i in range(r):
        comps = []
        for k in range(r):
            c = g.components[k].theta(i)
            if i == k:
                c = c + 1
            comps.append(c)
        frame.append(DivisorSeries(tuple(comps), "y"))
    return frame


def batyrev_elements(data: ToricData, order: int) -> list[DivisorSeries]:
    """Frame-route elements, cross-checked against the closed form.

    Route A contracts the divisor matrix with the frame.  Route B adds to
    each divisor class the sum over single-negative-pairing classes of
    the leading constant times the pairing with the divisor, times the
    negatively-paired divisor class.  A mismatch raises
    :class:`~.errors.RouteMismatch`; route A is returned.
    """
    cached = data._cache.get(("batyrev", order))
    if cached is not None:
        return list(cached)

    r, m = data.rank, data.ray_count
    frame = logarithmic_frame(data, order)

    route_a = []
    for j in range(m):
        col = data.divisor_p_coords(j)
        comps = [NovikovSeries.zero(data, order) for _ in range(r)]
        for i in range(r):
            if col[i] == 0:
                continue
            for k in range(r):
                comps[k] = comps[k] + frame[i].components[k] * col[i]
        route_a.append(DivisorSeries(tuple(comps), "y"))

    # closed form: contributions grouped by the negatively-paired ray
    corrections = [
        [dict() for _ in range(r)] for _ in range(m)
    ]  # corrections[j][k]: terms of the p_k component of element j
    for t in range(m):
        d_t = data.divisor_p_coords(t)
        for d in _single_negative_classes(data, t, order):
            constant = leading_asymptotics(data, d).constant
            pairings = data.pairing_vector(d)
            for j in range(m):
                weight = constant * pairings[j]
                if weight == 0:
                    continue
                for k in range(r):
                    if d_t[k] == 0:
                        continue
                    comp = corrections[j][k]
                    s = comp.get(d.coords, _ZERO) + weight * d_t[k]
                    if s == 0:
                        comp.pop(d.coords, None)
                    else:
                        comp[d.coords] = s
    for j in range(m):
        col = data.divisor_p_coords(j)
        comps = []
        for k in range(r):
            series = NovikovSeries(data, order, corrections[j][k])
            comps.append(series + col[k])
        route_b = DivisorSeries(tuple(comps), "y")
        if route_b != route_a[j]:
            raise RouteMismatch(
                f"frame route and closed form disagree for divisor {j + 1}"
            )

    data._cache[("batyrev", order)] = tuple(route_a)
    return route_a


def to_flat_coordinates(element: DivisorSeries, data: ToricData, order: int) -> DivisorSeries:
    """Rewrite a mirror-coordinate divisor series in the flat coordinates."""
    if element.coords != "y":
        raise ValueError("element is already in flat coordinates")
    h = inverse_mirror_map(data, order)
    return DivisorSeries(
        tuple(substitute(c, h) for c in element.components), "q"
    )


def seidel_elements(data: ToricData, order: int) -> list[DivisorSeries]:
    """The rotation-element family, in the flat coordinates.

    Each element is the exponential of the negated correction term times
    the corresponding frame-route element, computed in the mirror
    coordinates and then rewritten through the inverse coordinate change.
    """
    cached = data._cache.get(("seidel", order))
    if cached is not None:
        return list(cached)
    tilde_d = batyrev_elements(data, order)
    out = []
    for j in range(data.ray_count):
        g0 = correction_term_g0(data, j, order)
        factor = exp(-g0)
        in_y = tilde_d[j].scaled_by(factor)
        in_q = to_flat_coordinates(in_y, data, order)
        assert in_q.constant_p_coords() == data.divisor_p_coords(j)
        out.append(in_q)
    data._cache[("seidel", order)] = tuple(out)
    return out


# ---------------------------------------------------------------------------
# linear relations


@dataclass(frozen=True)
class RelationEntry:
    """Result of contracting one lattice functional with a family."""

    functional: int
    is_zero: bool
    offender: Optional[CurveClass]
    component: Optional[int]
    coefficient: Optional[Fraction]


@dataclass(frozen=True)
class RelationReport:
    entries: tuple[RelationEntry, ...]

    @property
    def all_zero(self) -> bool:
        return all(e.is_zero for e in self.entries)

    def failing(self) -> list[int]:
        return [e.functional for e in self.entries if not e.is_zero]


def check_linear_relations(
    elements: Sequence[DivisorSeries], data: ToricData
) -> RelationReport:
    """Contract each coordinate functional of the ray lattice with the
    family and report whether the resulting series vanish.

    For each functional the weighted sum of the elements (weights: the
    corresponding ray coordinates) is computed; a nonzero result is
    reported with its smallest offending monomial.  Failure is data, not
    an error.
    """
    if len(elements) != data.ray_count:
        raise ValueError("one element per ray is required")
    n = data.dimension
    r = data.rank
    order = elements[0].order
    entries = []
    for ell in range(n):
        total = [NovikovSeries.zero(data, order) for _ in range(r)]
        for j, element in enumerate(elements):
            weight = data.rays[j][ell]
            if weight == 0:
                continue
            for k in range(r):
                total[k] = total[k] + element.components[k] * weight
        offender = None
        component = None
        coefficient = None
        for k in range(r):
            for key in sorted(
                total[k]._t, key=lambda kk: (data.degree_of(kk), kk)
            ):
                cand = (data.degree_of(key), key)
                if offender is None or cand < (
                    data.degree_of(offender.coords),
                    offender.coords,
                ):
                    offender = CurveClass(key)
                    component = k
                    coefficient = total[k]._t[key]
                break
        entries.append(
            RelationEntry(
                functional=ell,
                is_zero=offender is None,
                offender=offender,
                component=component,
                coefficient=coefficient,
            )
        )
    return RelationReport(tuple(entries))
