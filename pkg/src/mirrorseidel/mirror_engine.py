"""First-order expansion data of the toric hypergeometric series.

The engine never materialises the full cohomology-valued series: for the
coordinate change and the correction terms only the leading coefficient
of each summand matters.  For a class ``d`` the product factor over the
divisors contributes, to leading order, a constant ``C_d`` times the
product of the divisors pairing negatively with ``d``, at an inverse-z
order read off from the pairings.  Summing the order-one contributions
yields the coordinate change; restricting to classes negative against a
fixed divisor yields its correction term.

A second, independent route to the correction term goes through the
associated bundle: the fibre-degree component of the bundle's coordinate
change is the correction term of the base, and the base components must
coincide with the base's own coordinate change.  Both facts are asserted,
which turns the bundle route into a cross-check of the whole pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BundleMirrorMismatch, UnexpectedScalarTerm
from .series_ring import MirrorMap, NovikovSeries
from .toric_lattice import (
    Constraint,
    CurveClass,
    ToricData,
    build_associated_bundle,
    enumerate_classes,
)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class AsymptoticTerm:
    """Leading expansion data of one product factor.

    ``order`` is the power of ``1/z`` carried by the leading term:
    the sum of all divisor pairings plus the number of negative ones.
    ``constant`` is the exact rational coefficient, and
    ``negative_indices`` the rays pairing negatively with the class.
    """

    curve_class: CurveClass
    order: int
    constant: Fraction
    negative_indices: frozenset[int]


def leading_asymptotics(data: ToricData, d: CurveClass) -> AsymptoticTerm:
    """Order, constant and negative index set for the class ``d``."""
    pairings = data.pairing_vector(d)
    negative = frozenset(i for i, p in enumerate(pairings) if p < 0)
    order = sum(pairings) + len(negative)
    constant = Fraction(1)
    for i, p in enumerate(pairings):
        if p < 0:
            constant *= Fraction(-1) ** (-p - 1) * math.factorial(-p - 1)
        else:
            constant /= math.factorial(p)
    return AsymptoticTerm(d, order, constant, negative)


def _single_negative_classes(data: ToricData, j: int, order: int) -> list[CurveClass]:
    """Classes of anticanonical degree zero whose only negative pairing is
    against ``D_{j+1}``, up to the given ample degree."""
    m = data.ray_count
    cons = [Constraint.anticanonical("=", 0, m), Constraint.divisor(j, "<", 0, m)]
    cons += [Constraint.divisor(i, ">=", 0, m) for i in range(m) if i != j]
    return enumerate_classes(data, cons, order)


def _scalar_term_classes(data: ToricData, order: int) -> list[CurveClass]:
    """Classes that would contribute a degree-zero cohomology term at the
    first inverse power: anticanonical degree one, no negative pairings."""
    m = data.ray_count
    cons = [Constraint.anticanonical("=", 1, m)]
    cons += [Constraint.divisor(i, ">=", 0, m) for i in range(m)]
    return enumerate_classes(data, cons, order)


def mirror_map(data: ToricData, order: int) -> MirrorMap:
    """The forward coordinate change ``log q_i = log y_i + g_i(y)``.

    Only classes of anticanonical degree zero with exactly one negative
    divisor pairing contribute; each adds its leading constant times the
    negatively-paired divisor.  The absence of a scalar contribution is
    checked, not assumed.
    """
    cached = data._cache.get(("mirror_map", order))
    if cached is not None:
        return cached

    scalars = _scalar_term_classes(data, order)
    if scalars:
        raise UnexpectedScalarTerm(
            "a degree-one class with no negative pairings contributes a "
            f"scalar term: pairings {data.pairing_vector(scalars[0])}"
        )

    r = data.rank
    components = [dict() for _ in range(r)]
    for j in range(data.ray_count):
        d_j = data.divisor_p_coords(j)
        for d in _single_negative_classes(data, j, order):
            asym = leading_asymptotics(data, d)
            assert asym.negative_indices == {j} and asym.order == 1
            for k in range(r):
                if d_j[k] == 0:
                    continue
                comp = components[k]
                s = comp.get(d.coords, _ZERO) + asym.constant * d_j[k]
                if s == 0:
                    comp.pop(d.coords, None)
                else:
                    comp[d.coords] = s
    result = MirrorMap(
        tuple(NovikovSeries(data, order, comp) for comp in components), "forward"
    )
    data._cache[("mirror_map", order)] = result
    return result


def inverse_mirror_map(data: ToricData, order: int) -> MirrorMap:
    """The inverse coordinate change, memoised alongside the forward one."""
    cached = data._cache.get(("inverse_mirror_map", order))
    if cached is None:
        from .series_ring import invert_coordinate_change

        cached = invert_coordinate_change(mirror_map(data, order))
        data._cache[("inverse_mirror_map", order)] = cached
    return cached


def correction_term_g0(data: ToricData, j: int, order: int) -> NovikovSeries:
    """The correction series attached to the ray ``j`` (0-based).

    Sums ``(-1)^p (-p-1)! / prod_(i != j) p_i!`` over the classes of
    anticanonical degree zero with ``p = <D_(j+1), d> < 0`` and all other
    pairings nonnegative.
    """
    cached = data._cache.get(("g0", j, order))
    if cached is not None:
        return cached
    terms = {}
    for d in _single_negative_classes(data, j, order):
        pairings = data.pairing_vector(d)
        p = pairings[j]
        coeff = Fraction((-1) ** p * math.factorial(-p - 1))
        for i, q in enumerate(pairings):
            if i != j:
                coeff /= math.factorial(q)
        terms[d.coords] = coeff
    result = NovikovSeries(data, order, terms)
    data._cache[("g0", j, order)] = result
    return result


def correction_via_bundle(data: ToricData, j: int, order: int) -> NovikovSeries:
    """The correction series recomputed through the associated bundle.

    The bundle's coordinate change is computed from scratch on the
    ``(n+1)``-dimensional fan; its fibre-degree component must not depend
    on the section variable and its base components must equal the base
    coordinate change.  Violations raise
    :class:`~.errors.BundleMirrorMismatch`.
    """
    bundle = build_associated_bundle(data, j)
    lifted = mirror_map(bundle, order)

    def to_base(series: NovikovSeries) -> NovikovSeries:
        terms = {}
        for k, v in series._t.items():
            pairings = bundle.pairings_of(k)
            if bundle.gamma_of(k)[0] != 0:
                raise BundleMirrorMismatch(
                    "bundle coordinate change depends on the section variable"
                )
            base_class = data.class_from_pairings(pairings[: data.ray_count])
            terms[base_class.coords] = v
        return NovikovSeries(data, order, terms)

    correction = to_base(lifted.components[0])
    base_map = mirror_map(data, order)
    for i in range(data.rank):
        if to_base(lifted.components[i + 1]) != base_map.components[i]:
            raise BundleMirrorMismatch(
                f"bundle coordinate change disagrees with the base in "
                f"component {i + 1}"
            )
    return correction
