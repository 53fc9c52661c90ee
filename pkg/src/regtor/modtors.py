"""Exact determinants over R and the secondary class of a torsion module.

A finite torsion module T enters through a square presentation
0 -> R^m --M--> R^m -> T -> 0 with injective M (norm of det nonzero).  The
class depends on M only through its determinant: it is the flat insertion of
-(1/2) sum over Sigma* of ln|sigma(det M)| b_1(sigma).

Determinants are computed by fraction-free style Bareiss elimination carried
out in Q[x] representatives of the quotient ring, with exact rational
arithmetic throughout; no floating point enters before the final embedding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .errors import NotAUnit, SingularPresentation, ValidationError
from .flatmodel import (
    FormElement,
    PointClass,
    RegulatorLattice,
    _project_mean_zero,
    a_map,
)
from .numfield import FieldElement, NumberField, embed, norm, verify_unit

GUARD = 10


def _pnorm(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y != 0:
                out[i + j] += x * y
    return _pnorm(out)


def _psub(a: list, b: list) -> list:
    out = list(a) + [Fraction(0)] * (len(b) - len(a))
    for j, y in enumerate(b):
        out[j] -= y
    return _pnorm(out)


def _pdiv_exact(a: list, b: list) -> list:
    """Quotient of polynomials over Q known to divide exactly."""
    if not a:
        return []
    rem = list(a)
    quo = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for k in range(len(rem) - 1, len(b) - 2, -1):
        c = rem[k] / lead
        quo[k - len(b) + 1] = c
        if c != 0:
            for i in range(len(b)):
                rem[k - len(b) + 1 + i] -= c * b[i]
    assert all(r == 0 for r in rem[: len(b) - 1])
    return _pnorm(quo)


def exact_det(field: NumberField, rows) -> FieldElement:
    """Exact determinant of a square matrix of ring elements.

    Entries are lifted to their degree < n representatives in Q[x], where the
    fraction-free Bareiss recurrence applies (Q[x] is an integral domain, so
    pivots are never zero divisors even when p factors); the determinant
    polynomial is reduced modulo p only at the end.
    """
    m = len(rows)
    if any(len(r) != m for r in rows):
        raise ValidationError("matrix must be square")
    if m == 0:
        return field.one()
    a = [
        [
            _pnorm(list((x if isinstance(x, FieldElement) else field.element(x)).coeffs))
            for x in r
        ]
        for r in rows
    ]
    sign = 1
    prev = [Fraction(1)]
    for k in range(m - 1):
        piv = -1
        for i in range(k, m):
            if a[i][k]:
                piv = i
                break
        if piv < 0:
            return field.zero()
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                num = _psub(_pmul(a[i][j], a[k][k]), _pmul(a[i][k], a[k][j]))
                a[i][j] = _pdiv_exact(num, prev)
            a[i][k] = []
        prev = a[k][k]
    det_poly = a[m - 1][m - 1]
    if sign < 0:
        det_poly = [-c for c in det_poly]
    return field.element(det_poly)


@dataclass(frozen=True)
class TorsionPresentation:
    """Square presentation matrix of a finite torsion module over R."""

    field: NumberField
    size: int
    entries: tuple
    det_elem: FieldElement


def presentation(field: NumberField, rows) -> TorsionPresentation:
    """Validate a square matrix of ring elements as a torsion presentation."""
    m = len(rows)
    ents = tuple(
        tuple(x if isinstance(x, FieldElement) else field.element(x) for x in r)
        for r in rows
    )
    if any(len(r) != m for r in ents):
        raise ValidationError("presentation matrix must be square")
    det = exact_det(field, ents)
    if norm(field, det) == 0:
        raise SingularPresentation("presentation map is not injective")
    return TorsionPresentation(field=field, size=m, entries=ents, det_elem=det)


def zhat(field: NumberField, lattice: RegulatorLattice, pres: TorsionPresentation) -> PointClass:
    """Secondary class of the torsion module presented by pres.

    The torus part is -(1/2) sum over Sigma* of ln|sigma(det)| b_1(sigma);
    rank and class-group components vanish.
    """
    with mp.workdps(field.digits + GUARD):
        vals = [
            -mp.log(abs(embed(field, pres.det_elem, k))) / 2
            for k in range(field.n_places)
        ]
        f = FormElement(0, _project_mean_zero(vals), field.digits)
    return a_map(lattice, f)


def zhat_wellposed(
    field: NumberField,
    lattice: RegulatorLattice,
    pres: TorsionPresentation,
    left_unit_diag,
    right_unit_diag,
) -> bool:
    """Check invariance of zhat under unit rescalings of the resolution.

    left_unit_diag and right_unit_diag are sequences of units of length
    pres.size; the modified presentation is diag(left) * M * diag(right).
    """
    left = [x if isinstance(x, FieldElement) else field.element(x) for x in left_unit_diag]
    right = [x if isinstance(x, FieldElement) else field.element(x) for x in right_unit_diag]
    if len(left) != pres.size or len(right) != pres.size:
        raise ValidationError("diagonal factors must match the presentation size")
    for u in list(left) + list(right):
        if not verify_unit(field, u):
            raise NotAUnit(f"diagonal entry is not a unit: {u}")
    rows = [
        [field.mul(left[i], field.mul(pres.entries[i][j], right[j])) for j in range(pres.size)]
        for i in range(pres.size)
    ]
    modified = presentation(field, rows)
    return zhat(field, lattice, modified).same_as(zhat(field, lattice, pres))
