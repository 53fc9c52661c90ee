"""Coefficient vectors b_{2j+1}(sigma), the regulator lattice, and point classes.

A FormElement of degree index j holds one real coefficient per place
representative.  For odd j the coefficient at a real place is forced to zero
by b_{2j+1}(conj sigma) = (-1)^j b_{2j+1}(sigma).  Degree-1 elements (j = 0)
live in R^{Sigma*} modulo the all-ones line; the stored representative is
always mean-zero, and the printable coordinates eliminate the first place
through b_1(sigma_0) = -sum of the others.

The regulator lattice is the image of the units under u -> (1/2) ln|sigma(u)|
in quotient coordinates, LLL-reduced; torus elements are Babai-reduced
residues modulo that lattice.  A point class is (rank, class-group exponents,
torus element) with componentwise addition.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpc, mpf

from .errors import NoConvergence, NotAUnit, NotPositiveDefinite, ValidationError
from .numfield import FieldElement, NumberField, embed, parse_rational, verify_unit

GUARD = 10

_LLL_STEP_CAP = 50_000


def to_mp(x):
    """Exact-aware scalar conversion at the current working precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, str) and "/" in x:
        q = parse_rational(x)
        return mpf(q.numerator) / q.denominator
    if isinstance(x, (tuple, list)):
        if len(x) != 2:
            raise ValidationError("complex entries must be [re, im] pairs")
        return mpc(to_mp(x[0]), to_mp(x[1]))
    return mp.mpmathify(x)


def _project_mean_zero(vals):
    m = mp.fsum(vals) / len(vals)
    return tuple(v - m for v in vals)


@dataclass(frozen=True)
class FormElement:
    """Coefficient vector of degree 2j+1 over the place representatives.

    digits records the precision the values were produced at; arithmetic on
    the element re-enters that precision so results do not degrade to the
    ambient default.
    """

    degree_index: int
    values: tuple
    digits: int

    @property
    def degree(self) -> int:
        return 2 * self.degree_index + 1

    def _like(self, vals):
        return FormElement(self.degree_index, tuple(vals), self.digits)

    def add(self, other: "FormElement") -> "FormElement":
        if other.degree_index != self.degree_index:
            raise ValidationError("cannot add coefficient vectors of different degrees")
        with mp.workdps(self.digits + GUARD):
            return self._like(a + b for a, b in zip(self.values, other.values))

    def sub(self, other: "FormElement") -> "FormElement":
        return self.add(other.neg())

    def neg(self) -> "FormElement":
        with mp.workdps(self.digits + GUARD):
            return self._like(-a for a in self.values)

    def scale(self, c) -> "FormElement":
        with mp.workdps(self.digits + GUARD):
            s = to_mp(c)
            return self._like(s * a for a in self.values)

    def norm(self):
        with mp.workdps(self.digits + GUARD):
            return mp.sqrt(mp.fsum(a * a for a in self.values))

    def reduced_b1_coords(self) -> tuple:
        """Coordinates in the basis b_1(sigma_1), ..., b_1(sigma_{N-1}).

        The first representative is eliminated through the relation
        sum over Sigma* of b_1(sigma) = 0, so the printed coefficient of
        b_1(sigma_k) is values[k] - values[0].
        """
        if self.degree_index != 0:
            raise ValidationError("reduced coordinates exist in degree 1 only")
        with mp.workdps(self.digits + GUARD):
            return tuple(v - self.values[0] for v in self.values[1:])

    def to_dict(self, dps: int = 30) -> dict:
        return {
            "degree": self.degree,
            "coeffs": {
                f"sigma_{k}": mp.nstr(v, dps) for k, v in enumerate(self.values)
            },
        }


def make_form(field: NumberField, degree_index: int, values) -> FormElement:
    """Build a coefficient vector, applying the parity and quotient rules."""
    if degree_index < 0:
        raise ValidationError("degree index must be non-negative")
    with mp.workdps(field.digits + GUARD):
        vals = [to_mp(v) for v in values]
        if len(vals) != field.n_places:
            raise ValidationError("expected one coefficient per place representative")
        if degree_index % 2 == 1:
            vals = [mpf(0) if k < field.r_real else v for k, v in enumerate(vals)]
        if degree_index == 0:
            vals = _project_mean_zero(vals)
        return FormElement(degree_index, tuple(vals), field.digits)


def zero_form(field: NumberField, degree_index: int = 0) -> FormElement:
    return FormElement(degree_index, tuple(mpf(0) for _ in range(field.n_places)), field.digits)


def unit_log(field: NumberField, unit: FieldElement) -> FormElement:
    """The degree-1 vector with coefficient (1/2) ln|sigma(u)| at each sigma."""
    if not verify_unit(field, unit):
        raise NotAUnit(f"not a power-basis unit: {unit}")
    with mp.workdps(field.digits + GUARD):
        vals = [
            mp.log(abs(embed(field, unit, k))) / 2 for k in range(field.n_places)
        ]
        return FormElement(0, _project_mean_zero(vals), field.digits)


def _dot(u, v):
    return mp.fsum(a * b for a, b in zip(u, v))


def _vec_norm(v):
    return mp.sqrt(_dot(v, v))


def _gram_schmidt(basis, tiny):
    """Orthogonalization with mu coefficients; near-zero directions give mu = 0."""
    star = []
    mu = [[mpf(0)] * len(basis) for _ in basis]
    for i, b in enumerate(basis):
        v = list(b)
        for j in range(i):
            bj2 = _dot(star[j], star[j])
            mu[i][j] = _dot(b, star[j]) / bj2 if bj2 > tiny * tiny else mpf(0)
            v = [v[t] - mu[i][j] * star[j][t] for t in range(len(v))]
        star.append(v)
    return star, mu


def _lll(basis, drop_tol):
    """LLL reduction (delta = 0.99) that discards collapsed directions.

    Inputs may be linearly dependent; dependent vectors shrink to (near) zero
    through the swap steps and are removed.
    """
    delta = mpf("0.99")
    b = [list(v) for v in basis]
    steps = 0
    while True:
        b = [v for v in b if _vec_norm(v) > drop_tol]
        n = len(b)
        if n <= 1:
            return b
        star, mu = _gram_schmidt(b, drop_tol)
        k = 1
        collapsed = False
        while k < n:
            steps += 1
            if steps > _LLL_STEP_CAP:
                raise NoConvergence("lattice reduction did not terminate")
            for j in range(k - 1, -1, -1):
                q = int(mp.nint(mu[k][j]))
                if q != 0:
                    b[k] = [b[k][t] - q * b[j][t] for t in range(len(b[k]))]
                    star, mu = _gram_schmidt(b, drop_tol)
            if _vec_norm(b[k]) <= drop_tol:
                collapsed = True
                break
            bk = _dot(star[k], star[k])
            bk1 = _dot(star[k - 1], star[k - 1])
            if bk >= (delta - mu[k][k - 1] ** 2) * bk1:
                k += 1
            else:
                b[k], b[k - 1] = b[k - 1], b[k]
                star, mu = _gram_schmidt(b, drop_tol)
                k = max(k - 1, 1)
        if not collapsed:
            return b


def _babai(basis, star, target):
    """Nearest-plane reduction; returns (residual, integer coefficients)."""
    t = list(target)
    coeffs = [0] * len(basis)
    for i in range(len(basis) - 1, -1, -1):
        bi2 = _dot(star[i], star[i])
        if bi2 == 0:
            continue
        c = int(mp.nint(_dot(t, star[i]) / bi2))
        if c != 0:
            t = [t[k] - c * basis[i][k] for k in range(len(t))]
        coeffs[i] = c
    return t, coeffs


@dataclass(frozen=True)
class RegulatorLattice:
    """LLL-reduced lattice of unit-log images in quotient coordinates."""

    field: NumberField
    unit_images: tuple
    basis: tuple
    star: tuple
    tol: object

    @property
    def rank(self) -> int:
        return len(self.basis)

    def basis_form(self, i: int) -> FormElement:
        return FormElement(0, self.basis[i], self.field.digits)


def build_lattice(field: NumberField, units) -> RegulatorLattice:
    """Lattice generated by the unit-log images of the given units.

    Torsion units map to (near) zero and are discarded; generators dependent
    on the ones already kept are detected by nearest-plane reduction.
    """
    images = [unit_log(field, u) for u in units]
    with mp.workdps(field.digits + GUARD):
        drop = mpf(10) ** (-mpf(field.digits) / 2)
        basis: list = []
        star: list = []
        for f in images:
            vec = list(f.values)
            if _vec_norm(vec) <= drop:
                continue
            if basis:
                vec, _ = _babai(basis, star, vec)
                if _vec_norm(vec) <= drop:
                    continue
            basis.append(vec)
            basis = _lll(basis, drop)
            star, _ = _gram_schmidt(basis, drop)
        if len(basis) > field.r_real + field.r_complex - 1:
            raise ValidationError("lattice rank exceeds the unit-group rank")
        tol = mpf(10) ** (-mpf(field.digits) / 3)
        lat = RegulatorLattice(
            field=field,
            unit_images=tuple(images),
            basis=tuple(tuple(v) for v in basis),
            star=tuple(tuple(v) for v in star),
            tol=tol,
        )
        for f in images:
            red, _ = _babai(lat.basis, lat.star, list(f.values))
            if _vec_norm(red) > tol:
                raise NoConvergence("reduced basis fails to absorb a unit image")
        return lat


@dataclass(frozen=True, eq=False)
class TorusElement:
    """Residue of a degree-1 vector modulo the regulator lattice."""

    lattice: RegulatorLattice
    values: tuple

    def norm(self):
        with mp.workdps(self.lattice.field.digits + GUARD):
            return _vec_norm(self.values)

    def is_zero(self) -> bool:
        return self.norm() < self.lattice.tol

    def add(self, other: "TorusElement") -> "TorusElement":
        with mp.workdps(self.lattice.field.digits + GUARD):
            s = [a + b for a, b in zip(self.values, other.values)]
            red, _ = _babai(self.lattice.basis, self.lattice.star, s)
            return TorusElement(self.lattice, tuple(red))

    def neg(self) -> "TorusElement":
        with mp.workdps(self.lattice.field.digits + GUARD):
            s = [-a for a in self.values]
            red, _ = _babai(self.lattice.basis, self.lattice.star, s)
            return TorusElement(self.lattice, tuple(red))

    def same_as(self, other: "TorusElement") -> bool:
        return self.add(other.neg()).is_zero()

    def as_form(self) -> FormElement:
        return FormElement(0, self.values, self.lattice.field.digits)

    def to_dict(self, dps: int = 30) -> dict:
        return {f"sigma_{k}": mp.nstr(v, dps) for k, v in enumerate(self.values)}


def reduce_mod_lattice(lattice: RegulatorLattice, f: FormElement):
    """Babai-reduce a degree-1 vector; returns (torus element, is_zero)."""
    if f.degree_index != 0:
        raise ValidationError("only degree-1 vectors reduce against the lattice")
    with mp.workdps(lattice.field.digits + GUARD):
        red, _ = _babai(lattice.basis, lattice.star, list(f.values))
        t = TorusElement(lattice, tuple(red))
        return t, t.is_zero()


def _reduce_cls(orders, cls) -> tuple:
    vec = list(int(c) for c in cls)
    if len(vec) > len(orders):
        raise ValidationError("class vector longer than the list of orders")
    vec += [0] * (len(orders) - len(vec))
    return tuple(c % m for c, m in zip(vec, orders))


@dataclass(frozen=True, eq=False)
class PointClass:
    """(rank, class-group exponents, torus element), added componentwise."""

    rank: int
    cls: tuple
    torus: TorusElement

    def same_as(self, other: "PointClass") -> bool:
        return (
            self.rank == other.rank
            and self.cls == other.cls
            and self.torus.same_as(other.torus)
        )

    def is_zero(self) -> bool:
        return self.rank == 0 and all(c == 0 for c in self.cls) and self.torus.is_zero()

    def to_dict(self, dps: int = 30) -> dict:
        return {
            "rank": self.rank,
            "cls": list(self.cls),
            "torus": self.torus.to_dict(dps),
        }


def zero_torus(lattice: RegulatorLattice) -> TorusElement:
    return TorusElement(lattice, tuple(mpf(0) for _ in range(lattice.field.n_places)))


def zero_class(lattice: RegulatorLattice) -> PointClass:
    orders = lattice.field.class_orders
    return PointClass(0, _reduce_cls(orders, ()), zero_torus(lattice))


def one_class(lattice: RegulatorLattice) -> PointClass:
    """The class of the free rank-1 module with its canonical metric."""
    orders = lattice.field.class_orders
    return PointClass(1, _reduce_cls(orders, ()), zero_torus(lattice))


def point_class(lattice: RegulatorLattice, rank: int, cls, f: FormElement) -> PointClass:
    t, _ = reduce_mod_lattice(lattice, f)
    return PointClass(int(rank), _reduce_cls(lattice.field.class_orders, cls), t)


def class_add(x: PointClass, y: PointClass) -> PointClass:
    orders = x.torus.lattice.field.class_orders
    cls = _reduce_cls(orders, (a + b for a, b in zip(x.cls, y.cls)))
    return PointClass(x.rank + y.rank, cls, x.torus.add(y.torus))


def class_neg(x: PointClass) -> PointClass:
    orders = x.torus.lattice.field.class_orders
    return PointClass(-x.rank, _reduce_cls(orders, (-c for c in x.cls)), x.torus.neg())


def a_map(lattice: RegulatorLattice, f: FormElement) -> PointClass:
    """The flat insertion: rank 0, trivial class, f modulo the lattice."""
    t, _ = reduce_mod_lattice(lattice, f)
    return PointClass(0, _reduce_cls(lattice.field.class_orders, ()), t)


def hermitian_cholesky(rows, digits: int):
    """Lower Cholesky factor of a Hermitian positive-definite matrix.

    Raises NotPositiveDefinite when a pivot fails or the matrix is not
    Hermitian within 10^(-digits/2) relative to its largest entry.
    """
    n = len(rows)
    with mp.workdps(digits + GUARD):
        a = [[to_mp(x) for x in row] for row in rows]
        if any(len(row) != n for row in a):
            raise ValidationError("Gram matrix must be square")
        scale = max((abs(x) for row in a for x in row), default=mpf(0))
        herm_tol = (scale + 1) * mpf(10) ** (-mpf(digits) / 2)
        for i in range(n):
            for j in range(i + 1):
                if abs(a[i][j] - mp.conj(a[j][i])) > herm_tol:
                    raise NotPositiveDefinite("Gram matrix is not Hermitian")
        low = [[mpc(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1):
                s = a[i][j] - mp.fsum(
                    low[i][k] * mp.conj(low[j][k]) for k in range(j)
                )
                if i == j:
                    if abs(s.imag) > herm_tol or s.real <= 0:
                        raise NotPositiveDefinite("Cholesky pivot is not positive")
                    low[i][j] = mp.sqrt(s.real)
                else:
                    low[i][j] = s / low[j][j]
        return low


def lndet_hermitian(rows, digits: int):
    """ln det of a Hermitian positive-definite matrix via Cholesky."""
    low = hermitian_cholesky(rows, digits)
    with mp.workdps(digits + GUARD):
        return 2 * mp.fsum(mp.log(low[i][i].real) for i in range(len(low)))


def cycl_free(field: NumberField, lattice: RegulatorLattice, grams) -> PointClass:
    """Class of a metrized free module from one Gram matrix per representative.

    The torus part carries coefficient (1/4) ln det G_sigma at each sigma,
    projected to quotient coordinates; the rank is the common matrix size.
    """
    grams = list(grams)
    if len(grams) != field.n_places:
        raise ValidationError("expected one Gram matrix per place representative")
    sizes = {len(g) for g in grams}
    if len(sizes) > 1:
        raise ValidationError("Gram matrices must share a single size")
    n = sizes.pop() if sizes else 0
    with mp.workdps(field.digits + GUARD):
        vals = [lndet_hermitian(g, field.digits) / 4 for g in grams]
        f = FormElement(0, _project_mean_zero(vals), field.digits) if vals else zero_form(field)
    t, _ = reduce_mod_lattice(lattice, f)
    return PointClass(n, _reduce_cls(field.class_orders, ()), t)


def scale_class(lattice: RegulatorLattice, x: PointClass, lambdas) -> PointClass:
    """x + a((1/2) sum of ln lambda_sigma b_1(sigma)) for positive scalars."""
    field = lattice.field
    lam = list(lambdas)
    if len(lam) != field.n_places:
        raise ValidationError("expected one scaling factor per place representative")
    with mp.workdps(field.digits + GUARD):
        vals = []
        for v in lam:
            s = to_mp(v)
            if not (mp.im(s) == 0 and mp.re(s) > 0):
                raise ValidationError("scaling factors must be positive reals")
            vals.append(mp.log(mp.re(s)) / 2)
        f = FormElement(0, _project_mean_zero(vals), field.digits)
    return class_add(x, a_map(lattice, f))
