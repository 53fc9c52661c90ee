"""Shared helpers for the test suite.

Contains the field loaders, an independent polylogarithm oracle (direct
partial sum plus Euler-Maclaurin tail), exact rational positive-definite
Gram generators, unimodular base changes over a number ring, and the
randomized metrized-complex corpus used by the calibration tests.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from math import comb
from pathlib import Path

from mpmath import mp

from regtor import (
    CohomologySpec,
    build_complex_over_r,
    build_lattice,
    parse_descriptor,
    presentation,
)
from regtor.polylog import bernoulli

DATA = Path(__file__).parent / "data"


def load_descriptor(name: str) -> dict:
    with open(DATA / f"{name}.json") as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def field_units(name: str):
    return parse_descriptor(load_descriptor(name))


@lru_cache(maxsize=None)
def field_lattice(name: str):
    field, units = field_units(name)
    return field, units, build_lattice(field, units)


def rel_err(got, want):
    denom = abs(want)
    if denom == 0:
        return abs(got)
    return abs(got - want) / denom


# ---------------------------------------------------------------------------
# Independent polylogarithm oracle: direct sum to M - 1 terms, then the
# Euler-Maclaurin tail for f(x) = e^{i x theta} x^{-n}.  The integral term is
# expanded by repeated integration by parts, so every piece is in closed form.
# ---------------------------------------------------------------------------


def _rising(n, l):
    out = 1
    for t in range(l):
        out *= n + t
    return out


def li_oracle(n: int, theta, digits: int = 30, cut: int = 3000):
    with mp.workdps(digits + 10):
        th = mp.mpf(theta)
        # Fold into (0, pi] so the Euler-Maclaurin terms decay by >= 1/4 each;
        # Li_n(e^{i(2 pi - t)}) is the conjugate of Li_n(e^{i t}).
        if th > mp.pi:
            return mp.conj(li_oracle(n, 2 * mp.pi - th, digits, cut))
        z = mp.expj(th)
        total = mp.mpc(0)
        zp = mp.mpc(1)
        for m in range(1, cut):
            zp *= z
            total += zp / mp.mpf(m) ** n
        M = mp.mpf(cut)
        eM = mp.expj(th * cut)
        itheta = mp.mpc(0, th)

        # integral_M^inf e^{i x theta} x^{-n} dx by 16 integrations by parts;
        # the alternating parts sign cancels against (x^{-n})^{(l)} signs.
        integral = mp.mpc(0)
        for l in range(16):
            integral -= eM * _rising(n, l) * M ** (-n - l) / itheta ** (l + 1)

        def deriv(t):
            # t-th derivative of f at M
            acc = mp.mpc(0)
            for l in range(t + 1):
                acc += (
                    comb(t, l)
                    * itheta ** (t - l)
                    * (-1) ** l
                    * _rising(n, l)
                    * M ** (-n - l)
                )
            return eM * acc

        tail = integral + deriv(0) / 2
        for r in range(1, 15):
            b = bernoulli(2 * r)
            tail -= (
                mp.mpf(b.numerator) / b.denominator / mp.factorial(2 * r) * deriv(2 * r - 1)
            )
        return +(total + tail)


# ---------------------------------------------------------------------------
# Exact rational linear algebra for test inputs.  Complex rationals are
# (re, im) Fraction pairs; output entries are Fractions for real data and
# [re, im] lists for complex data, both accepted by the library verbatim.
# ---------------------------------------------------------------------------


def _c(re, im=0):
    return (Fraction(re), Fraction(im))


def _c_add(x, y):
    return (x[0] + y[0], x[1] + y[1])


def _c_mul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _c_conj(x):
    return (x[0], -x[1])


def random_pd_gram(rng, n: int, complex_entries: bool = False):
    """Exact positive-definite Gram L^H D L with unit-triangular L."""
    dens = (1, 2, 3, 4)
    pos = (Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3, 2), Fraction(5, 3))

    def small():
        re = Fraction(rng.randint(-2, 2), rng.choice(dens))
        if not complex_entries:
            return _c(re)
        return (re, Fraction(rng.randint(-2, 2), rng.choice(dens)))

    lower = [[_c(1) if i == j else (small() if j < i else _c(0)) for j in range(n)] for i in range(n)]
    diag = [rng.choice(pos) for _ in range(n)]
    gram = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = _c(0)
            for k in range(n):
                # (L^H D L)_{ij} = sum_k conj(L_{ki}) d_k L_{kj}
                acc = _c_add(acc, _c_mul(_c_mul(_c_conj(lower[k][i]), _c(diag[k])), lower[k][j]))
            row.append(acc)
        gram.append(row)
    if complex_entries:
        return [[[x[0], x[1]] for x in row] for row in gram]
    return [[x[0] for x in row] for row in gram]


def fraction_det(rows):
    """Exact determinant of a rational matrix by fraction-free elimination."""
    n = len(rows)
    a = [[Fraction(x) for x in row] for row in rows]
    sign = 1
    for k in range(n):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            factor = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= factor * a[k][j]
    det = Fraction(sign)
    for k in range(n):
        det *= a[k][k]
    return det


# ---------------------------------------------------------------------------
# Matrices over a number ring, as tuples of FieldElement rows.
# ---------------------------------------------------------------------------


def rmat_identity(field, n):
    return [[field.one() if i == j else field.zero() for j in range(n)] for i in range(n)]


def rmat_mul(field, a, b):
    if not a or not b:
        return []
    out = []
    for i in range(len(a)):
        row = []
        for j in range(len(b[0])):
            acc = field.zero()
            for k in range(len(b)):
                acc = field.add(acc, field.mul(a[i][k], b[k][j]))
            row.append(acc)
        out.append(row)
    return out


def random_unimodular(field, rng, n: int, scalar_pool, unit_pairs, steps: int = 6):
    """A random product of shears, swaps, and unit row scalings.

    Returns (U, U_inverse) with exact entries; unit_pairs lists (u, u^{-1}).
    """
    u = rmat_identity(field, n)
    uinv = rmat_identity(field, n)
    for _ in range(steps):
        kind = rng.choice(("shear", "shear", "shear", "swap", "unit"))
        if n < 2 and kind != "unit":
            kind = "unit"
        if kind == "shear":
            k, l = rng.sample(range(n), 2)
            c = rng.choice(scalar_pool)
            # U <- E U adds c row_l to row_k; U^{-1} <- U^{-1} E^{-1}
            for j in range(n):
                u[k][j] = field.add(u[k][j], field.mul(c, u[l][j]))
            for i in range(n):
                uinv[i][l] = field.sub(uinv[i][l], field.mul(uinv[i][k], c))
        elif kind == "swap":
            k, l = rng.sample(range(n), 2)
            u[k], u[l] = u[l], u[k]
            for i in range(n):
                uinv[i][k], uinv[i][l] = uinv[i][l], uinv[i][k]
        else:
            k = rng.randrange(n)
            w, winv = rng.choice(unit_pairs)
            u[k] = [field.mul(w, x) for x in u[k]]
            for i in range(n):
                uinv[i][k] = field.mul(uinv[i][k], winv)
    return u, uinv


def ring_pools(field):
    """Small scalars, (unit, inverse) pairs, and non-unit multipliers."""
    one = field.one()
    neg_one = field.neg(one)
    if field.degree == 2:
        gen = field.gen()
        pool = [one, neg_one, gen, field.element([1, 1]), field.element([2])]
        units = [
            (one, one),
            (neg_one, neg_one),
            (field.element([1, 1]), field.element([-1, 1])),
            (field.element([-1, 1]), field.element([1, 1])),
        ]
        mult = [
            field.element([2]),
            field.element([3]),
            field.element([0, 1]),
            field.element([3, 1]),
            field.element([1, 2]),
        ]
    elif field.degree == 4:
        gen = field.gen()
        gen_inv = field.element([-1, -1, -1, -1])  # x^4 = -(1 + x + x^2 + x^3)
        pool = [one, neg_one, gen, field.element([1, 1, 0, 0])]
        units = [
            (one, one),
            (neg_one, neg_one),
            (gen, gen_inv),
            (field.neg(gen), field.neg(gen_inv)),
        ]
        mult = [
            field.element([2]),
            field.element([3]),
            field.element([1, 1, 1, 0]),
            field.element([2, 1, 0, 0]),
        ]
    else:
        pool = [one, neg_one, field.element([2])]
        units = [(one, one), (neg_one, neg_one)]
        mult = [field.element([2]), field.element([3]), field.element([5])]
    return pool, units, mult


def random_complex_over(field, rng, max_degrees: int = 4, max_dim: int = 4):
    """Random exact metrized complex with known cohomology.

    Built from elementary blocks (free generators and two-term multiplication
    blocks), then mixed by unimodular base changes and coboundary shifts of
    the chosen representatives, so the stored cohomology data stays correct
    while the differentials lose their block shape.
    """
    pool, unit_pairs, mult_pool = ring_pools(field)
    n_deg = rng.randint(2, max_degrees)
    dims = [0] * n_deg
    free = [0] * n_deg
    blocks = []  # (boundary index i, multiplier): R at degree i -> R at i+1

    for i in range(n_deg - 1):
        want = rng.randint(0, 2)
        for _ in range(want):
            if dims[i] < max_dim and dims[i + 1] < max_dim:
                blocks.append((i, rng.choice(mult_pool)))
                dims[i] += 1
                dims[i + 1] += 1
    for i in range(n_deg):
        while dims[i] < max_dim and rng.random() < 0.45:
            free[i] += 1
            dims[i] += 1
        if dims[i] == 0:
            free[i] = 1
            dims[i] = 1

    # Slot layout per degree: targets of boundary i-1, sources of boundary i,
    # then free generators.
    targets = [[b for b in range(len(blocks)) if blocks[b][0] == i - 1] for i in range(n_deg)]
    sources = [[b for b in range(len(blocks)) if blocks[b][0] == i] for i in range(n_deg)]
    slot_of_source = {}
    slot_of_target = {}
    free_slots = []
    for i in range(n_deg):
        pos = 0
        for b in targets[i]:
            slot_of_target[b] = pos
            pos += 1
        for b in sources[i]:
            slot_of_source[b] = pos
            pos += 1
        free_slots.append(list(range(pos, pos + free[i])))

    diffs = []
    for i in range(n_deg - 1):
        m = [[field.zero() for _ in range(dims[i])] for _ in range(dims[i + 1])]
        for b in sources[i]:
            m[slot_of_target[b]][slot_of_source[b]] = blocks[b][1]
        diffs.append(m)

    # reps[i] is dims[i] rows by free[i] columns, one column per generator.
    reps = []
    for i in range(n_deg):
        mat = [[field.zero() for _ in range(free[i])] for _ in range(dims[i])]
        for j, slot in enumerate(free_slots[i]):
            mat[slot][j] = field.one()
        reps.append(mat)

    # Coboundary shifts keep the classes, base changes mix the coordinates.
    for i in range(1, n_deg):
        if free[i] and dims[i - 1]:
            for j in range(free[i]):
                w = [rng.choice(pool) for _ in range(dims[i - 1])]
                shift = rmat_mul(field, diffs[i - 1], [[x] for x in w])
                for c in range(dims[i]):
                    reps[i][c][j] = field.add(reps[i][c][j], shift[c][0])

    bases = [random_unimodular(field, rng, dims[i], pool, unit_pairs) for i in range(n_deg)]
    for i in range(n_deg - 1):
        diffs[i] = rmat_mul(field, bases[i + 1][0], rmat_mul(field, diffs[i], bases[i][1]))
    for i in range(n_deg):
        if free[i]:
            reps[i] = rmat_mul(field, bases[i][0], reps[i])

    complex_places = field.r_complex > 0
    grams = [
        [random_pd_gram(rng, dims[i], complex_places) for _ in range(field.n_places)]
        for i in range(n_deg)
    ]
    specs = []
    for i in range(n_deg):
        torsion = None
        mults = [blocks[b][1] for b in targets[i]]
        if mults:
            size = len(mults)
            entries = [
                [mults[r] if r == c else field.zero() for c in range(size)]
                for r in range(size)
            ]
            # Unit row scaling and a row swap keep the presented module.
            if rng.random() < 0.5:
                w, _ = rng.choice(unit_pairs)
                r = rng.randrange(size)
                entries[r] = [field.mul(w, x) for x in entries[r]]
            if size > 1 and rng.random() < 0.5:
                r, c = rng.sample(range(size), 2)
                entries[r], entries[c] = entries[c], entries[r]
            torsion = presentation(field, entries)
        specs.append(
            CohomologySpec(
                free_rank=free[i],
                free_reps=tuple(tuple(r) for r in reps[i]) if free[i] else (),
                free_grams=tuple(
                    random_pd_gram(rng, free[i], complex_places)
                    for _ in range(field.n_places)
                )
                if free[i]
                else (),
                torsion=torsion,
            )
        )
    return build_complex_over_r(field, dims, diffs, grams, specs)


def hermitian_det(rows):
    """Exact determinant of a Hermitian Gaussian-rational matrix, as a Fraction."""
    n = len(rows)
    a = [
        [
            (Fraction(x[0]), Fraction(x[1]))
            if isinstance(x, (list, tuple))
            else (Fraction(x), Fraction(0))
            for x in row
        ]
        for row in rows
    ]
    det = (Fraction(1), Fraction(0))
    for k in range(n):
        piv = a[k][k]
        if piv == (0, 0):
            return Fraction(0)
        det = _c_mul(det, piv)
        den = piv[0] * piv[0] + piv[1] * piv[1]
        inv = (piv[0] / den, -piv[1] / den)
        for i in range(k + 1, n):
            f = _c_mul(a[i][k], inv)
            for j in range(k, n):
                a[i][j] = _c_add(a[i][j], _c_mul((-f[0], -f[1]), a[k][j]))
    assert det[1] == 0
    return det[0]
