"""Circle-bundle torsion constants over cyclotomic rings and related tables.

For a prime r >= 3 and the ring Z[xi]/(1 + xi + ... + xi^{r-1}), the
holonomy of the flat line bundle at the place sigma is sigma(xi) = e^{i
theta_sigma}; the fiberwise analytic torsion forms reduce to explicit
polylogarithm values at these roots of unity.  This module packages those
coefficients, the u_j constants, the psi-scaling regulator identity, the
degree-zero Cheeger-Mueller cross-check against the combinatorial torsion of
0 -> C --(1-sigma(xi))--> C -> 0, the four-periodic dimension table, the
X-space dimensions, conversion between the competing normalizations of the
Kamber-Tondeur forms, and the Hatcher constants a_k kappa_k zeta(2k+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from mpmath import mp, mpc, mpf

from . import rtorsion
from .errors import TrivialHolonomyAtJZero, ValidationError
from .numfield import NumberField, build_field
from .polylog import bernoulli, polylog_circle, zeta_int

GUARD = 10


def _is_prime(r: int) -> bool:
    if r < 2:
        return False
    d = 2
    while d * d <= r:
        if r % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class CyclotomicSetup:
    """The cyclotomic ring of prime order r with embedded holonomies.

    thetas[k] is the argument in (0, 2 pi) of the k-th place representative
    of xi; since representatives carry positive imaginary part, the arguments
    land in (0, pi).
    """

    r: int
    field: NumberField
    thetas: tuple


def make_cyclotomic_setup(r: int, digits: int = 50) -> CyclotomicSetup:
    r = int(r)
    if r < 3 or not _is_prime(r):
        raise ValidationError("the cyclotomic order must be a prime >= 3")
    field = build_field([1] * r, digits)
    if field.r_real != 0 or field.r_complex != (r - 1) // 2:
        raise ValidationError("cyclotomic signature (0, (r-1)/2) not reproduced")
    with mp.workdps(digits + GUARD):
        bound = mpf(10) ** (-digits + GUARD)
        thetas = []
        for z in field.sigma_star:
            if abs(abs(z) - 1) > bound:
                raise ValidationError("embedded root of unity is off the unit circle")
            th = mp.arg(z)
            if th <= 0:
                th += 2 * mp.pi
            thetas.append(+th)
    return CyclotomicSetup(r=r, field=field, thetas=tuple(thetas))


def _prefactor(j: int):
    """(2j+1)! / ((2 pi)^j 2^(2j) (j!)^2) at the current working precision."""
    num = mpf(factorial(2 * j + 1))
    den = (2 * mp.pi) ** j * mpf(2) ** (2 * j) * mpf(factorial(j)) ** 2
    return num / den


def torsion_form_coeffs(setup: CyclotomicSetup, jmax: int) -> dict:
    """T_{sigma, j} for all places and 0 <= j <= jmax.

    Even j uses (-1)^(j/2) Re Li_{j+1}, odd j uses (-1)^((j-1)/2) Im Li_{j+1},
    both times the prefactor; at j = 0 this reduces to -ln|1 - sigma(xi)|.
    """
    if jmax < 0:
        raise ValidationError("jmax must be non-negative")
    digits = setup.field.digits
    out = {}
    with mp.workdps(digits + GUARD):
        for k, th in enumerate(setup.thetas):
            for j in range(jmax + 1):
                li = polylog_circle(j + 1, th, digits)
                pref = _prefactor(j)
                if j % 2 == 0:
                    val = (-1) ** (j // 2) * pref * li.real
                else:
                    val = (-1) ** ((j - 1) // 2) * pref * li.imag
                out[(k, j)] = +val
    return out


def trivial_holonomy_coeff(j: int, digits: int = 50):
    """The torsion-form coefficient at holonomy 1.

    Odd j vanishes (Im Li_{j+1}(1) = 0); even j >= 2 is (-1)^(j/2) times the
    prefactor times zeta(j+1).  j = 0 would need the divergent zeta(1), which
    the formal sum over even j includes; the request is refused.
    """
    if j == 0:
        raise TrivialHolonomyAtJZero("Li_1(1) diverges; no degree-zero coefficient")
    if j < 0:
        raise ValidationError("j must be non-negative")
    with mp.workdps(digits + GUARD):
        if j % 2 == 1:
            return mpf(0)
        return +((-1) ** (j // 2) * _prefactor(j) * zeta_int(j + 1, digits))


def u_coeff(setup: CyclotomicSetup, j: int) -> dict:
    """The constants u_j(sigma): prefactor times Im Li_{j+1}(sigma(xi)) for
    odd j, prefactor times (Re Li_{j+1}(sigma(xi)) - zeta(j+1)) for even j."""
    if j < 1:
        raise ValidationError("u_j is defined for j >= 1")
    digits = setup.field.digits
    out = {}
    with mp.workdps(digits + GUARD):
        pref = _prefactor(j)
        zv = zeta_int(j + 1, digits) if j % 2 == 0 else None
        for k, th in enumerate(setup.thetas):
            li = polylog_circle(j + 1, th, digits)
            if j % 2 == 1:
                out[k] = +(pref * li.imag)
            else:
                out[k] = +(pref * (li.real - zv))
    return out


def regulator_identity_check(setup: CyclotomicSetup, j: int) -> dict:
    """Both sides of the psi-scaling identity per place: (lhs, rhs, ratio).

    lhs projects Li_{j+1}(sigma(xi)) - zeta(j+1) onto the R(j)-line (real
    part for even j, i times imaginary part for odd j), scales by
    (-1)^j (2j+1)!/j!, and divides by (2pi i)^j; rhs is
    (-1)^j j! 2^(2j) u_j(sigma).  The ratio is the sign left over after the
    prefactors cancel.
    """
    if j < 1:
        raise ValidationError("the identity is checked for j >= 1")
    digits = setup.field.digits
    rhs_all = u_coeff(setup, j)
    out = {}
    with mp.workdps(digits + GUARD):
        amp = mpf(factorial(2 * j + 1)) / factorial(j)
        zv = zeta_int(j + 1, digits)
        for k, th in enumerate(setup.thetas):
            z = polylog_circle(j + 1, th, digits) - zv
            if j % 2 == 0:
                lhs = (-1) ** (j // 2) * amp * z.real / (2 * mp.pi) ** j
            else:
                lhs = -((-1) ** ((j - 1) // 2)) * amp * z.imag / (2 * mp.pi) ** j
            rhs = (-1) ** j * factorial(j) * mpf(2) ** (2 * j) * rhs_all[k]
            ratio = lhs / rhs if rhs != 0 else mp.nan
            out[k] = (+lhs, +rhs, +ratio)
    return out


def cheeger_muller_check(setup: CyclotomicSetup) -> dict:
    """|T_{sigma,0}| against ln tau of 0 -> C --(1 - sigma(xi))--> C -> 0.

    The combinatorial torsion comes from the independent metrized-complex
    route; returns (|T_{sigma,0}|, ln tau_sigma, absolute residual) per place.
    """
    digits = setup.field.digits
    t0 = torsion_form_coeffs(setup, 0)
    out = {}
    with mp.workdps(digits + GUARD):
        for k in range(setup.field.n_places):
            z = 1 - setup.field.sigma_star[k]
            cplx = rtorsion.metrized_complex_at_place(
                digits, [1, 1], [[[z]]], [[[1]], [[1]]], [(), ()], [(), ()]
            )
            lntau = mp.log(rtorsion.reidemeister(cplx))
            resid = abs(abs(t0[(k, 0)]) - abs(lntau))
            out[k] = (abs(t0[(k, 0)]), +lntau, +resid)
    return out


def borel_dims(field: NumberField, imax: int) -> dict:
    """Dimensions of A^(-i) for 0 <= i <= imax: 1, r_R + r_C - 1, then the
    four-periodic pattern 0, r_C, 0, r_R + r_C for i = 2, 3, 4, 5 mod 4."""
    if imax < 0:
        raise ValidationError("imax must be non-negative")
    rr, rc = field.r_real, field.r_complex
    table = {}
    for i in range(imax + 1):
        if i == 0:
            table[i] = 1
        elif i == 1:
            table[i] = rr + rc - 1
        else:
            table[i] = {2: 0, 3: rc, 0: 0, 1: rr + rc}[i % 4]
    return table


def x_space_dim(field: NumberField, j: int) -> int:
    """Dimension of the weight-j regulator target X_{2j-1}.

    Complex places always contribute; a real place contributes exactly when
    conjugation fixes the R(j-1)-line, i.e. for odd j.
    """
    if j < 1:
        raise ValidationError("the X spaces are indexed by j >= 1")
    return field.r_complex + (field.r_real if j % 2 == 1 else 0)


_NORMALIZATION_NAMES = ("bl", "chern", "igusa", "borel")


def normalization_factors(j: int, digits: int = 50):
    """The degree-(2j+1) normalization constants relative to the standard one.

    Returns (N_Chern, N_Igusa, (N_Borel signed magnitude, i-power)): the
    Borel factor is (-1)^j (2j+1)!/((2 pi i)^j j!), reported as the real
    number (-1)^j (2j+1)!/((2 pi)^j j!) together with the power of i (mod 4)
    multiplying it.
    """
    if j < 0:
        raise ValidationError("j must be non-negative")
    with mp.workdps(digits + GUARD):
        chern = (
            (-1) ** j * 2 * mp.pi * mpf(factorial(2 * j + 1))
            / (mpf(2) ** (2 * j + 1) * factorial(j))
        )
        igusa = mpf(factorial(2 * j + 1)) / ((2 * mp.pi) ** j * mpf(2) ** (2 * j))
        borel_signed = (
            (-1) ** j * mpf(factorial(2 * j + 1))
            / ((2 * mp.pi) ** j * factorial(j))
        )
        return +chern, +igusa, (+borel_signed, (-j) % 4)


def _factor_complex(name: str, j: int):
    if name == "bl":
        return mpc(1)
    chern, igusa, (bmag, bpow) = normalization_factors(j, mp.dps)
    if name == "chern":
        return mpc(chern)
    if name == "igusa":
        return mpc(igusa)
    if name == "borel":
        return mpc(bmag) * mpc(0, 1) ** bpow
    raise ValidationError(f"unknown normalization {name!r}")


def convert(values, frm: str, to: str, j: int, digits: int = 50):
    """Re-express Kamber-Tondeur values between normalizations.

    A value v in normalization X satisfies v = v_standard / N_X, so the
    conversion multiplies by N_frm and divides by N_to.  Accepts a scalar or
    a sequence; Borel conversions may be complex.
    """
    if frm not in _NORMALIZATION_NAMES or to not in _NORMALIZATION_NAMES:
        raise ValidationError(f"normalizations are named {_NORMALIZATION_NAMES}")
    single = not isinstance(values, (list, tuple))
    vals = [values] if single else list(values)
    with mp.workdps(digits + GUARD):
        fac = _factor_complex(frm, j) / _factor_complex(to, j)
        out = []
        for v in vals:
            w = mp.mpmathify(v) * fac
            if mp.im(w) == 0:
                w = mp.re(w)
            out.append(+w)
    return out[0] if single else out


def hatcher_constant(k: int, digits: int = 50):
    """(a_k, kappa_k, a_k kappa_k zeta(2k+1)).

    a_k is the denominator of B_{2k}/(4k) in lowest terms (the order of the
    image of the J-homomorphism in degree 4k-1); kappa_k is 1 for odd k and
    1/2 for even k.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    a_k = Fraction(bernoulli(2 * k), 4 * k).denominator
    kappa = Fraction(1) if k % 2 == 1 else Fraction(1, 2)
    with mp.workdps(digits + GUARD):
        value = +(mpf(a_k) * kappa.numerator / kappa.denominator * zeta_int(2 * k + 1, digits))
    return a_k, kappa, value
