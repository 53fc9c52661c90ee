"""Exact Bernoulli numbers, integer zeta values, and polylogarithms on the unit circle.

Bernoulli numbers are exact rationals from the defining recurrence (convention
B_1 = -1/2).  zeta_int evaluates zeta(s) for integer s >= 2 by Euler-Maclaurin
summation.  polylog_circle evaluates Li_n(e^{i theta}) for integer n >= 1 and
theta in (0, 2pi) through the logarithmic series expansion about mu = i theta,
which converges geometrically once theta is folded into (0, pi].
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from mpmath import mp, mpc, mpf

from .errors import NoConvergence, ThetaOutOfRange, ValidationError

GUARD = 10

_SERIES_CAP = 10_000


class BernoulliCache:
    """Exact Bernoulli rationals B_0..B_m, grown on demand.

    The defining recurrence sum_{k=0}^{m} C(m+1, k) B_k = 0 is solved for B_m;
    it yields B_1 = -1/2.
    """

    def __init__(self) -> None:
        self._values: list[Fraction] = [Fraction(1)]

    def get(self, m: int) -> Fraction:
        if m < 0:
            raise ValidationError("Bernoulli index must be non-negative")
        values = self._values
        while len(values) <= m:
            n = len(values)
            acc = sum(comb(n + 1, k) * values[k] for k in range(n))
            values.append(Fraction(-acc, n + 1))
        return values[m]


_CACHE = BernoulliCache()


def bernoulli(m: int) -> Fraction:
    """Exact Bernoulli number B_m with B_1 = -1/2."""
    return _CACHE.get(m)


def bernoulli_polynomial(n: int, x: Fraction) -> Fraction:
    """Exact value of the Bernoulli polynomial B_n(x) at a rational point."""
    if n < 0:
        raise ValidationError("Bernoulli polynomial degree must be non-negative")
    return sum(comb(n, k) * bernoulli(k) * x ** (n - k) for k in range(n + 1))


def _frac(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator


def zeta_int(s: int, digits: int = 50) -> mpf:
    """zeta(s) for integer s >= 2 by Euler-Maclaurin summation."""
    if s < 2:
        raise ValidationError("zeta_int requires an integer s >= 2")
    with mp.workdps(digits + GUARD):
        n = 2 * (digits + GUARD)
        total = mp.zero
        for k in range(1, n):
            total += mpf(1) / mpf(k) ** s
        total += mpf(1) / (2 * mpf(n) ** s)
        total += mpf(n) ** (1 - s) / (s - 1)
        # Correction terms fall off like ((s + 2r) / (2 pi n))^{2r}; with
        # n = 2 (digits + GUARD) they pass the target before the asymptotic
        # series turns.
        threshold = mpf(10) ** (-(digits + GUARD) - 5)
        rising = mpf(s)
        power = mpf(n) ** (-s - 1)
        r = 1
        while True:
            b = bernoulli(2 * r)
            # rising = s (s+1) ... (s + 2r - 2), power = n^{-s-2r+1}
            term = _frac(b) / mp.factorial(2 * r) * rising * power
            total += term
            if abs(term) < threshold:
                break
            rising *= (s + 2 * r - 1) * (s + 2 * r)
            power /= mpf(n) ** 2
            r += 1
            if r > 4 * (digits + GUARD):
                raise NoConvergence("Euler-Maclaurin tail did not reach the target")
        return +total


def _zeta_any_int(s: int, digits: int) -> mpf:
    """zeta at any integer: Euler-Maclaurin for s >= 2, Bernoulli values below."""
    if s >= 2:
        return zeta_int(s, digits)
    if s == 1:
        raise ValidationError("zeta(1) diverges")
    if s == 0:
        return mpf(-1) / 2
    # zeta(-m) = -B_{m+1} / (m+1) for m >= 1
    m = -s
    with mp.workdps(digits + GUARD):
        return +(-_frac(bernoulli(m + 1)) / (m + 1))


def polylog_circle(n: int, theta, digits: int = 50) -> mpc:
    """Li_n(e^{i theta}) for integer n >= 1 and theta in (0, 2pi).

    n = 1 returns the principal branch of -ln(1 - e^{i theta}).  For n >= 2
    the series in mu = i theta with integer zeta coefficients is used, with
    the k = n-1 term carrying the harmonic number and -ln(-mu):

        Li_n(e^mu) = sum_{k >= 0, k != n-1} zeta(n-k) mu^k / k!
                     + mu^{n-1} / (n-1)! (H_{n-1} - ln(-mu)).

    Arguments above pi are folded to 2pi - theta and conjugated back, keeping
    |mu| / 2pi at most one half.
    """
    if n < 1:
        raise ValidationError("polylog order must be a positive integer")
    wdps = digits + GUARD
    with mp.workdps(wdps):
        th = mpf(theta)
        two_pi = 2 * mp.pi
        if not (0 < th < two_pi):
            raise ThetaOutOfRange(f"theta must lie strictly inside (0, 2pi), got {th}")
        conjugate = th > mp.pi
        if conjugate:
            th = two_pi - th
        if th / two_pi > mpf("0.95"):
            raise ThetaOutOfRange("theta is too close to a lattice point of 2pi")
        if n == 1:
            value = -mp.log(1 - mp.expjpi(th / mp.pi))
            return mp.conj(value) if conjugate else +value

        mu = mpc(0, th)
        log_neg_mu = mp.log(th) - mpc(0, mp.pi / 2)
        harmonic = sum(mpf(1) / m for m in range(1, n))
        threshold = mpf(10) ** (-(digits + 5))
        total = mpc(0)
        mu_pow = mpc(1)
        k = 0
        while True:
            if k == n - 1:
                term = mu_pow / mp.factorial(k) * (harmonic - log_neg_mu)
                total += term
            else:
                zk = n - k
                if zk >= 2 or zk == 0 or (zk < 0 and zk % 2 != 0):
                    coeff = _zeta_any_int(zk, digits)
                    term = coeff * mu_pow / mp.factorial(k)
                    total += term
                    if k > n + 4 and abs(term) < threshold:
                        break
                # zeta vanishes at negative even integers; the term bound
                # still shrinks geometrically, so only emitted terms matter.
            mu_pow *= mu
            k += 1
            if k > _SERIES_CAP:
                raise NoConvergence("polylog series did not reach the target")
        return mp.conj(total) if conjugate else +total


def beta_integral_check(j: int, digits: int = 50) -> tuple[mpf, Fraction]:
    """Quadrature and exact value of int_0^1 (x^2 - x)^{j-1} dx.

    The exact value is (-1)^{j-1} ((j-1)!)^2 / (2j-1)!, the signed beta
    integral B(j, j).
    """
    if j < 1:
        raise ValidationError("beta integral requires j >= 1")
    from math import factorial

    exact = Fraction((-1) ** (j - 1) * factorial(j - 1) ** 2, factorial(2 * j - 1))
    with mp.workdps(digits + GUARD):
        numeric = mp.quad(lambda x: (x * x - x) ** (j - 1), [0, 1])
        return +numeric, exact
