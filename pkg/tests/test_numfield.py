"""Number-ring construction, embeddings, norms, and unit verification.

Oracles: mpmath's sqrt and polyroots for embedding values, the product of
embeddings for the norm, and exact Fraction arithmetic for ring laws.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from regtor import (
    NotAUnit,
    NotSquarefree,
    ValidationError,
    build_field,
    dirichlet_rank,
    embed,
    embed_all,
    norm,
    parse_descriptor,
    parse_rational,
    verify_unit,
)
from support import field_units, load_descriptor

small_coeffs = st.lists(
    st.integers(min_value=-6, max_value=6), min_size=1, max_size=4
)


def test_quadratic_field_places():
    field, _ = field_units("zsqrt2")
    assert field.degree == 2
    assert field.r_real == 2 and field.r_complex == 0
    assert field.is_real_place(0) and field.is_real_place(1)
    with mp.workdps(60):
        root = mp.sqrt(2)
        assert abs(field.sigma_star[0] + root) < mp.mpf(10) ** -49
        assert abs(field.sigma_star[1] - root) < mp.mpf(10) ** -49


def test_cyclotomic_field_places():
    field, _ = field_units("zeta5")
    assert field.degree == 4
    assert field.r_real == 0 and field.r_complex == 2
    assert not field.is_real_place(0)
    with mp.workdps(60):
        tol = mp.mpf(10) ** -49
        # ordered by real part: angle 4 pi / 5 first, then 2 pi / 5
        assert abs(field.sigma_star[0] - mp.expjpi(mp.mpf(4) / 5)) < tol
        assert abs(field.sigma_star[1] - mp.expjpi(mp.mpf(2) / 5)) < tol
        for z in field.sigma_star:
            assert abs(abs(z) - 1) < tol
            assert abs(z ** 5 - 1) < tol


def test_rational_field():
    field, units = field_units("z")
    assert field.degree == 1
    assert field.r_real == 1 and field.r_complex == 0
    assert dirichlet_rank(field) == 0
    assert norm(field, field.element([Fraction(7)])) == 7


def test_embedding_residuals_meet_bound():
    for poly in ([-2, 0, 1], [1, 1, 1, 1, 1], [-1, -1, 0, 0, 0, 1]):
        field = build_field(poly, 50)
        with mp.workdps(70):
            bound = mp.mpf(10) ** -40
            for z in field.all_embeddings:
                val = mp.polyval([1] + list(reversed(poly[:-1])), z)
                assert abs(val) < bound


def test_quintic_against_polyroots():
    # x^5 - x - 1 has one real root and two conjugate pairs
    field = build_field([-1, -1, 0, 0, 0, 1], 50)
    assert field.r_real == 1 and field.r_complex == 2
    with mp.workdps(60):
        want = mp.polyroots([1, 0, 0, 0, -1, -1], maxsteps=200, extraprec=100)
        for z in field.all_embeddings:
            assert min(abs(z - w) for w in want) < mp.mpf(10) ** -45


def test_build_field_rejects_bad_polynomials():
    with pytest.raises(ValidationError):
        build_field([2, 2], 50)  # not monic
    with pytest.raises(ValidationError):
        build_field([], 50)
    with pytest.raises(ValidationError):
        build_field([1], 50)  # constant
    with pytest.raises(NotSquarefree):
        build_field([0, 0, 1], 50)  # x^2
    with pytest.raises(NotSquarefree):
        build_field([4, 0, -4, 0, 1], 50)  # (x^2 - 2)^2


def test_build_field_accepts_reducible_squarefree():
    field = build_field([-1, 0, 1], 50)  # (x-1)(x+1)
    assert field.r_real == 2
    assert norm(field, field.gen()) == -1


def test_element_reduction_and_arithmetic():
    field, _ = field_units("zsqrt2")
    a = field.gen()
    sq = field.mul(a, a)
    assert sq.coeffs == (Fraction(2), Fraction(0))
    long_input = field.element([0, 0, 1])  # x^2 -> 2
    assert long_input.coeffs == (Fraction(2), Fraction(0))
    u = field.element([1, 1])
    v = field.element([-1, 1])
    assert field.mul(u, v).coeffs == (Fraction(1), Fraction(0))


@given(a=small_coeffs, b=small_coeffs, c=small_coeffs)
@settings(max_examples=60, deadline=None)
def test_ring_laws(a, b, c):
    field, _ = field_units("zeta5")
    x, y, z = field.element(a), field.element(b), field.element(c)
    assert field.mul(x, y).coeffs == field.mul(y, x).coeffs
    assert field.mul(field.mul(x, y), z).coeffs == field.mul(x, field.mul(y, z)).coeffs
    lhs = field.mul(x, field.add(y, z))
    rhs = field.add(field.mul(x, y), field.mul(x, z))
    assert lhs.coeffs == rhs.coeffs


@given(a=small_coeffs, b=small_coeffs)
@settings(max_examples=30, deadline=None)
def test_embedding_is_multiplicative(a, b):
    field, _ = field_units("zsqrt2")
    x, y = field.element(a), field.element(b)
    with mp.workdps(60):
        for k in range(field.n_places):
            lhs = embed(field, field.mul(x, y), k)
            rhs = embed(field, x, k) * embed(field, y, k)
            assert abs(lhs - rhs) < mp.mpf(10) ** -40


@given(a=small_coeffs, b=small_coeffs)
@settings(max_examples=40, deadline=None)
def test_norm_is_multiplicative(a, b):
    field, _ = field_units("zeta5")
    x, y = field.element(a), field.element(b)
    assert norm(field, field.mul(x, y)) == norm(field, x) * norm(field, y)


def test_norm_matches_product_of_embeddings():
    field, _ = field_units("zeta5")
    x = field.element([3, -1, 2, 0])
    exact = norm(field, x)
    with mp.workdps(60):
        prod = mp.mpf(1)
        for z in embed_all(field, x):
            prod = prod * z
        assert abs(prod - mp.mpf(exact.numerator) / exact.denominator) < mp.mpf(10) ** -40


def test_norm_of_constants_and_generator():
    field, _ = field_units("zsqrt2")
    assert norm(field, field.element([5])) == 25
    assert norm(field, field.gen()) == -2
    assert norm(field, field.element([Fraction(1, 2)])) == Fraction(1, 4)


def test_verify_unit():
    field, _ = field_units("zsqrt2")
    assert verify_unit(field, field.element([1, 1]))
    assert verify_unit(field, field.element([-1]))
    assert verify_unit(field, field.element([3, 2]))  # (1+a)^2
    assert not verify_unit(field, field.element([2]))
    assert not verify_unit(field, field.gen())  # norm -2
    assert not verify_unit(field, field.element([Fraction(1, 2), Fraction(1, 2)]))
    cyc, _ = field_units("zeta5")
    assert verify_unit(cyc, cyc.gen())
    assert verify_unit(cyc, cyc.element([1, 1]))
    assert verify_unit(cyc, cyc.element([1, 1, 1, 0]))  # (gen^3 - 1)/(gen - 1)
    assert not verify_unit(cyc, cyc.element([1, -1, 0, 0]))  # norm 5


def test_dirichlet_rank():
    assert dirichlet_rank(field_units("zsqrt2")[0]) == 1
    assert dirichlet_rank(field_units("zeta5")[0]) == 1
    field = build_field([-1, -1, 0, 0, 0, 1], 50)
    assert dirichlet_rank(field) == 2  # 1 + 2 - 1


def test_parse_rational():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("-2") == Fraction(-2)
    assert parse_rational(5) == Fraction(5)
    assert parse_rational(Fraction(7, 3)) == Fraction(7, 3)


def test_parse_descriptor_and_digit_override():
    data = load_descriptor("zsqrt2")
    field, units = parse_descriptor(data)
    assert field.digits == 50
    assert len(units) == 2
    assert units[1].coeffs == (Fraction(1), Fraction(1))
    field80, _ = parse_descriptor(data, digits_override=80)
    assert field80.digits == 80
    with mp.workdps(100):
        assert abs(field80.sigma_star[1] - mp.sqrt(2)) < mp.mpf(10) ** -79


def test_parse_descriptor_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_descriptor({"digits": 50})
    with pytest.raises(ValidationError):
        parse_descriptor({"poly": [-2, 0, 1], "units": [["x"]]})
    with pytest.raises(ValidationError):
        parse_descriptor({"poly": [-2, 0, "q"]})
