from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padic_dilation.fields import (
    DescriptorMismatch,
    FieldDescriptor,
    FieldError,
    Fp,
    PrecisionLoss,
    Qp,
    Scalar,
    add,
    from_rational,
    hensel_sqrt,
    inv,
    is_prime,
    is_square,
    legendre,
    mul,
    neg,
    norm,
    parse_scalar,
    format_scalar,
    sqrt_all,
    sqrt_mod_p,
    sub,
    to_rational,
)

PRIMES_TO_97 = [p for p in range(2, 98) if all(p % q for q in range(2, p))]


def test_descriptor_validation():
    with pytest.raises(FieldError):
        Fp(4)
    with pytest.raises(FieldError):
        FieldDescriptor("Fp", 5, precision=3)
    with pytest.raises(FieldError):
        Qp(3, 0)
    assert Qp(7).precision == 20
    assert not is_prime(1) and is_prime(2) and is_prime(2**31 - 1)
    assert Fp(2**31 - 1).p == 2**31 - 1
    with pytest.raises(FieldError):
        Fp(2**31 + 11)


def test_prime_field_arithmetic():
    F3, F5 = Fp(3), Fp(5)
    assert add(F3(2), F3(2)) == F3(1)
    assert inv(F5(2)) == F5(3)
    assert neg(F3(1)) == F3(2)
    assert F5(2) / F5(2) == F5(1)
    with pytest.raises(ZeroDivisionError):
        inv(F5(0))
    with pytest.raises(DescriptorMismatch):
        add(F3(1), F5(1))


def test_padic_add_identity_and_mul_valuations():
    F = Qp(3, 4)
    s = add(F(3), F(0))
    assert (s.val, s.unit) == (1, 1)
    m = mul(F(3), F(3))
    assert (m.val, m.unit) == (2, 1)


def test_padic_full_cancellation():
    F = Qp(3, 4)
    with pytest.raises(PrecisionLoss):
        add(F(1), F(-1))
    assert add(F(1), F(-1), zero_on_cancel=True).is_zero()


def test_padic_partial_cancellation_loses_relative_precision():
    F = Qp(3, 4)
    s = sub(F(10), F(1))  # 9 = 3^2, only 2 digits survive
    assert s.val == 2 and s.unit == 1 and s.prec == 2
    assert s.absolute_precision == 4


def test_norms():
    assert norm(Fp(5)(2)) == 1
    assert norm(Qp(3)(9)) == Fraction(1, 9)
    assert norm(Fp(5)(0)) == 0 and norm(Qp(3)(0)) == 0
    assert norm(Qp(3)(Fraction(1, 3))) == 3


def test_from_rational():
    assert from_rational(1, 4, Fp(5)) == Fp(5)(4)
    x = from_rational(1, 3, Qp(3, 4))
    assert (x.val, x.unit) == (-1, 1)
    with pytest.raises(FieldError):
        from_rational(1, 3, Fp(3))
    with pytest.raises(ZeroDivisionError):
        from_rational(1, 0, Fp(3))


def test_z5_scalar_two_is_not_a_square():
    F5 = Fp(5)
    assert not is_square(F5(2))
    assert sqrt_all(F5(2)) == []
    assert F5(1) - F5(2) * F5(2) == F5(2)


def test_sqrt_all_f3_of_one():
    assert [r.unit for r in sqrt_all(Fp(3)(1))] == [1, 2]


def test_hensel_root_of_minus_eight():
    # Oracle: brute force over residues mod 27 gives {10, 17}.
    roots = sqrt_all(Qp(3, 3)(-8))
    assert [r.unit for r in roots] == [10, 17]
    assert all(r.val == 0 for r in roots)
    assert hensel_sqrt(-8 % 27, 3, 3, 1) == 10


def test_sqrt_zero_and_odd_valuation():
    F = Qp(5, 6)
    assert sqrt_all(F(0)) == [F(0)]
    assert sqrt_all(F(5)) == []
    r = sqrt_all(F(25 * 4))
    assert [(x.val, x.unit) for x in r] == [(1, 2), (1, 5**6 - 2)]


def test_q2_roots_unsupported_f2_supported():
    with pytest.raises(FieldError):
        sqrt_all(Qp(2, 5)(1))
    with pytest.raises(FieldError):
        is_square(Qp(2, 5)(1))
    assert [r.unit for r in sqrt_all(Fp(2)(1))] == [1]
    assert is_square(Fp(2)(1)) and is_square(Fp(2)(0))


@pytest.mark.parametrize("p", PRIMES_TO_97)
def test_euler_criterion_matches_exhaustive_search(p):
    squares = {}
    for x in range(p):
        squares.setdefault(x * x % p, []).append(x)
    F = Fp(p)
    for a in range(p):
        expected = squares.get(a, [])
        assert sqrt_mod_p(a, p) == expected
        assert is_square(F(a)) == bool(expected)
        if p > 2 and a:
            assert (legendre(a, p) == 1) == bool(expected)


def test_string_grammar():
    F = Qp(3, 5)
    assert parse_scalar("3^-1 * 2", F) == from_rational(2, 3, F)
    assert parse_scalar("-3/4", F) == from_rational(-3, 4, F)
    assert format_scalar(F(18)) == "3^2 * 2"
    assert format_scalar(F(0)) == "0"
    assert format_scalar(Fp(7)(-1)) == "6"
    assert parse_scalar("1/4", Fp(5)) == Fp(5)(4)
    with pytest.raises(FieldError):
        parse_scalar("5^1 * 2", F)
    with pytest.raises(FieldError):
        parse_scalar("two", F)


def test_scalars_are_immutable():
    x = Fp(3)(1)
    with pytest.raises(AttributeError):
        x.unit = 2


# --- properties -------------------------------------------------------------

padic_fields = st.sampled_from([Qp(3, 12), Qp(5, 10), Qp(7, 8)])
prime_fields = st.sampled_from([Fp(2), Fp(3), Fp(5), Fp(97)])


@st.composite
def padic_pairs(draw):
    f = draw(padic_fields)

    def one():
        n = draw(st.integers(-1000, 1000))
        d = draw(st.integers(1, 1000))
        return from_rational(n, d, f)

    return f, one(), one()


@given(padic_pairs())
@settings(max_examples=300, deadline=None)
def test_ultrametric_inequality(pair):
    f, a, b = pair
    try:
        s = add(a, b)
    except PrecisionLoss:
        # Only possible when a = -b to all tracked digits.
        assert norm(a) == norm(b)
        return
    assert norm(s) <= max(norm(a), norm(b))
    if norm(a) != norm(b):
        assert norm(s) == max(norm(a), norm(b))


@given(padic_pairs())
@settings(max_examples=300, deadline=None)
def test_norm_is_multiplicative(pair):
    _, a, b = pair
    assert norm(mul(a, b)) == norm(a) * norm(b)


@given(prime_fields, st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=200, deadline=None)
def test_prime_field_ultrametric_and_multiplicative(f, x, y):
    a, b = f(x), f(y)
    assert norm(a + b) <= max(norm(a), norm(b))
    assert norm(a * b) == norm(a) * norm(b)


@given(st.sampled_from([3, 5, 7]), st.integers(-1000, 1000), st.integers(1, 1000))
@settings(max_examples=300, deadline=None)
def test_rational_round_trip(p, n, d):
    f = Qp(p, 20)
    x = from_rational(n, d, f)
    if n == 0:
        assert x.is_zero()
        return
    # n/d and its stored value agree to 20 relative digits: the difference has
    # valuation >= v + 20.
    diff = Fraction(n, d) - to_rational(x)
    if diff:
        num, den = diff.numerator, diff.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        assert v >= x.val + 20
    assert from_rational(n, d, f) == x * 1


@given(padic_fields, st.integers(-500, 500).filter(bool), st.integers(0, 4))
@settings(max_examples=300, deadline=None)
def test_padic_roots_square_back(f, m, shift):
    a = from_rational(m * m * f.p ** (2 * shift), 1, f)
    roots = sqrt_all(a)
    assert is_square(a)
    assert len(roots) == 2
    for r in roots:
        assert r * r == a
    assert roots[0] == -roots[1]


@given(padic_fields, st.integers(1, 10**6))
@settings(max_examples=200, deadline=None)
def test_padic_square_detection(f, n):
    a = f(n)
    roots = sqrt_all(a)
    assert bool(roots) == is_square(a)
    for r in roots:
        assert r * r == a


@given(prime_fields, st.integers(0, 10**6))
@settings(max_examples=200, deadline=None)
def test_prime_field_roots(f, n):
    a = f(n)
    roots = sqrt_all(a)
    for r in roots:
        assert r * r == a
    expected = 1 if a.is_zero() or f.p == 2 else 2
    assert len(roots) in ((0, expected) if not a.is_zero() else (1,))
    assert [r.unit for r in roots] == sorted(r.unit for r in roots)


def test_scalar_construction_passthrough():
    f = Fp(7)
    x = f(3)
    assert f(x) is x
    assert isinstance(x, Scalar)
    with pytest.raises(DescriptorMismatch):
        Fp(5)(x)
