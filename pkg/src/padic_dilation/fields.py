"""Exact scalar arithmetic over non-Archimedean fields.

Two scalar universes are supported:

* ``F_p`` -- a finite prime field carrying the trivial valuation.
* ``Q_p`` -- the p-adic numbers at capped relative precision.  A nonzero
  element is stored as ``p**v * u`` where ``u`` is a unit known modulo
  ``p**r``; ``r`` (the relative precision) shrinks when leading digits cancel
  in an addition.  Exact zero is a distinguished value.

Norms are returned as :class:`fractions.Fraction`, never floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

PRIME_FIELD = "Fp"
PADIC_FIELD = "Qp"
DEFAULT_PRECISION = 20

_MAX_PRIME = 2**31
_EXHAUSTIVE_LIMIT = 2**16


class FieldError(ValueError):
    """Base class for scalar-layer errors."""


class DescriptorMismatch(FieldError):
    """Operands live in different fields."""


class PrecisionLoss(FieldError, ArithmeticError):
    """All tracked digits cancelled; the result is zero at this precision."""

    def __init__(self, absolute_precision: int):
        self.absolute_precision = absolute_precision
        super().__init__(
            f"result indistinguishable from zero at precision O(p^{absolute_precision})"
        )


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldDescriptor:
    """Selects the scalar universe: ``F_p`` or ``Q_p`` at a given precision."""

    kind: str
    p: int
    precision: int | None = None

    def __post_init__(self):
        if self.kind not in (PRIME_FIELD, PADIC_FIELD):
            raise FieldError(f"unknown field kind {self.kind!r}")
        if not isinstance(self.p, int) or self.p >= _MAX_PRIME or not is_prime(self.p):
            raise FieldError(f"p={self.p} is not a prime below 2^31")
        if self.kind == PADIC_FIELD:
            if self.precision is None:
                object.__setattr__(self, "precision", DEFAULT_PRECISION)
            if self.precision < 1:
                raise FieldError("precision must be positive")
        elif self.precision is not None:
            raise FieldError("precision applies to Qp only")

    @property
    def is_padic(self) -> bool:
        return self.kind == PADIC_FIELD

    def zero(self) -> Scalar:
        return Scalar._zero(self)

    def one(self) -> Scalar:
        return self(1)

    def __call__(self, value) -> Scalar:
        """Coerce an int, Fraction, scalar string or Scalar into this field."""
        if isinstance(value, Scalar):
            _check_same(value.field, self)
            return value
        if isinstance(value, str):
            return parse_scalar(value, self)
        if isinstance(value, Fraction):
            return from_rational(value.numerator, value.denominator, self)
        if isinstance(value, int):
            return from_rational(value, 1, self)
        raise TypeError(f"cannot coerce {type(value).__name__} into {self}")

    def __str__(self):
        if self.is_padic:
            return f"Q_{self.p}(prec {self.precision})"
        return f"F_{self.p}"


def Fp(p: int) -> FieldDescriptor:
    return FieldDescriptor(PRIME_FIELD, p)


def Qp(p: int, precision: int = DEFAULT_PRECISION) -> FieldDescriptor:
    return FieldDescriptor(PADIC_FIELD, p, precision)


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class Scalar:
    """A single field element.

    ``F_p`` elements keep ``unit`` as the residue in ``[0, p)`` with ``val``
    and ``prec`` unused.  ``Q_p`` elements are ``p**val * unit`` with ``unit``
    a p-adic unit reduced modulo ``p**prec``; exact zero has ``unit == 0``.
    Instances are immutable.
    """

    __slots__ = ("field", "val", "unit", "prec")

    def __init__(self, field: FieldDescriptor, unit: int, val: int = 0, prec: int = 0):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "val", val)
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    def __reduce__(self):
        return Scalar, (self.field, self.unit, self.val, self.prec)

    @classmethod
    def _zero(cls, field):
        return cls(field, 0)

    @classmethod
    def _padic(cls, field, val, unit, prec):
        prec = min(prec, field.precision)
        return cls(field, unit % field.p**prec, val, prec)

    @property
    def residue(self) -> int:
        if self.field.is_padic:
            raise FieldError("residue is defined for F_p scalars only")
        return self.unit

    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def absolute_precision(self) -> float | int:
        """Digits known in absolute terms (``v + r``); infinite for exact values."""
        if not self.field.is_padic or self.is_zero():
            return float("inf")
        return self.val + self.prec

    def __add__(self, other):
        return add(self, _coerce(other, self.field))

    def __radd__(self, other):
        return add(_coerce(other, self.field), self)

    def __sub__(self, other):
        return sub(self, _coerce(other, self.field))

    def __rsub__(self, other):
        return sub(_coerce(other, self.field), self)

    def __mul__(self, other):
        return mul(self, _coerce(other, self.field))

    def __rmul__(self, other):
        return mul(_coerce(other, self.field), self)

    def __truediv__(self, other):
        return mul(self, inv(_coerce(other, self.field)))

    def __rtruediv__(self, other):
        return mul(_coerce(other, self.field), inv(self))

    def __neg__(self):
        return neg(self)

    def __pow__(self, k: int):
        if k < 0:
            return inv(self) ** (-k)
        result = self.field.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field(other)
        if not isinstance(other, Scalar) or other.field != self.field:
            return NotImplemented
        return scalars_equal(self, other)

    def __hash__(self):
        # Equal Q_p values agree on valuation and leading digit.
        if self.is_zero():
            return hash((self.field, 0))
        if self.field.is_padic:
            return hash((self.field, self.val, self.unit % self.field.p))
        return hash((self.field, self.unit))

    def __bool__(self):
        return not self.is_zero()

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        if self.field.is_padic and not self.is_zero():
            return f"Scalar({self.field}, {self.field.p}^{self.val} * {self.unit} + O({self.field.p}^{self.absolute_precision}))"
        return f"Scalar({self.field}, {self})"


def _check_same(a: FieldDescriptor, b: FieldDescriptor):
    if a != b:
        raise DescriptorMismatch(f"{a} vs {b}")


def _coerce(x, field) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return field(x)
    raise TypeError(f"unsupported operand {type(x).__name__}")


def add(a: Scalar, b: Scalar, *, zero_on_cancel: bool = False) -> Scalar:
    """Sum of two scalars.

    In ``Q_p`` the result is known only to the smaller absolute precision of
    the operands.  If every known digit cancels, :class:`PrecisionLoss` is
    raised unless ``zero_on_cancel`` is set, in which case exact zero is
    returned.
    """
    _check_same(a.field, b.field)
    field = a.field
    if not field.is_padic:
        return Scalar(field, (a.unit + b.unit) % field.p)
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    p = field.p
    vm = min(a.val, b.val)
    absprec = min(a.val + a.prec, b.val + b.prec)
    width = absprec - vm
    raw = (a.unit * p ** (a.val - vm) + b.unit * p ** (b.val - vm)) % p**width
    if raw == 0:
        if zero_on_cancel:
            return Scalar._zero(field)
        raise PrecisionLoss(absprec)
    shift = _valuation(raw, p)
    return Scalar._padic(field, vm + shift, raw // p**shift, width - shift)


def neg(a: Scalar) -> Scalar:
    field = a.field
    if a.is_zero():
        return a
    if not field.is_padic:
        return Scalar(field, field.p - a.unit)
    return Scalar._padic(field, a.val, -a.unit, a.prec)


def sub(a: Scalar, b: Scalar, *, zero_on_cancel: bool = False) -> Scalar:
    return add(a, neg(b), zero_on_cancel=zero_on_cancel)


def mul(a: Scalar, b: Scalar) -> Scalar:
    _check_same(a.field, b.field)
    field = a.field
    if not field.is_padic:
        return Scalar(field, a.unit * b.unit % field.p)
    if a.is_zero() or b.is_zero():
        return Scalar._zero(field)
    prec = min(a.prec, b.prec)
    return Scalar._padic(field, a.val + b.val, a.unit * b.unit, prec)


def inv(a: Scalar) -> Scalar:
    if a.is_zero():
        raise ZeroDivisionError(f"inverse of zero in {a.field}")
    field = a.field
    if not field.is_padic:
        return Scalar(field, pow(a.unit, -1, field.p))
    return Scalar._padic(field, -a.val, pow(a.unit, -1, field.p**a.prec), a.prec)


def scalars_equal(a: Scalar, b: Scalar) -> bool:
    """Equality; ``Q_p`` values are compared at the smaller tracked precision."""
    _check_same(a.field, b.field)
    if not a.field.is_padic:
        return a.unit == b.unit
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    return sub(a, b, zero_on_cancel=True).is_zero()


def norm(a: Scalar) -> Fraction:
    """Absolute value: trivial on ``F_p``, ``p**-v`` on ``Q_p``."""
    if a.is_zero():
        return Fraction(0)
    if not a.field.is_padic:
        return Fraction(1)
    return Fraction(a.field.p) ** (-a.val)


def valuation(a: Scalar) -> float | int:
    if a.is_zero():
        return float("inf")
    return a.val if a.field.is_padic else 0


def from_rational(num: int, den: int, field: FieldDescriptor) -> Scalar:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    p = field.p
    if not field.is_padic:
        if den % p == 0:
            raise FieldError(f"denominator {den} is divisible by p={p}")
        return Scalar(field, num * pow(den, -1, p) % p)
    if num == 0:
        return Scalar._zero(field)
    vn = _valuation(num, p)
    vd = _valuation(den, p)
    un = num // p**vn
    ud = den // p**vd
    modulus = p**field.precision
    return Scalar._padic(field, vn - vd, un * pow(ud, -1, modulus), field.precision)


def to_rational(a: Scalar) -> Fraction:
    """Canonical rational representative: residue for ``F_p``, ``p**v * u`` for ``Q_p``."""
    if a.is_zero():
        return Fraction(0)
    if not a.field.is_padic:
        return Fraction(a.unit)
    return Fraction(a.field.p) ** a.val * a.unit


# --- square roots -----------------------------------------------------------


def legendre(a: int, p: int) -> int:
    """Legendre symbol via the Euler criterion (``p`` odd)."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _tonelli_shanks(a: int, p: int) -> int:
    a %= p
    if a == 0 or p == 2:
        return a
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


@lru_cache(maxsize=64)
def _square_table(p: int) -> dict[int, tuple[int, ...]]:
    table: dict[int, list[int]] = {}
    for x in range(p):
        table.setdefault(x * x % p, []).append(x)
    return {k: tuple(v) for k, v in table.items()}


def sqrt_mod_p(a: int, p: int) -> list[int]:
    """All square roots of ``a`` modulo prime ``p``, ascending.

    The Euler criterion decides existence and Tonelli-Shanks finds a root;
    for ``p < 2**16`` the answer is cross-checked against a table built by
    exhaustive squaring.
    """
    a %= p
    if p == 2 or a == 0:
        roots = [a]
    elif legendre(a, p) != 1:
        roots = []
    else:
        r = _tonelli_shanks(a, p)
        roots = sorted({r, p - r})
    if p < _EXHAUSTIVE_LIMIT:
        assert tuple(roots) == _square_table(p).get(a, ()), (a, p)
    return roots


def hensel_sqrt(u: int, p: int, k: int, r0: int) -> int:
    """Lift ``r0`` with ``r0**2 = u (mod p)`` to a root modulo ``p**k`` (``p`` odd)."""
    if r0 % p == 0:
        raise FieldError("Hensel lifting needs a unit root")
    r, e = r0 % p, 1
    while e < k:
        e = min(2 * e, k)
        mod = p**e
        r = (r - (r * r - u) * pow(2 * r, -1, mod)) % mod
    return r


def _require_odd_padic(field: FieldDescriptor):
    if field.is_padic and field.p == 2:
        raise FieldError("square roots in Q_2 are not supported (F_2 is)")


def sqrt_all(a: Scalar) -> list[Scalar]:
    """Every square root of ``a``; empty when ``a`` is not a square.

    Roots are ordered by their canonical unit representative.  Nonzero
    squares have two roots except in ``F_2`` where ``1 = -1``.
    """
    field = a.field
    _require_odd_padic(field)
    if a.is_zero():
        return [a]
    p = field.p
    if not field.is_padic:
        return [Scalar(field, r) for r in sqrt_mod_p(a.unit, p)]
    if a.val % 2:
        return []
    residues = sqrt_mod_p(a.unit % p, p)
    if not residues:
        return []
    lifts = sorted(hensel_sqrt(a.unit, p, a.prec, r) for r in residues)
    return [Scalar._padic(field, a.val // 2, r, a.prec) for r in lifts]


def is_square(a: Scalar) -> bool:
    field = a.field
    _require_odd_padic(field)
    if a.is_zero():
        return True
    p = field.p
    if not field.is_padic:
        return p == 2 or legendre(a.unit, p) == 1
    return a.val % 2 == 0 and legendre(a.unit, p) == 1


# --- string grammar ---------------------------------------------------------

_PADIC_RE = re.compile(r"^\s*(\d+)\s*\^\s*(-?\d+)\s*\*\s*(-?\d+)\s*$")
_RATIONAL_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(-?\d+)\s*)?$")


def parse_scalar(text: str, field: FieldDescriptor) -> Scalar:
    """Parse ``"7"``, ``"-3/4"`` or (``Q_p`` form) ``"3^-1 * 2"``."""
    m = _PADIC_RE.match(text)
    if m:
        base, v, u = (int(g) for g in m.groups())
        if base != field.p:
            raise FieldError(f"scalar {text!r} written in base {base}, field has p={field.p}")
        return from_rational(u * base ** max(v, 0), base ** max(-v, 0), field)
    m = _RATIONAL_RE.match(text)
    if not m:
        raise FieldError(f"cannot parse scalar {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    return from_rational(num, den, field)


def format_scalar(a: Scalar) -> str:
    if a.is_zero():
        return "0"
    if not a.field.is_padic:
        return str(a.unit)
    return f"{a.field.p}^{a.val} * {a.unit}"


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
