"""Polynomial calculus, the von Neumann inequality and ergodic compressions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dilation import FinSuppSequence, SzNagyOperator, egervary
from .fields import FieldDescriptor, FieldError, Scalar, add, inv
from .linalg import (
    Matrix,
    ShapeError,
    Vector,
    apply,
    identity,
    mat_add,
    mat_mul,
    op_norm,
    scalar_mul,
    sup_norm,
    zeros,
)
from .magic import MagicWitness, PreconditionError


class PolynomialError(ValueError):
    pass


class CesaroWeightError(FieldError):
    """``N + 1`` is not invertible in the field."""


@dataclass(frozen=True)
class Polynomial:
    """``a_0 + a_1 z + ... + a_N z^N`` with trailing zero coefficients trimmed."""

    field: FieldDescriptor
    coefficients: tuple[Scalar, ...]

    def __init__(self, field: FieldDescriptor, coefficients: Sequence):
        coeffs = [field(c) for c in coefficients]
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def parse(cls, text: str, field: FieldDescriptor) -> Polynomial:
        """From a comma list ``"a0,a1,...,aN"`` of scalar strings."""
        parts = [s.strip() for s in text.split(",")]
        if not parts or any(not s for s in parts):
            raise PolynomialError(f"bad coefficient list {text!r}")
        return cls(field, parts)

    @classmethod
    def monomial(cls, field, k: int) -> Polynomial:
        return cls(field, [0] * k + [1])

    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coefficients) - 1

    def __mul__(self, other: Polynomial) -> Polynomial:
        if self.degree < 0 or other.degree < 0:
            return Polynomial(self.field, [])
        out = [self.field.zero()] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] = add(out[i + j], a * b, zero_on_cancel=True)
        return Polynomial(self.field, out)


def eval_on_matrix(f: Polynomial, a: Matrix) -> Matrix:
    """``f(A)`` by Horner's rule."""
    if not a.is_square:
        raise ShapeError("polynomials act on square matrices")
    if f.field != a.field:
        raise FieldError(f"polynomial over {f.field}, matrix over {a.field}")
    n = a.rows
    result = zeros(n, n, a.field)
    eye = identity(n, a.field)
    for c in reversed(f.coefficients):
        result = mat_add(mat_mul(result, a), scalar_mul(c, eye))
    return result


@dataclass(frozen=True)
class VonNeumannResult:
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def vn_check(f: Polynomial, t: Matrix, w: MagicWitness, n: int) -> VonNeumannResult:
    """Compare ``||f(T)||`` against ``||f(U)||`` for the Egervary ``N``-dilation ``U``."""
    if f.degree > n:
        raise PolynomialError(f"degree {f.degree} exceeds N={n}")
    u = egervary(t, w, n)
    return VonNeumannResult(op_norm(eval_on_matrix(f, t)), op_norm(eval_on_matrix(f, u)))


def _cesaro_weight(field: FieldDescriptor, n: int) -> Scalar:
    if n < 1:
        raise ValueError("N must be a positive integer")
    if not field.is_padic and (n + 1) % field.p == 0:
        raise CesaroWeightError(f"Cesaro weight 1/{n + 1} is not invertible in {field}")
    return inv(field(n + 1))


def cesaro_average(t: Matrix, n: int) -> Matrix:
    """``(1/(N+1)) * (T + T^2 + ... + T^N)``."""
    if not t.is_square:
        raise ShapeError("Cesaro averages need a square T")
    weight = _cesaro_weight(t.field, n)
    total = zeros(t.rows, t.cols, t.field)
    power = identity(t.rows, t.field)
    for _ in range(n):
        power = mat_mul(power, t)
        total = mat_add(total, power)
    return scalar_mul(weight, total)


@dataclass(frozen=True)
class ErgodicResult:
    lhs: Vector
    rhs: Vector

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def __bool__(self):
        return self.equal


def ergodic_compression(t: Matrix, w: MagicWitness, n: int, v: Vector) -> ErgodicResult:
    """Both sides of the compressed Cesaro identity.

    ``lhs`` is ``cesaro_average(T, N) v``; ``rhs`` is the index-0 component of
    ``(1/(N+1)) * sum_{k=1..N} U^k (v at index 0)`` with ``U`` the Sz.-Nagy
    dilation applied lazily.
    """
    lhs = apply(cesaro_average(t, n), v)
    op = SzNagyOperator(t, w)
    x = FinSuppSequence.embed(v)
    total = FinSuppSequence(v.field, len(v))
    for _ in range(n):
        x = op.apply(x)
        total = total + x
    rhs = total.scale(_cesaro_weight(t.field, n))[0]
    return ErgodicResult(lhs, rhs)


def ergodic_compression_check(t: Matrix, w: MagicWitness, n: int, v: Vector) -> bool:
    return ergodic_compression(t, w, n, v).equal


@dataclass
class StabilizationReport:
    differences: list[tuple[int, Fraction]]

    @property
    def nonincreasing_to_zero(self) -> bool:
        """Differences never grow and the last one is zero (a diagnostic, not a limit)."""
        values = [d for _, d in self.differences]
        if not values:
            return False
        return all(a >= b for a, b in zip(values, values[1:])) and values[-1] == 0

    def to_dict(self) -> dict:
        return {
            "differences": [[n, str(d)] for n, d in self.differences],
            "nonincreasing_to_zero": self.nonincreasing_to_zero,
        }


def cesaro_stabilization(t: Matrix, v: Vector, n_max: int) -> StabilizationReport:
    """Table of ``||A_{n+1} v - A_n v||`` for ``1 <= n <= n_max`` over ``Q_p``.

    ``A_n`` is the Cesaro average of ``T`` of order ``n``.  Powers are
    accumulated incrementally, so the cost is linear in ``n_max``.
    """
    if not t.field.is_padic:
        raise PreconditionError("stabilization diagnostics are defined over Q_p")
    if not t.is_square:
        raise ShapeError("Cesaro averages need a square T")
    f = t.field
    partial = Vector.zeros(f, len(v))  # sum_{k<=n} T^k v
    tv = v
    averages = []
    for n in range(1, n_max + 2):
        tv = apply(t, tv)
        partial = partial + tv
        averages.append(partial.scale(_cesaro_weight(f, n)))
    diffs = [(n, sup_norm(averages[n] - averages[n - 1])) for n in range(1, n_max + 1)]
    return StabilizationReport(diffs)

