"""Unitary dilations of magic contractions.

Three constructions are provided:

``halmos``
    The 2x2 block unitary ``[[T, M_T*], [M_T, -T*]]`` on ``X + X``.
``egervary``
    An ``(N+1)``-block unitary whose powers compress to ``T^k`` for
    ``k <= N`` (and in general not beyond).
``SzNagyOperator``
    The bi-infinite shift-like unitary on finitely supported ``Z``-indexed
    sequences, compressing to ``T^n`` for every ``n``.  It is never
    materialised as a matrix.

``X`` always sits at block 0 (sequence index 0).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Sequence

from .fields import FieldDescriptor
from .linalg import (
    Matrix,
    ShapeError,
    Vector,
    adjoint,
    apply,
    identity,
    inner_product,
    mat_pow,
    sup_norm,
    vector_from_json,
    vector_to_json,
)
from .linalg import _sum as _sum_scalars
from .magic import MagicWitness, PreconditionError, verify_magic


def _require_valid(t: Matrix, w: MagicWitness):
    if not t.is_square:
        raise ShapeError("dilations need a square T")
    report = verify_magic(t, w)
    if not report:
        failed = sorted(k for k, ok in report.checks.items() if not ok)
        raise PreconditionError(f"witness invalid: {', '.join(failed)} fail")


def block_matrix(blocks: Sequence[Sequence[Matrix | None]], d: int, field: FieldDescriptor) -> Matrix:
    """Assemble a square grid of ``d x d`` blocks; ``None`` stands for zero."""
    zero = field.zero()
    rows = []
    for brow in blocks:
        for i in range(d):
            row = []
            for b in brow:
                if b is None:
                    row.extend([zero] * d)
                else:
                    if b.shape != (d, d):
                        raise ShapeError(f"block of shape {b.shape}, expected {d}x{d}")
                    row.extend(b.entries[i])
            rows.append(row)
    return Matrix._raw(field, rows)


def block(a: Matrix, d: int, i: int, j: int) -> Matrix:
    return Matrix._raw(a.field, [r[j * d:(j + 1) * d] for r in a.entries[i * d:(i + 1) * d]])


def halmos(t: Matrix, w: MagicWitness, *, check: bool = True) -> Matrix:
    """``[[T, M_T*], [M_T, -T*]]``; ``check=False`` skips witness validation."""
    if check:
        _require_valid(t, w)
    elif not t.is_square:
        raise ShapeError("dilations need a square T")
    return block_matrix([[t, w.m_t_star], [w.m_t, -adjoint(t)]], t.rows, t.field)


def egervary(t: Matrix, w: MagicWitness, n: int, *, check: bool = True) -> Matrix:
    """``(N+1) x (N+1)`` block unitary dilating ``T`` up to power ``N``.

    Block row 0 is ``[T, 0, ..., 0, M_T*]``, block row 1 is
    ``[M_T, 0, ..., 0, -T*]`` and block row ``i >= 2`` has the identity in
    block column ``i - 1``.  For ``N = 1`` this is the Halmos dilation.
    """
    if n < 1:
        raise ValueError("N must be a positive integer")
    if check:
        _require_valid(t, w)
    elif not t.is_square:
        raise ShapeError("dilations need a square T")
    d, f = t.rows, t.field
    size = n + 1
    grid: list[list[Matrix | None]] = [[None] * size for _ in range(size)]
    grid[0][0], grid[0][n] = t, w.m_t_star
    grid[1][0], grid[1][n] = w.m_t, -adjoint(t)
    eye = identity(d, f)
    for i in range(2, size):
        grid[i][i - 1] = eye
    return block_matrix(grid, d, f)


def compress(u: Matrix, d: int, k: int = 1) -> Matrix:
    """Top-left ``d x d`` block of ``U^k``, i.e. ``P_X U^k`` restricted to ``X``."""
    if not u.is_square or d < 1 or u.rows % d:
        raise ShapeError(f"{u.rows}x{u.cols} is not a square grid of {d}x{d} blocks")
    return block(mat_pow(u, k), d, 0, 0)


# --- bi-infinite direct sum -------------------------------------------------


class FinSuppSequence:
    """Finitely supported ``Z``-indexed family of vectors in ``K^d``.

    Zero vectors are never stored, so two sequences are equal exactly when
    their supports and entries agree.
    """

    __slots__ = ("field", "dim", "support")

    def __init__(self, field: FieldDescriptor, dim: int, support: Mapping[int, Vector] | None = None):
        self.field = field
        self.dim = dim
        trimmed = {}
        for n, v in (support or {}).items():
            if not isinstance(v, Vector):
                v = Vector(field, v)
            if v.field != field or len(v) != dim:
                raise ShapeError(f"entry {n} is not a vector in {field}^{dim}")
            if not v.is_zero():
                trimmed[int(n)] = v
        self.support = dict(sorted(trimmed.items()))

    @classmethod
    def embed(cls, v: Vector, index: int = 0) -> FinSuppSequence:
        return cls(v.field, len(v), {index: v})

    @classmethod
    def basis(cls, field, dim, index, j) -> FinSuppSequence:
        return cls(field, dim, {index: Vector.basis(field, dim, j)})

    def __getitem__(self, n: int) -> Vector:
        v = self.support.get(n)
        return v if v is not None else Vector.zeros(self.field, self.dim)

    def indices(self):
        return self.support.keys()

    def is_zero(self) -> bool:
        return not self.support

    def norm(self) -> Fraction:
        return max((sup_norm(v) for v in self.support.values()), default=Fraction(0))

    def __add__(self, other: FinSuppSequence) -> FinSuppSequence:
        out = dict(self.support)
        for n, v in other.support.items():
            out[n] = out[n] + v if n in out else v
        return FinSuppSequence(self.field, self.dim, out)

    def scale(self, c) -> FinSuppSequence:
        return FinSuppSequence(self.field, self.dim, {n: v.scale(c) for n, v in self.support.items()})

    def __eq__(self, other):
        if not isinstance(other, FinSuppSequence):
            return NotImplemented
        return (self.field, self.dim, self.support) == (other.field, other.dim, other.support)

    def __repr__(self):
        body = ", ".join(f"{n}: {vector_to_json(v)}" for n, v in self.support.items())
        return f"FinSuppSequence({self.field}, d={self.dim}, {{{body}}})"

    def to_json(self) -> dict:
        return {"support": {str(n): vector_to_json(v) for n, v in self.support.items()}}

    @classmethod
    def from_json(cls, obj: dict, field: FieldDescriptor, dim: int) -> FinSuppSequence:
        support = obj.get("support") if isinstance(obj, dict) else None
        if not isinstance(support, dict):
            raise ValueError("sequence JSON needs a 'support' object")
        try:
            parsed = {int(k): vector_from_json(v, field) for k, v in support.items()}
        except ValueError as exc:
            raise ValueError(f"bad sequence entry: {exc}") from exc
        return cls(field, dim, parsed)


def sequence_inner_product(a: FinSuppSequence, b: FinSuppSequence):
    common = a.support.keys() & b.support.keys()
    return _sum_scalars(a.field, (inner_product(a.support[n], b.support[n]) for n in sorted(common)))


@dataclass(frozen=True)
class SzNagyOperator:
    """The Sz.-Nagy unitary dilation acting lazily on finitely supported sequences.

    ``U`` sends ``x`` to ``y`` with::

        y_0  = T x_0 + M_T* x_1
        y_-1 = M_T x_0 - T* x_1
        y_n  = x_{n+1}            (n not in {0, -1})
    """

    t: Matrix
    witness: MagicWitness
    _t_star: Matrix = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _require_valid(self.t, self.witness)
        object.__setattr__(self, "_t_star", adjoint(self.t))

    @classmethod
    def unchecked(cls, t: Matrix, witness: MagicWitness) -> SzNagyOperator:
        """Build without validating the witness (negative controls only)."""
        op = object.__new__(cls)
        object.__setattr__(op, "t", t)
        object.__setattr__(op, "witness", witness)
        object.__setattr__(op, "_t_star", adjoint(t))
        return op

    @property
    def dim(self) -> int:
        return self.t.rows

    def _check(self, x: FinSuppSequence):
        if x.field != self.t.field or x.dim != self.dim:
            raise ShapeError("sequence does not live in the dilation space")

    def apply(self, x: FinSuppSequence) -> FinSuppSequence:
        self._check(x)
        x0, x1 = x[0], x[1]
        out = {n - 1: v for n, v in x.support.items() if n not in (0, 1)}
        out[0] = apply(self.t, x0) + apply(self.witness.m_t_star, x1)
        out[-1] = apply(self.witness.m_t, x0) - apply(self._t_star, x1)
        return FinSuppSequence(x.field, x.dim, out)

    def apply_adjoint(self, x: FinSuppSequence) -> FinSuppSequence:
        self._check(x)
        xm1, x0 = x[-1], x[0]
        out = {n + 1: v for n, v in x.support.items() if n not in (-1, 0)}
        out[0] = apply(self.witness.m_t, xm1) + apply(self._t_star, x0)
        out[1] = -apply(self.t, xm1) + apply(self.witness.m_t_star, x0)
        return FinSuppSequence(x.field, x.dim, out)


def sznagy_apply(op: SzNagyOperator, x: FinSuppSequence) -> FinSuppSequence:
    return op.apply(x)


def sznagy_apply_adjoint(op: SzNagyOperator, x: FinSuppSequence) -> FinSuppSequence:
    return op.apply_adjoint(x)


def sznagy_compress(op: SzNagyOperator, n: int, v: Vector, *, star: bool = False) -> Vector:
    """Index-0 component of ``U^n`` (or ``U*^n``) applied to ``v`` placed at index 0."""
    step = op.apply_adjoint if star else op.apply
    x = FinSuppSequence.embed(v)
    for _ in range(n):
        x = step(x)
    return x[0]


def sznagy_trace(op: SzNagyOperator, x: FinSuppSequence, steps: int, *, star: bool = False) -> list[FinSuppSequence]:
    """``[x, U x, U^2 x, ...]`` with ``steps`` applications."""
    step = op.apply_adjoint if star else op.apply
    trace = [x]
    for _ in range(steps):
        trace.append(step(trace[-1]))
    return trace


@dataclass
class WindowReport:
    window: int
    checked: int = 0
    passed: bool = True
    failure: dict | None = None

    def to_dict(self) -> dict:
        return {"window": self.window, "checked": self.checked, "passed": self.passed, "failure": self.failure}


def _random_sequence(op, window, rng):
    f, d = op.t.field, op.dim
    support = {}
    for n in range(-window, window + 1):
        if rng.random() < 0.5:
            support[n] = Vector(f, [rng.randrange(f.p) for _ in range(d)])
    return FinSuppSequence(f, d, support)


def verify_unitary_window(op: SzNagyOperator, window: int, *, pairs: int = 50, seed: int = 0) -> WindowReport:
    """Exact unitarity audit of ``U`` on sequences supported in ``[-window, window]``.

    Every basis sequence ``e_j`` at index ``k`` is checked for
    ``U U* = U* U = I``; then ``<U a, b> = <a, U* b>`` is checked on
    ``pairs`` seeded random sequences.  The first failure is located.
    """
    report = WindowReport(window)
    f, d = op.t.field, op.dim
    for k in range(-window, window + 1):
        for j in range(d):
            e = FinSuppSequence.basis(f, d, k, j)
            report.checked += 1
            for label, got in (("U*U", op.apply_adjoint(op.apply(e))), ("UU*", op.apply(op.apply_adjoint(e)))):
                if got != e:
                    report.passed = False
                    report.failure = {"identity": label, "index": k, "coordinate": j}
                    return report
    rng = random.Random(seed)
    for i in range(pairs):
        a, b = _random_sequence(op, window, rng), _random_sequence(op, window, rng)
        report.checked += 1
        if sequence_inner_product(op.apply(a), b) != sequence_inner_product(a, op.apply_adjoint(b)):
            report.passed = False
            report.failure = {"identity": "<Ua,b>=<a,U*b>", "pair": i}
            return report
    return report


__all__ = [
    "FinSuppSequence",
    "SzNagyOperator",
    "WindowReport",
    "block",
    "block_matrix",
    "compress",
    "egervary",
    "halmos",
    "sequence_inner_product",
    "sznagy_apply",
    "sznagy_apply_adjoint",
    "sznagy_compress",
    "sznagy_trace",
    "verify_unitary_window",
]
