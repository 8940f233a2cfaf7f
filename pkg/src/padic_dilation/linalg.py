"""Dense exact vectors and matrices over a single field.

The space ``K^d`` carries the sup norm and the symmetric bilinear form
``<x, y> = sum x_j y_j``.  There is no conjugation, so the adjoint of a matrix
is its transpose.

Inside matrix arithmetic a ``Q_p`` sum whose digits cancel completely is
taken to be zero: equality is decided at the tracked precision anyway.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Sequence

from .fields import (
    FieldDescriptor,
    FieldError,
    PADIC_FIELD,
    PRIME_FIELD,
    DescriptorMismatch,
    Scalar,
    add,
    format_scalar,
    mul,
    neg,
    norm,
)


class ShapeError(ValueError):
    pass


def _sum(field: FieldDescriptor, terms: Iterable[Scalar]) -> Scalar:
    total = field.zero()
    for t in terms:
        total = add(total, t, zero_on_cancel=True)
    return total


class Vector:
    __slots__ = ("field", "entries")

    def __init__(self, field: FieldDescriptor, entries: Iterable):
        entries = tuple(field(e) for e in entries)
        if not entries:
            raise ShapeError("vectors need at least one entry")
        self.field = field
        self.entries = entries

    @classmethod
    def zeros(cls, field, d):
        return cls(field, [field.zero()] * d)

    @classmethod
    def basis(cls, field, d, j):
        return cls(field, [field.one() if i == j else field.zero() for i in range(d)])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, j):
        return self.entries[j]

    def _check(self, other):
        if self.field != other.field:
            raise DescriptorMismatch(f"{self.field} vs {other.field}")
        if len(self) != len(other):
            raise ShapeError(f"length {len(self)} vs {len(other)}")

    def __add__(self, other: Vector) -> Vector:
        self._check(other)
        return Vector(self.field, [add(a, b, zero_on_cancel=True) for a, b in zip(self, other)])

    def __neg__(self):
        return Vector(self.field, [neg(a) for a in self])

    def __sub__(self, other: Vector) -> Vector:
        return self + (-other)

    def scale(self, c: Scalar) -> Vector:
        c = self.field(c)
        return Vector(self.field, [mul(c, a) for a in self])

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self)

    def __eq__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        return self.field == other.field and len(self) == len(other) and all(
            a == b for a, b in zip(self, other)
        )

    def __hash__(self):
        return hash((self.field, self.entries))

    def __repr__(self):
        return f"Vector({self.field}, [{', '.join(map(format_scalar, self))}])"


class Matrix:
    """Row-major dense matrix; immutable."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: FieldDescriptor, rows: Sequence[Sequence]):
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise ShapeError("matrices need at least one row and column")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ShapeError("ragged rows")
        self.field = field
        self.rows = len(rows)
        self.cols = n
        self.entries = tuple(tuple(field(x) for x in r) for r in rows)

    @classmethod
    def _raw(cls, field, entries):
        m = cls.__new__(cls)
        m.field = field
        m.entries = tuple(tuple(r) for r in entries)
        m.rows = len(m.entries)
        m.cols = len(m.entries[0])
        return m

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i) -> Vector:
        return Vector(self.field, self.entries[i])

    def column(self, j) -> Vector:
        return Vector(self.field, [r[j] for r in self.entries])

    def __matmul__(self, other):
        if isinstance(other, Vector):
            return apply(self, other)
        return mat_mul(self, other)

    def __add__(self, other):
        return mat_add(self, other)

    def __sub__(self, other):
        return mat_add(self, -other)

    def __neg__(self):
        return Matrix._raw(self.field, [[neg(x) for x in r] for r in self.entries])

    def __pow__(self, k: int):
        return mat_pow(self, k)

    @property
    def T(self) -> Matrix:
        return adjoint(self)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and all(a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb))
        )

    def __hash__(self):
        return hash((self.field, self.entries))

    def first_difference(self, other: Matrix):
        """Coordinates of the first entry where ``self`` and ``other`` differ, else None."""
        for i, (ra, rb) in enumerate(zip(self.entries, other.entries)):
            for j, (a, b) in enumerate(zip(ra, rb)):
                if a != b:
                    return i, j
        return None

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.entries for x in r)

    def to_lists(self) -> list[list[str]]:
        return [[format_scalar(x) for x in r] for r in self.entries]

    def __repr__(self):
        return f"Matrix({self.field}, {self.to_lists()})"


def identity(n: int, field: FieldDescriptor) -> Matrix:
    one, zero = field.one(), field.zero()
    return Matrix._raw(field, [[one if i == j else zero for j in range(n)] for i in range(n)])


def zeros(rows: int, cols: int, field: FieldDescriptor) -> Matrix:
    zero = field.zero()
    return Matrix._raw(field, [[zero] * cols for _ in range(rows)])


def _check_field(a, b):
    if a.field != b.field:
        raise DescriptorMismatch(f"{a.field} vs {b.field}")


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    _check_field(a, b)
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    f = a.field
    bcols = list(zip(*b.entries))
    return Matrix._raw(f, [[_sum(f, map(mul, r, c)) for c in bcols] for r in a.entries])


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    _check_field(a, b)
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape}")
    return Matrix._raw(
        a.field,
        [[add(x, y, zero_on_cancel=True) for x, y in zip(ra, rb)] for ra, rb in zip(a.entries, b.entries)],
    )


def scalar_mul(c, a: Matrix) -> Matrix:
    c = a.field(c)
    return Matrix._raw(a.field, [[mul(c, x) for x in r] for r in a.entries])


def mat_pow(a: Matrix, k: int) -> Matrix:
    if not a.is_square:
        raise ShapeError("mat_pow needs a square matrix")
    if k < 0:
        raise ValueError("negative power")
    result = identity(a.rows, a.field)
    base = a
    while k:
        if k & 1:
            result = mat_mul(result, base)
        k >>= 1
        if k:
            base = mat_mul(base, base)
    return result


def apply(a: Matrix, x: Vector) -> Vector:
    if a.field != x.field:
        raise DescriptorMismatch(f"{a.field} vs {x.field}")
    if a.cols != len(x):
        raise ShapeError(f"cannot apply {a.shape} to length {len(x)}")
    return Vector(a.field, [_sum(a.field, map(mul, r, x.entries)) for r in a.entries])


def adjoint(a: Matrix) -> Matrix:
    return Matrix._raw(a.field, list(zip(*a.entries)))


def inner_product(x: Vector, y: Vector) -> Scalar:
    x._check(y)
    return _sum(x.field, map(mul, x.entries, y.entries))


def sup_norm(x: Vector) -> Fraction:
    return max(norm(a) for a in x)


def op_norm(a: Matrix) -> Fraction:
    """Operator norm for the sup norm on both sides: the largest entry norm."""
    return max(norm(x) for r in a.entries for x in r)


def is_self_adjoint(a: Matrix) -> bool:
    return a.is_square and a == adjoint(a)


def is_isometry(a: Matrix) -> bool:
    return mat_mul(adjoint(a), a) == identity(a.cols, a.field)


def is_unitary(a: Matrix) -> bool:
    if not a.is_square:
        return False
    eye = identity(a.rows, a.field)
    a_star = adjoint(a)
    return mat_mul(a, a_star) == eye and mat_mul(a_star, a) == eye


def is_projection(a: Matrix) -> bool:
    return is_self_adjoint(a) and mat_mul(a, a) == a


# --- Hilbert-space axiom audit ---------------------------------------------


@dataclass
class AxiomResult:
    name: str
    passed: bool
    checked: int = 0
    counterexample: dict | None = None


@dataclass
class AxiomReport:
    field: FieldDescriptor
    dim: int
    results: list[AxiomResult] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "field": descriptor_to_json(self.field),
            "dim": self.dim,
            "passed": self.passed,
            "axioms": {
                r.name: {"passed": r.passed, "checked": r.checked, "counterexample": r.counterexample}
                for r in self.results
            },
        }


def check_axioms(field: FieldDescriptor, samples: Sequence[Vector], scalars: Sequence[Scalar] = ()) -> AxiomReport:
    """Audit the p-adic Hilbert space axioms for ``K^d`` on sample vectors.

    * nondegeneracy: the Gram matrix of the standard basis is the identity;
    * symmetry ``<x, y> = <y, x>`` on all sample pairs;
    * linearity ``<a x + y, z> = a <x, z> + <y, z>`` on consecutive triples
      against every supplied scalar (and ``1`` and ``-1``);
    * the bound ``|<x, y>| <= ||x|| ||y||`` on all sample pairs.
    """
    if not samples:
        raise ValueError("need at least one sample vector")
    d = len(samples[0])
    if any(len(x) != d for x in samples):
        raise ShapeError("samples must share a dimension")
    report = AxiomReport(field, d)

    basis = [Vector.basis(field, d, j) for j in range(d)]
    gram = Matrix._raw(field, [[inner_product(u, w) for w in basis] for u in basis])
    where = gram.first_difference(identity(d, field))
    report.results.append(
        AxiomResult("nondegeneracy", where is None, d * d, None if where is None else {"gram_entry": list(where)})
    )

    res = AxiomResult("symmetry", True)
    for i, x in enumerate(samples):
        for j, y in enumerate(samples):
            res.checked += 1
            if inner_product(x, y) != inner_product(y, x):
                res.passed, res.counterexample = False, {"x": i, "y": j}
                break
        if not res.passed:
            break
    report.results.append(res)

    coeffs = [field(c) for c in scalars] + [field.one(), -field.one()]
    res = AxiomResult("linearity", True)
    k = len(samples)
    for i in range(k):
        x, y, z = samples[i], samples[(i + 1) % k], samples[(i + 2) % k]
        for a in coeffs:
            res.checked += 1
            lhs = inner_product(x.scale(a) + y, z)
            rhs = add(mul(a, inner_product(x, z)), inner_product(y, z), zero_on_cancel=True)
            if lhs != rhs:
                res.passed, res.counterexample = False, {"x": i, "scalar": format_scalar(a)}
                break
        if not res.passed:
            break
    report.results.append(res)

    res = AxiomResult("norm_bound", True)
    for i, x in enumerate(samples):
        for j, y in enumerate(samples):
            res.checked += 1
            if norm(inner_product(x, y)) > sup_norm(x) * sup_norm(y):
                res.passed, res.counterexample = False, {"x": i, "y": j}
                break
        if not res.passed:
            break
    report.results.append(res)
    return report


# --- JSON -------------------------------------------------------------------


def descriptor_to_json(field: FieldDescriptor) -> dict:
    out = {"kind": field.kind, "p": field.p}
    if field.is_padic:
        out["precision"] = field.precision
    return out


def descriptor_from_json(obj: dict) -> FieldDescriptor:
    try:
        kind, p = obj["kind"], obj["p"]
    except (KeyError, TypeError) as exc:
        raise FieldError(f"field object needs 'kind' and 'p': {obj!r}") from exc
    if kind == PADIC_FIELD:
        return FieldDescriptor(kind, p, obj.get("precision"))
    if kind == PRIME_FIELD:
        return FieldDescriptor(kind, p)
    raise FieldError(f"unknown field kind {kind!r}")


def _scalar_from_json(x, field):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise FieldError(f"scalar must be a string or integer, got {x!r}")
    return field(x)


def matrix_to_json(a: Matrix) -> dict:
    return {"field": descriptor_to_json(a.field), "rows": a.to_lists()}


def matrix_from_json(obj: dict, field: FieldDescriptor | None = None) -> Matrix:
    """Decode ``{"field": {...}, "rows": [[...], ...]}``.

    ``field`` is used when the object carries none; when both are present they
    must agree.
    """
    if not isinstance(obj, dict) or "rows" not in obj:
        raise FieldError("matrix JSON needs a 'rows' array")
    declared = descriptor_from_json(obj["field"]) if "field" in obj else None
    if declared is not None and field is not None and declared != field:
        raise DescriptorMismatch(f"matrix declares {declared}, expected {field}")
    field = declared or field
    if field is None:
        raise FieldError("no field given for matrix")
    rows = obj["rows"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise FieldError("'rows' must be a list of lists")
    return Matrix(field, [[_scalar_from_json(x, field) for x in r] for r in rows])


def vector_to_json(x: Vector) -> list[str]:
    return [format_scalar(a) for a in x]


def vector_from_json(obj, field: FieldDescriptor) -> Vector:
    if isinstance(obj, dict):
        if "field" in obj and descriptor_from_json(obj["field"]) != field:
            raise DescriptorMismatch("vector field differs from matrix field")
        obj = obj.get("entries")
    if not isinstance(obj, list):
        raise FieldError("vector JSON must be a list of scalars or {'entries': [...]}")
    return Vector(field, [_scalar_from_json(x, field) for x in obj])


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)
