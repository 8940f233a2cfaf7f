"""Magic contractions: witnesses, verification and exhaustive search.

A square or rectangular ``T`` (``m x n``) is a magic contraction when there
are self-adjoint ``M_T`` (``n x n``) and ``M_T*`` (``m x m``) with::

    M_T^2  = I - T* T
    M_T*^2 = I - T T*
    T M_T  = M_T* T

No norm condition is imposed.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

from .fields import FieldDescriptor, FieldError, Scalar, add, is_square, mul, neg, sqrt_all
from .linalg import (
    Matrix,
    ShapeError,
    Vector,
    adjoint,
    apply,
    identity,
    mat_add,
    mat_mul,
    matrix_from_json,
    matrix_to_json,
)

DEFAULT_SEARCH_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


class PreconditionError(ValueError):
    """Inputs do not satisfy the operation's stated preconditions."""


def budget_from_env(default: int) -> int:
    raw = os.environ.get("MAGIC_BUDGET")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"MAGIC_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("MAGIC_BUDGET must be positive")
    return value


@dataclass(frozen=True)
class MagicWitness:
    m_t: Matrix
    m_t_star: Matrix

    def negated(self) -> MagicWitness:
        return MagicWitness(-self.m_t, -self.m_t_star)

    def swapped(self) -> MagicWitness:
        """Witness for ``T*`` built from a witness for ``T``."""
        return MagicWitness(self.m_t_star, self.m_t)

    def to_json(self) -> dict:
        return {"m_t": matrix_to_json(self.m_t), "m_t_star": matrix_to_json(self.m_t_star)}

    @classmethod
    def from_json(cls, obj: dict, field: FieldDescriptor | None = None) -> MagicWitness:
        try:
            return cls(matrix_from_json(obj["m_t"], field), matrix_from_json(obj["m_t_star"], field))
        except (KeyError, TypeError) as exc:
            raise FieldError("witness JSON needs 'm_t' and 'm_t_star'") from exc


def defect(t: Matrix) -> Matrix:
    """``I - T* T``."""
    return mat_add(identity(t.cols, t.field), -mat_mul(adjoint(t), t))


def codefect(t: Matrix) -> Matrix:
    """``I - T T*``."""
    return mat_add(identity(t.rows, t.field), -mat_mul(t, adjoint(t)))


@dataclass
class MagicReport:
    checks: dict[str, bool] = dc_field(default_factory=dict)
    failures: dict[str, list[int]] = dc_field(default_factory=dict)

    @property
    def magic(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.magic

    def to_dict(self) -> dict:
        return {"magic": self.magic, "checks": dict(self.checks), "failures": dict(self.failures)}


def _record(report, name, lhs, rhs):
    where = lhs.first_difference(rhs)
    report.checks[name] = where is None
    if where is not None:
        report.failures[name] = list(where)


def _check_shapes(t: Matrix, w: MagicWitness):
    m, n = t.shape
    if w.m_t.shape != (n, n) or w.m_t_star.shape != (m, m):
        raise ShapeError(
            f"T is {m}x{n}; need M_T {n}x{n} and M_T* {m}x{m}, "
            f"got {w.m_t.shape} and {w.m_t_star.shape}"
        )
    if not (t.field == w.m_t.field == w.m_t_star.field):
        raise FieldError("T and witness live in different fields")


def verify_magic(t: Matrix, w: MagicWitness) -> MagicReport:
    """Check the five defining identities exactly, locating the first failure of each."""
    _check_shapes(t, w)
    report = MagicReport()
    _record(report, "m_t_self_adjoint", w.m_t, adjoint(w.m_t))
    _record(report, "m_t_star_self_adjoint", w.m_t_star, adjoint(w.m_t_star))
    _record(report, "m_t_square", mat_mul(w.m_t, w.m_t), defect(t))
    _record(report, "m_t_star_square", mat_mul(w.m_t_star, w.m_t_star), codefect(t))
    _record(report, "intertwining", mat_mul(t, w.m_t), mat_mul(w.m_t_star, t))
    return report


# --- exhaustive search over F_p ---------------------------------------------


def _sym_from_upper(upper, n):
    m = [[0] * n for _ in range(n)]
    it = iter(upper)
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = next(it)
    return m


def _int_matmul(a, b, p):
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(r, c)) % p for c in bt) for r in a)


@lru_cache(maxsize=32)
def _symmetric_roots(n: int, p: int) -> dict:
    """Map ``S -> [M, ...]`` over all symmetric ``M`` with ``M^2 = S``, in lexicographic order."""
    table: dict = {}
    for upper in itertools.product(range(p), repeat=n * (n + 1) // 2):
        m = tuple(map(tuple, _sym_from_upper(upper, n)))
        table.setdefault(_int_matmul(m, m, p), []).append(m)
    return table


def _search_cost(m: int, n: int, p: int) -> int:
    return p ** (n * (n + 1) // 2) + p ** (m * (m + 1) // 2)


def _ints(a: Matrix):
    return tuple(tuple(x.unit for x in r) for r in a.entries)


def iter_witnesses(t: Matrix, budget: int | None = None):
    """Yield every witness for ``T`` over ``F_p`` in deterministic order.

    Candidates are symmetric matrices enumerated lexicographically by their
    upper triangle (row-major).  ``M_T`` runs over the square roots of the
    defect, ``M_T*`` over those of the codefect, and pairs are kept when they
    intertwine ``T``.
    """
    f = t.field
    if f.is_padic:
        raise PreconditionError(
            "witness search is only decidable over F_p; supply a witness or use is_magic_1x1"
        )
    m, n = t.shape
    budget = budget_from_env(DEFAULT_SEARCH_BUDGET) if budget is None else budget
    cost = _search_cost(m, n, f.p)
    if cost > budget:
        raise BudgetExceeded(f"search over {cost} candidates exceeds budget {budget}")
    p = f.p
    ti = _ints(t)
    roots_t = _symmetric_roots(n, p).get(_ints(defect(t)), [])
    if not roots_t:
        return
    roots_ts = _symmetric_roots(m, p).get(_ints(codefect(t)), [])
    for mt in roots_t:
        lhs = _int_matmul(ti, mt, p)
        for mts in roots_ts:
            if _int_matmul(mts, ti, p) == lhs:
                yield MagicWitness(Matrix(f, mt), Matrix(f, mts))


def search_witnesses(t: Matrix, *, limit: int | None = None, budget: int | None = None) -> list[MagicWitness]:
    """All witnesses for ``T`` (or the first ``limit``); empty means not magic."""
    return list(itertools.islice(iter_witnesses(t, budget), limit))


def count_witnesses(t: Matrix, budget: int | None = None) -> int:
    return sum(1 for _ in iter_witnesses(t, budget))


def is_magic_1x1(t: Scalar) -> tuple[bool, Scalar | None]:
    """Scalar fast path: ``t`` is magic iff ``1 - t^2`` is a square.

    Returns the smallest square root as witness (``M_T = M_T*``).
    """
    d = add(t.field.one(), neg(mul(t, t)), zero_on_cancel=True)
    if not is_square(d):
        return False, None
    return True, sqrt_all(d)[0]


def witness_1x1(t: Scalar) -> MagicWitness | None:
    ok, root = is_magic_1x1(t)
    if not ok:
        return None
    m = Matrix(t.field, [[root]])
    return MagicWitness(m, m)


def check_fixed_point_transfer(t: Matrix, w: MagicWitness, x: Vector) -> bool:
    """For a fixed point ``T x = x`` of a magic contraction, confirm ``T* x = x``.

    Raises :class:`PreconditionError` if the witness is invalid or ``x`` is
    not fixed; otherwise returns whether ``T* x == x``.
    """
    if not t.is_square:
        raise PreconditionError("fixed points need a square T")
    if not verify_magic(t, w):
        raise PreconditionError("witness does not certify T as a magic contraction")
    if apply(t, x) != x:
        raise PreconditionError("x is not a fixed point of T")
    return apply(adjoint(t), x) == x


__all__ = [
    "BudgetExceeded",
    "MagicReport",
    "MagicWitness",
    "PreconditionError",
    "check_fixed_point_transfer",
    "codefect",
    "count_witnesses",
    "defect",
    "is_magic_1x1",
    "iter_witnesses",
    "search_witnesses",
    "verify_magic",
    "witness_1x1",
]
