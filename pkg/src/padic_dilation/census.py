"""Counting magic contractions in ``M_n(F_p)``.

Every ``T`` is visited in lexicographic order of its row-major entries and
run through the exhaustive witness search.  The scan can be cut into
contiguous partitions and farmed out to worker processes; partitions are
merged back in order, so the output does not depend on how the work was
split.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

from .fields import Fp, FieldError, is_square
from .linalg import Matrix
from .magic import (
    BudgetExceeded,
    MagicWitness,
    budget_from_env,
    iter_witnesses,
    verify_magic,
)

DEFAULT_CENSUS_BUDGET = 10**6

CSV_COLUMNS = ["p", "n", "matrix_entries", "witness_count", "sample_m_t", "sample_m_t_star"]


@dataclass(frozen=True)
class CensusRow:
    t: Matrix
    witness_count: int
    sample_witness: MagicWitness | None = None

    @property
    def magic(self) -> bool:
        return self.witness_count > 0


@dataclass
class CensusResult:
    n: int
    p: int
    total_matrices: int
    magic_count: int
    rows: list[CensusRow] = dc_field(default_factory=list)
    exhaustive_counts: bool = False

    def magic_rows(self) -> list[CensusRow]:
        return [r for r in self.rows if r.magic]


def census_cost(n: int, p: int) -> int:
    return p ** (n * n) * p ** (n * (n + 1) // 2)


def _matrix_at(index: int, n: int, p: int) -> Matrix:
    digits = []
    for _ in range(n * n):
        index, r = divmod(index, p)
        digits.append(r)
    digits.reverse()
    return Matrix(Fp(p), [digits[i * n:(i + 1) * n] for i in range(n)])


def _scan(args) -> list[CensusRow]:
    n, p, start, stop, full = args
    rows = []
    for index in range(start, stop):
        t = _matrix_at(index, n, p)
        it = iter_witnesses(t, budget=float("inf"))
        first = next(it, None)
        if first is None:
            rows.append(CensusRow(t, 0))
            continue
        count = 1 + (sum(1 for _ in it) if full else 0)
        rows.append(CensusRow(t, count, first))
    return rows


def _ranges(total: int, partitions: int) -> list[tuple[int, int]]:
    partitions = max(1, min(partitions, total))
    step, extra = divmod(total, partitions)
    out, start = [], 0
    for k in range(partitions):
        stop = start + step + (k < extra)
        out.append((start, stop))
        start = stop
    return out


def count_magic(
    n: int,
    p: int,
    *,
    full_witness_count: bool = False,
    partitions: int = 1,
    jobs: int = 1,
    budget: int | None = None,
) -> CensusResult:
    """Exhaustively classify every ``T`` in ``M_n(F_p)``.

    By default each search stops at the first witness, so ``witness_count``
    is 1 for every magic ``T``; ``full_witness_count`` counts them all.
    ``partitions`` splits the lexicographic range; ``jobs > 1`` scans the
    partitions in worker processes.  Exceeding ``budget`` (measured as
    ``p^(n^2) * p^(n(n+1)/2)``) is an error, never a truncation.
    """
    Fp(p)
    if n < 1:
        raise ValueError("n must be positive")
    budget = budget_from_env(DEFAULT_CENSUS_BUDGET) if budget is None else budget
    cost = census_cost(n, p)
    if cost > budget:
        raise BudgetExceeded(f"census of M_{n}(F_{p}) costs {cost}, budget is {budget}")
    total = p ** (n * n)
    tasks = [(n, p, a, b, full_witness_count) for a, b in _ranges(total, partitions)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_scan, tasks))
    else:
        chunks = [_scan(task) for task in tasks]
    rows = [row for chunk in chunks for row in chunk]
    return CensusResult(
        n, p, total, sum(r.magic for r in rows), rows, exhaustive_counts=full_witness_count
    )


def scalar_census(p: int) -> int:
    """Number of ``t`` in ``F_p`` (``p`` odd) with ``1 - t^2`` a square, by the Euler criterion."""
    f = Fp(p)
    if p == 2:
        raise FieldError("scalar_census needs an odd prime; use count_magic(1, 2)")
    return sum(is_square(f(1 - t * t)) for t in range(p))


def parametric_family(p: int) -> list[tuple[int, int, Matrix, MagicWitness]]:
    """All ``(a, b)`` with ``a^2 + b^2 = p - 1`` and ``2ab = p - 2`` mod ``p``.

    Each solution comes with ``T`` (the 2x2 matrix with every entry ``p - 1``)
    and the witness ``M_T = M_T* = [[a, b], [b, a]]``.
    """
    f = Fp(p)
    t = Matrix(f, [[p - 1, p - 1], [p - 1, p - 1]])
    out = []
    for a in range(p):
        for b in range(p):
            if (a * a + b * b) % p == (p - 1) % p and (2 * a * b) % p == (p - 2) % p:
                m = Matrix(f, [[a, b], [b, a]])
                out.append((a, b, t, MagicWitness(m, m)))
    return out


def _join(a: Matrix) -> str:
    return ";".join(str(x.unit) for r in a.entries for x in r)


def write_csv(result: CensusResult, stream) -> None:
    """One line per magic ``T``."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in result.magic_rows():
        s = row.sample_witness
        w.writerow([result.p, result.n, _join(row.t), row.witness_count, _join(s.m_t), _join(s.m_t_star)])


def census_csv(result: CensusResult) -> str:
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()


def read_csv(stream) -> list[dict]:
    """Parse a census CSV back into dicts of matrices (for audits and round trips)."""
    out = []
    for rec in csv.DictReader(stream):
        p, n = int(rec["p"]), int(rec["n"])
        f = Fp(p)

        def mat(s):
            vals = [int(x) for x in s.split(";")]
            return Matrix(f, [vals[i * n:(i + 1) * n] for i in range(n)])

        t = mat(rec["matrix_entries"])
        w = MagicWitness(mat(rec["sample_m_t"]), mat(rec["sample_m_t_star"]))
        out.append({"p": p, "n": n, "t": t, "witness_count": int(rec["witness_count"]), "witness": w})
    return out


def audit_rows(result: CensusResult) -> bool:
    """Every magic row's sample witness must verify."""
    return all(verify_magic(r.t, r.sample_witness).magic for r in result.magic_rows())
