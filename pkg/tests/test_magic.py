import itertools
import random

import pytest

from padic_dilation.dilation import halmos
from padic_dilation.fields import FieldError, Fp, Qp
from padic_dilation.linalg import Matrix, Vector, adjoint, apply, identity, is_unitary, mat_mul, zeros
from padic_dilation.magic import (
    BudgetExceeded,
    MagicWitness,
    PreconditionError,
    check_fixed_point_transfer,
    codefect,
    count_witnesses,
    defect,
    is_magic_1x1,
    search_witnesses,
    verify_magic,
)

from conftest import random_matrix, random_triples, valid_triples


def test_defects_of_reference_examples(z3_example, z2_example):
    t3, _ = z3_example
    assert defect(t3) == Matrix(Fp(3), [[2, 1], [1, 2]])
    assert codefect(t3) == defect(t3)
    t2, _ = z2_example
    assert defect(t2) == identity(2, Fp(2))
    u = Matrix(Fp(2), [[1, 1, 0, 1], [1, 1, 1, 0], [0, 1, 1, 1], [1, 0, 1, 1]])
    assert defect(u).is_zero()


def test_verify_z3_example(z3_example):
    t, w = z3_example
    report = verify_magic(t, w)
    assert report.magic
    assert set(report.checks) == {
        "m_t_self_adjoint",
        "m_t_star_self_adjoint",
        "m_t_square",
        "m_t_star_square",
        "intertwining",
    }
    assert mat_mul(t, w.m_t).is_zero()


def test_verify_z2_examples(z2_example, z2_identity_witness):
    t, w = z2_example
    assert verify_magic(t, w)
    assert verify_magic(t, z2_identity_witness)


def test_verify_identity_with_zero_witness():
    f = Fp(7)
    z = zeros(3, 3, f)
    assert verify_magic(identity(3, f), MagicWitness(z, z))


def test_verify_reports_first_failure(z3_example):
    t, _ = z3_example
    bad = Matrix(Fp(3), [[1, 0], [0, 1]])
    report = verify_magic(t, MagicWitness(bad, bad))
    assert not report.magic
    assert report.checks["m_t_self_adjoint"]
    assert not report.checks["m_t_square"]
    assert report.failures["m_t_square"] == [0, 0]
    nonsym = Matrix(Fp(3), [[2, 1], [0, 2]])
    assert verify_magic(t, MagicWitness(nonsym, bad)).failures["m_t_self_adjoint"] == [0, 1]


def test_verify_shape_errors(z3_example):
    t, w = z3_example
    with pytest.raises(ValueError):
        verify_magic(t, MagicWitness(identity(3, Fp(3)), w.m_t_star))
    with pytest.raises(FieldError):
        verify_magic(t, MagicWitness(identity(2, Fp(5)), identity(2, Fp(5))))


def test_search_z5_scalar_two_is_empty():
    assert search_witnesses(Matrix(Fp(5), [[2]])) == []
    assert is_magic_1x1(Fp(5)(2)) == (False, None)


def test_search_z2_example_finds_both_known_witnesses(z2_example, z2_identity_witness):
    t, swap = z2_example
    found = search_witnesses(t)
    assert swap in found and z2_identity_witness in found
    # Mixed choices are valid too: 4 witnesses in all (brute-force oracle).
    assert len(found) == 4


def test_search_f3_zero_scalar():
    f = Fp(3)
    found = search_witnesses(Matrix(f, [[0]]))
    pairs = [(w.m_t[0, 0].unit, w.m_t_star[0, 0].unit) for w in found]
    assert pairs == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_search_is_deterministic(z3_example):
    t, w = z3_example
    first = search_witnesses(t)
    assert first == search_witnesses(t)
    assert w in first
    assert search_witnesses(t, limit=1) == first[:1]


def test_search_rejects_padic_and_budget():
    with pytest.raises(PreconditionError):
        search_witnesses(Matrix(Qp(3), [[3]]))
    with pytest.raises(BudgetExceeded):
        search_witnesses(identity(3, Fp(5)), budget=1000)


def test_budget_env_override(monkeypatch):
    monkeypatch.setenv("MAGIC_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        search_witnesses(identity(2, Fp(3)))
    monkeypatch.setenv("MAGIC_BUDGET", "lots")
    with pytest.raises(ValueError):
        search_witnesses(identity(2, Fp(3)))


def test_is_magic_1x1_examples():
    ok, root = is_magic_1x1(Qp(3, 3)(3))
    assert ok and root.val == 0 and root.unit == 10
    for f in (Fp(7), Qp(5, 6)):
        ok, root = is_magic_1x1(f(1))
        assert ok and root.is_zero()


def test_is_magic_1x1_rejects_q2():
    with pytest.raises(FieldError):
        is_magic_1x1(Qp(2, 4)(1))


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31])
def test_scalar_fast_path_agrees_with_search(p):
    f = Fp(p)
    for t in range(p):
        fast, _ = is_magic_1x1(f(t))
        assert fast == bool(search_witnesses(Matrix(f, [[t]]), limit=1))


def test_rectangular_search_and_verify():
    f = Fp(3)
    t = Matrix(f, [[1, 0, 0]])  # 1x3 coordinate projection
    found = search_witnesses(t)
    assert found
    for w in found:
        assert w.m_t.shape == (3, 3) and w.m_t_star.shape == (1, 1)
        assert verify_magic(t, w)


def _brute_force_witnesses(t):
    """Independent oracle: every symmetric pair, plain integer arithmetic."""
    p = t.field.p
    m, n = t.shape
    ti = [[x.unit for x in r] for r in t.entries]

    def mm(a, b):
        return [[sum(a[i][k] * b[k][j] for k in range(len(b))) % p for j in range(len(b[0]))] for i in range(len(a))]

    def syms(k):
        for upper in itertools.product(range(p), repeat=k * (k + 1) // 2):
            s = [[0] * k for _ in range(k)]
            it = iter(upper)
            for i in range(k):
                for j in range(i, k):
                    s[i][j] = s[j][i] = next(it)
            yield s

    tt = [list(r) for r in zip(*ti)]
    eye = lambda k: [[int(i == j) for j in range(k)] for i in range(k)]
    d = [[(e - x) % p for e, x in zip(re, rx)] for re, rx in zip(eye(n), mm(tt, ti))]
    c = [[(e - x) % p for e, x in zip(re, rx)] for re, rx in zip(eye(m), mm(ti, tt))]
    out = 0
    for a in syms(n):
        if mm(a, a) != d:
            continue
        for b in syms(m):
            if mm(b, b) == c and mm(ti, a) == mm(b, ti):
                out += 1
    return out


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2)])
def test_witness_counts_match_brute_force(p, n):
    f = Fp(p)
    for entries in itertools.product(range(p), repeat=n * n):
        t = Matrix(f, [entries[i * n:(i + 1) * n] for i in range(n)])
        assert count_witnesses(t) == _brute_force_witnesses(t)


def test_every_search_result_verifies_and_sign_symmetry():
    rng = random.Random(3)
    for _ in range(60):
        f = Fp(rng.choice([2, 3, 5]))
        t = random_matrix(f, rng.randint(1, 2), rng)
        found = search_witnesses(t)
        for w in found:
            assert verify_magic(t, w)
            assert verify_magic(t, w.negated())
            assert w.negated() in found
            # adjoint form of the intertwining: M_T T* = T* M_T*
            assert mat_mul(w.m_t, adjoint(t)) == mat_mul(adjoint(t), w.m_t_star)


def test_verify_iff_halmos_unitary_random():
    for t, w in random_triples(200, seed=11, primes=(2, 3, 5), max_n=3):
        assert bool(verify_magic(t, w)) == is_unitary(halmos(t, w, check=False))


def test_fixed_point_transfer_examples(z2_example):
    f = Fp(5)
    z = zeros(2, 2, f)
    assert check_fixed_point_transfer(identity(2, f), MagicWitness(z, z), Vector(f, [3, 4]))
    t, w = z2_example
    assert check_fixed_point_transfer(t, w, Vector.zeros(Fp(2), 2))


def test_fixed_point_transfer_preconditions(z3_example):
    t, w = z3_example
    with pytest.raises(PreconditionError):
        check_fixed_point_transfer(t, w, Vector(Fp(3), [1, 0]))  # T x != x
    bad = MagicWitness(identity(2, Fp(3)), identity(2, Fp(3)))
    with pytest.raises(PreconditionError):
        check_fixed_point_transfer(t, bad, Vector.zeros(Fp(3), 2))


def test_fixed_point_transfer_over_full_f3_census():
    """Every fixed point of every magic T in M_2(F_3), found by scanning F_3^2."""
    f = Fp(3)
    checked = 0
    for entries in itertools.product(range(3), repeat=4):
        t = Matrix(f, [entries[:2], entries[2:]])
        witnesses = search_witnesses(t)
        if not witnesses:
            continue
        fixed = [Vector(f, xs) for xs in itertools.product(range(3), repeat=2) if apply(t, Vector(f, xs)) == Vector(f, xs)]
        for w in witnesses:
            for x in fixed:
                assert check_fixed_point_transfer(t, w, x)
                checked += 1
    assert checked > 0


def test_adjoint_intertwining_is_derived():
    # M_T T* = T* M_T* follows from the intertwining by taking adjoints
    for t, w in valid_triples(150, seed=31, primes=(2, 3, 5, 7)):
        assert w.m_t @ adjoint(t) == adjoint(t) @ w.m_t_star
