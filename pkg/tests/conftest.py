import random

import pytest

from padic_dilation.fields import Fp, Qp
from padic_dilation.linalg import Matrix, Vector
from padic_dilation.magic import MagicWitness, search_witnesses


def sym(f, upper, n):
    m = [[0] * n for _ in range(n)]
    it = iter(upper)
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = next(it)
    return Matrix(f, m)


def random_matrix(f, n, rng, cols=None):
    return Matrix(f, [[rng.randrange(f.p) for _ in range(cols or n)] for _ in range(n)])


def random_symmetric(f, n, rng):
    return sym(f, [rng.randrange(f.p) for _ in range(n * (n + 1) // 2)], n)


def random_triples(count, seed, primes=(2, 3, 5), max_n=2):
    """Seeded ``(T, witness)`` pairs, roughly half carrying a valid witness."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        f = Fp(rng.choice(primes))
        n = rng.randint(1, max_n)
        t = random_matrix(f, n, rng)
        if rng.random() < 0.5:
            found = search_witnesses(t)
            if found:
                out.append((t, rng.choice(found)))
                continue
        out.append((t, MagicWitness(random_symmetric(f, n, rng), random_symmetric(f, n, rng))))
    return out


def valid_triples(count, seed, primes=(2, 3, 5), max_n=2):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        f = Fp(rng.choice(primes))
        n = rng.randint(1, max_n)
        t = random_matrix(f, n, rng)
        found = search_witnesses(t)
        if found:
            out.append((t, rng.choice(found)))
    return out


@pytest.fixture
def F2():
    return Fp(2)


@pytest.fixture
def F3():
    return Fp(3)


@pytest.fixture
def F5():
    return Fp(5)


@pytest.fixture
def Q3():
    return Qp(3, 8)


@pytest.fixture
def z3_example():
    """T = [[2,2],[2,2]] over F_3 with M_T = M_T* = [[2,1],[1,2]]."""
    f = Fp(3)
    t = Matrix(f, [[2, 2], [2, 2]])
    m = Matrix(f, [[2, 1], [1, 2]])
    return t, MagicWitness(m, m)


@pytest.fixture
def z2_example():
    """T = [[1,1],[1,1]] over F_2 with the swap witness."""
    f = Fp(2)
    t = Matrix(f, [[1, 1], [1, 1]])
    m = Matrix(f, [[0, 1], [1, 0]])
    return t, MagicWitness(m, m)


@pytest.fixture
def z2_identity_witness():
    f = Fp(2)
    m = Matrix(f, [[1, 0], [0, 1]])
    return MagicWitness(m, m)


@pytest.fixture
def rng():
    return random.Random(1234)


def vec(f, *xs):
    return Vector(f, xs)
