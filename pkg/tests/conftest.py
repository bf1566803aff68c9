import itertools
import random

from branchcrit.errors import InvalidSpec
from branchcrit.lowering import J0, ElemSpec
from branchcrit.msets import Multiset


def rand_ms(rng, lo, hi, size):
    if hi <= lo:
        return Multiset() if size == 0 else None
    return Multiset(rng.randrange(lo, hi) for _ in range(size))


def random_spec(rng, nmax=4, dmax=3):
    """A valid elementary spec; block by block the boundary column balances."""
    while True:
        n = rng.randint(2, nmax)
        i = rng.randint(1, n - 1)
        d = rng.randint(1, dmax)
        M = sorted(x for x in range(i + 1, n) if rng.random() < 0.5)
        m = [i] + M + [n]
        Is = [rand_ms(rng, i, m[1], rng.randint(0, d))]
        Js = []
        Jprev = J0(i, d)
        for s in range(1, len(M) + 1):
            b = m[s] - 1
            R = len(Is[-1]) + Jprev.count(b)
            c = rng.randint(0, R)
            J = rand_ms(rng, b, m[s + 1], R - c)
            extra = rand_ms(rng, m[s], m[s + 1], rng.randint(0, max(0, d - R)))
            Is.append(Multiset([b] * c) | extra)
            Js.append(J)
            Jprev = J
        try:
            return ElemSpec(i, n, d, tuple(M), tuple(Is), tuple(Js)).validate()
        except InvalidSpec:
            continue


def multisets(values, maxsize):
    for s in range(maxsize + 1):
        for c in itertools.combinations_with_replacement(values, s):
            yield Multiset(c)


def random_T_args(rng, nmin=3, nmax=5):
    """(i, n, d, k, j, M, I, J) for a T factor whose weight is nonpositive."""
    while True:
        n = rng.randint(nmin, nmax)
        i = rng.randint(1, n - 2)
        d = rng.randint(1, 3)
        k = rng.randint(i, n - 1)
        j = rng.randint(k + 1, n)
        M = [x for x in range(k + 1, j) if rng.random() < 0.5]
        if k == i:
            I = Multiset(rng.randrange(i, j) for _ in range(rng.randint(0, d)))
            J = J0(i, d)
        else:
            I = Multiset(rng.randrange(k - 1, j) for _ in range(rng.randint(0, d)))
            J = Multiset(rng.randrange(k - 1, j) for _ in range(rng.randint(0, d)))
        if any(-d + I.le(t) + J.ge(t) > 0 for t in range(k, j)):
            continue
        return i, n, d, k, j, M, I, J


def seeded(seed):
    return random.Random(seed)
