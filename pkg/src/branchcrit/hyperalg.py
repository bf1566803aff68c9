"""Divided-power PBW elements of the negative-plus-Cartan part of the hyperalgebra.

An element is a finite sum ``sum_N F^(N) * H_N`` where ``N`` runs over strictly
upper triangular nonnegative integer matrices and ``H_N`` is a polynomial in
the Cartan generators and the auxiliary variables u.  ``F^(N)`` is the ordered
product of divided powers ``F_{a,b}^(N_ab)``, where ``F_{a,b}`` precedes
``F_{c,d}`` iff ``b < d``, or ``b == d`` and ``a < c``.

Matrices are stored as tuples of their above-diagonal entries in row-major
order.  Anything that would carry a raising generator on the right is dropped,
so results are always read modulo the left ideal generated by raising
elements.

The module also contains an independent normal-ordering engine for the
enveloping algebra of gl_n over the rationals, used to check the closed-form
commutator and to compute contravariant pairings on Verma modules.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import NonIntegralResult, NotDivisible
from .polyring import IntPoly, PolyRing, exact_div, get_ring, sigma, specialize

Matrix = Tuple[int, ...]


# --------------------------------------------------------------------------
# upper triangular matrices


@lru_cache(maxsize=None)
def positions(n: int) -> Tuple[Tuple[int, int], ...]:
    """Above-diagonal positions (a, b), 1-based, row-major."""
    return tuple((a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1))


@lru_cache(maxsize=None)
def pos_index(n: int) -> Dict[Tuple[int, int], int]:
    return {ab: k for k, ab in enumerate(positions(n))}


@lru_cache(maxsize=None)
def f_order(n: int) -> Tuple[int, ...]:
    """Indices into positions(n) in the PBW product order (column, then row)."""
    idx = pos_index(n)
    return tuple(idx[(a, b)] for b in range(2, n + 1) for a in range(1, b))


def zero_matrix(n: int) -> Matrix:
    return (0,) * (n * (n - 1) // 2)


def unit(n: int, a: int, b: int, times: int = 1) -> Matrix:
    out = [0] * (n * (n - 1) // 2)
    out[pos_index(n)[(a, b)]] = times
    return tuple(out)


def from_dict(n: int, entries: Mapping[Tuple[int, int], int]) -> Matrix:
    out = [0] * (n * (n - 1) // 2)
    idx = pos_index(n)
    for ab, v in entries.items():
        out[idx[ab]] += v
    return tuple(out)


def entry(n: int, N: Matrix, a: int, b: int) -> int:
    return N[pos_index(n)[(a, b)]]


def add_units(n: int, N: Matrix, changes: Iterable[Tuple[int, int, int]]) -> Optional[Matrix]:
    """N plus c*e_{a,b} for each (a, b, c); None if an entry goes negative."""
    out = list(N)
    idx = pos_index(n)
    for a, b, c in changes:
        k = idx[(a, b)]
        out[k] += c
        if out[k] < 0:
            return None
    return tuple(out)


def matrix_n(N: Matrix) -> int:
    m = len(N)
    n = 1
    while n * (n - 1) // 2 < m:
        n += 1
    assert n * (n - 1) // 2 == m
    return n


def col_sum(n: int, N: Matrix, t: int) -> int:
    idx = pos_index(n)
    return sum(N[idx[(a, t)]] for a in range(1, t))


def row_sum(n: int, N: Matrix, s: int) -> int:
    idx = pos_index(n)
    return sum(N[idx[(s, b)]] for b in range(s + 1, n + 1))


def flow(n: int, N: Matrix, k: int) -> int:
    """N(k): total of entries N_{a,b} with a <= k < b."""
    idx = pos_index(n)
    return sum(N[idx[(a, b)]] for a in range(1, k + 1) for b in range(k + 1, n + 1))


def wt(N: Matrix, n: Optional[int] = None) -> Tuple[int, ...]:
    """The flows (N(1),...,N(n-1)); F^(N) has weight -sum N(t) alpha_t."""
    n = n or matrix_n(N)
    flows = tuple(flow(n, N, k) for k in range(1, n))
    for l in range(2, n):
        assert flows[l - 2] - flows[l - 1] == col_sum(n, N, l) - row_sum(n, N, l)
    return flows


def matrix_factorial(N: Matrix) -> int:
    return prod(factorial(v) for v in N)


def enumerate_matrices(flows: Sequence[int]) -> List[Matrix]:
    """All N with the given flows N(1..n-1), in row-major order."""
    n = len(flows) + 1
    flows = list(flows)
    if any(f < 0 for f in flows):
        return []
    out: List[Matrix] = []
    rows: List[Tuple[int, ...]] = []

    def rows_of(a: int, need: int, budget: List[int]):
        # Row a: entries for b = a+1..n summing to need, with
        # sum_{b > k} N_{a,b} <= budget[k] for k >= a.
        width = n - a
        res: List[Tuple[int, ...]] = []

        def rec(b: int, left: int, acc: List[int]):
            # entries chosen for columns n, n-1, ..., b+1 (right to left)
            if b == a:
                if left == 0:
                    res.append(tuple(reversed(acc)))
                return
            tail = sum(acc)
            for v in range(0, left + 1):
                # entries in columns >= b all cross the cut at k = b-1
                if tail + v > budget[b - 2]:
                    break
                acc.append(v)
                rec(b - 1, left - v, acc)
                acc.pop()

        rec(n, need, [])
        assert all(len(r) == width for r in res)
        return res

    def go(a: int, budget: List[int]):
        if a == n:
            out.append(tuple(v for r in rows for v in r))
            return
        need = budget[a - 1]
        for r in rows_of(a, need, budget):
            nb = list(budget)
            for off, v in enumerate(r):
                b = a + 1 + off
                for k in range(a, b):
                    nb[k - 1] -= v
            if nb[a - 1] != 0 or any(x < 0 for x in nb):
                continue
            rows.append(r)
            go(a + 1, nb)
            rows.pop()

    go(1, flows)
    out.sort()
    return out


def render_matrix(n: int, N: Matrix) -> str:
    parts = []
    for (a, b), v in zip(positions(n), N):
        if v:
            parts.append("e%d%d" % (a, b) if v == 1 else "%d*e%d%d" % (v, a, b))
    return "+".join(parts) if parts else "0"


# --------------------------------------------------------------------------
# PBW elements


class HypElement:
    """Sum of F^(N) * H_N with coefficients in a fixed polynomial ring."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: Optional[Dict[Matrix, IntPoly]] = None):
        self.ring = ring
        self.terms = {N: f for N, f in (terms or {}).items() if not f.is_zero()}

    @property
    def n(self) -> int:
        return self.ring.n

    @classmethod
    def monomial(cls, ring: PolyRing, N: Matrix, coeff=1) -> "HypElement":
        f = coeff if isinstance(coeff, IntPoly) else ring.const(coeff)
        return cls(ring, {N: f})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, HypElement):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other: "HypElement") -> "HypElement":
        out = dict(self.terms)
        for N, f in other.terms.items():
            out[N] = out[N] + f if N in out else f
        return HypElement(self.ring, out)

    def __neg__(self) -> "HypElement":
        return HypElement(self.ring, {N: -f for N, f in self.terms.items()})

    def __sub__(self, other: "HypElement") -> "HypElement":
        return self + (-other)

    def scale(self, g) -> "HypElement":
        """Right multiplication by a Cartan-part polynomial or integer."""
        return HypElement(self.ring, {N: f * g for N, f in self.terms.items()})

    def coeff(self, N: Matrix) -> IntPoly:
        return self.terms.get(N, self.ring.zero())

    def weights(self) -> set:
        return {wt(N, self.n) for N in self.terms}

    def __repr__(self) -> str:
        return "HypElement(%s)" % self.render()

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(
            "F[%s]*(%s)" % (render_matrix(self.n, N), f) for N, f in sorted(self.terms.items())
        )

    def to_json(self) -> list:
        return [[list(N), str(f)] for N, f in sorted(self.terms.items())]


def _accumulate(out: Dict[Matrix, IntPoly], N: Matrix, f: IntPoly) -> None:
    if N in out:
        out[N] = out[N] + f
    else:
        out[N] = f


def e_action(l: int, X: HypElement) -> HypElement:
    """E_l * X reduced modulo the left ideal generated by E_l."""
    n, ring = X.n, X.ring
    if not 1 <= l <= n - 1:
        raise ValueError("E_%d does not exist for n=%d" % (l, n))
    idx = pos_index(n)
    cartan = ring.H(l) - ring.H(l + 1) + 1
    out: Dict[Matrix, IntPoly] = {}
    for N, f in X.terms.items():
        # column transfer l+1 -> l in rows above l
        for s in range(1, l):
            if N[idx[(s, l + 1)]]:
                M = add_units(n, N, [(s, l + 1, -1), (s, l, 1)])
                _accumulate(out, M, f * M[idx[(s, l)]])
        # the Cartan term
        if N[idx[(l, l + 1)]]:
            M = add_units(n, N, [(l, l + 1, -1)])
            c = -sum(N[idx[(l, b)]] for b in range(l + 1, n + 1))
            c += sum(N[idx[(l + 1, b)]] for b in range(l + 2, n + 1))
            _accumulate(out, M, f * (cartan + c))
        # row transfer l -> l+1 in columns right of l+1
        for t in range(l + 2, n + 1):
            if N[idx[(l, t)]]:
                M = add_units(n, N, [(l, t, -1), (l + 1, t, 1)])
                _accumulate(out, M, f * (-M[idx[(l + 1, t)]]))
    return HypElement(ring, out)


def raise_divided(a: Sequence[int], X: HypElement, scale: int = 1) -> IntPoly:
    """scale * E_1^(a_1) ... E_{n-1}^(a_{n-1}) X modulo raising elements.

    The rightmost divided power acts first.  Ordinary powers are applied over
    the integers and the product of factorials is divided out at the end; the
    result must be integral.
    """
    n = X.n
    assert len(a) == n - 1
    Y = X
    for l in range(n - 1, 0, -1):
        for _ in range(a[l - 1]):
            Y = e_action(l, Y)
            if Y.is_zero():
                return X.ring.zero()
    val = Y.coeff(zero_matrix(n)) * scale
    den = prod(factorial(x) for x in a)
    if any(c % den for c in val.terms.values()):
        raise NonIntegralResult("raising result is not integral")
    return exact_div(val, X.ring.const(den)) if den != 1 else val


def sigma_elem(l: int, m: int, X: HypElement) -> HypElement:
    return HypElement(X.ring, {N: sigma(l, m, f) for N, f in X.terms.items()})


def divide_elem(X: HypElement, g: IntPoly) -> HypElement:
    return HypElement(X.ring, {N: exact_div(f, g) for N, f in X.terms.items()})


def specialize_elem(X: HypElement, lam, uvals: Mapping[int, int], p: Optional[int]) -> Dict[Matrix, int]:
    out = {}
    for N, f in X.terms.items():
        v = specialize(f, lam, uvals, p)
        if v:
            out[N] = v
    return dict(sorted(out.items()))


# --------------------------------------------------------------------------
# normal ordering in U(gl_n) over the rationals
#
# Generators are matrix units X_{a,b}: lowering for a > b (X_{b,a} = F_{a,b}
# with a < b in the matrix-index convention above), Cartan for a == b, raising
# for a < b.  [X_ab, X_cd] = delta_bc X_ad - delta_da X_cb.

Gen = Tuple[int, int]


def bracket(x: Gen, y: Gen) -> List[Tuple[Gen, int]]:
    (a, b), (c, d) = x, y
    out = []
    if b == c:
        out.append(((a, d), 1))
    if d == a:
        out.append(((c, b), -1))
    return out


class Straightener:
    """Normal form F-part, then Cartan part, then E-part, by single commutators."""

    def __init__(self, n: int):
        self.n = n
        rank = {}
        r = 0
        for b in range(2, n + 1):
            for a in range(1, b):
                rank[(b, a)] = r  # F_{a,b}
                r += 1
        for s in range(1, n + 1):
            rank[(s, s)] = r
            r += 1
        for a in range(1, n + 1):
            for b in range(a + 1, n + 1):
                rank[(a, b)] = r
                r += 1
        self.rank = rank
        self._cache: Dict[Tuple[Gen, ...], Dict[Tuple[Gen, ...], int]] = {}

    def normal_form(self, word: Tuple[Gen, ...]) -> Dict[Tuple[Gen, ...], int]:
        hit = self._cache.get(word)
        if hit is not None:
            return hit
        rank = self.rank
        for k in range(len(word) - 1):
            if rank[word[k]] > rank[word[k + 1]]:
                break
        else:
            self._cache[word] = {word: 1}
            return self._cache[word]
        x, y = word[k], word[k + 1]
        out: Dict[Tuple[Gen, ...], int] = {}
        for w, c in self.normal_form(word[:k] + (y, x) + word[k + 2:]).items():
            out[w] = out.get(w, 0) + c
        for g, s in bracket(x, y):
            for w, c in self.normal_form(word[:k] + (g,) + word[k + 2:]).items():
                out[w] = out.get(w, 0) + s * c
        out = {w: c for w, c in out.items() if c}
        self._cache[word] = out
        return out

    def f_word(self, N: Matrix) -> Tuple[Gen, ...]:
        n = self.n
        word: List[Gen] = []
        for b in range(2, n + 1):
            for a in range(1, b):
                word += [(b, a)] * entry(n, N, a, b)
        return tuple(word)

    def split(self, word: Tuple[Gen, ...]) -> Tuple[Matrix, Tuple[int, ...], Tuple[Gen, ...]]:
        """Normal word -> (F exponents, Cartan exponents, E word)."""
        n = self.n
        F = {}
        H = [0] * n
        E = []
        for a, b in word:
            if a > b:
                F[(b, a)] = F.get((b, a), 0) + 1
            elif a == b:
                H[a - 1] += 1
            else:
                E.append((a, b))
        return from_dict(n, F), tuple(H), tuple(E)


Normal = Dict[Tuple[Matrix, Tuple[int, ...]], Fraction]


def hyp_to_normal(X: HypElement) -> Normal:
    """Rewrite a divided-power element over ordinary F monomials with H-monomials (u must be absent)."""
    ring = X.ring
    n = ring.n
    out: Normal = {}
    for N, f in X.terms.items():
        den = matrix_factorial(N)
        for key, c in f.terms.items():
            exps = ring.exps_of(key)
            assert not any(exps[n:]), "u variables cannot be straightened"
            k = (N, tuple(exps[:n]))
            out[k] = out.get(k, 0) + Fraction(c, den)
    return {k: v for k, v in out.items() if v}


def straighten(S: Straightener, word: Tuple[Gen, ...], coeff=1, drop_e: bool = False) -> Normal:
    out: Normal = {}
    for w, c in S.normal_form(word).items():
        F, H, E = S.split(w)
        if E:
            if drop_e:
                continue
            raise ValueError("raising generators survive in the normal form")
        k = (F, H)
        out[k] = out.get(k, 0) + Fraction(c) * coeff
    return {k: v for k, v in out.items() if v}


def commutator_by_straightening(l: int, N: Matrix, n: int) -> Normal:
    """[E_l, F^(N)] over the rationals, by normal ordering both products."""
    S = Straightener(n)
    fw = S.f_word(N)
    den = matrix_factorial(N)
    out: Normal = {}
    for w, c in S.normal_form(((l, l + 1),) + fw).items():
        F, H, E = S.split(w)
        if E == ((l, l + 1),) and H == (0,) * n and F == N:
            assert c == 1
            continue  # F^(N) E_l, cancelled by the second product
        assert not E, "unexpected raising part"
        k = (F, H)
        out[k] = out.get(k, 0) + Fraction(c, den)
    return {k: v for k, v in out.items() if v}


def lower_by_straightening(j: int, N: Matrix, n: int) -> Normal:
    """F_{j,n} F^(N), normal ordered over the rationals."""
    S = Straightener(n)
    return straighten(S, ((n, j),) + S.f_word(N), Fraction(1, matrix_factorial(N)))


# --------------------------------------------------------------------------
# Verma module action and contravariant pairing


class VermaModule:
    """The Verma module of highest weight lam in the ordinary basis f^M v+.

    Basis vectors are exponent tuples M in matrix storage order; the product
    f^M is taken in PBW order.
    """

    def __init__(self, lam: Sequence[int]):
        self.lam = tuple(lam)
        self.n = n = len(lam)
        self.order = f_order(n)
        self.pos = positions(n)
        self.rank = {k: r for r, k in enumerate(self.order)}
        self._lower: Dict[Tuple[int, Matrix], Dict[Matrix, int]] = {}
        self._act: Dict[Tuple[Gen, Matrix], Dict[Matrix, int]] = {}

    def weight(self, M: Matrix) -> Tuple[int, ...]:
        mu = list(self.lam)
        for (a, b), v in zip(self.pos, M):
            mu[a - 1] -= v
            mu[b - 1] += v
        return tuple(mu)

    def _first(self, M: Matrix) -> Optional[int]:
        for k in self.order:
            if M[k]:
                return k
        return None

    def lower(self, k: int, M: Matrix) -> Dict[Matrix, int]:
        """f_k * f^M, re-expanded in PBW order."""
        key = (k, M)
        hit = self._lower.get(key)
        if hit is not None:
            return hit
        g = self._first(M)
        if g is None or self.rank[k] <= self.rank[g]:
            out = {M[:k] + (M[k] + 1,) + M[k + 1:]: 1}
        else:
            # f_k f_g R = f_g (f_k R) + [f_k, f_g] R
            R = M[:g] + (M[g] - 1,) + M[g + 1:]
            out: Dict[Matrix, int] = {}
            for M2, c in self.lower(k, R).items():
                for M3, c2 in self.lower(g, M2).items():
                    out[M3] = out.get(M3, 0) + c * c2
            a, b = self.pos[k]
            c_, d_ = self.pos[g]
            for gen, s in bracket((b, a), (d_, c_)):
                kk = pos_index(self.n)[(gen[1], gen[0])]
                for M2, c in self.lower(kk, R).items():
                    out[M2] = out.get(M2, 0) + s * c
            out = {m: c for m, c in out.items() if c}
        self._lower[key] = out
        return out

    def act(self, gen: Gen, M: Matrix) -> Dict[Matrix, int]:
        """X_gen * f^M v+."""
        a, b = gen
        if a > b:
            return self.lower(pos_index(self.n)[(b, a)], M)
        if a == b:
            w = self.weight(M)[a - 1]
            return {M: w} if w else {}
        key = (gen, M)
        hit = self._act.get(key)
        if hit is not None:
            return hit
        g = self._first(M)
        out: Dict[Matrix, int] = {}
        if g is not None:
            R = M[:g] + (M[g] - 1,) + M[g + 1:]
            c_, d_ = self.pos[g]
            fgen = (d_, c_)
            for M2, c in self.act(gen, R).items():
                for M3, c2 in self.lower(g, M2).items():
                    out[M3] = out.get(M3, 0) + c * c2
            for g2, s in bracket(gen, fgen):
                for M2, c in self.act(g2, R).items():
                    out[M2] = out.get(M2, 0) + s * c
            out = {m: c for m, c in out.items() if c}
        self._act[key] = out
        return out

    def act_vec(self, gen: Gen, vec: Mapping[Matrix, int]) -> Dict[Matrix, int]:
        out: Dict[Matrix, int] = {}
        for M, c in vec.items():
            for M2, c2 in self.act(gen, M).items():
                out[M2] = out.get(M2, 0) + c * c2
        return {m: c for m, c in out.items() if c}


_verma_cache: Dict[Tuple[int, ...], VermaModule] = {}


def verma(lam: Sequence[int]) -> VermaModule:
    lam = tuple(lam)
    if lam not in _verma_cache:
        if len(_verma_cache) > 64:
            _verma_cache.clear()
        _verma_cache[lam] = VermaModule(lam)
    return _verma_cache[lam]


def straighten_pairing(N: Matrix, M: Matrix, lam: Sequence[int]) -> int:
    """<F^(N) v+, F^(M) v+> for the contravariant form with <v+, v+> = 1."""
    V = verma(lam)
    n = V.n
    if wt(N, n) != wt(M, n):
        return 0
    vec = {M: 1}
    for k in V.order:
        a, b = V.pos[k]
        for _ in range(N[k]):
            vec = V.act_vec((a, b), vec)
    raw = vec.get(zero_matrix(n), 0)
    den = matrix_factorial(N) * matrix_factorial(M)
    if raw % den:
        raise NonIntegralResult("pairing %d is not divisible by %d" % (raw, den))
    return raw // den
