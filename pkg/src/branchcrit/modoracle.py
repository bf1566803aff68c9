"""Brute-force ground truth for irreducible GL_n-modules in characteristic p.

The irreducible module L(lam) is the Weyl lattice spanned by the vectors
F^(N) v+ modulo the radical of the contravariant form, reduced mod p.  Every
question is answered by ranks of integer matrices:

* the weight-mu piece of L(lam) has dimension rank_p of the Gram matrix on
  the spanning set {F^(N) v+ : N of weight lam - mu};
* a vector is killed by E_s^(r) in L(lam) iff it pairs to zero with
  F_s^(r) w for every spanning w of weight mu + r alpha_s.

Gram matrices are computed weight by weight from the relation
<f_b x, y> = <x, e_b y>, peeling off the first PBW factor of the row vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import CriterionFails, IdentityFailed, MixedWeights, NonIntegralResult, NotDominant
from .hyperalg import (
    Matrix,
    enumerate_matrices,
    f_order,
    matrix_factorial,
    pos_index,
    positions,
    verma,
    wt,
    zero_matrix,
)
from .linalg import hstack, rank_mod_p, rank_rational

Weight = Tuple[int, ...]


def normalize(lam: Sequence[int]) -> Tuple[Weight, int]:
    lam = tuple(int(x) for x in lam)
    if any(lam[k] < lam[k + 1] for k in range(len(lam) - 1)):
        raise NotDominant("lambda=%s is not dominant" % (list(lam),))
    c = lam[-1]
    return tuple(x - c for x in lam), c


def flows_between(lam: Sequence[int], mu: Sequence[int]) -> Optional[Tuple[int, ...]]:
    """Coefficients a_t with lam - mu = sum a_t alpha_t, or None if not in the root lattice."""
    if len(lam) != len(mu) or sum(lam) != sum(mu):
        return None
    out, acc = [], 0
    for s in range(len(lam) - 1):
        acc += lam[s] - mu[s]
        out.append(acc)
    return tuple(out)


def weight_from_flows(lam: Sequence[int], flows: Sequence[int]) -> Weight:
    mu = list(lam)
    prev = 0
    for t, a in enumerate(flows):
        mu[t] -= a - prev
        prev = a
    mu[-1] += prev
    return tuple(mu)


def weyl_dimension(lam: Sequence[int]) -> int:
    n = len(lam)
    num = den = 1
    for a in range(n):
        for b in range(a + 1, n):
            num *= lam[a] - lam[b] + b - a
            den *= b - a
    assert num % den == 0
    return num // den


class GramOracle:
    """Gram matrices of the contravariant form for one highest weight."""

    def __init__(self, lam: Sequence[int]):
        self.lam = tuple(lam)
        self.n = len(lam)
        self.V = verma(self.lam)
        self._mats: Dict[Tuple[int, ...], List[Matrix]] = {}
        self._index: Dict[Tuple[int, ...], Dict[Matrix, int]] = {}
        self._ord: Dict[Tuple[int, ...], List[List[int]]] = {}
        self._div: Dict[Tuple[int, ...], List[List[int]]] = {}

    def mats(self, flows: Tuple[int, ...]) -> List[Matrix]:
        if flows not in self._mats:
            self._mats[flows] = enumerate_matrices(flows)
            self._index[flows] = {N: k for k, N in enumerate(self._mats[flows])}
        return self._mats[flows]

    def ordinary_gram(self, flows: Tuple[int, ...]) -> List[List[int]]:
        """<f^N v+, f^M v+> for ordinary (undivided) PBW monomials."""
        hit = self._ord.get(flows)
        if hit is not None:
            return hit
        mats = self.mats(flows)
        n = self.n
        if not any(flows):
            G = [[1]]
        else:
            order = f_order(n)
            pos = positions(n)
            G = [[0] * len(mats) for _ in mats]
            raised: Dict[int, List[Dict[Matrix, int]]] = {}
            for r, N in enumerate(mats):
                k = next(k for k in order if N[k])
                a, b = pos[k]
                up = tuple(f - 1 if a <= t + 1 < b else f for t, f in enumerate(flows))
                upG = self.ordinary_gram(up)
                upidx = self._index[up]
                if k not in raised:
                    raised[k] = [self.V.act((a, b), M) for M in mats]
                Nrest = N[:k] + (N[k] - 1,) + N[k + 1:]
                row = upG[upidx[Nrest]]
                for c, vec in enumerate(raised[k]):
                    G[r][c] = sum(coef * row[upidx[M2]] for M2, coef in vec.items())
            for r in range(len(mats)):
                for c in range(r):
                    assert G[r][c] == G[c][r], "Gram matrix is not symmetric"
        self._ord[flows] = G
        return G

    def gram(self, flows: Tuple[int, ...]) -> List[List[int]]:
        """<F^(N) v+, F^(M) v+> on divided powers; integral."""
        hit = self._div.get(flows)
        if hit is not None:
            return hit
        mats = self.mats(flows)
        G = self.ordinary_gram(flows)
        facts = [matrix_factorial(N) for N in mats]
        D = []
        for r, row in enumerate(G):
            out = []
            for c, v in enumerate(row):
                q, rem = divmod(v, facts[r] * facts[c])
                if rem:
                    raise NonIntegralResult("Gram entry %d not divisible" % v)
                out.append(q)
            D.append(out)
        self._div[flows] = D
        return D

    def lowered(self, s: int, r: int, flows_up: Tuple[int, ...], Nup: Matrix) -> Dict[Matrix, int]:
        """F_s^(r) F^(Nup) v+ expanded over the divided basis (integral)."""
        n = self.n
        k = pos_index(n)[(s, s + 1)]
        vec = {Nup: 1}
        for _ in range(r):
            out: Dict[Matrix, int] = {}
            for M, c in vec.items():
                for M2, c2 in self.V.lower(k, M).items():
                    out[M2] = out.get(M2, 0) + c * c2
            vec = {M: c for M, c in out.items() if c}
        den = factorial(r) * matrix_factorial(Nup)
        res = {}
        for M, c in vec.items():
            q, rem = divmod(c * matrix_factorial(M), den)
            if rem:
                raise NonIntegralResult("lowering is not integral")
            if q:
                res[M] = q
        return res

    def raising_blocks(self, flows: Tuple[int, ...], smax: Optional[int] = None) -> List[List[List[int]]]:
        """Matrices B with B[a][b] = <E_s^(r) w_a, w'_b>, one per (s, r)."""
        n = self.n
        smax = n - 2 if smax is None else smax
        mats = self.mats(flows)
        D = self.gram(flows)
        idx = self._index[flows]
        blocks = []
        for s in range(1, smax + 1):
            for r in range(1, flows[s - 1] + 1):
                up = tuple(f - r if t == s - 1 else f for t, f in enumerate(flows))
                up_mats = self.mats(up)
                B = [[0] * len(up_mats) for _ in mats]
                for b, Nup in enumerate(up_mats):
                    low = self.lowered(s, r, up, Nup)
                    for a in range(len(mats)):
                        B[a][b] = sum(c * D[a][idx[M]] for M, c in low.items())
                blocks.append(B)
        return blocks

    def raising_blocks_direct(self, flows: Tuple[int, ...]) -> List[List[List[int]]]:
        """Same matrices computed by applying E_s^(r) directly (small n only)."""
        n = self.n
        mats = self.mats(flows)
        blocks = []
        for s in range(1, n - 1):
            for r in range(1, flows[s - 1] + 1):
                up = tuple(f - r if t == s - 1 else f for t, f in enumerate(flows))
                up_mats = self.mats(up)
                Dup = self.gram(up)
                upidx = self._index[up]
                B = []
                for N in mats:
                    vec = {N: 1}
                    for _ in range(r):
                        vec = self.V.act_vec((s, s + 1), vec)
                    den = factorial(r) * matrix_factorial(N)
                    row = [0] * len(up_mats)
                    for M, c in vec.items():
                        q = Fraction(c * matrix_factorial(M), den)
                        for b in range(len(up_mats)):
                            row[b] += q * Dup[upidx[M]][b]
                    assert all(x.denominator == 1 for x in map(Fraction, row))
                    B.append([int(x) for x in row])
                blocks.append(B)
        return blocks


_oracles: Dict[Weight, GramOracle] = {}


def oracle_for(lam: Sequence[int]) -> GramOracle:
    lam = tuple(lam)
    if lam not in _oracles:
        if len(_oracles) > 32:
            _oracles.clear()
        _oracles[lam] = GramOracle(lam)
    return _oracles[lam]


@dataclass(frozen=True)
class WeightBasis:
    lam: Weight
    mu: Weight
    mats: Tuple[Matrix, ...]


def weight_basis(lam: Sequence[int], mu: Sequence[int]) -> WeightBasis:
    lam, _ = normalize(lam)
    mu = tuple(mu)
    flows = flows_between(lam, mu)
    if flows is None or any(f < 0 for f in flows):
        return WeightBasis(lam, mu, ())
    return WeightBasis(lam, mu, tuple(oracle_for(lam).mats(flows)))


def _prepare(lam: Sequence[int], mu: Sequence[int]):
    lam_n, c = normalize(lam)
    mu_n = tuple(x - c for x in mu)
    flows = flows_between(lam_n, mu_n)
    if flows is None or any(f < 0 for f in flows):
        return None, None
    return oracle_for(lam_n), flows


def weight_dim_L(lam: Sequence[int], mu: Sequence[int], p: int) -> int:
    O, flows = _prepare(lam, mu)
    if O is None:
        return 0
    return rank_mod_p(O.gram(flows), p)


def weight_dim_Q(lam: Sequence[int], mu: Sequence[int]) -> int:
    O, flows = _prepare(lam, mu)
    if O is None:
        return 0
    return rank_rational(O.gram(flows))


@dataclass(frozen=True)
class HighWeightReport:
    exists: bool
    high_weight_dim: int
    weight_dim: int


def high_weight_dim(lam: Sequence[int], mu: Sequence[int], p: int) -> HighWeightReport:
    """Dimension of the GL_{n-1}-high weight vectors in the mu-weight space of L(lam)."""
    O, flows = _prepare(lam, mu)
    if O is None:
        return HighWeightReport(False, 0, 0)
    D = O.gram(flows)
    rD = rank_mod_p(D, p)
    blocks = O.raising_blocks(flows)
    rB = rank_mod_p(hstack(blocks, len(D)), p) if blocks else 0
    # The radical sits inside the solution space, so the quotient has
    # dimension (m - rB) - (m - rD).
    dim = rD - rB
    assert dim >= 0
    return HighWeightReport(dim > 0, dim, rD)


@dataclass(frozen=True)
class VectorStatus:
    is_zero_in_L: bool
    is_high_weight: bool


def vector_status(coeffs: Mapping[Matrix, int], lam: Sequence[int], p: int) -> VectorStatus:
    """Is sum c_N F^(N) v+ zero in L(lam), and is it GL_{n-1}-high weight?"""
    if not coeffs:
        return VectorStatus(True, True)
    lam_n, _ = normalize(lam)
    n = len(lam_n)
    fl = {wt(N, n) for N in coeffs}
    if len(fl) != 1:
        raise MixedWeights("coefficients span several weights")
    flows = fl.pop()
    O = oracle_for(lam_n)
    mats = O.mats(flows)
    idx = O._index[flows]
    c = [0] * len(mats)
    for N, v in coeffs.items():
        c[idx[N]] = v % p
    D = O.gram(flows)
    pair = [sum(c[a] * D[a][b] for a in range(len(mats))) % p for b in range(len(mats))]
    zero = not any(pair)
    hw = True
    for B in O.raising_blocks(flows):
        if any(sum(c[a] * B[a][b] for a in range(len(mats))) % p for b in range(len(B[0]))):
            hw = False
            break
    return VectorStatus(zero, hw)


def all_weights(lam: Sequence[int]) -> List[Weight]:
    """Candidate weights of L(lam): compositions of |lam| dominated by lam."""
    lam_n, c = normalize(lam)
    n, total, top = len(lam_n), sum(lam_n), lam_n[0]
    out = []

    def rec(prefix):
        k = len(prefix)
        if k == n - 1:
            last = total - sum(prefix)
            if 0 <= last <= top:
                mu = tuple(prefix) + (last,)
                fl = flows_between(lam_n, mu)
                if all(f >= 0 for f in fl):
                    out.append(tuple(x + c for x in mu))
            return
        for v in range(top + 1):
            rec(prefix + [v])

    rec([])
    return out


def total_dimension_Q(lam: Sequence[int]) -> int:
    return sum(weight_dim_Q(lam, mu) for mu in all_weights(lam))


def total_dimension_L(lam: Sequence[int], p: int) -> int:
    return sum(weight_dim_L(lam, mu, p) for mu in all_weights(lam))


# --------------------------------------------------------------------------
# closed-form identities checked against the lowering operators


def check_mr6(inst) -> bool:
    """d! E_i^(d)...E_{n-1}^(d) applied to the specialized T, against the product of distances."""
    from .criterion import dist, sets, witness_M
    from .hyperalg import raise_divided
    from .lowering import T_eval
    from .polyring import specialize

    M, _ = witness_M(inst)
    lam, p, i, d, n = inst.lam, inst.p, inst.i, inst.d, inst.n
    X = T_eval(i, n, d, [t for t, _ in M], ())
    a = tuple(0 if t < i else d for t in range(1, n))
    f = raise_divided(a, X, scale=factorial(d))
    left = specialize(f, lam, {t: h for t, h in M}, p)
    Y = set(sets(inst).Y)
    right = factorial(d)
    for t in range(i + 1, n + 1):
        for h in range(1, d + 1):
            if (t, h) not in Y:
                right = right * dist(lam, (i, 0), (t, h)) % p
    right %= p
    if left != right:
        raise IdentityFailed("left side %d differs from right side %d" % (left, right))
    if left == 0:
        raise IdentityFailed("both sides vanish")
    return True


def coeff_check_mr2(i: int, n: int, d: int, I, M) -> bool:
    """The coefficient of T_eval at the hook matrix of I, with u_t set to h on M."""
    from .hyperalg import from_dict
    from .lowering import T_eval
    from .msets import Multiset
    from .planegeo import omega_diagram
    from .polyring import cdiff, get_ring, subst_u

    I = I if isinstance(I, Multiset) else Multiset(I)
    M = sorted(M)
    omega = omega_diagram(i, n, d, I)
    if not set(M) <= set(omega):
        raise ValueError("M must lie inside the interior diagram")
    if len({t for t, _ in M}) != len(M):
        raise ValueError("M has two points in one column")
    ring = get_ring(n, i)
    entries = {(i, t): I.count(t) for t in range(i + 1, n)}
    entries[(i, n)] = d - len(I)
    N = from_dict(n, entries)
    X = T_eval(i, n, d, [t for t, _ in M], I)
    got = subst_u(X.coeff(N), {t: ring.const(h) for t, h in M})
    want = ring.const(factorial(d) * prod(factorial(I.count(t)) for t in range(i + 1, n)))
    for t, h in omega:
        if (t, h) not in M:
            want = want * (cdiff(ring, i, t) - h)
    if got != want:
        raise IdentityFailed("coefficient %s differs from %s" % (got, want))
    return True
