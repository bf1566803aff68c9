"""Decide whether a simple-root-string drop gives a GL_{n-1}-high weight vector.

For a dominant weight ``lam``, a prime ``p`` and ``1 <= i < n``, ``1 <= d < p``
the question is whether L_n(lam) over characteristic p has a nonzero
GL_{n-1}-high weight vector of weight ``lam - d*(e_i - e_n)``.  The answer is
combinatorial: it depends on three congruence sets of lattice points and on
the existence of strictly decreasing injections between them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ColumnOutOfRange, CriterionFails, DGreaterEqualP, InvalidInstance, NotDominant
from .planegeo import (
    Point,
    enumerate_antichains,
    exists_strict_dec_inj,
    points,
    render_point,
    strictly_below,
)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    q = 2
    while q * q <= p:
        if p % q == 0:
            return False
        q += 1
    return True


def is_dominant(lam: Sequence[int]) -> bool:
    return all(lam[k] >= lam[k + 1] for k in range(len(lam) - 1))


@dataclass(frozen=True)
class BranchingInstance:
    lam: Tuple[int, ...]
    p: int
    i: int
    d: int

    @property
    def n(self) -> int:
        return len(self.lam)

    def validate(self) -> "BranchingInstance":
        if not is_prime(self.p):
            raise InvalidInstance("p=%d is not prime" % self.p)
        if not is_dominant(self.lam):
            raise NotDominant("lambda=%s is not dominant" % (list(self.lam),))
        if not (1 <= self.i < self.n):
            raise InvalidInstance("requires 1 <= i < n (got i=%d, n=%d)" % (self.i, self.n))
        if self.d < 1:
            raise InvalidInstance("requires d >= 1 (got d=%d)" % self.d)
        if self.d >= self.p:
            raise DGreaterEqualP("requires d < p (got d=%d, p=%d)" % (self.d, self.p))
        return self


def instance(lam: Sequence[int], p: int, i: int, d: int) -> BranchingInstance:
    return BranchingInstance(tuple(int(x) for x in lam), p, i, d).validate()


def dist(lam: Sequence[int], x: Point, y: Point) -> int:
    """Twisted taxicab distance between lattice points with columns in [1..n]."""
    n = len(lam)
    for z in (x, y):
        if not 1 <= z[0] <= n:
            raise ColumnOutOfRange("column %d not in [1..%d]" % (z[0], n))
    return y[0] - x[0] + lam[x[0] - 1] - lam[y[0] - 1] + x[1] - y[1]


@dataclass(frozen=True)
class CongruenceSets:
    Y: List[Point]
    C: List[Point]
    X: List[Point]
    frakx: List[Point]


def sets(inst: BranchingInstance) -> CongruenceSets:
    lam, p, i, n, d = inst.lam, inst.p, inst.i, inst.n, inst.d
    origin = (i, 0)
    X = [(t, h) for t in range(i + 1, n + 1) for h in range(0, d + 1) if dist(lam, origin, (t, h)) % p == 0]
    Y = [x for x in X if x[1] >= 1]
    C = [x for x in X if x[1] == 0 and x[0] < n]
    frakx = [x for x in X if x == (n, 0)]
    assert sorted(Y + C + frakx) == X
    assert len(set(t for t, _ in Y)) == len(Y), "two points of Y share a column"
    return CongruenceSets(Y, C, X, frakx)


def _one_dim_injection(delta: List[Point], C: List[Point]) -> bool:
    # Weakly decreasing injection of the shifted columns into C's columns.
    src = sorted(t - 1 for t, _ in delta)
    tgt = sorted(t for t, _ in C)
    used = [False] * len(tgt)
    for s in src:
        # Smallest-first sources take the smallest free admissible target.
        for k, t in enumerate(tgt):
            if not used[k] and t <= s:
                used[k] = True
                break
        else:
            return False
    return True


@dataclass
class DirectResult:
    decision: bool
    checked_antichains: int
    blocker: Optional[List[Point]] = None
    witnesses: List[Dict[Point, Point]] = field(default_factory=list)


def decide_direct(inst: BranchingInstance) -> DirectResult:
    """Quantify over every antichain of Y, as in the statement of the criterion."""
    inst.validate()
    S = sets(inst)
    res = DirectResult(True, 0)
    for delta in enumerate_antichains(S.Y):
        res.checked_antichains += 1
        ok, w = exists_strict_dec_inj(delta, S.C)
        assert ok == _one_dim_injection(delta, S.C), "column reformulation disagrees on %s" % delta
        if ok:
            res.witnesses.append(w)
        elif res.decision:
            res.decision = False
            res.blocker = delta
    return res


@dataclass
class FastResult:
    decision: bool
    psi: Optional[Dict[Point, Point]]


def decide_fast(inst: BranchingInstance) -> FastResult:
    """One matching from Y into X; the point (n,0) can never be a target."""
    inst.validate()
    S = sets(inst)
    ok, psi = exists_strict_dec_inj(S.Y, S.X)
    if ok:
        assert all(x != (inst.n, 0) for x in psi.values())
    return FastResult(ok, psi)


def decide(inst: BranchingInstance, verify: bool = False) -> bool:
    fast = decide_fast(inst).decision
    if verify:
        direct = decide_direct(inst).decision
        assert fast == direct, "fast and direct decisions differ for %s" % (inst,)
    return fast


def witness_M(inst: BranchingInstance) -> Tuple[List[Point], Dict[Point, Point]]:
    """The image M of the witnessing injection and its inverse map M -> Y."""
    fast = decide_fast(inst)
    if not fast.decision:
        raise CriterionFails("no strictly decreasing injection exists for %s" % (inst,))
    phi = {x: y for y, x in fast.psi.items()}
    M = points(phi)
    assert len(set(t for t, _ in M)) == len(M)
    assert all(strictly_below(x, phi[x]) for x in M)
    return M, dict(sorted(phi.items()))


def report(inst: BranchingInstance, verify: bool = False) -> dict:
    S = sets(inst)
    fast = decide_fast(inst)
    out = {
        "decision": fast.decision,
        "Y": [render_point(x) for x in S.Y],
        "C": [render_point(x) for x in S.C],
        "frakx": [render_point(x) for x in S.frakx],
        "witness_psi": (
            {render_point(y): render_point(x) for y, x in fast.psi.items()} if fast.decision else None
        ),
        "checked_antichains": None,
    }
    if verify:
        direct = decide_direct(inst)
        assert direct.decision == fast.decision
        out["checked_antichains"] = direct.checked_antichains
    return out


def lucas_binomial_mod(m: int, k: int, p: int) -> int:
    """binom(m, k) mod p for m, k >= 0, digit by digit in base p."""
    if k < 0 or m < 0:
        return 0
    out = 1
    while m or k:
        a, b = m % p, k % p
        if b > a:
            return 0
        num = den = 1
        for r in range(b):
            num = num * (a - r) % p
            den = den * (r + 1) % p
        out = out * num * pow(den, -1, p) % p
        m //= p
        k //= p
    return out
