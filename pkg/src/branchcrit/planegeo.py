"""Order geometry of the integer plane.

Points are ``(col, ht)`` tuples.  ``x < y`` in the strict plane order means
both coordinates increase; the weak order allows equality in each coordinate.
Cones and snakes are infinite, so they are only ever intersected with a finite
universe supplied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import BadRectangle, ComparablePairInStripe, NotAntichain
from .msets import Multiset

Point = Tuple[int, int]


def points(A: Iterable[Point]) -> List[Point]:
    """Deterministic (col, ht) order without duplicates."""
    return sorted(set((int(a), int(b)) for a, b in A))


def strictly_below(x: Point, y: Point) -> bool:
    return x[0] < y[0] and x[1] < y[1]


def weakly_below(x: Point, y: Point) -> bool:
    return x[0] <= y[0] and x[1] <= y[1]


def is_antichain(A: Iterable[Point]) -> bool:
    A = points(A)
    return not any(strictly_below(x, y) or strictly_below(y, x) for x, y in combinations(A, 2))


def shift(A: Iterable[Point], dc: int, dh: int) -> List[Point]:
    return points((a + dc, b + dh) for a, b in A)


def render_point(x: Point) -> str:
    return "(%d,%d)" % x


def parse_points(text: str) -> List[Point]:
    """Parse "t:h,t:h" into points."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        t, h = tok.split(":")
        out.append((int(t), int(h)))
    return out


def cone_members(G: Iterable[Point], U: Iterable[Point]) -> List[Point]:
    G = points(G)
    return [u for u in points(U) if any(weakly_below(u, g) for g in G)]


def snake_members(G: Iterable[Point], U: Iterable[Point]) -> List[Point]:
    G = points(G)
    inner = [(a - 1, b - 1) for a, b in G]
    return [u for u in cone_members(G, U) if not any(weakly_below(u, g) for g in inner)]


def interior(A: Iterable[Point]) -> List[Point]:
    """Points of A lying strictly below some other point of A."""
    A = points(A)
    return [a for a in A if any(strictly_below(a, b) for b in A)]


def boundary(A: Iterable[Point]) -> List[Point]:
    inner = set(interior(A))
    return [a for a in points(A) if a not in inner]


def _match(A: Sequence[Point], B: Sequence[Point], edge) -> Dict[Point, Point]:
    # Kuhn's augmenting paths; vertices visited in (col, ht) order.
    owner: Dict[Point, Point] = {}

    def augment(a: Point, seen: set) -> bool:
        for b in B:
            if b in seen or not edge(a, b):
                continue
            seen.add(b)
            if b not in owner or augment(owner[b], seen):
                owner[b] = a
                return True
        return False

    for a in A:
        augment(a, set())
    return {a: b for b, a in owner.items()}


def exists_weak_dec_inj(
    A: Iterable[Point], B: Iterable[Point]
) -> Tuple[bool, Optional[Dict[Point, Point]]]:
    """Is there an injection psi: A -> B with psi(a) weakly below a?"""
    A, B = points(A), points(B)
    m = _match(A, B, lambda a, b: weakly_below(b, a))
    if len(m) == len(A):
        return True, dict(sorted(m.items()))
    return False, None


def exists_strict_dec_inj(
    A: Iterable[Point], B: Iterable[Point]
) -> Tuple[bool, Optional[Dict[Point, Point]]]:
    """Strict version, reduced to the weak one on B shifted by (1,1)."""
    ok, w = exists_weak_dec_inj(A, shift(B, 1, 1))
    if not ok:
        return False, None
    return True, {a: (b[0] - 1, b[1] - 1) for a, b in w.items()}


def enumerate_antichains(Y: Iterable[Point]) -> List[List[Point]]:
    """All antichain subsets of Y, smallest first."""
    Y = points(Y)
    out: List[List[Point]] = []

    def grow(start: int, chosen: List[Point]) -> None:
        out.append(list(chosen))
        for k in range(start, len(Y)):
            y = Y[k]
            if all(not strictly_below(y, c) and not strictly_below(c, y) for c in chosen):
                chosen.append(y)
                grow(k + 1, chosen)
                chosen.pop()

    grow(0, [])
    out.sort(key=lambda s: (len(s), s))
    return out


@dataclass(frozen=True)
class TransferReport:
    injection: bool
    antichains: bool

    @property
    def agree(self) -> bool:
        return self.injection == self.antichains


def rectangle_transfer(X: Iterable[Point], a: int, b: int, c: int, dd: int) -> TransferReport:
    """Evaluate both sides of the rectangle transfer equivalence.

    Side one: a strictly decreasing injection from the points of X above row c
    into X.  Side two: every antichain of those points injects strictly
    decreasingly into the row-c points of X.
    """
    X = points(X)
    for x in X:
        if not (a <= x[0] <= b and c <= x[1] <= dd):
            raise BadRectangle("%s lies outside [%d..%d]x[%d..%d]" % (render_point(x), a, b, c, dd))
    Y = [x for x in X if x[1] > c]
    bottom = [x for x in X if x[1] == c]
    side1 = exists_strict_dec_inj(Y, X)[0]
    side2 = all(exists_strict_dec_inj(D, bottom)[0] for D in enumerate_antichains(Y))
    return TransferReport(side1, side2)


@dataclass(frozen=True)
class Stripe:
    """Columns a..b with rows first[s]..last[s] in column s."""

    a: int
    b: int
    first: Mapping[int, int]
    last: Mapping[int, int]

    def validate(self) -> None:
        if self.a > self.b:
            raise ValueError("empty column range")
        f, l = self.first, self.last
        for s in range(self.a, self.b):
            if not (f[s + 1] <= f[s] <= l[s + 1] <= l[s]):
                raise ValueError("column %d breaks the staircase shape" % s)
        for s in range(self.a, self.b - 1):
            if f[s] < l[s + 2]:
                raise ValueError("column %d overlaps column %d" % (s, s + 2))

    def __contains__(self, x: Point) -> bool:
        return self.a <= x[0] <= self.b and self.first[x[0]] <= x[1] <= self.last[x[0]]

    def below(self, x: Point) -> bool:
        return x[1] < self.first[x[0]]

    def above(self, x: Point) -> bool:
        return x[1] > self.last[x[0]]

    def members(self) -> List[Point]:
        return [(s, h) for s in range(self.a, self.b + 1) for h in range(self.first[s], self.last[s] + 1)]


def phi_S(
    M: Iterable[Point], X: Iterable[Point], phi: Mapping[Point, Point], S: Stripe
) -> Dict[Point, Point]:
    """Move a strictly increasing injection off the stripe S.

    Points of M below S stay put; every other point goes to phi of it.
    """
    S.validate()
    X = points(X)
    XS = [x for x in X if x in S]
    if not is_antichain(XS):
        raise ComparablePairInStripe("X meets the stripe in a comparable pair")
    out = {}
    for x in points(M):
        out[x] = x if S.below(x) else phi[x]
    return out


def sigma_diagram(k: int, j: int, d: int, I: Multiset) -> List[Point]:
    """Columns k<t<=j, heights 0..d-|I| counted up to t-1."""
    return [(t, h) for t in range(k + 1, j + 1) for h in range(0, d - I.le(t - 1) + 1)]


def omega_diagram(k: int, j: int, d: int, I: Multiset) -> List[Point]:
    """Columns k<t<j, heights below d-|I| counted up to t."""
    return [(t, h) for t in range(k + 1, j) for h in range(0, d - I.le(t))]


def antichain_cover(G: Iterable[Point], d: int, i: int, n: int) -> Multiset:
    """A multiset I with G on the boundary of the diagram of (i, n, d, I)."""
    G = points(G)
    if not is_antichain(G):
        raise NotAntichain("input has comparable points")
    for t, h in G:
        if not (i < t <= n and 0 <= h <= d):
            raise ValueError("point %s outside (i..n]x[0..d]" % render_point((t, h)))
    inner = [x for x in G if x[0] != n]
    cols = sorted(set(t for t, _ in inner))
    heights = [max(h for t, h in inner if t == c) for c in cols]
    last = [h for t, h in G if t == n]
    heights.append(max(last) if last else 0)
    entries = [i] * (d - heights[0])
    for c, hi, lo in zip(cols, heights, heights[1:]):
        entries += [c] * (hi - lo)
    I = Multiset(entries)
    edge = set(sigma_diagram(i, n, d, I)) - set(omega_diagram(i, n, d, I))
    assert len(I) <= d and set(G) <= edge, "cover postcondition failed"
    return I
