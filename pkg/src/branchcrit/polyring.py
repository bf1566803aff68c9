"""Sparse integer polynomials in H_1..H_n and u_{i+1}..u_{n-1}.

Monomials are packed into a single Python int, one 16-bit field per variable,
with H_1 in the most significant field.  Integer order of the packed keys is
then lexicographic order on exponent vectors, which is the monomial order used
for division.  u_i is not a variable; ``ring.u(i)`` returns zero.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from .errors import BadIndices, NegativeExponent, NotDivisible, UnassignedVariable

BITS = 16
FIELD = (1 << BITS) - 1
HIGH = 1 << (BITS - 1)


class PolyRing:
    """Variables H_1..H_n, u_{i+1}..u_{n-1}; shared by all polynomials of one context."""

    def __init__(self, n: int, i: int):
        if not 1 <= i < n:
            raise BadIndices("need 1 <= i < n")
        self.n, self.i = n, i
        self.names = ["H%d" % s for s in range(1, n + 1)] + ["u%d" % t for t in range(i + 1, n)]
        self.nvars = len(self.names)
        self.shifts = [BITS * (self.nvars - 1 - v) for v in range(self.nvars)]
        self.guard = sum(HIGH << s for s in self.shifts)

    def __repr__(self) -> str:
        return "PolyRing(n=%d, i=%d)" % (self.n, self.i)

    def __reduce__(self):
        return (get_ring, (self.n, self.i))

    def var_index(self, name: str) -> int:
        return self.names.index(name)

    def h_index(self, s: int) -> int:
        if not 1 <= s <= self.n:
            raise BadIndices("H_%d out of range" % s)
        return s - 1

    def u_index(self, t: int) -> Optional[int]:
        if t == self.i:
            return None
        if not self.i < t < self.n:
            raise BadIndices("u_%d out of range" % t)
        return self.n + t - self.i - 1

    def key_of(self, exps: Iterable[int]) -> int:
        k = 0
        for v, e in enumerate(exps):
            if e:
                if e >= HIGH:
                    raise OverflowError("exponent too large")
                k |= e << self.shifts[v]
        return k

    def exps_of(self, key: int) -> Tuple[int, ...]:
        return tuple((key >> s) & FIELD for s in self.shifts)

    def unit_key(self, v: int) -> int:
        return 1 << self.shifts[v]

    def zero(self) -> "IntPoly":
        return IntPoly(self, {})

    def const(self, c: int) -> "IntPoly":
        return IntPoly(self, {0: c} if c else {})

    def var(self, v: int) -> "IntPoly":
        return IntPoly(self, {self.unit_key(v): 1})

    def H(self, s: int) -> "IntPoly":
        return self.var(self.h_index(s))

    def u(self, t: int) -> "IntPoly":
        v = self.u_index(t)
        return self.zero() if v is None else self.var(v)

    def cdiff(self, k: int, l: int) -> "IntPoly":
        """C(k,l) = l - k + H_k - H_l."""
        return cdiff(self, k, l)


@lru_cache(maxsize=None)
def get_ring(n: int, i: int) -> PolyRing:
    return PolyRing(n, i)


Scalar = Union[int, "IntPoly"]


class IntPoly:
    """Immutable sparse polynomial; zero coefficients are never stored."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: Dict[int, int]):
        self.ring = ring
        self.terms = terms

    # construction helpers
    def _lift(self, other: Scalar) -> "IntPoly":
        if isinstance(other, IntPoly):
            return other
        return self.ring.const(int(other))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def const_value(self) -> int:
        if not self.is_const():
            raise ValueError("not a constant")
        return self.terms.get(0, 0)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.is_const() and self.terms.get(0, 0) == other
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __neg__(self) -> "IntPoly":
        return IntPoly(self.ring, {k: -c for k, c in self.terms.items()})

    def __add__(self, other: Scalar) -> "IntPoly":
        other = self._lift(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for k, c in small.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return IntPoly(self.ring, out)

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> "IntPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other: Scalar) -> "IntPoly":
        return self._lift(other) - self

    def __mul__(self, other: Scalar) -> "IntPoly":
        if not isinstance(other, IntPoly):
            c = int(other)
            if c == 0:
                return self.ring.zero()
            return IntPoly(self.ring, {k: v * c for k, v in self.terms.items()})
        if len(self.terms) < len(other.terms):
            a, b = self.terms, other.terms
        else:
            a, b = other.terms, self.terms
        if len(a) == 1:
            (ka, ca), = a.items()
            return IntPoly(self.ring, {ka + kb: ca * cb for kb, cb in b.items()})
        out: Dict[int, int] = {}
        get = out.get
        for ka, ca in a.items():
            for kb, cb in b.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return IntPoly(self.ring, {k: c for k, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "IntPoly":
        if e < 0:
            raise NegativeExponent("negative power")
        out = self.ring.const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def falling(self, k: int) -> "IntPoly":
        return falling(self, k)

    def leading(self) -> Tuple[int, int]:
        k = max(self.terms)
        return k, self.terms[k]

    def degree(self) -> int:
        return max((sum(self.ring.exps_of(k)) for k in self.terms), default=-1)

    def variables(self) -> set:
        used = 0
        for k in self.terms:
            used |= k
        return {v for v in range(self.ring.nvars) if (used >> self.ring.shifts[v]) & FIELD}

    def subs(self, images: Mapping[int, "IntPoly"]) -> "IntPoly":
        """Ring endomorphism sending variable v to images[v] and fixing the rest."""
        ring = self.ring
        present = self.variables()
        vs = [v for v in images if v in present]
        if not vs:
            return self
        mask = 0
        for v in vs:
            mask |= FIELD << ring.shifts[v]
        groups: Dict[Tuple[int, ...], Dict[int, int]] = {}
        for k, c in self.terms.items():
            e = tuple((k >> ring.shifts[v]) & FIELD for v in vs)
            groups.setdefault(e, {})[k & ~mask] = c
        powers: Dict[Tuple[int, int], IntPoly] = {}

        def pw(v: int, e: int) -> IntPoly:
            if (v, e) not in powers:
                powers[(v, e)] = ring.const(1) if e == 0 else pw(v, e - 1) * images[v]
            return powers[(v, e)]

        out = ring.zero()
        for e, rest in groups.items():
            term = IntPoly(ring, rest)
            for v, ev in zip(vs, e):
                if ev:
                    term = term * pw(v, ev)
            out = out + term
        return out

    def evaluate(self, values: Mapping[int, int], modulus: Optional[int] = None) -> int:
        """Value at an integer point; every variable present must be assigned."""
        ring = self.ring
        need = self.variables()
        missing = [ring.names[v] for v in need if v not in values]
        if missing:
            raise UnassignedVariable("no value for %s" % ", ".join(missing))
        total = 0
        for k, c in self.terms.items():
            term = c
            for v in need:
                e = (k >> ring.shifts[v]) & FIELD
                if e:
                    term *= pow(values[v], e, modulus) if modulus else values[v] ** e
            total += term
            if modulus:
                total %= modulus
        return total % modulus if modulus else total

    def __repr__(self) -> str:
        return "IntPoly(%s)" % self.render()

    def __str__(self) -> str:
        return self.render()

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, reverse=True):
            c = self.terms[k]
            mono = []
            for v, e in enumerate(self.ring.exps_of(k)):
                if e == 1:
                    mono.append(self.ring.names[v])
                elif e:
                    mono.append("%s^%d" % (self.ring.names[v], e))
            body = "*".join(mono)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append("%d*%s" % (c, body))
        return " + ".join(parts).replace("+ -", "- ")


def cdiff(ring: PolyRing, k: int, l: int) -> IntPoly:
    if k == l:
        return ring.zero()
    return ring.H(k) - ring.H(l) + (l - k)


def falling(f: IntPoly, k: int) -> IntPoly:
    """f (f-1) ... (f-k+1)."""
    if k < 0:
        raise NegativeExponent("falling factorial with exponent %d" % k)
    out = f.ring.const(1)
    for j in range(k):
        out = out * (f - j)
    return out


def falling_int(x: int, k: int) -> int:
    if k < 0:
        raise NegativeExponent("falling factorial with exponent %d" % k)
    out = 1
    for j in range(k):
        out *= x - j
    return out


def binom_int(x: int, k: int) -> int:
    """Generalized binomial x(x-1)...(x-k+1)/k!, zero for k < 0."""
    if k < 0:
        return 0
    num = falling_int(x, k)
    den = 1
    for j in range(2, k + 1):
        den *= j
    assert num % den == 0
    return num // den


def sigma_images(ring: PolyRing, l: int, m: int) -> Dict[int, IntPoly]:
    if not (ring.i <= l < m < ring.n):
        raise BadIndices("sigma needs i <= l < m < n (got l=%d, m=%d)" % (l, m))
    shift_by = cdiff(ring, l, m) - ring.u(m) + ring.u(l)
    return {ring.h_index(t): ring.H(t) + shift_by for t in range(m, ring.n + 1)}


def sigma(l: int, m: int, f: IntPoly) -> IntPoly:
    """Shift H_t by C(l,m) - u_m + u_l for every t >= m."""
    return f.subs(sigma_images(f.ring, l, m))


def divisor(ring: PolyRing, l: int, m: int) -> IntPoly:
    """C(l,m) - u_m + u_l, the polynomial whose divisibility sigma_{l,m} detects."""
    return cdiff(ring, l, m) - ring.u(m) + ring.u(l)


def exact_div(f: IntPoly, g: IntPoly) -> IntPoly:
    """The quotient f/g, or NotDivisible."""
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    ring = f.ring
    guard = ring.guard
    kg, cg = g.leading()
    rest = dict(f.terms)
    q: Dict[int, int] = {}
    gterms = list(g.terms.items())
    while rest:
        kf = max(rest)
        cf = rest[kf]
        diff = (kf | guard) - kg
        if diff & guard != guard or cf % cg:
            raise NotDivisible("%s is not divisible by %s" % (f, g))
        kq = diff & ~guard
        cq = cf // cg
        q[kq] = cq
        for k, c in gterms:
            kk = kq + k
            v = rest.get(kk, 0) - cq * c
            if v:
                rest[kk] = v
            else:
                rest.pop(kk, None)
    return IntPoly(ring, q)


def subst_u(f: IntPoly, assignments: Mapping[int, IntPoly]) -> IntPoly:
    """Substitute u_t by the given polynomials (keys are the indices t)."""
    ring = f.ring
    images = {}
    for t, img in assignments.items():
        v = ring.u_index(t)
        if v is not None:
            images[v] = img if isinstance(img, IntPoly) else ring.const(int(img))
    return f.subs(images)


def specialize(f: IntPoly, lam, uvals: Mapping[int, int], p: Optional[int]) -> int:
    """Set H_s to lam_s and u_t to uvals[t], then reduce mod p (p=None keeps integers)."""
    ring = f.ring
    values = {ring.h_index(s): lam[s - 1] for s in range(1, ring.n + 1)}
    for t, val in uvals.items():
        v = ring.u_index(t)
        if v is not None:
            values[v] = int(val)
    return f.evaluate(values, p)


class FracPoly:
    """A pair num/den with no normalization; equality by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num: IntPoly, den: Optional[IntPoly] = None):
        if den is None:
            den = num.ring.const(1)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num, self.den = num, den

    def __eq__(self, other) -> bool:
        if not isinstance(other, FracPoly):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        raise TypeError("FracPoly is not hashable")

    def __add__(self, other: "FracPoly") -> "FracPoly":
        if self.den == other.den:
            return FracPoly(self.num + other.num, self.den)
        return FracPoly(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "FracPoly":
        return FracPoly(-self.num, self.den)

    def __sub__(self, other: "FracPoly") -> "FracPoly":
        return self + (-other)

    def __mul__(self, other: "FracPoly") -> "FracPoly":
        if isinstance(other, FracPoly):
            return FracPoly(self.num * other.num, self.den * other.den)
        return FracPoly(self.num * other, self.den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def to_poly(self) -> IntPoly:
        return exact_div(self.num, self.den)

    def __repr__(self) -> str:
        return "FracPoly((%s)/(%s))" % (self.num, self.den)
