"""Elementary expressions, formal operators and the lowering operators T.

Conventions used throughout:

* ``i < n`` and ``d >= 1`` are fixed; ``J0`` is the multiset holding ``d``
  copies of ``i - 1``; ``u_i`` is zero.
* A weight difference is returned as the tuple of alpha-coefficients for
  ``t = 1..n-1`` (coefficients below ``i`` are zero).
* A formal operator ``S(m, m', I, J)`` is the tuple ``(m, m', I, J)``.  Formal
  polynomials are commutative: a monomial is a sorted tuple of operators and
  carries a fraction ``num / den`` whose denominator is a multiset of
  irreducible factor polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    DenominatorSurvived,
    DGreaterEqualP,
    InvalidSpec,
    NotDivisible,
    NotFull,
)
from .hyperalg import HypElement, Matrix, col_sum, divide_elem, enumerate_matrices, sigma_elem
from .msets import Multiset
from .planegeo import Point, sigma_diagram
from .polyring import (
    IntPoly,
    PolyRing,
    binom_int,
    cdiff,
    divisor,
    exact_div,
    falling,
    get_ring,
    sigma,
    subst_u,
)


def J0(i: int, d: int) -> Multiset:
    return Multiset.repeat(i - 1, d)


# --------------------------------------------------------------------------
# elementary expressions


@dataclass(frozen=True)
class ElemSpec:
    i: int
    n: int
    d: int
    Mcal: Tuple[int, ...]
    Iseq: Tuple[Multiset, ...]
    Jseq: Tuple[Multiset, ...]

    @property
    def k(self) -> int:
        return len(self.Mcal)

    @property
    def cuts(self) -> Tuple[int, ...]:
        """m_0 = i < m_1 < ... < m_k < m_{k+1} = n."""
        return (self.i,) + self.Mcal + (self.n,)

    def J(self, s: int) -> Multiset:
        return J0(self.i, self.d) if s == 0 else self.Jseq[s - 1]

    def I(self, s: int) -> Multiset:
        return self.Iseq[s - 1]

    def block_of(self, t: int) -> int:
        m = self.cuts
        for s in range(self.k + 1):
            if m[s] <= t < m[s + 1]:
                return s
        raise ValueError("t=%d outside [i..n)" % t)

    def validate(self) -> "ElemSpec":
        i, n, k, m = self.i, self.n, self.k, self.cuts
        if not 1 <= i < n or self.d < 1:
            raise InvalidSpec("need 1 <= i < n and d >= 1")
        if list(self.Mcal) != sorted(set(self.Mcal)) or any(not i < x < n for x in self.Mcal):
            raise InvalidSpec("cut points must be increasing inside (i..n)")
        if len(self.Iseq) != k + 1 or len(self.Jseq) != k:
            raise InvalidSpec("need k+1 sets I and k sets J")
        # entry ranges
        if not self.I(1).within(i, m[1]):
            raise InvalidSpec("entries of I_1 must lie in [i..m_1)")
        for s in range(2, k + 2):
            if not self.I(s).within(m[s - 1] - 1, m[s]):
                raise InvalidSpec("entries of I_%d must lie in [m_%d-1..m_%d)" % (s, s - 1, s))
        for s in range(1, k + 1):
            if not self.J(s).within(m[s] - 1, m[s + 1]):
                raise InvalidSpec("entries of J_%d must lie in [m_%d-1..m_%d)" % (s, s, s + 1))
        # balance at every interior cut
        for s in range(1, k + 1):
            b = m[s] - 1
            if self.I(s + 1).count(b) + len(self.J(s)) != len(self.I(s)) + self.J(s - 1).count(b):
                raise InvalidSpec("balance fails at m_%d=%d" % (s, m[s]))
        return self


def elem_spec(i: int, n: int, d: int, Mcal: Iterable[int], Iseq: Sequence, Jseq: Sequence = ()) -> ElemSpec:
    Is = tuple(x if isinstance(x, Multiset) else Multiset(x) for x in Iseq)
    Js = tuple(x if isinstance(x, Multiset) else Multiset(x) for x in Jseq)
    return ElemSpec(i, n, d, tuple(sorted(Mcal)), Is, Js).validate()


def weight_of_spec(spec: ElemSpec) -> Tuple[int, ...]:
    """alpha_t-coefficients for t = 1..n-1 (zero below i)."""
    spec.validate()
    i, n, d, m = spec.i, spec.n, spec.d, spec.cuts
    out = [0] * (n - 1)
    for s in range(spec.k + 1):
        I, J = spec.I(s + 1), spec.J(s)
        for t in range(m[s] - 1, m[s + 1]):
            c = -d + I.le(t) + J.ge(t)
            if t < m[s]:
                # the boundary column is shared with the previous block
                prev = out[t - 1] if t >= 1 else 0
                assert c == prev, "boundary coefficient at t=%d disagrees" % t
                continue
            out[t - 1] = c
    return tuple(out)


def flows_of_spec(spec: ElemSpec) -> Tuple[int, ...]:
    return tuple(-c for c in weight_of_spec(spec))


@lru_cache(maxsize=None)
def _block_base(ring: PolyRing, ms: int, t: int) -> IntPoly:
    return cdiff(ring, ms, t) + ring.u(ms)


@lru_cache(maxsize=None)
def _falling_cached(ring: PolyRing, ms: int, t: int, e: int) -> IntPoly:
    return falling(_block_base(ring, ms, t), e)


@lru_cache(maxsize=4096)
def elementary_expression(spec: ElemSpec) -> HypElement:
    """The sum over F^(N) of the weight of spec with the factorial/falling coefficients."""
    flows = flows_of_spec(spec)
    i, n, d, m = spec.i, spec.n, spec.d, spec.cuts
    ring = get_ring(n, i)
    layout = []
    for s in range(spec.k + 1):
        I, J = spec.I(s + 1), spec.J(s)
        for t in range(m[s], m[s + 1]):
            layout.append((t, m[s], J.count(t - 1), I.lt(t)))
    out: Dict[Matrix, IntPoly] = {}
    for N in enumerate_matrices(flows):
        c = 1
        polys = []
        for t, ms, jc, il in layout:
            Nt = col_sum(n, N, t)
            c *= factorial(Nt + jc)
            e = d - (Nt + jc + il)
            if e < 0:
                raise AssertionError("negative falling exponent at t=%d" % t)
            if e:
                polys.append(_falling_cached(ring, ms, t, e))
        f = ring.const(c)
        for g in polys:
            f = f * g
        if f:
            out[N] = f
    return HypElement(ring, out)


def e_times_S(l: int, spec: ElemSpec) -> HypElement:
    from .hyperalg import e_action

    return e_action(l, elementary_expression(spec))


def _with(spec: ElemSpec, I: Optional[Mapping[int, Multiset]] = None, J: Optional[Mapping[int, Multiset]] = None) -> ElemSpec:
    Is = list(spec.Iseq)
    Js = list(spec.Jseq)
    for s, v in (I or {}).items():
        Is[s - 1] = v
    for s, v in (J or {}).items():
        assert s >= 1
        Js[s - 1] = v
    return ElemSpec(spec.i, spec.n, spec.d, spec.Mcal, tuple(Is), tuple(Js)).validate()


def rule_case(l: int, spec: ElemSpec) -> Tuple[str, int]:
    """Which closed-form rule applies to E_l, and the block index r it refers to."""
    i, n, m = spec.i, spec.n, spec.cuts
    if l < i:
        return "0", 0
    if l == n - 1:
        return "3", spec.k
    for r in range(1, spec.k + 1):
        if l == m[r] - 1:
            return "2", r
    r = spec.block_of(l)
    return "1", r


def rule_rhs(l: int, spec: ElemSpec) -> Tuple[HypElement, str]:
    """The closed-form value of E_l * S modulo raising elements, and the case label."""
    spec.validate()
    i, n, d, m = spec.i, spec.n, spec.d, spec.cuts
    ring = get_ring(n, i)
    case, r = rule_case(l, spec)
    out = HypElement(ring)
    if case == "0":
        return out, case

    def ee(sp: ElemSpec) -> HypElement:
        return elementary_expression(sp)

    if case == "1":
        J = spec.J(r)
        c = J.count(l - 1)
        if l > i and c and r > 0:
            out = out - ee(_with(spec, J={r: J.replace_one(l - 1, l)})).scale(c)
        I = spec.I(r + 1)
        c = I.count(l + 1)
        if c:
            coef = cdiff(ring, m[r], l + 1) + ring.u(m[r]) - d + I.le(l)
            out = out + ee(_with(spec, I={r + 1: I.replace_one(l + 1, l)})).scale(coef * c)
        return out, case

    if case == "2":
        mr = m[r]
        Jp, Jr = spec.J(r - 1), spec.J(r)
        Ir, Inext = spec.I(r), spec.I(r + 1)
        c = Jp.count(mr - 2)
        if l > i and c and r > 1:
            sp = _with(spec, J={r - 1: Jp.replace_one(mr - 2, mr - 1), r: Jr.add(mr - 1)})
            out = out - ee(sp).scale(c)
        coef = cdiff(ring, m[r - 1], mr) + ring.u(m[r - 1]) - ring.u(mr) + len(Ir) - Inext.count(mr - 1)
        out = out + ee(_with(spec, I={r: Ir.add(mr - 1)}, J={r: Jr.add(mr - 1)})).scale(coef)
        c = Inext.count(mr)
        if c:
            coef = ring.u(mr) - d + Inext.count(mr - 1)
            sp = _with(spec, I={r: Ir.add(mr - 1), r + 1: Inext.replace_one(mr, mr - 1)})
            out = out + ee(sp).scale(coef * c)
        return out, case

    # case 3: l = n-1
    k = spec.k
    Jk, Ik = spec.J(k), spec.I(k + 1)
    c = Jk.count(n - 2)
    if n - 1 > i and c and k > 0:
        out = out - ee(_with(spec, J={k: Jk.replace_one(n - 2, n - 1)})).scale(c)
    coef = cdiff(ring, m[k], n) + ring.u(m[k]) - d + len(Ik)
    out = out + ee(_with(spec, I={k + 1: Ik.add(n - 1)})).scale(coef)
    return out, case


# --------------------------------------------------------------------------
# the raising coefficient of an elementary expression


def _ratio(x: IntPoly, top: int, lo: int, hi: int) -> IntPoly:
    """prod_{h=0}^{top} (x-h) divided by prod_{h=lo}^{hi} (x-h); needs [lo..hi] inside [0..top]."""
    out = x.ring.const(1)
    for h in range(0, top + 1):
        if not lo <= h <= hi:
            out = out * (x - h)
    return out


def P_coefficient(spec: ElemSpec) -> IntPoly:
    """E_1^(a_1) ... E_{n-1}^(a_{n-1}) S modulo raising elements, in closed form."""
    a = flows_of_spec(spec)
    i, n, d, m = spec.i, spec.n, spec.d, spec.cuts
    ring = get_ring(n, i)
    if any(x < 0 for x in a):
        return ring.zero()

    def A(t: int) -> int:
        return a[t - 1] if t >= 1 else 0

    total = ring.const(1)
    for s in range(spec.k + 1):
        I, J = spec.I(s + 1), spec.J(s)
        total = total * falling(ring.u(m[s]), J.ge(m[s]))
        for t in range(m[s] + 1, m[s + 1] + 1):
            x = _block_base(ring, m[s], t)
            top = d - I.le(t - 1)
            lo, hi0 = J.ge(t), J.ge(t - 1)
            acc = ring.zero()
            for q in range(0, A(t - 1) + 1):
                b1 = binom_int(I.count(t - 1), A(t - 2) - A(t - 1) + q)
                b2 = binom_int(A(t - 1), q)
                if not (b1 and b2):
                    continue
                if hi0 + q > top:
                    raise AssertionError("denominator range leaves the numerator range")
                term = _ratio(x, top, lo, hi0 + q) * falling(ring.H(t - 1) - ring.H(t), q)
                acc = acc + term * (b1 * b2 * factorial(J.count(t - 2)))
            total = total * acc
            if not total:
                return total
    den = factorial(a[n - 2])
    try:
        return exact_div(total, ring.const(den))
    except NotDivisible:
        raise AssertionError("closed form is not integral")


# --------------------------------------------------------------------------
# rational coefficients with factored denominators

FKey = Tuple[Tuple[int, int], ...]
Den = Tuple[Tuple[FKey, int], ...]


def fkey(f: IntPoly) -> FKey:
    return tuple(sorted(f.terms.items()))


def _den_mul(a: Den, b: Den) -> Den:
    c: Dict[FKey, int] = dict(a)
    for k, v in b:
        c[k] = c.get(k, 0) + v
    return tuple(sorted(c.items()))


def _den_lcm(a: Den, b: Den) -> Den:
    c: Dict[FKey, int] = dict(a)
    for k, v in b:
        c[k] = max(c.get(k, 0), v)
    return tuple(sorted(c.items()))


def _den_quot(a: Den, b: Den) -> Den:
    """a / b for b dividing a as multisets."""
    c: Dict[FKey, int] = dict(a)
    for k, v in b:
        c[k] -= v
        assert c[k] >= 0
    return tuple(sorted((k, v) for k, v in c.items() if v))


def _den_poly(ring: PolyRing, a: Den) -> IntPoly:
    out = ring.const(1)
    for k, v in a:
        f = IntPoly(ring, dict(k))
        for _ in range(v):
            out = out * f
    return out


class Rat:
    """num / den with den a multiset of factor polynomials."""

    __slots__ = ("num", "den")

    def __init__(self, num: IntPoly, den: Den = ()):
        self.num, self.den = num, den

    @property
    def ring(self) -> PolyRing:
        return self.num.ring

    def __add__(self, other: "Rat") -> "Rat":
        if self.den == other.den:
            return Rat(self.num + other.num, self.den)
        L = _den_lcm(self.den, other.den)
        r = self.ring
        return Rat(
            self.num * _den_poly(r, _den_quot(L, self.den)) + other.num * _den_poly(r, _den_quot(L, other.den)), L
        )

    def __neg__(self) -> "Rat":
        return Rat(-self.num, self.den)

    def __sub__(self, other: "Rat") -> "Rat":
        return self + (-other)

    def __mul__(self, other) -> "Rat":
        if isinstance(other, Rat):
            return Rat(self.num * other.num, _den_mul(self.den, other.den))
        return Rat(self.num * other, self.den)

    def divide(self, f: IntPoly) -> "Rat":
        return Rat(self.num, _den_mul(self.den, ((fkey(f), 1),)))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def to_poly(self) -> IntPoly:
        return exact_div(self.num, _den_poly(self.ring, self.den))


# --------------------------------------------------------------------------
# formal operators

Op = Tuple[int, int, Multiset, Multiset]
Mono = Tuple[Op, ...]


def _op_key(op: Op):
    return (op[0], op[1], op[2].entries, op[3].entries)


def mono(*ops: Op) -> Mono:
    return tuple(sorted(ops, key=_op_key))


class FormalPoly:
    """Finite sum of monomials (products of formal operators) with Rat coefficients."""

    __slots__ = ("ring", "d", "terms")

    def __init__(self, ring: PolyRing, d: int, terms: Optional[Dict[Mono, Rat]] = None):
        self.ring, self.d = ring, d
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    @classmethod
    def op(cls, ring: PolyRing, d: int, op: Op, coeff=1) -> "FormalPoly":
        c = coeff if isinstance(coeff, IntPoly) else ring.const(coeff)
        return cls(ring, d, {mono(op): Rat(c)})

    def __add__(self, other: "FormalPoly") -> "FormalPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return FormalPoly(self.ring, self.d, out)

    def __neg__(self) -> "FormalPoly":
        return FormalPoly(self.ring, self.d, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "FormalPoly") -> "FormalPoly":
        return self + (-other)

    def __mul__(self, other) -> "FormalPoly":
        if isinstance(other, FormalPoly):
            out: Dict[Mono, Rat] = {}
            for k1, v1 in self.terms.items():
                for k2, v2 in other.terms.items():
                    k = mono(*(k1 + k2))
                    v = v1 * v2
                    out[k] = out[k] + v if k in out else v
            return FormalPoly(self.ring, self.d, out)
        return FormalPoly(self.ring, self.d, {k: v * other for k, v in self.terms.items()})

    def divide(self, f: IntPoly) -> "FormalPoly":
        return FormalPoly(self.ring, self.d, {k: v.divide(f) for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalPoly):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self) -> str:
        return "FormalPoly(%s)" % self.render()

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, v in sorted(self.terms.items(), key=lambda kv: [_op_key(o) for o in kv[0]]):
            ops = "*".join("S[%d,%d](%s;%s)" % (o[0], o[1], o[2], o[3]) for o in k)
            parts.append("%s*(%s)/(%s)" % (ops, v.num, _den_poly(self.ring, v.den)))
        return " + ".join(parts)


def op_weight(op: Op, d: int) -> Dict[int, int]:
    m, m2, I, J = op
    return {t: -d + I.le(t) + J.ge(t) for t in range(m, m2)}


def _eps_table(ring: PolyRing) -> Dict[FKey, Tuple[int, int]]:
    i, n = ring.i, ring.n
    return {fkey(divisor(ring, a, b)): (a, b) for a in range(i, n) for b in range(a + 1, n)}


def check_regular(P: FormalPoly) -> None:
    """The three regularity conditions on every monomial of P."""
    eps = _eps_table(P.ring)
    for Q, c in P.terms.items():
        covered = set()
        for m, m2, I, J in Q:
            for t in range(m, m2):
                if t in covered:
                    raise AssertionError("two factors cover column %d" % t)
                covered.add(t)
        starts = {op[0]: op for op in Q}
        ends = {op[1]: op for op in Q}
        for m in set(starts) & set(ends):
            _, _, I, J = starts[m]
            _, _, Ib, Jb = ends[m]
            if I.count(m - 1) + len(J) != len(Ib) + Jb.count(m - 1):
                raise AssertionError("gluing condition fails at %d" % m)
        for f, mult in c.den:
            if mult > 1:
                raise AssertionError("repeated denominator factor")
            if f not in eps:
                raise AssertionError("denominator factor of unexpected shape")
            a, b = eps[f]
            if not any(op[0] == a and b <= op[1] for op in Q):
                raise AssertionError("denominator C(%d,%d)-u+u without a matching operator" % (a, b))


def sigma_op(m: int, m2: int, op: Op) -> Optional[Tuple[Op, ...]]:
    """Formal cutting of one operator: a tuple of operators, or None for zero."""
    a, b, I, J = op
    if a == m and m2 < b:
        return ((m, m2, I.cut_Lup(m2), J.cut_L(m2)), (m2, b, I.cut_Rup(m2), J.cut_R(m2)))
    if (a, b) == (m, m2) or b <= m or m2 <= a:
        return (op,)
    return None


def sigma_formal(m: int, m2: int, P: FormalPoly) -> FormalPoly:
    """sigma_{m,m'} of P; every denominator must survive the cut."""
    ring = P.ring
    out: Dict[Mono, Rat] = {}
    for Q, c in P.terms.items():
        ops: List[Op] = []
        dead = False
        for op in Q:
            img = sigma_op(m, m2, op)
            if img is None:
                dead = True
                break
            ops.extend(img)
        if dead:
            continue
        den: Den = ()
        for f, mult in c.den:
            g = sigma(m, m2, IntPoly(ring, dict(f)))
            if g.is_zero():
                raise ValueError("sigma_%d,%d is not applicable" % (m, m2))
            den = _den_mul(den, ((fkey(g), mult),))
        v = Rat(sigma(m, m2, c.num), den)
        k = mono(*ops)
        out[k] = out[k] + v if k in out else v
    return FormalPoly(ring, P.d, out)


def times_eps(P: FormalPoly, m: int, m2: int) -> FormalPoly:
    """P * (C(m,m') - u_m' + u_m), cancelling against the denominator when possible."""
    e = divisor(P.ring, m, m2)
    ek = fkey(e)
    out = {}
    for Q, c in P.terms.items():
        den = dict(c.den)
        if den.get(ek):
            den[ek] -= 1
            out[Q] = Rat(c.num, tuple(sorted((k, v) for k, v in den.items() if v)))
        else:
            out[Q] = Rat(c.num * e, c.den)
    return FormalPoly(P.ring, P.d, out)


def check_integral(P: FormalPoly) -> None:
    ring = P.ring
    for m in range(ring.i, ring.n):
        for m2 in range(m + 1, ring.n):
            if not sigma_formal(m, m2, times_eps(P, m, m2)).is_zero():
                raise AssertionError("sigma_%d,%d does not annihilate P*(C-u+u)" % (m, m2))


def _T_args_ok(i: int, n: int, d: int, k: int, j: int, Mcal, I: Multiset, J: Multiset) -> None:
    if not (i <= k < j <= n):
        raise InvalidSpec("need i <= k < j <= n")
    if any(not k < x < j for x in Mcal):
        raise InvalidSpec("cut points must lie in (k..j)")
    if k == i:
        if J != J0(i, d):
            raise InvalidSpec("J must be J0 when k = i")
        if not I.within(i, j):
            raise InvalidSpec("entries of I must lie in [i..j)")
    else:
        if not (I.within(k - 1, j) and J.within(k - 1, j)):
            raise InvalidSpec("entries of I and J must lie in [k-1..j)")


@lru_cache(maxsize=None)
def _T_formal(i: int, n: int, d: int, k: int, j: int, Mcal: Tuple[int, ...], I: Multiset, J: Multiset) -> FormalPoly:
    ring = get_ring(n, i)
    if not Mcal:
        return FormalPoly.op(ring, d, (k, j, I, J))
    m, rest = Mcal[0], Mcal[1:]
    head = FormalPoly.op(ring, d, (k, m, I.cut_Lup(m), J.cut_L(m)))
    tail = _T_formal(i, n, d, m, j, rest, I.cut_Rup(m), J.cut_R(m))
    return (_T_formal(i, n, d, k, j, rest, I, J) - head * tail).divide(divisor(ring, k, m))


def build_T_formal(
    i: int, n: int, d: int, k: int, j: int, Mcal: Iterable[int], I, J=None, check: bool = True
) -> FormalPoly:
    """The formal operator T_{k,j,Mcal}(I, J) expanded into S-monomials."""
    I = I if isinstance(I, Multiset) else Multiset(I)
    if J is None:
        J = J0(i, d) if k == i else Multiset()
    J = J if isinstance(J, Multiset) else Multiset(J)
    Mt = tuple(sorted(set(Mcal)))
    _T_args_ok(i, n, d, k, j, Mt, I, J)
    P = _T_formal(i, n, d, k, j, Mt, I, J)
    if check:
        check_regular(P)
        check_integral(P)
    return P


def spec_of_mono(Q: Mono, i: int, n: int, d: int) -> ElemSpec:
    if not Q or Q[0][0] != i or Q[-1][1] != n:
        raise NotFull("monomial does not start at i and end at n")
    for a, b in zip(Q, Q[1:]):
        if a[1] != b[0]:
            raise NotFull("blocks do not tile [i..n)")
    if Q[0][3] != J0(i, d):
        raise NotFull("first block must carry J0")
    Mcal = tuple(op[0] for op in Q[1:])
    try:
        return ElemSpec(i, n, d, Mcal, tuple(op[2] for op in Q), tuple(op[3] for op in Q[1:])).validate()
    except InvalidSpec as e:
        raise NotFull("monomial violates the block conditions: %s" % e)


def mono_of_spec(spec: ElemSpec) -> Mono:
    m = spec.cuts
    return tuple((m[s], m[s + 1], spec.I(s + 1), spec.J(s)) for s in range(spec.k + 1))


def ev_formal(P: FormalPoly) -> HypElement:
    """Replace each full monomial by its elementary expression and clear denominators."""
    ring, d = P.ring, P.d
    L: Den = ()
    for c in P.terms.values():
        L = _den_lcm(L, c.den)
    acc = HypElement(ring)
    for Q, c in P.terms.items():
        spec = spec_of_mono(Q, ring.i, ring.n, d)
        f = c.num * _den_poly(ring, _den_quot(L, c.den))
        acc = acc + elementary_expression(spec).scale(f)
    if not L:
        return acc
    try:
        return divide_elem(acc, _den_poly(ring, L))
    except NotDivisible:
        raise DenominatorSurvived("ev of the formal polynomial is not denominator-free")


@lru_cache(maxsize=None)
def _T_eval(i: int, n: int, d: int, Mcal: Tuple[int, ...], I: Multiset) -> HypElement:
    ring = get_ring(n, i)
    if not Mcal:
        return elementary_expression(ElemSpec(i, n, d, (), (I,), ()).validate())
    m, rest = Mcal[0], Mcal[1:]
    X = _T_eval(i, n, d, rest, I)
    return divide_elem(X - sigma_elem(i, m, X), divisor(ring, i, m))


def T_eval(i: int, n: int, d: int, Mcal: Iterable[int], I=()) -> HypElement:
    """ev of T_{i,n,Mcal}(I, J0) through repeated cutting and exact division."""
    I = I if isinstance(I, Multiset) else Multiset(I)
    Mt = tuple(sorted(set(Mcal)))
    _T_args_ok(i, n, d, i, n, Mt, I, J0(i, d))
    return _T_eval(i, n, d, Mt, I)


# --------------------------------------------------------------------------
# raising operators on formal polynomials


def _rho_op(tag: str, l: int, op: Op, ring: PolyRing, d: int) -> Optional[Tuple[Op, IntPoly]]:
    """Image of one formal operator: (operator, scalar), or None for zero."""
    i = ring.i
    m, m2, I, J = op
    one = ring.const(1)
    if tag == "1":
        if m <= l < m2:
            c = J.count(l - 1)
            if not (l > i and c):
                return None
            return (m, m2, I, J.replace_one(l - 1, l)), ring.const(-c)
        if l == m - 1:
            return (m, m2, I, J.add(m - 1)), one
        return op, one
    if tag in ("2L", "2R"):
        if m <= l < m2 - 1:
            return None
        if l == m2 - 1:
            img = (m, m2, I.add(m2 - 1), J)
            if tag == "2L":
                return img, cdiff(ring, m, m2) + ring.u(m) - d + len(I)
            return img, one
        if l == m - 1:
            img = (m, m2, I, J.add(m - 1))
            if tag == "2R":
                return img, ring.u(m) - d + I.count(m - 1)
            return img, one
        return op, one
    if tag == "3":
        if m - 1 <= l < m2 - 1:
            c = I.count(l + 1)
            if not c:
                return None
            return (m, m2, I.replace_one(l + 1, l), J), (cdiff(ring, m, l + 1) + ring.u(m) - d + I.le(l)) * c
        if l == m2 - 1:
            return (m, m2, I.add(m2 - 1), J), one
        return op, one
    raise ValueError("unknown raising operator %r" % tag)


def rho(tag: str, l: int, P: FormalPoly) -> FormalPoly:
    """rho_l^(tag) for tag in 1, 2L, 2R, 3, and the combinations 2 = 2L - 2R and 'all'."""
    if tag == "2":
        return rho("2L", l, P) - rho("2R", l, P)
    if tag == "all":
        return rho("1", l, P) + rho("2", l, P) + rho("3", l, P)
    ring, d = P.ring, P.d
    if not ring.i <= l < ring.n:
        raise ValueError("rho_l needs i <= l < n")
    out: Dict[Mono, Rat] = {}
    for Q, c in P.terms.items():
        ops = []
        f = c.num
        for op in Q:
            img = _rho_op(tag, l, op, ring, d)
            if img is None:
                f = None
                break
            ops.append(img[0])
            f = f * img[1]
        if f is None or f.is_zero():
            continue
        k = mono(*ops)
        v = Rat(f, c.den)
        out[k] = out[k] + v if k in out else v
    return FormalPoly(ring, d, out)


def _T(i, n, d, k, j, Mcal, I, J) -> FormalPoly:
    return build_T_formal(i, n, d, k, j, [x for x in Mcal], I, J, check=False)


def rho_T_closed(
    tag: str, l: int, i: int, n: int, d: int, k: int, j: int, Mcal, I: Multiset, J: Multiset, origin: Optional[int] = None
) -> FormalPoly:
    """The image of T_{k,j,Mcal}(I,J) under rho_l^(tag) as stated in closed form.

    ``tag`` is one of 1, 2, 2L, 2R, 3.  For tag 2 with k <= l < j-1 the
    combined operator is used; 2L/2R are only given closed forms at l = k-1
    and l = j-1.  ``origin`` selects among the equivalent forms for tag 3.
    """
    ring = get_ring(n, i)
    M = sorted(set(Mcal))
    T = lambda kk, jj, MM, II, JJ: _T(i, n, d, kk, jj, MM, II, JJ)  # noqa: E731
    zero = FormalPoly(ring, d)
    if l < k - 1 or l >= j or (l == k - 1 and k == i):
        return T(k, j, M, I, J)
    if tag == "1":
        if l == k - 1:
            return T(k, j, M, I, J.add(k - 1))
        c = J.count(l - 1)
        if not (l > i and c):
            return zero
        return T(k, j, M, I, J.replace_one(l - 1, l)) * ring.const(-c)
    if tag in ("2L", "2R"):
        if l == k - 1:
            base = T(k, j, M, I, J.add(k - 1))
            return base if tag == "2L" else base * (ring.u(k) - d + I.count(k - 1))
        if l == j - 1:
            if tag == "2R":
                return T(k, j, M, I.add(j - 1), J)
            out = T(k, j, M, I.add(j - 1), J) * (cdiff(ring, k, j) + ring.u(k) - d + len(I))
            for q in M:
                out = out + T(k, q, [x for x in M if x < q], I.cut_Lup(q), J.cut_L(q)) * T(
                    q, j, [x for x in M if x > q], I.cut_Rup(q).add(j - 1), J.cut_R(q)
                )
            return out
        raise ValueError("2L/2R closed forms exist only at l = k-1 and l = j-1")
    if tag == "2":
        if l == k - 1 or l == j - 1:
            return rho_T_closed("2L", l, i, n, d, k, j, M, I, J) - rho_T_closed("2R", l, i, n, d, k, j, M, I, J)
        if l + 1 not in M:
            return zero
        left = T(k, l + 1, [x for x in M if x < l + 1], I.cut_Lup(l + 1).add(l), J.cut_L(l + 1))
        right = T(l + 1, j, [x for x in M if x > l + 1], I.cut_Rup(l + 1), J.cut_R(l + 1).add(l))
        return -(left * right)
    if tag == "3":
        if l == j - 1:
            return T(k, j, M, I.add(j - 1), J)
        c = I.count(l + 1)
        if not c:
            return zero
        choices = [x for x in M + [k] if x <= l + 1]
        mo = k if origin is None else origin
        if mo not in choices:
            raise ValueError("origin %d not admissible" % mo)
        Is = I.replace_one(l + 1, l)
        out = T(k, j, M, Is, J) * (cdiff(ring, mo, l + 1) + ring.u(mo) - d + I.le(l))
        if mo > k:
            out = out + T(k, j, [x for x in M if x != mo], Is, J)
        for q in M:
            if mo < q <= l + 1:
                out = out + T(k, q, [x for x in M if x < q], Is.cut_Lup(q), J.cut_L(q)) * T(
                    q, j, [x for x in M if x > q], I.cut_Rup(q).replace_one(l + 1, l), J.cut_R(q)
                )
        return out * c
    raise ValueError("unknown raising operator %r" % tag)


# --------------------------------------------------------------------------
# raising coefficients of formal polynomials


def _cf_op_factor(op: Op, t: int, q: int, ring: PolyRing, d: int) -> Rat:
    """The column-t factor of cf_kappa of one operator, with q = q_t."""
    m, m2, I, J = op
    b1 = binom_int(I.count(t - 1), I.count(t - 1) - J.count(t - 2) + q)
    b2 = binom_int(d - I.le(t - 1) - J.ge(t - 1), q)
    if not (b1 and b2):
        return Rat(ring.zero())
    x = _block_base(ring, m, t)
    top = d - I.le(t - 1)
    lo, hi = J.ge(t), J.ge(t - 1) + q
    num = ring.const(b1 * b2 * factorial(J.count(t - 2))) * falling(ring.H(t - 1) - ring.H(t), q)
    den: Den = ()
    for h in range(0, top + 1):
        if not lo <= h <= hi:
            num = num * (x - h)
    for h in range(max(lo, top + 1), hi + 1):
        den = _den_mul(den, ((fkey(x - h), 1),))
    return Rat(num, den)


def _cf_op_prefix(op: Op, ring: PolyRing) -> IntPoly:
    m, _, _, J = op
    return falling(ring.u(m), J.ge(m))


def cf_kappa(P, kappa: Sequence[int]) -> IntPoly:
    """The ring homomorphism cf_kappa applied to P; kappa = (q_{i+1}, ..., q_n)."""
    if isinstance(P, ElemSpec):
        ring = get_ring(P.n, P.i)
        P = FormalPoly(ring, P.d, {mono_of_spec(P): Rat(ring.const(1))})
    ring, d = P.ring, P.d
    i, n = ring.i, ring.n
    if len(kappa) != n - i:
        raise ValueError("kappa must have length n-i")
    q = {t: kappa[t - i - 1] for t in range(i + 1, n + 1)}
    total = Rat(ring.zero())
    for Q, c in P.terms.items():
        v = Rat(c.num, c.den)
        for op in Q:
            v = v * _cf_op_prefix(op, ring)
            for t in range(op[0] + 1, op[1] + 1):
                v = v * _cf_op_factor(op, t, q[t], ring, d)
                if v.is_zero():
                    break
            if v.is_zero():
                break
        if not v.is_zero():
            total = total + v
    try:
        return total.to_poly()
    except NotDivisible:
        raise DenominatorSurvived("cf_kappa is not a polynomial")


def _q_range(op: Op, t: int) -> range:
    _, _, I, J = op
    j2 = J.count(t - 2)
    return range(max(0, j2 - I.count(t - 1)), j2 + 1)


def cf_total(P) -> IntPoly:
    """Sum of cf_kappa over all kappa; each column's sum is taken separately."""
    if isinstance(P, ElemSpec):
        ring = get_ring(P.n, P.i)
        P = FormalPoly(ring, P.d, {mono_of_spec(P): Rat(ring.const(1))})
    ring, d = P.ring, P.d
    total = Rat(ring.zero())
    for Q, c in P.terms.items():
        v = Rat(c.num, c.den)
        for op in Q:
            v = v * _cf_op_prefix(op, ring)
            for t in range(op[0] + 1, op[1] + 1):
                col = Rat(ring.zero())
                for qt in _q_range(op, t):
                    col = col + _cf_op_factor(op, t, qt, ring, d)
                v = v * col
        if not v.is_zero():
            total = total + v
    try:
        return total.to_poly()
    except NotDivisible:
        raise DenominatorSurvived("cf is not a polynomial")


def kappa_support(P: FormalPoly) -> List[Tuple[int, ...]]:
    """Every kappa on which some monomial of P can have a nonzero cf_kappa."""
    ring, d = P.ring, P.d
    i, n = ring.i, ring.n
    ranges: Dict[int, set] = {t: set() for t in range(i + 1, n + 1)}
    for Q in P.terms:
        for op in Q:
            _, _, I, J = op
            for t in range(op[0] + 1, op[1] + 1):
                hi = min(J.count(t - 2), d - I.le(t - 1) - J.ge(t - 1))
                ranges[t].update(x for x in _q_range(op, t) if x <= hi)
    out: List[Tuple[int, ...]] = [()]
    for t in range(i + 1, n + 1):
        out = [k + (x,) for k in out for x in sorted(ranges[t])]
    return out


def cf_d(i: int, n: int, d: int, k: int, j: int, I: Multiset, J: Multiset, kappa: Sequence[int]) -> IntPoly:
    """The product of binomial, factorial and falling factors over columns k<t<=j."""
    ring = get_ring(n, i)
    q = {t: kappa[t - i - 1] for t in range(i + 1, n + 1)}
    out = ring.const(1)
    for t in range(k + 1, j + 1):
        c = factorial(J.count(t - 2))
        c *= binom_int(I.count(t - 1), I.count(t - 1) - J.count(t - 2) + q[t])
        c *= binom_int(d - I.le(t - 1) - J.ge(t - 1), q[t])
        if not c:
            return ring.zero()
        out = out * falling(ring.H(t - 1) - ring.H(t), q[t]) * c
    return out


def delta_set(k: int, j: int, J: Multiset, kappa: Sequence[int], i: int) -> List[Point]:
    """Columns k<t<=j, heights from |J| counted from t up to |J| counted from t-1, plus q_t."""
    q = {t: kappa[t - i - 1] for t in range(i + 1, i + 1 + len(kappa))}
    q[i] = 0
    return [(t, h) for t in range(k + 1, j + 1) for h in range(J.ge(t), J.ge(t - 1) + q.get(t, 0) + 1)]


def mod_ideal_identity(
    i: int, n: int, d: int, k: int, j: int, Mcal, I: Multiset, J: Multiset, kappa: Sequence[int], iota: Mapping[int, Point]
) -> Tuple[IntPoly, IntPoly]:
    """Both sides of the product formula for cf_kappa(T) after u_t -> iota_2(t) - C(t, iota_1(t))."""
    ring = get_ring(n, i)
    M = sorted(set(Mcal))
    Sig = set(sigma_diagram(k, j, d, I))
    Dl = set(delta_set(k, j, J, kappa, i))
    if not Dl <= Sig:
        raise InvalidSpec("Delta must lie inside Sigma")
    if sorted(iota) != M or len(set(iota.values())) != len(M):
        raise InvalidSpec("iota must be an injection defined on Mcal")
    for t, (t1, h1) in iota.items():
        if (t1, h1) not in Sig - Dl or t1 < t:
            raise InvalidSpec("iota(%d) out of range" % t)
        if t1 == t and not h1 < J.ge(t):
            raise InvalidSpec("iota(%d) on the diagonal needs a small height" % t)
    lhs = cf_kappa(build_T_formal(i, n, d, k, j, M, I, J, check=False), kappa)
    rhs = falling(ring.u(k), J.ge(k)) * cf_d(i, n, d, k, j, I, J, kappa)
    for t, h in sorted((Sig - Dl) - set(iota.values())):
        rhs = rhs * (cdiff(ring, k, t) + ring.u(k) - h)
    sub = {t: ring.const(h1) - cdiff(ring, t, t1) for t, (t1, h1) in iota.items()}
    return subst_u(lhs, sub), subst_u(rhs, sub)


# --------------------------------------------------------------------------
# the specialized lowering operators


@dataclass(frozen=True)
class LoweringSpec:
    i: int
    n: int
    d: int
    M: Tuple[Point, ...]
    I: Multiset = Multiset()

    def validate(self) -> "LoweringSpec":
        if not 1 <= self.i < self.n or self.d < 1:
            raise InvalidSpec("need 1 <= i < n and d >= 1")
        cols = [t for t, _ in self.M]
        if len(set(cols)) != len(cols):
            raise InvalidSpec("point set has two points in one column")
        if any(not self.i < t < self.n for t in cols):
            raise InvalidSpec("point columns must lie in (i..n)")
        if len(self.I) > self.d or not self.I.within(self.i, self.n):
            raise InvalidSpec("need |I| <= d and entries of I in [i..n)")
        return self

    @property
    def columns(self) -> Tuple[int, ...]:
        return tuple(sorted(t for t, _ in self.M))


def lowering_spec(i: int, n: int, d: int, M: Iterable[Point], I=()) -> LoweringSpec:
    I = I if isinstance(I, Multiset) else Multiset(I)
    return LoweringSpec(i, n, d, tuple(sorted(M)), I).validate()


def scriptT(spec: LoweringSpec, p: int) -> HypElement:
    """T_eval with u_t set to h for every (t, h) in M; no u variable survives."""
    spec.validate()
    if spec.d >= p:
        raise DGreaterEqualP("requires d < p (got d=%d, p=%d)" % (spec.d, p))
    X = T_eval(spec.i, spec.n, spec.d, spec.columns, spec.I)
    ring = X.ring
    sub = {t: ring.const(h) for t, h in spec.M}
    out = {}
    for N, f in X.terms.items():
        g = subst_u(f, sub)
        if any(v >= ring.n for v in g.variables()):
            raise AssertionError("a u variable outside M survived")
        out[N] = g
    return HypElement(ring, out)


def scriptT_mod_p(spec: LoweringSpec, p: int, lam: Sequence[int]) -> Dict[Matrix, int]:
    from .hyperalg import specialize_elem

    return specialize_elem(scriptT(spec, p), lam, {}, p)


__all__ = [
    "ElemSpec",
    "FormalPoly",
    "LoweringSpec",
    "P_coefficient",
    "T_eval",
    "build_T_formal",
    "cf_d",
    "cf_kappa",
    "cf_total",
    "delta_set",
    "e_times_S",
    "elem_spec",
    "elementary_expression",
    "flows_of_spec",
    "mono_of_spec",
    "rule_case",
    "scriptT_mod_p",
    "spec_of_mono",
    "check_integral",
    "check_regular",
    "J0",
    "Rat",
    "ev_formal",
    "kappa_support",
    "lowering_spec",
    "mod_ideal_identity",
    "rho",
    "rho_T_closed",
    "rule_rhs",
    "scriptT",
    "sigma_formal",
    "sigma_op",
    "fkey",
    "times_eps",
    "weight_of_spec",
]
