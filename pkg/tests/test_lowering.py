import random
from math import factorial

import pytest

from branchcrit.errors import DGreaterEqualP, InvalidSpec
from branchcrit.hyperalg import HypElement, add_units, e_action, raise_divided, sigma_elem, unit
from branchcrit.lowering import (
    J0,
    FormalPoly,
    P_coefficient,
    T_eval,
    build_T_formal,
    cf_d,
    cf_kappa,
    cf_total,
    check_integral,
    check_regular,
    delta_set,
    elem_spec,
    elementary_expression,
    ev_formal,
    fkey,
    kappa_support,
    lowering_spec,
    mono_of_spec,
    rho,
    rho_T_closed,
    rule_case,
    scriptT,
    scriptT_mod_p,
    sigma_formal,
    spec_of_mono,
    times_eps,
    weight_of_spec,
)
from branchcrit.msets import Multiset
from branchcrit.polyring import divisor, falling, get_ring, sigma

from conftest import random_spec, random_T_args

R3 = get_ring(3, 1)
E = Multiset()


def test_J0():
    assert J0(2, 3) == Multiset([1, 1, 1])


def test_elementary_expression_small():
    S = elementary_expression(elem_spec(1, 3, 1, (), [E]))
    want = HypElement.monomial(R3, unit(3, 1, 3), R3.H(1) - R3.H(2) + 1) + HypElement.monomial(
        R3, add_units(3, unit(3, 1, 2), [(2, 3, 1)])
    )
    assert S == want


@pytest.mark.parametrize("d", [1, 2, 3])
def test_sl2_block(d):
    R2 = get_ring(2, 1)
    spec = elem_spec(1, 2, d, (), [E])
    assert elementary_expression(spec) == HypElement.monomial(R2, unit(2, 1, 2, d), factorial(d))
    assert P_coefficient(spec) == falling(R2.H(1) - R2.H(2), d)
    assert weight_of_spec(spec) == (-d,)


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        elem_spec(1, 3, 1, (2,), [E, E], [Multiset([1])])  # balance fails at the cut
    with pytest.raises(InvalidSpec):
        elem_spec(1, 3, 1, (), [Multiset([3])])
    with pytest.raises(InvalidSpec):
        elem_spec(1, 3, 1, (3,), [E, E], [E])


def test_spec_monomial_round_trip():
    rng = random.Random(21)
    for _ in range(50):
        spec = random_spec(rng)
        assert spec_of_mono(mono_of_spec(spec), spec.i, spec.n, spec.d) == spec


def test_rule_branches_all_reached():
    rng = random.Random(22)
    seen = set()
    for _ in range(200):
        spec = random_spec(rng)
        for l in range(1, spec.n):
            seen.add(rule_case(l, spec)[0])
    assert seen == {"0", "1", "2", "3"}


def test_T_small_example():
    assert T_eval(1, 3, 1, [2]) == HypElement.monomial(R3, unit(3, 1, 3))
    P = build_T_formal(1, 3, 1, 1, 3, [2], E)
    assert len(P.terms) == 2
    assert all(c.den == ((fkey(R3.H(1) - R3.H(2) - R3.u(2) + 1), 1),) for c in P.terms.values())
    assert ev_formal(P) == HypElement.monomial(R3, unit(3, 1, 3))
    assert T_eval(1, 3, 1, []) == elementary_expression(elem_spec(1, 3, 1, (), [E]))


def test_T_uses_only_its_own_u():
    rng = random.Random(23)
    for _ in range(40):
        n = rng.randint(3, 5)
        i = rng.randint(1, n - 2)
        d = rng.randint(1, 2)
        M = [x for x in range(i + 1, n) if rng.random() < 0.5]
        X = T_eval(i, n, d, M)
        ring = X.ring
        allowed = {ring.h_index(s) for s in range(1, n + 1)} | {ring.u_index(t) for t in M}
        for f in X.terms.values():
            assert f.variables() <= allowed


def test_T_formal_is_regular_and_integral():
    rng = random.Random(24)
    for _ in range(60):
        i, n, d, k, j, M, I, J = random_T_args(rng)
        P = build_T_formal(i, n, d, k, j, M, I, J, check=False)
        check_regular(P)
        check_integral(P)


def _monomials_over_eps(rng, count):
    """Single T monomials with at most the factor C(m,m')-u_m'+u_m in the denominator."""
    out = []
    while len(out) < count:
        i, n, d, k, j, M, I, J = random_T_args(rng)
        T = build_T_formal(i, n, d, k, j, M, I, J, check=False)
        for Q, c in T.terms.items():
            for m in range(i, n):
                for m2 in range(m + 1, n):
                    if all(f == fkey(divisor(T.ring, m, m2)) for f, _ in c.den):
                        out.append((FormalPoly(T.ring, d, {Q: c}), m, m2, kappa_support(T)[:4], (k, j) == (i, n)))
    return out


def test_sigma_commutes_with_ev():
    rng = random.Random(25)
    checked = 0
    for P, m, m2, _, full in _monomials_over_eps(rng, 300):
        if not full:
            continue
        checked += 1
        Pe = times_eps(P, m, m2)
        assert sigma_elem(m, m2, ev_formal(Pe)) == ev_formal(sigma_formal(m, m2, Pe))
    assert checked >= 30


def test_sigma_commutes_with_cf():
    rng = random.Random(26)
    for P, m, m2, support, _ in _monomials_over_eps(rng, 80):
        Pe = times_eps(P, m, m2)
        for kappa in support:
            left = sigma(m, m2, cf_kappa(sigma_formal(m, m2, Pe), kappa))
            assert left == sigma(m, m2, cf_kappa(Pe, kappa))


def test_raising_image_closed_forms_every_branch():
    rng = random.Random(27)
    branches = set()
    for _ in range(150):
        i, n, d, k, j, M, I, J = random_T_args(rng)
        T = build_T_formal(i, n, d, k, j, M, I, J, check=False)
        for l in range(max(i, k - 1), j):
            if l == k - 1 and k == i:
                continue
            tags = ["1", "3", "2"] + (["2L", "2R"] if l in (k - 1, j - 1) else [])
            for tag in tags:
                origins = [None]
                if tag == "3" and l < j - 1:
                    origins = [x for x in M + [k] if x <= l + 1]
                for o in origins:
                    assert rho_T_closed(tag, l, i, n, d, k, j, M, I, J, origin=o) == rho(tag, l, T)
                    if l == k - 1:
                        branches.add("l=k-1")
                    elif l == j - 1:
                        branches.add("l=j-1")
                    elif l + 1 in M:
                        branches.add("l+1 in M")
                    else:
                        branches.add("k<=l<m-1")
                    if o is not None:
                        branches.add("origin>k" if o > k else "origin=k")
    assert branches == {"l=k-1", "l=j-1", "l+1 in M", "k<=l<m-1", "origin>k", "origin=k"}


def test_rho_2_needs_two_halves():
    with pytest.raises(ValueError):
        rho_T_closed("2L", 2, 1, 5, 1, 1, 5, [3], E, J0(1, 1))


def test_cf_sl2():
    for d in (1, 2, 3):
        R2 = get_ring(2, 1)
        P = build_T_formal(1, 2, d, 1, 2, [], E)
        assert cf_kappa(P, (d,)) == falling(R2.H(1) - R2.H(2), d) * factorial(d)
        for q in range(0, d):
            assert cf_kappa(P, (q,)).is_zero()
        assert cf_total(P) == factorial(d) * falling(R2.H(1) - R2.H(2), d)


def test_cf_total_matches_raising():
    rng = random.Random(28)
    for _ in range(30):
        n = rng.randint(2, 4)
        i = rng.randint(1, n - 1)
        d = rng.randint(1, 3)
        M = [x for x in range(i + 1, n) if rng.random() < 0.5]
        I = Multiset(rng.randrange(i, n) for _ in range(rng.randint(0, d)))
        T = build_T_formal(i, n, d, i, n, M, I, check=False)
        a = tuple([0] * (i - 1) + [d - I.le(t) for t in range(i, n)])
        want = raise_divided(a, ev_formal(T), scale=factorial(a[-1]))
        support = kappa_support(T)
        assert cf_total(T) == want
        assert sum((cf_kappa(T, kp) for kp in support), T.ring.zero()) == want
        # off the support every cf vanishes
        for _ in range(5):
            kp = tuple(rng.randint(0, d + 1) for _ in range(n - i))
            if kp not in support:
                assert cf_kappa(T, kp).is_zero()


def test_cf_d_factorizes_at_cuts():
    rng = random.Random(29)
    for _ in range(100):
        i, n, d, k, j, M, I, J = random_T_args(rng)
        if j - k < 2:
            continue
        m = rng.randint(k + 1, j - 1)
        kappa = tuple(rng.randint(0, 2) for _ in range(n - i))
        whole = cf_d(i, n, d, k, j, I, J, kappa)
        left = cf_d(i, n, d, k, m, I.cut_Lup(m), J.cut_L(m), kappa)
        right = cf_d(i, n, d, m, j, I.cut_Rup(m), J.cut_R(m), kappa)
        assert whole == left * right


def test_delta_set_right_cut():
    rng = random.Random(30)
    for _ in range(100):
        i, n, d, k, j, M, I, J = random_T_args(rng)
        kappa = tuple(rng.randint(0, 2) for _ in range(n - i))
        assert delta_set(k, j, J.cut_R(k), kappa, i) == delta_set(k, j, J, kappa, i)


def test_scriptT_examples():
    spec = lowering_spec(1, 3, 1, [(2, 0)])
    assert scriptT(spec, 2) == HypElement.monomial(R3, unit(3, 1, 3))
    assert scriptT_mod_p(spec, 2, (1, 0, 0)) == {unit(3, 1, 3): 1}
    with pytest.raises(DGreaterEqualP):
        scriptT(lowering_spec(1, 3, 2, []), 2)
    with pytest.raises(InvalidSpec):
        lowering_spec(1, 4, 2, [(2, 0), (2, 1)])
    # an empty point set gives the elementary expression
    assert scriptT(lowering_spec(1, 3, 1, []), 3) == elementary_expression(elem_spec(1, 3, 1, (), [E]))


def test_e_action_of_T_matches_raising_images():
    rng = random.Random(31)
    for _ in range(25):
        n = rng.randint(2, 4)
        i = rng.randint(1, n - 1)
        d = rng.randint(1, 3)
        M = [x for x in range(i + 1, n) if rng.random() < 0.5]
        T = build_T_formal(i, n, d, i, n, M, E, check=False)
        X = ev_formal(T)
        for l in range(i, n):
            assert e_action(l, X) == ev_formal(rho("all", l, T))
