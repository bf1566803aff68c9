import pytest
from hypothesis import given, settings, strategies as st

from branchcrit.errors import BadIndices, NegativeExponent, NotDivisible, UnassignedVariable
from branchcrit.polyring import (
    FracPoly,
    cdiff,
    divisor,
    exact_div,
    falling,
    falling_int,
    get_ring,
    sigma,
    specialize,
    subst_u,
)

R = get_ring(4, 1)  # H1..H4, u2, u3
GENS = [R.H(1), R.H(2), R.H(3), R.H(4), R.u(2), R.u(3)]


@st.composite
def polys(draw, max_terms=4):
    out = R.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        c = draw(st.integers(-5, 5))
        term = R.const(c)
        for _ in range(draw(st.integers(0, 3))):
            term = term * draw(st.sampled_from(GENS))
        out = out + term
    return out


sigma_idx = st.sampled_from([(l, m) for l in range(1, 4) for m in range(l + 1, 4)])


def test_cdiff():
    assert cdiff(R, 1, 2) == R.H(1) - R.H(2) + 1
    assert cdiff(R, 3, 3).is_zero()
    assert R.u(1).is_zero()


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_cdiff_telescopes(k, l, m):
    assert cdiff(R, k, l) + cdiff(R, l, m) == cdiff(R, k, m)


def test_falling():
    x = R.H(1) - R.H(2)
    assert falling(x, 2) == x * (x - 1)
    assert falling(x, 0) == R.const(1)
    assert falling_int(5, 5) == 120
    with pytest.raises(NegativeExponent):
        falling(x, -1)


def test_sigma_examples():
    assert sigma(1, 2, R.H(2)) == R.H(1) + 1 - R.u(2)
    assert sigma(1, 2, R.H(1)) == R.H(1)
    for l, m in [(1, 2), (1, 3), (2, 3)]:
        assert sigma(l, m, divisor(R, l, m)).is_zero()
    with pytest.raises(BadIndices):
        sigma(2, 2, R.H(1))


def test_sigma_trichotomy():
    for l in range(1, 4):
        for m in range(l + 1, 4):
            for q in range(1, 5):
                for t in range(q, 5):
                    got = sigma(l, m, cdiff(R, q, t) + R.u(l))
                    if t < m or m <= q:
                        want = cdiff(R, q, t) + R.u(l)
                    else:
                        want = cdiff(R, m, t) + cdiff(R, q, l) + R.u(m)
                    assert got == want


@settings(max_examples=60)
@given(polys(), polys(), sigma_idx)
def test_sigma_is_idempotent_homomorphism(f, g, lm):
    l, m = lm
    assert sigma(l, m, sigma(l, m, f)) == sigma(l, m, f)
    assert sigma(l, m, f * g) == sigma(l, m, f) * sigma(l, m, g)
    assert sigma(l, m, f + g) == sigma(l, m, f) + sigma(l, m, g)


@settings(max_examples=60)
@given(polys(), polys(), polys())
def test_ring_axioms(f, g, h):
    assert f * (g + h) == f * g + f * h
    assert (f * g) * h == f * (g * h)
    assert f + g == g + f
    assert f - f == R.zero()


def test_exact_div_examples():
    g = cdiff(R, 1, 2) - R.u(2)
    assert exact_div(g * (R.H(3) + 5), g) == R.H(3) + 5
    with pytest.raises(NotDivisible):
        exact_div(R.H(1), g)


@settings(max_examples=60)
@given(polys(), polys())
def test_exact_div_inverts_product(f, g):
    if g.is_zero():
        return
    assert exact_div(f * g, g) == f


@settings(max_examples=60)
@given(polys(), sigma_idx)
def test_sigma_kernel_means_divisible(f, lm):
    l, m = lm
    g = divisor(R, l, m)
    x = f * g
    assert sigma(l, m, x).is_zero()
    assert exact_div(x, g) == f
    # anything outside the kernel is not a multiple
    y = x + R.H(m)
    assert not sigma(l, m, y).is_zero()
    with pytest.raises(NotDivisible):
        exact_div(y, g)


def test_specialize_and_subst():
    R3 = get_ring(3, 1)
    f = cdiff(R3, 1, 3) + R3.u(2)
    assert specialize(f, (1, 0, 0), {2: 0}, 2) == 1
    assert specialize(R3.zero(), (1, 0, 0), {}, 2) == 0
    with pytest.raises(UnassignedVariable):
        specialize(R3.u(2), (1, 0, 0), {}, 5)
    # the designed substitution kills C(t, t1) + u_t - h
    h = 3
    killer = cdiff(R, 2, 3) + R.u(2) - h
    assert subst_u(killer, {2: R.const(h) - cdiff(R, 2, 3)}).is_zero()


def test_render_is_deterministic():
    f = R.H(2) * 3 + R.H(1) - 1
    assert f.render() == (R.H(1) - 1 + R.H(2) * 3).render()


@settings(max_examples=40)
@given(polys(), polys(), polys(), polys())
def test_fraction_equality(a, b, c, e):
    if b.is_zero() or e.is_zero():
        return
    x = FracPoly(a, b)
    y = FracPoly(a * e, b * e)
    assert x == y
    z = FracPoly(c, e)
    assert x + z == y + z
    assert x * z == y * z
