import itertools
import random

import pytest

from branchcrit.criterion import decide, instance
from branchcrit.errors import CriterionFails, MixedWeights, NotDominant
from branchcrit.hyperalg import straighten_pairing, unit
from branchcrit.linalg import rank_mod_p, rank_rational
from branchcrit.modoracle import (
    all_weights,
    check_mr6,
    coeff_check_mr2,
    flows_between,
    high_weight_dim,
    normalize,
    oracle_for,
    total_dimension_L,
    total_dimension_Q,
    vector_status,
    weight_dim_L,
    weight_dim_Q,
    weyl_dimension,
)
from branchcrit.msets import Multiset
from branchcrit.planegeo import omega_diagram
from branchcrit.criterion import lucas_binomial_mod


def test_normalize():
    assert normalize((3, 1, 0)) == ((3, 1, 0), 0)
    assert normalize((1, 0, -2)) == ((3, 2, 0), -2)
    with pytest.raises(NotDominant):
        normalize((0, 1))


def test_weight_dims_sl2_frobenius():
    assert [weight_dim_L((2, 0), mu, 2) for mu in [(2, 0), (1, 1), (0, 2)]] == [1, 0, 1]
    assert total_dimension_L((2, 0), 2) == 2
    assert weight_dim_L((2, 0), (3, -1), 2) == 0


@pytest.mark.parametrize("p", [2, 3, 5])
def test_natural_module(p):
    assert total_dimension_L((1, 0, 0), p) == 3


def test_gram_matches_straightening():
    for lam in [(2, 1, 0), (3, 0, 0), (2, 2, 0), (3, 1, 0)]:
        O = oracle_for(lam)
        for flows in itertools.product(range(3), repeat=2):
            mats = O.mats(flows)
            G = O.gram(flows)
            for a, N in enumerate(mats):
                for b, M in enumerate(mats):
                    assert G[a][b] == G[b][a] == straighten_pairing(N, M, lam)


def test_direct_raising_matches_contravariance():
    for lam in [(2, 1, 0), (3, 1, 0), (4, 2, 0)]:
        O = oracle_for(lam)
        for flows in itertools.product(range(3), repeat=2):
            assert O.raising_blocks(flows) == O.raising_blocks_direct(flows)


def test_generic_characteristic():
    for lam in [(2, 1, 0), (3, 1, 0), (2, 1, 1, 0)]:
        for mu in all_weights(lam):
            assert weight_dim_L(lam, mu, 10007) == weight_dim_Q(lam, mu)


def test_weyl_dimension():
    assert weyl_dimension((1, 0, 0)) == 3
    assert weyl_dimension((2, 1, 0)) == 8
    for lam in [(2, 0), (2, 1, 0), (3, 1, 1, 0)]:
        assert total_dimension_Q(lam) == weyl_dimension(lam)


def test_high_weight_examples():
    r = high_weight_dim((1, 0, 0), (0, 0, 1), 2)
    assert r.exists and r.high_weight_dim == 1
    assert not high_weight_dim((2, 0), (1, 1), 2).exists
    for lam in [(3, 1, 0), (2, 2, 0), (4, 1, 1, 0)]:
        for p in (2, 3):
            assert high_weight_dim(lam, lam, p).exists


@pytest.mark.parametrize("p", [2, 3, 5])
def test_base_case_family(p):
    for diff in range(3 * p + 1):
        for d in range(1, p):
            exists = high_weight_dim((diff, 0), (diff - d, d), p).exists
            assert exists == (lucas_binomial_mod(diff, d, p) != 0)


def test_vector_status_examples():
    st = vector_status({unit(3, 1, 3): 1}, (1, 0, 0), 2)
    assert not st.is_zero_in_L and st.is_high_weight
    assert vector_status({unit(2, 1, 2): 1}, (2, 0), 2).is_zero_in_L
    assert vector_status({}, (2, 0), 2).is_zero_in_L
    with pytest.raises(MixedWeights):
        vector_status({unit(3, 1, 3): 1, unit(3, 1, 2): 1}, (1, 0, 0), 2)


def test_vector_status_shift_invariant():
    a = vector_status({unit(3, 1, 3): 1}, (1, 0, 0), 2)
    b = vector_status({unit(3, 1, 3): 1}, (4, 3, 3), 2)
    assert a == b


def test_flows_between():
    assert flows_between((2, 0), (1, 1)) == (1,)
    assert flows_between((2, 0), (1, 0)) is None


def test_check_mr6_examples():
    assert check_mr6(instance((1, 0, 0), 2, 1, 1))
    with pytest.raises(CriterionFails):
        check_mr6(instance((2, 0), 2, 1, 1))


def test_check_mr6_random():
    rng = random.Random(41)
    done = 0
    while done < 40:
        n = rng.randint(2, 4)
        lam = sorted((rng.randint(0, 6) for _ in range(n - 1)), reverse=True) + [0]
        p = rng.choice([2, 3, 5])
        inst = instance(lam, p, rng.randint(1, n - 1), rng.randint(1, p - 1))
        if decide(inst):
            assert check_mr6(inst)
            done += 1


def test_coeff_check_examples():
    for d in (1, 2, 3):
        assert coeff_check_mr2(1, 3, d, Multiset(), [])
    assert coeff_check_mr2(1, 3, 1, Multiset(), [(2, 0)])
    with pytest.raises(ValueError):
        coeff_check_mr2(1, 3, 1, Multiset(), [(2, 5)])


def test_coeff_check_random():
    rng = random.Random(42)
    for _ in range(40):
        n = rng.randint(2, 4)
        i = rng.randint(1, n - 1)
        d = rng.randint(1, 3)
        I = Multiset(rng.randrange(i, n) for _ in range(rng.randint(0, d)))
        cols = {}
        for t, h in omega_diagram(i, n, d, I):
            cols.setdefault(t, []).append(h)
        M = [(t, rng.choice(hs)) for t, hs in sorted(cols.items()) if rng.random() < 0.6]
        assert coeff_check_mr2(i, n, d, I, M)


def test_ranks():
    A = [[1, 2], [2, 4]]
    assert rank_rational(A) == 1 and rank_mod_p(A, 3) == 1
    B = [[2, 0], [0, 3]]
    assert rank_rational(B) == 2 and rank_mod_p(B, 2) == 1 and rank_mod_p(B, 3) == 1
    rng = random.Random(43)
    for _ in range(50):
        m = [[rng.randint(-3, 3) for _ in range(4)] for _ in range(3)]
        assert rank_mod_p(m, 10007) == rank_rational(m)
