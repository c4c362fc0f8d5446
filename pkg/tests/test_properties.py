from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_nash
from qgames.analysis import classify, ordering_of, positive_affine, pure_nash
from qgames.channel import (
    BitChannelSpec,
    MixedProfile,
    bit_channel,
    channel_from_game,
    factorization_test,
    mixed_joint_probs,
    mixed_payoff,
    mixed_payoff_via_probs,
)
from qgames.engine import DephasingChannel, OutcomeMap, PayoffMatrix, dephase, flip_game
from qgames.linalg import (
    MeasurementBasis,
    density_from_pure,
    measure_probs,
    measure_probs_mixed,
    random_state,
    random_unitary,
)
from qgames.scenario import parse_real

COMP = MeasurementBasis.computational(2, 2)
seeds = st.integers(min_value=0, max_value=2**32 - 1)
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
small_ints = st.integers(min_value=-3, max_value=3)


@settings(max_examples=200, deadline=None)
@given(seeds, unit)
def test_dephasing_keeps_trace_and_probs(seed, lam):
    rng = np.random.default_rng(seed)
    basis = MeasurementBasis(COMP.labels, random_unitary(4, rng))
    rho = density_from_pure(random_state(4, rng))
    out = dephase(rho, DephasingChannel(lam), basis)
    assert abs(np.trace(out.entries) - 1) < 1e-12
    np.testing.assert_allclose(measure_probs_mixed(out, basis), measure_probs_mixed(rho, basis), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_probs_are_a_distribution(seed):
    rng = np.random.default_rng(seed)
    probs = measure_probs(random_state(4, rng), MeasurementBasis(COMP.labels, random_unitary(4, rng)))
    assert np.all(probs >= 0) and abs(probs.sum() - 1) < 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_game_channel_stochastic(seed):
    rng = np.random.default_rng(seed)
    outcomes = OutcomeMap.from_pairs(rng.normal(size=(4, 2)))
    ch = channel_from_game(flip_game(random_state(4, rng), outcomes))
    assert np.max(np.abs(ch.probs.sum(axis=1) - 1)) < 1e-12


@settings(max_examples=300, deadline=None)
@given(unit, unit, unit)
def test_mixed_routes_agree(p, q, eps):
    prof = MixedProfile(p, q)
    probs = mixed_joint_probs(prof, eps)
    assert abs(probs.sum() - 1) < 1e-12 and np.all(probs >= -1e-15)
    a1, b1 = mixed_payoff(prof, eps)
    a2, b2 = mixed_payoff_via_probs(prof, eps)
    assert abs(a1 - a2) < 1e-12 and abs(b1 - b2) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["correlated_flip", "independent_flip"]), unit, st.integers(1, 3))
def test_bit_channels_stochastic(kind, eps, mu):
    ch = bit_channel(BitChannelSpec(kind, eps, mu))
    assert np.max(np.abs(ch.probs.sum(axis=1) - 1)) < 1e-12
    if kind == "independent_flip":
        assert not factorization_test(ch).correlated


@settings(max_examples=300, deadline=None)
@given(st.lists(small_ints, min_size=8, max_size=8), st.sampled_from([0.25, 1.0, 3.0, 7.5]), small_ints)
def test_classification_positive_affine(vals, scale, shift):
    pm = PayoffMatrix(np.array(vals, float).reshape(2, 2, 2), ("I", "F"), ("I", "F"))
    for who in "AB":
        moved = positive_affine(pm, who, scale, shift)
        assert classify(moved).label is classify(pm).label
        assert ordering_of(moved, who).groups == ordering_of(pm, who).groups


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_nash_matches_brute_force(n, m, data):
    a = data.draw(st.lists(st.lists(small_ints, min_size=m, max_size=m), min_size=n, max_size=n))
    b = data.draw(st.lists(st.lists(small_ints, min_size=m, max_size=m), min_size=n, max_size=n))
    pm = PayoffMatrix(np.stack([np.array(a, float), np.array(b, float)], axis=-1),
                      tuple(map(str, range(n))), tuple(map(str, range(m))))
    assert set(pure_nash(pm)) == brute_nash(a, b)


@given(st.fractions(min_value=-100, max_value=100, max_denominator=1000))
def test_rational_strings_parse_exactly(frac):
    assert parse_real(f"{frac.numerator}/{frac.denominator}") == float(Fraction(frac))
