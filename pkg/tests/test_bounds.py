import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonic_entropy.bounds import (
    EQUAL,
    GREATER,
    LESS,
    UNKNOWN,
    purity_entropy_floor,
    beam_splitter_classical_witness,
    beam_splitter_witness,
    bound_a,
    bound_b,
    bound_c,
    bound_d,
    bound_E,
    bound_F,
    classical_curve,
    classical_lower_envelope,
    classify_region,
    min_entropy_with_purity,
    region_grid,
    thermal_bounds,
    thermal_curve,
    thermal_lower_envelope,
    thermal_upper,
)
from bosonic_entropy.fock import DomainError, g_function, random_pure_state, renyi2_entropy, thermal_state


def test_bound_b_is_thermal_renyi2():
    for n in (0.1, 0.85, 4.0):
        assert bound_b(n) == pytest.approx(renyi2_entropy(thermal_state(n, 600)), abs=1e-10)


def test_bounds_below_threshold_are_undefined():
    assert bound_a(0.5) is None
    assert bound_a(1.0) == 0.0
    assert bound_d(0.0) is None


@pytest.mark.parametrize("t", [0.9, 0.5, 0.37, 0.2, 0.13])
def test_purity_floor_closed_form_matches_optimizer(t):
    assert purity_entropy_floor(t) == pytest.approx(min_entropy_with_purity(t), abs=1e-9)


def test_purity_floor_endpoints():
    assert purity_entropy_floor(1.0) == pytest.approx(0.0, abs=1e-15)
    # uniform distribution on k levels has purity 1/k and entropy ln k
    assert purity_entropy_floor(1 / 4) == pytest.approx(math.log(4), abs=1e-12)
    with pytest.raises(DomainError):
        purity_entropy_floor(0.0)


def test_bound_c_equals_purity_floor():
    for n in (0.2, 0.85, 3.0):
        assert bound_c(n) == pytest.approx(purity_entropy_floor(1 / (2 * n + 1)), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1e3))
def test_classical_bounds_below_g(n):
    for v in (bound_a(n), bound_b(n), bound_c(n), bound_d(n)):
        if v is not None:
            assert v <= g_function(n) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 20.0))
def test_thermal_bounds_below_upper(eta, N):
    upper = thermal_upper(eta, N)
    for v in thermal_bounds(eta, N, k_max=32).values():
        if v is not None:
            assert v <= upper + 1e-12


def test_classical_envelope_tight_at_extremes():
    for n in (1e-3, 1e3):
        assert classical_lower_envelope(n) / g_function(n) >= 0.98


def test_curves_have_no_violation():
    assert classical_curve().max_violation() <= 1e-12
    for N in (0.1, 0.5, 10.0):
        curve = thermal_curve(N, np.linspace(0, 1, 51))
        assert curve.max_violation() <= 1e-12
        assert np.all(curve.envelope <= curve.upper + 1e-12)


def test_bound_E_and_F_special_cases():
    assert bound_E(0.5, 1.0, 1) == 0.0
    with pytest.raises(DomainError):
        bound_E(0.5, 1.0, 0)
    # at k = 1 the beam-splitter bound reduces to the classical envelope
    assert bound_F(0.2, 1.0, 1) == pytest.approx(classical_lower_envelope(0.8))


def test_thermal_envelope_positive_in_noisy_region():
    assert thermal_lower_envelope(0.3, 2.0) > 0.5


@pytest.mark.parametrize("k", [2, 3])
def test_beam_splitter_witnesses(k):
    rng = np.random.default_rng(20 + k)
    for _ in range(5):
        psi = random_pure_state(8, 24, rng)
        assert beam_splitter_witness(psi, k, 0.6) >= -1e-8
        assert beam_splitter_classical_witness(psi, k, 0.5) >= -1e-8


def test_region_classifier_rules():
    # identical channels satisfy rules in both directions
    assert classify_region(0.7, 0.6, 0.7, 0.6).label == EQUAL
    assert classify_region(0.7, 0.6, 0.9, 0.1).label == GREATER
    assert classify_region(0.7, 0.6, 0.2, 1.5).label == LESS
    assert "zero-line" in classify_region(0.7, 0.6, 0.5, 0.0).provenance
    assert "zero-reference" in classify_region(1.0, 0.6, 0.5, 0.3).provenance


def test_region_grid_consistency():
    grid = region_grid(0.7, 0.6, 21, 21)
    assert grid.labels.shape == (21, 21)
    assert grid.contradictions() == 0
    counts = grid.label_counts()
    assert sum(counts.values()) == 21 * 21
    assert set(counts) <= {GREATER, LESS, EQUAL, UNKNOWN}
    assert counts.get(GREATER, 0) > 0 and counts.get(LESS, 0) > 0


def test_region_examples():
    less = classify_region(0.7, 0.6, 0.7, 1.0)
    assert less.label == LESS and "rule-1" in less.provenance
    greater = classify_region(0.7, 0.6, 0.9, 0.6)
    assert greater.label == GREATER and "rule-4" in greater.provenance


def test_region_grid_uses_bound_tests():
    counts = region_grid(0.7, 0.6, 41, 41).counts()
    assert counts.get("L", 0) > 0 and counts.get("U", 0) > 0


def test_bound_c_continuous_at_level_changes():
    for k in range(1, 21):
        assert abs(bound_c(k / 2 - 1e-13) - bound_c(k / 2 + 1e-13)) <= 1e-10


def test_envelope_monotone():
    ns = np.linspace(0.01, 20, 400)
    env = [classical_lower_envelope(n) for n in ns]
    assert all(b >= a - 1e-12 for a, b in zip(env, env[1:]))
    up = [thermal_upper(eta, 0.5) for eta in np.linspace(0, 1, 50)]
    assert all(b <= a for a, b in zip(up, up[1:]))
