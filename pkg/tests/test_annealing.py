import math

import numpy as np
import pytest

from bosonic_entropy.annealing import (
    AnnealConfig,
    anneal_majorization_track,
    anneal_min_entropy,
    anneal_restarts,
    coherent_fit,
    metropolis_accept,
    output_entropy,
)
from bosonic_entropy.fock import DomainError, coherent_state, fock_state, g_function


def test_metropolis_rule_with_forced_draws():
    assert metropolis_accept(-0.5, 1e-9, 0.999999)
    assert metropolis_accept(0.0, 1.0, 0.999999)
    delta, T = 0.2, 0.1
    threshold = math.exp(-delta / T)
    assert metropolis_accept(delta, T, threshold - 1e-12)
    assert not metropolis_accept(delta, T, threshold + 1e-12)


def test_metropolis_acceptance_frequency():
    rng = np.random.default_rng(0)
    delta, T = 0.05, 0.1
    hits = np.mean([metropolis_accept(delta, T, u) for u in rng.uniform(size=20000)])
    assert hits == pytest.approx(math.exp(-delta / T), abs=0.02)


def test_output_entropy_of_vacuum():
    assert output_entropy(fock_state(0, 11), 0.85, 41) == pytest.approx(g_function(0.85), abs=1e-9)


def test_config_validation():
    with pytest.raises(DomainError):
        AnnealConfig(n=0.0)
    with pytest.raises(DomainError):
        AnnealConfig(cooling_rate=1.0)
    with pytest.raises(DomainError):
        AnnealConfig(input_dim=50)
    cfg = AnnealConfig()
    assert cfg.temperature(10) == pytest.approx(cfg.initial_temperature * cfg.cooling_rate**10)


def test_anneal_deterministic_and_monotone_best():
    cfg = AnnealConfig(iterations=60, checkpoints=(0, 30, 60), crosscheck_every=30, seed=3)
    a = anneal_min_entropy(cfg, fock_state(6, 11))
    b = anneal_min_entropy(cfg, fock_state(6, 11))
    assert a.final_entropy == b.final_entropy
    assert np.array_equal(a.final_state, b.final_state)
    best = [r.best_entropy for r in a.records]
    assert all(y <= x for x, y in zip(best, best[1:]))
    assert a.final_entropy <= a.initial_entropy
    assert sorted(a.snapshots) == [0, 30, 60]
    assert a.max_crosscheck_error() < 1e-9


def test_wrong_initial_dimension():
    with pytest.raises(DomainError):
        anneal_min_entropy(AnnealConfig(iterations=5), fock_state(0, 5))


def test_coherent_start_stays_near_floor():
    cfg = AnnealConfig(iterations=40, seed=1, crosscheck_every=0, checkpoints=(0, 40))
    psi = coherent_state(0.5, 11)
    trace = anneal_min_entropy(cfg, psi)
    assert trace.final_entropy == pytest.approx(g_function(0.85), abs=1e-4)


def test_coherent_fit():
    alpha, overlap, mean = coherent_fit(coherent_state(0.4 + 0.3j, 11))
    assert alpha == pytest.approx(0.4 + 0.3j, abs=1e-9)
    assert overlap == pytest.approx(1.0, abs=1e-12)
    assert mean == pytest.approx(0.25, abs=1e-9)
    _, overlap, _ = coherent_fit(fock_state(3, 11))
    assert overlap < 0.5


def test_restarts_and_track():
    cfg = AnnealConfig(iterations=20, checkpoints=(0, 10, 20), crosscheck_every=0)
    best, traces = anneal_restarts(cfg, fock_state(6, 11), restarts=3, threads=2)
    assert len(traces) == 3
    assert len({t.config.seed for t in traces}) == 3
    assert best.final_entropy == min(t.final_entropy for t in traces)
    table = anneal_majorization_track(best)
    assert set(table) == {0, 10, 20, "thermal"}
    assert all(len(v) == cfg.output_dim for v in table.values())
    with pytest.raises(DomainError):
        anneal_majorization_track(best, [5])
