"""Acceptance suite: ten end-to-end criteria at their stated tolerances.

Each test prints one ``PASS``/``FAIL`` line (visible under ``pytest -v`` and
when the module is run as a script) and then asserts the same verdict.
Entropies quoted in bits are the natural-log values divided by ln 2.
"""

import math
import sys
import time

import numpy as np

from bosonic_entropy.annealing import AnnealConfig, anneal_majorization_track, anneal_restarts
from bosonic_entropy.bounds import (
    beam_splitter_classical_witness,
    beam_splitter_witness,
    classical_curve,
    classical_lower_envelope,
    thermal_curve,
)
from bosonic_entropy.channels import (
    COMPOSITION_RULES,
    ClassicalNoise,
    ThermalNoise,
    apply_channel,
    apply_classical_noise,
    entropy_decomposition_check,
    fock_output_eigenvalues,
    local_minimum_operator,
    verify_composition,
)
from bosonic_entropy.checks import COMPOSITION_PARAMS
from bosonic_entropy.fock import (
    BITS,
    coherent_state,
    density_matrix,
    displacement_operator,
    fock_state,
    g_function,
    random_pure_state,
    von_neumann_entropy,
)
from bosonic_entropy.gaussian import (
    GaussianState,
    evolve_gaussian,
    gaussian_conjecture_check,
    gaussian_entropy,
    gaussian_fock_state,
    random_gaussian_state,
)
from bosonic_entropy.majorization import (
    fock_majorization_sweep,
    random_majorization_sweep,
    fock_partial_sums_analytic,
    partial_sums,
)

LN2 = math.log(2)


def _report(number, title, ok, detail, capsys=None):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def _probes(count, dim, seed, max_photons=10):
    rng = np.random.default_rng(seed)
    return [random_pure_state(min(max_photons, dim - 1), dim, rng) for _ in range(count)]


def test_criterion_01_vacuum_output_entropy(capsys):
    start = time.perf_counter()
    out = apply_classical_noise(density_matrix(fock_state(0, 41)), 0.85, max_deficit=None)
    bits = von_neumann_entropy(out, BITS)
    elapsed = time.perf_counter() - start
    ok = abs(bits - 1.841) <= 1e-3 and abs(bits - g_function(0.85, BITS)) <= 1e-3 and elapsed < 1
    _report(1, "vacuum output entropy", ok, f"S = {bits:.6f} bits (target 1.841 +- 0.001), {elapsed:.3f}s", capsys)


def test_criterion_02_fock_spectrum_oracle(capsys):
    start = time.perf_counter()
    dim, worst = 41, 0.0
    for n in (0.3, 0.85, 2.0):
        for k in range(7):
            quad = apply_classical_noise(density_matrix(fock_state(k, dim)), n, method="quadrature", max_deficit=None)
            worst = max(worst, float(np.max(np.abs(quad - np.diag(fock_output_eigenvalues(k, n, dim))))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 30
    _report(2, "Fock spectrum vs quadrature", ok, f"max elementwise diff {worst:.2e} (tol 1e-8), {elapsed:.1f}s",
            capsys)


def test_criterion_03_composition_rules(capsys):
    start = time.perf_counter()
    probes = _probes(20, 32, 11)
    devs = {rule: verify_composition(rule, COMPOSITION_PARAMS[rule], probes, dim=32) for rule in COMPOSITION_RULES}
    elapsed = time.perf_counter() - start
    worst_rule = max(devs, key=devs.get)
    ok = devs[worst_rule] <= 1e-6 and elapsed < 120
    _report(3, "composition identities", ok,
            f"max trace-norm deviation {devs[worst_rule]:.2e} ({worst_rule}) over {len(devs)} rules, {elapsed:.1f}s",
            capsys)


def test_criterion_04_analytic_partial_sums(capsys):
    worst = 0.0
    for n in (0.5, 0.85, 1.0, 2.0):
        numeric = partial_sums(fock_output_eigenvalues(1, n, 400)).sums
        for q in range(40):
            worst = max(worst, abs(fock_partial_sums_analytic(1, n, q) - numeric[q]))
    _report(4, "closed-form partial sums", worst <= 1e-10, f"max diff {worst:.2e} (tol 1e-10)", capsys)


def test_criterion_05_bound_curves(capsys):
    classical = classical_curve()
    violations = [classical.max_violation()]
    thermal_ok = True
    for N in (0.1, 0.5, 10.0):
        curve = thermal_curve(N)
        violations.append(curve.max_violation())
        thermal_ok &= bool(np.all(curve.envelope <= curve.upper + 1e-12))
    ratios = [classical_lower_envelope(n) / g_function(n) for n in (1e-3, 1e3)]
    worst = max(violations)
    ok = worst <= 1e-12 and min(ratios) >= 0.98 and thermal_ok
    _report(5, "bound validity and tightness", ok,
            f"max violation {worst:.2e}, envelope/g at n=1e-3, 1e3: {ratios[0]:.4f}, {ratios[1]:.4f}", capsys)


def test_criterion_06_inequality_witnesses(capsys):
    probes = _probes(50, 24, 15)
    worst = math.inf
    for k in (2, 3):
        for psi in probes:
            worst = min(worst, beam_splitter_witness(psi, k, 0.6), beam_splitter_classical_witness(psi, k, 0.5))
    _report(6, "beam-splitter witnesses", worst >= -1e-8, f"min slack {worst:.3e} (tol -1e-8)", capsys)


def test_criterion_07_gaussian_restricted(capsys):
    rng = np.random.default_rng(14)
    margins = {"classical": math.inf, "thermal": math.inf}
    for _ in range(10_000):
        state = random_gaussian_state(rng)
        spec = ClassicalNoise(float(rng.uniform(0, 3)))
        margins["classical"] = min(margins["classical"], gaussian_conjecture_check(state, spec)[2])
        state = random_gaussian_state(rng)
        spec = ThermalNoise(float(rng.uniform(0, 1)), float(rng.uniform(0, 3)))
        margins["thermal"] = min(margins["thermal"], gaussian_conjecture_check(state, spec)[2])
    cross = 0.0
    states = [GaussianState.coherent(0.7 + 0.4j), GaussianState.thermal(0.6), GaussianState.squeezed_vacuum(0.45, 0.9)]
    for state in states:
        rho = gaussian_fock_state(state, 100)
        for spec in (ClassicalNoise(0.85), ThermalNoise(0.7, 0.6)):
            kw = {"max_deficit": None}
            if isinstance(spec, ThermalNoise):
                kw["method"] = "decomposition"
            fock = von_neumann_entropy(apply_channel(spec, rho, **kw))
            cross = max(cross, abs(fock - gaussian_entropy(evolve_gaussian(state, spec))))
    worst = min(margins.values())
    ok = worst >= -1e-12 and cross <= 1e-4
    _report(7, "Gaussian restricted conjecture", ok,
            f"min margin {worst:.3e} over 2x10^4 states, Fock cross-check {cross:.2e}", capsys)


def test_criterion_08_local_minimum_structure(capsys):
    dim, n = 30, 0.85
    k = np.arange(dim)
    f = local_minimum_operator(ClassicalNoise(n), fock_state(0, dim))
    dev_classical = float(np.max(np.abs(f - np.diag(g_function(n) + k * math.log((n + 1) / n)))))
    eta, N = 0.7, 0.6
    M = (1 - eta) * N
    f = local_minimum_operator(ThermalNoise(eta, N), fock_state(0, dim))
    dev_thermal = float(np.max(np.abs(f - np.diag(g_function(M) + eta * k * math.log((M + 1) / M)))))

    # displaced vacuum: F(|a><a|) = D(a) F(|0><0|) D(a)^dag, compared on the
    # lowest 6 levels where double-precision logarithms of the output resolve it
    big, block, work = 40, 6, 50
    f0 = local_minimum_operator(ClassicalNoise(n), fock_state(0, big), dim=big, work_dim=work)
    dev_cov = 0.0
    for alpha in (0.3, 0.5 + 0.2j, 1.0):
        fa = local_minimum_operator(ClassicalNoise(n), coherent_state(alpha, big), dim=big, work_dim=work)
        d = displacement_operator(alpha, big)
        ref = d @ f0 @ d.conj().T
        dev_cov = max(dev_cov, float(np.max(np.abs(fa[:block, :block] - ref[:block, :block]))))

    residual, gap = 0.0, math.inf
    for spec in (ClassicalNoise(n), ThermalNoise(eta, N)):
        for psi in _probes(100, 41, 16):
            r, g = entropy_decomposition_check(psi, spec)
            residual, gap = max(residual, r), min(gap, g)
    ok = max(dev_classical, dev_thermal, dev_cov) <= 1e-6 and residual <= 1e-6 and gap >= 0
    _report(8, "local-minimum structure", ok,
            f"diag dev {dev_classical:.1e}/{dev_thermal:.1e}, covariance {dev_cov:.1e}, "
            f"identity residual {residual:.1e}, min gap {gap:.3f}", capsys)


def test_criterion_09_majorization_sweeps(capsys):
    start = time.perf_counter()
    rows = fock_majorization_sweep(range(7), (0.85,), ((0.7, 0.6),), 41)
    sweep = random_majorization_sweep(100, 10, 0.85, seed=0)
    elapsed = time.perf_counter() - start
    fock_ok = sum(r.majorized for r in rows)
    ok = fock_ok == len(rows) and sweep.n_majorized == 100 and elapsed < 300
    _report(9, "majorization sweeps", ok,
            f"Fock {fock_ok}/{len(rows)}, random {sweep.n_majorized}/100, {elapsed:.1f}s", capsys)



def test_criterion_10_annealing(capsys):
    start = time.perf_counter()
    cfg = AnnealConfig()
    best, traces = anneal_restarts(cfg, fock_state(6, cfg.input_dim), restarts=5)
    elapsed = time.perf_counter() - start
    initial = best.initial_entropy / LN2
    final = best.final_entropy / LN2
    table = anneal_majorization_track(best, [400])
    stair_dev = float(np.max(np.abs(table[400] - table["thermal"])))
    ok = (abs(initial - 3.754) <= 2e-3 and final <= 1.90 and best.fit_overlap >= 0.99
          and stair_dev <= 1e-3 and elapsed < 600)
    _report(10, "annealing from |6>", ok,
            f"S {initial:.4f} -> {final:.4f} bits, overlap {best.fit_overlap:.4f}, "
            f"staircase dev {stair_dev:.1e}, {elapsed:.1f}s", capsys)


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        try:
            fn(None)
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
