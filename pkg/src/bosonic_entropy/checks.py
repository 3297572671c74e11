"""Named invariant checks run by ``boson-entropy verify``.

Each check takes ``quick`` and returns a ``CheckResult``. A check passes
when its measured worst case is within the stated tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    beam_splitter_classical_witness,
    beam_splitter_witness,
    classical_curve,
    thermal_curve,
)
from .channels import (
    Amplifier,
    ClassicalNoise,
    PureLoss,
    ThermalNoise,
    apply_channel,
    dual_map,
    entropy_decomposition_check,
    local_minimum_operator,
    verify_composition,
)
from .fock import density_matrix, displacement_operator, fock_state, g_function, random_pure_state, trace_norm
from .gaussian import gaussian_conjecture_check, random_gaussian_state
from .majorization import fock_majorization_sweep, random_majorization_sweep


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: dict = field(default_factory=dict)
    duration_s: float = 0.0


COMPOSITION_PARAMS = {
    "NN": {"n1": 0.5, "n2": 0.5},
    "EE": {"eta1": 0.7, "eta2": 0.7, "N1": 0.6, "N2": 0.6},
    "NE_decomp": {"eta": 0.7, "N": 0.6},
    "EN_decomp": {"eta": 0.7, "N": 0.6},
    "amp_loss": {"eta": 0.6},
    "loss_amp": {"n": 0.4},
    "amp_thermal": {"eta": 0.7, "N": 1.0, "eta_prime": 0.6},
    "thermal_amp": {"n": 0.85, "n_prime": 0.4},
}


def _probes(count, dim, seed, max_photons=10):
    rng = np.random.default_rng(seed)
    return [random_pure_state(min(max_photons, dim - 1), dim, rng) for _ in range(count)]


def check_composition(quick=False):
    dim = 16 if quick else 32
    probes = _probes(3 if quick else 20, dim, 11)
    devs = {rule: verify_composition(rule, p, probes, dim=dim) for rule, p in COMPOSITION_PARAMS.items()}
    worst = max(devs.values())
    return CheckResult("composition", worst <= 1e-6, worst, 1e-6, devs)


def check_duality(quick=False):
    rng = np.random.default_rng(12)
    dim = 12 if quick else 20
    specs = [ClassicalNoise(0.7), ThermalNoise(0.6, 0.8), PureLoss(0.5), Amplifier(1.5)]
    devs = {}
    for spec in specs:
        worst = 0.0
        for _ in range(3):
            a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            a = a + a.conj().T
            b = density_matrix(random_pure_state(5, dim, rng))
            lhs = np.trace(a @ apply_channel(spec, b, max_deficit=None))
            rhs = np.trace(dual_map(spec, a) @ b)
            worst = max(worst, abs(lhs - rhs))
        devs[type(spec).__name__] = worst
    worst = max(devs.values())
    return CheckResult("duality", worst <= 1e-8, worst, 1e-8, devs)


def _displaced(rho, alpha, dim):
    d = displacement_operator(alpha, dim)
    return d @ rho @ d.conj().T


def check_covariance(quick=False):
    rng = np.random.default_rng(13)
    work, block = 64, 24
    worst = {"classical": 0.0, "thermal": 0.0}
    for _ in range(2 if quick else 5):
        rho = np.zeros((work, work), dtype=complex)
        rho[:7, :7] = density_matrix(random_pure_state(6, 7, rng))
        alpha = complex(*rng.uniform(-0.7, 0.7, 2))
        for name, spec, beta in (
            ("classical", ClassicalNoise(0.6), alpha),
            ("thermal", ThermalNoise(0.7, 0.5), math.sqrt(0.7) * alpha),
        ):
            kw = {"max_deficit": None}
            if name == "thermal":
                kw["method"] = "decomposition"
            lhs = apply_channel(spec, _displaced(rho, alpha, work), **kw)
            rhs = _displaced(apply_channel(spec, rho, **kw), beta, work)
            worst[name] = max(worst[name], trace_norm(lhs[:block, :block] - rhs[:block, :block]))
    w = max(worst.values())
    return CheckResult("covariance", w <= 1e-6, w, 1e-6, worst)


def check_gaussian(quick=False):
    rng = np.random.default_rng(14)
    count = 1000 if quick else 10000
    worst = math.inf
    for i in range(count):
        state = random_gaussian_state(rng)
        if i % 2:
            spec = ClassicalNoise(float(rng.uniform(0, 3)))
        else:
            spec = ThermalNoise(float(rng.uniform(0, 1)), float(rng.uniform(0, 3)))
        worst = min(worst, gaussian_conjecture_check(state, spec)[2])
    return CheckResult("gaussian_conjecture", worst >= -1e-12, worst, -1e-12, {"samples": count})


def check_witnesses(quick=False):
    probes = _probes(5 if quick else 50, 24, 15)
    worst = math.inf
    for k in (2, 3):
        for psi in probes:
            worst = min(worst, beam_splitter_witness(psi, k, 0.6), beam_splitter_classical_witness(psi, k, 0.5))
    return CheckResult("beam_splitter_witnesses", worst >= -1e-8, worst, -1e-8, {"probes": len(probes)})


def check_entropy_identity(quick=False):
    probes = _probes(10 if quick else 100, 41, 16)
    residual, gap = 0.0, math.inf
    for spec in (ClassicalNoise(0.85), ThermalNoise(0.7, 0.6)):
        for psi in probes:
            r, g = entropy_decomposition_check(psi, spec)
            residual, gap = max(residual, r), min(gap, g)
    ok = residual <= 1e-6 and gap >= 0
    return CheckResult("entropy_identity", ok, residual, 1e-6, {"min_gap": gap})


def check_local_minimum(quick=False):
    dim = 30
    k = np.arange(dim)
    n = 0.85
    f = local_minimum_operator(ClassicalNoise(n), fock_state(0, dim))
    dev_c = float(np.max(np.abs(f - np.diag(g_function(n) + k * math.log((n + 1) / n)))))
    eta, N = 0.7, 0.6
    M = (1 - eta) * N
    f = local_minimum_operator(ThermalNoise(eta, N), fock_state(0, dim))
    dev_t = float(np.max(np.abs(f - np.diag(g_function(M) + eta * k * math.log((M + 1) / M)))))
    worst = max(dev_c, dev_t)
    return CheckResult("local_minimum", worst <= 1e-6, worst, 1e-6, {"classical": dev_c, "thermal": dev_t})


def check_bounds(quick=False):
    curves = [classical_curve()] + [thermal_curve(N) for N in (0.1, 0.5, 10.0)]
    worst = max(c.max_violation() for c in curves)
    return CheckResult("bound_validity", worst <= 1e-12, worst, 1e-12)


def check_majorization(quick=False):
    rows = fock_majorization_sweep()
    sweep = random_majorization_sweep(10 if quick else 100, 10, 0.85, seed=17)
    failures = sum(not r.majorized for r in rows) + sum(not r.majorized for r in sweep.rows)
    return CheckResult("majorization", failures == 0, float(failures), 0.0,
                       {"fock_rows": len(rows), "random_trials": len(sweep.rows)})


CHECKS = {
    "composition": check_composition,
    "duality": check_duality,
    "covariance": check_covariance,
    "gaussian_conjecture": check_gaussian,
    "beam_splitter_witnesses": check_witnesses,
    "entropy_identity": check_entropy_identity,
    "local_minimum": check_local_minimum,
    "bound_validity": check_bounds,
    "majorization": check_majorization,
}


def run_checks(quick: bool = False, names=None) -> list:
    results = []
    for name in names or CHECKS:
        start = time.perf_counter()
        try:
            res = CHECKS[name](quick)
        except Exception as exc:  # a crashing check is a failed check, reported by name
            res = CheckResult(name, False, math.nan, math.nan, {"error": f"{type(exc).__name__}: {exc}"})
        res.name = name
        res.duration_s = time.perf_counter() - start
        results.append(res)
    return results
