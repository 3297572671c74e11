"""Simulated annealing of the classical-noise output entropy over pure input states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import classical_noise_fock, apply_classical_noise
from .fock import (
    DomainError,
    coherent_state,
    density_matrix,
    entropy_from_spectrum,
    mean_amplitude,
    mean_photon_number,
    von_neumann_entropy,
)
from .majorization import partial_sums
from .parallel import ordered_map


@dataclass(frozen=True)
class AnnealConfig:
    n: float = 0.85
    input_dim: int = 11
    output_dim: int = 41
    iterations: int = 400
    # tuned so that best-of-5 runs from |6> at n = 0.85 settle on a
    # low-amplitude coherent state; a hotter start random-walks for most of the run
    initial_temperature: float = 0.003
    cooling_rate: float = 0.988
    step_scale: float = 0.22
    seed: int = 0
    checkpoints: tuple = (0, 100, 200, 400)
    crosscheck_every: int = 100

    def __post_init__(self):
        if self.n <= 0:
            raise DomainError("annealing needs n > 0")
        if not 1 <= self.input_dim <= self.output_dim:
            raise DomainError("need 1 <= input_dim <= output_dim")
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if self.initial_temperature <= 0 or not 0 < self.cooling_rate < 1 or self.step_scale <= 0:
            raise DomainError("temperature, cooling rate and step scale must be positive (rate below 1)")

    def temperature(self, i: int) -> float:
        return self.initial_temperature * self.cooling_rate**i


@dataclass
class AnnealRecord:
    iteration: int
    entropy: float
    accepted: bool
    temperature: float
    best_entropy: float


@dataclass
class AnnealTrace:
    config: AnnealConfig
    initial_entropy: float
    records: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    crosschecks: list = field(default_factory=list)  # (iteration, analytic, quadrature)
    final_state: np.ndarray | None = None
    final_entropy: float = math.nan
    fit_alpha: complex = 0j
    fit_overlap: float = 0.0
    fit_mean_photons: float = 0.0

    @property
    def acceptance_rate(self) -> float:
        return sum(r.accepted for r in self.records) / max(1, len(self.records))

    def max_crosscheck_error(self) -> float:
        return max((abs(a - q) for _, a, q in self.crosschecks), default=0.0)


def output_entropy(psi: np.ndarray, n: float, output_dim: int) -> float:
    """S(N_n(|psi><psi|)) on ``output_dim`` levels via the Fock-basis formula."""
    out = classical_noise_fock(density_matrix(psi), n, output_dim)
    return entropy_from_spectrum(np.linalg.eigvalsh(out))


def metropolis_accept(delta: float, temperature: float, u: float) -> bool:
    """Accept downhill moves always, uphill moves with probability exp(-delta/T)."""
    if delta <= 0:
        return True
    return u < math.exp(-delta / temperature)


def _propose(psi, scale, rng):
    step = rng.normal(size=psi.size) + 1j * rng.normal(size=psi.size)
    new = psi + scale / math.sqrt(2) * step
    return new / np.linalg.norm(new)


def anneal_min_entropy(config: AnnealConfig, initial: np.ndarray, rng: np.random.Generator | None = None) -> AnnealTrace:
    """Metropolis annealing with temperature T_i = T0 c^i; each iteration is one proposal.

    The returned final state, and each checkpoint snapshot, is the
    lowest-entropy state visited so far, so the final entropy never exceeds
    the initial one.
    """
    psi = np.asarray(initial, dtype=complex)
    if psi.shape != (config.input_dim,):
        raise DomainError(f"initial state must have dim {config.input_dim}, got {psi.shape}")
    psi = psi / np.linalg.norm(psi)
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    n, dout = config.n, config.output_dim
    current = output_entropy(psi, n, dout)
    trace = AnnealTrace(config, current)
    best_psi, best = psi.copy(), current
    checkpoints = set(config.checkpoints)
    if 0 in checkpoints:
        trace.snapshots[0] = psi.copy()
    for i in range(1, config.iterations + 1):
        T = config.temperature(i)
        cand = _propose(psi, config.step_scale * T / config.initial_temperature, rng)
        s_cand = output_entropy(cand, n, dout)
        ok = metropolis_accept(s_cand - current, T, rng.uniform())
        if ok:
            psi, current = cand, s_cand
            if current < best:
                best_psi, best = psi.copy(), current
        trace.records.append(AnnealRecord(i, current, ok, T, best))
        if i in checkpoints:
            trace.snapshots[i] = best_psi.copy()
        if config.crosscheck_every and i % config.crosscheck_every == 0:
            rho = density_matrix(psi)
            quad = apply_classical_noise(rho, n, method="quadrature", dim_out=dout, max_deficit=None)
            trace.crosschecks.append((i, current, von_neumann_entropy(quad)))
    trace.final_state = best_psi
    trace.final_entropy = best
    fit = coherent_fit(best_psi)
    trace.fit_alpha, trace.fit_overlap, trace.fit_mean_photons = fit
    return trace


def coherent_fit(psi: np.ndarray):
    """(alpha, overlap, mean photons): alpha = <a>, overlap = |<alpha|psi>|^2 with the truncated coherent state."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    alpha = mean_amplitude(psi)
    ref = coherent_state(alpha, psi.size)
    overlap = float(abs(np.vdot(ref, psi)) ** 2)
    return alpha, overlap, mean_photon_number(psi)


def anneal_restarts(config: AnnealConfig, initial: np.ndarray, restarts: int = 5, threads: int | None = None):
    """Independent runs seeded from children of ``config.seed``; returns (best trace, all traces)."""
    seeds = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in np.random.SeedSequence(config.seed).spawn(restarts)]
    configs = [AnnealConfig(**{**config.__dict__, "seed": s}) for s in seeds]
    traces = ordered_map(lambda c: anneal_min_entropy(c, initial), configs, threads)
    best = min(traces, key=lambda t: t.final_entropy)
    return best, traces


def anneal_majorization_track(trace: AnnealTrace, checkpoints=None) -> dict:
    """Ordered partial sums of the output spectrum at each checkpoint, plus the thermal reference.

    Keys are checkpoint iterations and ``"thermal"``; values are arrays of
    length ``output_dim``.
    """
    cfg = trace.config
    checkpoints = sorted(trace.snapshots) if checkpoints is None else checkpoints
    table = {}
    for it in checkpoints:
        if it not in trace.snapshots:
            raise DomainError(f"no snapshot at iteration {it}")
        out = classical_noise_fock(density_matrix(trace.snapshots[it]), cfg.n, cfg.output_dim)
        table[it] = partial_sums(np.linalg.eigvalsh(out)).sums
    q = np.arange(cfg.output_dim)
    table["thermal"] = 1 - (cfg.n / (cfg.n + 1)) ** (q + 1)
    return table
