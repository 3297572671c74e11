"""Ordered-eigenvalue partial sums and majorization tests for channel outputs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .channels import apply_classical_noise, fock_output_eigenvalues
from .fock import (
    DomainError,
    density_matrix,
    entropy_from_spectrum,
    mean_amplitude,
    mean_photon_number,
    random_pure_state,
    spectrum,
    thermal_state,
    von_neumann_entropy,
)
from .parallel import ordered_map

MAJ_TOL = 1e-9


@dataclass(frozen=True)
class PartialSums:
    sums: np.ndarray

    def __len__(self):
        return len(self.sums)

    def __getitem__(self, q):
        return self.sums[q]


def _as_spectrum(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 2:
        return spectrum(x)
    return np.sort(np.real(x))[::-1]


def partial_sums(spec) -> PartialSums:
    """Cumulative sums of the eigenvalues in decreasing order (matrix or eigenvalue input)."""
    return PartialSums(np.cumsum(_as_spectrum(spec)))


@dataclass(frozen=True)
class MajorizationResult:
    majorized: bool
    first_violation: int | None
    tie: bool = False
    worst_gap: float = 0.0

    def __bool__(self):
        return self.majorized


def majorizes(rho, sigma, tol: float = MAJ_TOL) -> MajorizationResult:
    """Does rho majorize sigma: sum_{i<=q} lambda_i(rho) >= sum_{i<=q} lambda_i(sigma) - tol for all q.

    ``tie`` flags a pass in which some partial sum fell short by less than ``tol``.
    """
    a = _as_spectrum(rho)
    b = _as_spectrum(sigma)
    d = max(a.size, b.size)
    a = np.pad(a, (0, d - a.size))
    b = np.pad(b, (0, d - b.size))
    gap = np.cumsum(a) - np.cumsum(b)
    worst = float(np.min(gap))
    bad = np.nonzero(gap < -tol)[0]
    if bad.size:
        return MajorizationResult(False, int(bad[0]), False, worst)
    return MajorizationResult(True, None, worst < 0, worst)


def _fock1_eigs(n: float, i):
    """Diagonal of N_n(|1><1|): lambda_0 = n/(n+1)^2, lambda_i = n^{i-1}(n^2+i)/(n+1)^{i+2}."""
    i = np.asarray(i, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(i == 0, n / (n + 1) ** 2, n ** (i - 1) * (n * n + i) / (n + 1) ** (i + 2))


def fock_partial_sums_analytic(k: int, n: float, q: int) -> float:
    """Closed-form q-th ordered partial sum of N_n(|1><1|)."""
    if k != 1:
        raise NotImplementedError("closed-form partial sums exist only for k = 1")
    if n <= 0:
        raise DomainError("n must be positive")
    r = n / (n + 1)
    natural = 1 - (1 + (q + 1) / (n * (n + 1))) * r ** (q + 1)
    if n >= 1:
        return natural
    # below n = 1 the vacuum weight lambda_0 is not the largest: lambda_1..lambda_{q+1}
    # precede it as long as lambda_{q+1} > lambda_0
    if _fock1_eigs(n, q + 1) > _fock1_eigs(n, 0):
        return 1 - (1 + (q + 2) / (n * (n + 1))) * r ** (q + 2) - n / (n + 1) ** 2
    return natural


def thermal_fock_output(k: int, eta: float, N: float, dim: int) -> np.ndarray:
    """E_eta^N(|k><k|) as a binomial mixture of classical-noise Fock outputs (diagonal)."""
    if not 0 <= k < dim:
        raise IndexError(f"Fock level {k} outside truncation dim {dim}")
    # pure loss leaves m of the k photons with binomial probability
    p = binom.pmf(np.arange(k + 1), k, eta)
    M = (1 - eta) * N
    diag = np.zeros(dim)
    for m, pm in enumerate(p):
        if pm:
            diag += pm * fock_output_eigenvalues(m, M, dim)
    return np.diag(diag).astype(complex)


@dataclass
class SweepRow:
    k: int
    channel: str
    params: tuple
    majorized: bool
    first_violation: int | None
    entropy_vacuum: float
    entropy_fock: float


def fock_majorization_sweep(k_list=range(7), ns=(0.85,), thermal=((0.7, 0.6),), dim: int = 41):
    """Majorization of each Fock output by the vacuum output, for classical and thermal noise."""
    rows = []
    for n in ns:
        ref = fock_output_eigenvalues(0, n, dim)
        for k in k_list:
            out = fock_output_eigenvalues(k, n, dim)
            res = majorizes(ref, out)
            rows.append(SweepRow(k, "classical", (n,), res.majorized, res.first_violation,
                                 entropy_from_spectrum(ref), entropy_from_spectrum(out)))
    for eta, N in thermal:
        ref = np.real(np.diag(thermal_fock_output(0, eta, N, dim)))
        for k in k_list:
            out = np.real(np.diag(thermal_fock_output(k, eta, N, dim)))
            res = majorizes(ref, out)
            rows.append(SweepRow(k, "thermal", (eta, N), res.majorized, res.first_violation,
                                 entropy_from_spectrum(ref), entropy_from_spectrum(out)))
    return rows


@dataclass
class TrialRow:
    trial: int
    seed: int
    mean_amp_re: float
    mean_amp_im: float
    mean_photons: float
    majorized: bool
    first_violation_q: int | None
    entropy: float


@dataclass
class RandomSweep:
    n: float
    seed: int
    rows: list

    @property
    def n_majorized(self) -> int:
        return sum(r.majorized for r in self.rows)


def _trial_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _run_trial(args):
    trial, seed, max_photons, n, dim, ref = args
    rng = np.random.default_rng(seed)
    psi = random_pure_state(max_photons, dim, rng)
    out = apply_classical_noise(density_matrix(psi), n, max_deficit=None)
    res = majorizes(ref, out)
    amp = mean_amplitude(psi)
    return TrialRow(trial, seed, amp.real, amp.imag, mean_photon_number(psi), res.majorized, res.first_violation,
                    von_neumann_entropy(out))


def random_majorization_sweep(trials: int = 100, max_photons: int = 10, n: float = 0.85, seed: int = 0,
                             dim: int = 41, threads: int | None = None) -> RandomSweep:
    """Random pure inputs on levels 0..max_photons; test majorization by the vacuum output at ``dim`` levels.

    Each trial draws from its own child of ``SeedSequence(seed)``, so rows are
    identical whatever the number of worker threads.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    ref = thermal_state(n, dim)
    children = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(t, _trial_seed(c), max_photons, n, dim, ref) for t, c in enumerate(children)]
    rows = ordered_map(_run_trial, jobs, threads)
    return RandomSweep(n, seed, rows)


def staircase(rho_or_eigs, length: int | None = None) -> np.ndarray:
    s = partial_sums(rho_or_eigs).sums
    if length is not None:
        s = np.pad(s, (0, max(0, length - s.size)), constant_values=s[-1] if s.size else 0.0)[:length]
    return s


def thermal_partial_sums(M: float, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return 1 - (M / (M + 1)) ** (q + 1) if M > 0 else np.ones_like(q)


# names required by the published interface
conjecture2_fock_sweep = fock_majorization_sweep
conjecture2_random_sweep = random_majorization_sweep
