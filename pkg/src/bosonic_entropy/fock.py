"""Truncated Fock-space states, operators and spectral quantities.

States are plain numpy arrays: a pure state is a complex vector of length
``dim`` (amplitudes on |0>..|dim-1>), a mixed state is a ``dim x dim``
complex Hermitian matrix. All entropies are in nats.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
from scipy.special import gammaln

# numerical tolerances shared by every module
TOL_PSD = 1e-10
TOL_HERM = 1e-10
TOL_NORM = 1e-8
TOL_EIG = 1e-8

BITS = 2.0


def _unit_scale(base):
    return 1.0 if base is None else 1.0 / math.log(base)


class DomainError(ValueError):
    """A parameter lies outside the domain of the requested quantity."""


class ValidationError(ValueError):
    """An array does not satisfy the invariants of the state it claims to be."""


def fock_state(k: int, dim: int) -> np.ndarray:
    if dim < 1:
        raise DomainError(f"dim must be positive, got {dim}")
    if not 0 <= k < dim:
        raise IndexError(f"Fock level {k} outside truncation dim {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[k] = 1.0
    return psi


def coherent_state(alpha: complex, dim: int, full_output: bool = False):
    """Coherent state |alpha> truncated to ``dim`` levels and renormalized.

    With ``full_output`` also returns the norm deficit of the truncated
    expansion before renormalization, ``1 - sum_k |<k|alpha>|^2``.
    """
    alpha = complex(alpha)
    k = np.arange(dim)
    if alpha == 0:
        amps = fock_state(0, dim)
        deficit = 0.0
    else:
        r2 = abs(alpha) ** 2
        log_mod = -0.5 * r2 + k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1)
        amps = np.exp(log_mod + 1j * k * np.angle(alpha))
        norm2 = float(np.sum(np.abs(amps) ** 2))
        deficit = max(0.0, 1.0 - norm2)
        amps = amps / math.sqrt(norm2)
    if full_output:
        return amps, deficit
    return amps


def thermal_state(mean_photons: float, dim: int, full_output: bool = False):
    """Geometric (thermal) state with mean photon number M, not renormalized.

    The returned trace deficit ``(M/(M+1))**dim`` is the probability mass
    cut off by the truncation.
    """
    M = float(mean_photons)
    if M < 0:
        raise DomainError(f"mean photon number must be >= 0, got {M}")
    if M == 0:
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        deficit = 0.0
    else:
        k = np.arange(dim)
        ratio = M / (M + 1.0)
        rho = np.diag(np.exp(k * math.log(ratio)) / (M + 1.0)).astype(complex)
        deficit = ratio**dim
    if full_output:
        return rho, deficit
    return rho


def annihilation_operator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def phase_rotation(phi: float, dim: int) -> np.ndarray:
    """exp(i phi a^dag a) on the truncated space."""
    return np.diag(np.exp(1j * phi * np.arange(dim)))


def displacement_operator(mu: complex, dim: int, pad: int | None = None) -> np.ndarray:
    """D(mu) = exp(mu a^dag - mu^* a) restricted to the lowest ``dim`` levels.

    The exponential is taken on a padded space of ``dim + pad`` levels and
    cropped, so the returned block has the exact matrix elements up to the
    leakage through the padded edge.
    """
    mu = complex(mu)
    if mu == 0:
        return np.eye(dim, dtype=complex)
    if pad is None:
        r = abs(mu)
        pad = int(math.ceil(r * r + 10 * r + 2 * math.sqrt(dim) * r)) + 16
    big = dim + pad
    a = annihilation_operator(big)
    gen = mu * a.conj().T - mu.conjugate() * a
    return scipy.linalg.expm(gen)[:dim, :dim]


def density_matrix(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def random_pure_state(max_photons: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized state with real and imaginary coefficient parts uniform on [-1, 1]."""
    if max_photons >= dim:
        raise DomainError("max_photons must be below the truncation dim")
    size = max_photons + 1
    phi = rng.uniform(-1.0, 1.0, size) + 1j * rng.uniform(-1.0, 1.0, size)
    psi = np.zeros(dim, dtype=complex)
    psi[:size] = phi / np.linalg.norm(phi)
    return psi


def mean_photon_number(state: np.ndarray) -> float:
    state = np.asarray(state)
    n = np.arange(state.shape[0])
    if state.ndim == 1:
        return float(np.sum(n * np.abs(state) ** 2))
    return float(np.real(np.sum(n * np.diag(state))))


def mean_amplitude(state: np.ndarray) -> complex:
    """<a> for a pure state vector or a density matrix."""
    state = np.asarray(state, dtype=complex)
    s = np.sqrt(np.arange(1, state.shape[0]))
    if state.ndim == 1:
        return complex(np.sum(state[:-1].conj() * s * state[1:]))
    # Tr[rho a] = sum_k sqrt(k+1) rho[k+1, k]
    return complex(np.sum(s * np.diag(state, k=-1)))


def check_density_matrix(rho: np.ndarray, name: str = "rho") -> np.ndarray:
    """Validate the DensityMatrix invariants; return the array as complex."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > TOL_HERM:
        raise ValidationError(f"{name} is not Hermitian within {TOL_HERM}")
    tr = float(np.real(np.trace(rho)))
    if tr > 1.0 + TOL_NORM:
        raise ValidationError(f"{name} has trace {tr} > 1")
    lo = float(np.min(np.linalg.eigvalsh(rho)))
    if lo < -TOL_PSD:
        raise ValidationError(f"{name} has eigenvalue {lo} below -{TOL_PSD}")
    return rho


def is_diagonal(rho: np.ndarray) -> bool:
    return not np.any(rho - np.diag(np.diag(rho)))


def hermitian_eigh(rho: np.ndarray):
    """Eigen-decomposition of a Hermitian matrix.

    Exactly diagonal inputs bypass LAPACK so that tiny eigenvalues keep their
    full relative precision (thermal outputs have eigenvalues far below
    machine epsilon that still matter inside logarithms).
    """
    rho = np.asarray(rho, dtype=complex)
    if is_diagonal(rho):
        return np.real(np.diag(rho)).copy(), np.eye(rho.shape[0], dtype=complex)
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > TOL_HERM:
        raise ValidationError(f"matrix is not Hermitian within {TOL_HERM}")
    return np.linalg.eigh(rho)


def spectrum(rho: np.ndarray, full_output: bool = False):
    """Eigenvalues sorted in decreasing order.

    With ``full_output`` also returns the reconstruction residual
    ``max |rho - V diag(w) V^dag|``.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = hermitian_eigh(rho)
    order = np.argsort(w)[::-1]
    w = w[order]
    if not full_output:
        return w
    v = v[:, order]
    residual = float(np.max(np.abs(rho - (v * w) @ v.conj().T), initial=0.0))
    return w, residual


def _clipped(eigs: np.ndarray) -> np.ndarray:
    eigs = np.asarray(eigs, dtype=float)
    lo = float(np.min(eigs, initial=0.0))
    if lo < -TOL_PSD:
        raise ValidationError(f"eigenvalue {lo} below -{TOL_PSD}")
    return np.clip(eigs, 0.0, None)


def entropy_from_spectrum(eigs: np.ndarray, base: float | None = None) -> float:
    """-sum p ln p over the clipped spectrum; ``base=2`` reports bits."""
    p = _clipped(eigs)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p))) * _unit_scale(base)


def von_neumann_entropy(rho: np.ndarray, base: float | None = None) -> float:
    return entropy_from_spectrum(spectrum(rho), base)


def renyi2_entropy(rho: np.ndarray, base: float | None = None) -> float:
    rho = np.asarray(rho, dtype=complex)
    purity = float(np.real(np.sum(rho * rho.T)))
    return -math.log(purity) * _unit_scale(base)


def g_function(x, base: float | None = None):
    """Entropy of a thermal state with mean photon number x (nats unless ``base`` is given)."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("g(x) requires x >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(arr > 0, (1 + arr) * np.log1p(arr) - arr * np.log(np.where(arr > 0, arr, 1.0)), 0.0)
    out = out * _unit_scale(base)
    if np.ndim(x) == 0:
        return float(out)
    return out


def relative_entropy(rho1: np.ndarray, rho2: np.ndarray, support_tol: float = 1e-14) -> float:
    """S(rho1 || rho2) = Tr[rho1 (ln rho1 - ln rho2)], in the eigenbasis of rho2.

    Returns ``math.inf`` when rho1 has weight above ``TOL_PSD`` outside the
    support of rho2. Support is judged by eigenvalues above ``support_tol``
    times the largest one, except for exactly diagonal rho2 whose entries
    are exact and only need to be positive.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    w2, v2 = hermitian_eigh(rho2)
    floor = 0.0 if is_diagonal(np.asarray(rho2)) else support_tol * max(float(np.max(w2)), 0.0)
    inside = w2 > floor
    # diagonal of rho1 in the eigenbasis of rho2
    p = np.real(np.einsum("ij,ik,kj->j", v2.conj(), rho1, v2))
    if np.sum(p[~inside]) > TOL_PSD:
        return math.inf
    cross = float(np.sum(p[inside] * np.log(w2[inside])))
    return -von_neumann_entropy(rho1) - cross


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(a, dtype=complex)))))
