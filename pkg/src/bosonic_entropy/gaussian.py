"""Single-mode Gaussian states described by first moments and a 2x2 covariance matrix.

The covariance matrix is stored in the complex-amplitude convention

    Gamma = [[c, s], [s*, c]],   c = <{da, da^dag}>/2,   s = <(da)^2>,

with da = a - <a>. Only det(Gamma) = c^2 - |s|^2 and c enter any result, so
the placement of the conjugate on the off-diagonal is immaterial for
entropies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ClassicalNoise, ThermalNoise
from .fock import DomainError, ValidationError, coherent_state, density_matrix, g_function, thermal_state

DET_TOL = 1e-12


@dataclass(frozen=True)
class GaussianState:
    mean: complex
    c: float
    s: complex = 0.0

    def __post_init__(self):
        if self.c < 0.5 - DET_TOL:
            raise ValidationError(f"diagonal covariance {self.c} below 1/2")
        if self.det < 0.25 - DET_TOL:
            raise ValidationError(f"det Gamma = {self.det} violates the uncertainty bound 1/4")

    @property
    def det(self) -> float:
        return self.c * self.c - abs(self.s) ** 2

    @property
    def gamma(self) -> np.ndarray:
        return np.array([[self.c, self.s], [np.conj(self.s), self.c]], dtype=complex)

    @property
    def zeta0(self) -> tuple[complex, complex]:
        return complex(self.mean), complex(self.mean).conjugate()

    @property
    def mean_photons(self) -> float:
        return abs(self.mean) ** 2 + self.c - 0.5

    @classmethod
    def coherent(cls, alpha: complex = 0.0) -> "GaussianState":
        return cls(complex(alpha), 0.5, 0.0)

    @classmethod
    def thermal(cls, mean_photons: float) -> "GaussianState":
        return cls(0.0, mean_photons + 0.5, 0.0)

    @classmethod
    def squeezed_vacuum(cls, r: float, phi: float = 0.0) -> "GaussianState":
        """S(xi)|0> with xi = r e^{i phi}, S(xi) = exp[(xi^* a^2 - xi a^dag^2)/2]."""
        return cls(0.0, 0.5 * math.cosh(2 * r), -0.5 * np.exp(1j * phi) * math.sinh(2 * r))


def evolve_gaussian(state: GaussianState, spec) -> GaussianState:
    if isinstance(spec, ClassicalNoise):
        return GaussianState(state.mean, state.c + spec.n, state.s)
    if isinstance(spec, ThermalNoise):
        eta = spec.eta
        return GaussianState(
            math.sqrt(eta) * state.mean,
            eta * state.c + (1 - eta) * (spec.N + 0.5),
            eta * state.s,
        )
    raise TypeError("Gaussian evolution is implemented for classical and thermal noise")


def gaussian_entropy(state: GaussianState, base: float | None = None) -> float:
    det = state.det
    if det < 0.25 - DET_TOL:
        raise ValidationError(f"det Gamma = {det} below 1/4")
    return g_function(max(0.0, math.sqrt(max(det, 0.25)) - 0.5), base)


def output_determinant(state: GaussianState, spec) -> float:
    """det Gamma' expanded in terms of the input det and diagonal, without forming Gamma'."""
    det, c = state.det, state.c
    if isinstance(spec, ClassicalNoise):
        n = spec.n
        return det + n * (n + 2 * c)
    if isinstance(spec, ThermalNoise):
        eta, w = spec.eta, (1 - spec.eta) * (spec.N + 0.5)
        return eta * eta * det + w * (w + 2 * eta * c)
    raise TypeError("Gaussian evolution is implemented for classical and thermal noise")


def conjectured_floor(spec) -> float:
    if isinstance(spec, ClassicalNoise):
        return g_function(spec.n)
    if isinstance(spec, ThermalNoise):
        return g_function((1 - spec.eta) * spec.N)
    raise TypeError("no conjectured floor for this channel")


def gaussian_conjecture_check(state: GaussianState, spec):
    """(output entropy, conjectured floor, margin) for a Gaussian input."""
    det = output_determinant(state, spec)
    if det < 0.25 - DET_TOL:
        raise DomainError("output determinant below 1/4")
    entropy = g_function(max(0.0, math.sqrt(max(det, 0.25)) - 0.5))
    floor = conjectured_floor(spec)
    return entropy, floor, entropy - floor


def random_gaussian_state(rng: np.random.Generator, c_max: float = 5.0, mean_max: float = 2.0) -> GaussianState:
    """Valid Gaussian state by construction: c >= 1/2 and |s|^2 <= c^2 - 1/4."""
    c = 0.5 + rng.uniform(0.0, c_max - 0.5)
    radius = math.sqrt(max(c * c - 0.25, 0.0)) * math.sqrt(rng.uniform())
    s = radius * np.exp(1j * rng.uniform(0, 2 * np.pi))
    mean = mean_max * math.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return GaussianState(complex(mean), c, complex(s))


def squeezed_vacuum_amplitudes(r: float, dim: int, phi: float = 0.0) -> np.ndarray:
    """Fock amplitudes of S(r e^{i phi})|0> from the two-term recurrence, truncated and renormalized."""
    amps = np.zeros(dim, dtype=complex)
    amps[0] = 1.0 / math.sqrt(math.cosh(r))
    ratio = -np.exp(1j * phi) * math.tanh(r)
    for m in range(0, dim - 2, 2):
        amps[m + 2] = amps[m] * ratio * math.sqrt((m + 1) / (m + 2))
    return amps / np.linalg.norm(amps)


def gaussian_fock_state(state: GaussianState, dim: int) -> np.ndarray:
    """Fock-basis density matrix of a thermal, coherent, or pure squeezed state.

    General mixed squeezed states are not needed by the cross-checks and are
    rejected.
    """
    if abs(state.s) == 0:
        if abs(state.c - 0.5) < 1e-15:
            return density_matrix(coherent_state(state.mean, dim))
        if state.mean == 0:
            return thermal_state(state.c - 0.5, dim)
    elif abs(state.det - 0.25) < 1e-12 and state.mean == 0:
        r = 0.5 * math.acosh(2 * state.c)
        phi = float(np.angle(-state.s))
        return density_matrix(squeezed_vacuum_amplitudes(r, dim, phi))
    raise DomainError("Fock representation available for coherent, centered thermal, or squeezed vacuum states")
