"""Classical-noise, thermal-noise, pure-loss and amplifier channels on truncated Fock spaces.

Every channel here is phase covariant, so its Kraus operators (or their
radial parts) are "shifted diagonals": they move photon number by a fixed
amount. Applications exploit that structure and cost O(D^2) per Kraus
operator instead of a full matrix product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre, gammaln, logsumexp, roots_laguerre

from .fock import (
    DomainError,
    density_matrix,
    g_function,
    hermitian_eigh,
    is_diagonal,
    mean_photon_number,
    relative_entropy,
    thermal_state,
    trace_norm,
    von_neumann_entropy,
)

MAX_DEFICIT = 1e-4
ENV_TAIL = 1e-10
SUPPORT_TOL = 1e-14


class TruncationError(RuntimeError):
    """Probability leaked out of the truncated output space beyond the allowed limit."""

    def __init__(self, message: str, deficit: float):
        super().__init__(message)
        self.deficit = deficit


class SupportError(ArithmeticError):
    """An operator logarithm was requested for a rank-deficient state."""


# ---------------------------------------------------------------------------
# channel descriptions


@dataclass(frozen=True)
class ClassicalNoise:
    n: float

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"classical noise n must be >= 0, got {self.n}")

    @property
    def vacuum_mean_photons(self) -> float:
        return self.n


@dataclass(frozen=True)
class ThermalNoise:
    eta: float
    N: float

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if self.N < 0:
            raise DomainError(f"N must be >= 0, got {self.N}")

    @property
    def vacuum_mean_photons(self) -> float:
        return (1 - self.eta) * self.N


@dataclass(frozen=True)
class PureLoss:
    eta: float

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")

    @property
    def vacuum_mean_photons(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Amplifier:
    kappa: float

    def __post_init__(self):
        if self.kappa < 1:
            raise DomainError(f"amplifier gain must be >= 1, got {self.kappa}")


ChannelSpec = ClassicalNoise | ThermalNoise | PureLoss | Amplifier


# ---------------------------------------------------------------------------
# helpers


def _support_dim(rho: np.ndarray) -> int:
    """Number of leading Fock levels carrying any nonzero entry."""
    mask = np.any(rho != 0, axis=0) | np.any(rho != 0, axis=1)
    idx = np.nonzero(mask)[0]
    return int(idx[-1]) + 1 if idx.size else 1


def _finish(rho_in, rho_out, max_deficit, full_output, what):
    rho_out = 0.5 * (rho_out + rho_out.conj().T)
    deficit = float(np.real(np.trace(rho_in) - np.trace(rho_out)))
    if max_deficit is not None and deficit > max_deficit:
        raise TruncationError(
            f"{what}: trace deficit {deficit:.3e} exceeds {max_deficit:.1e}; "
            "increase the output dimension",
            deficit,
        )
    if full_output:
        return rho_out, deficit
    return rho_out


def _apply_shift_kraus(rho, terms, dim_out):
    """sum_t w_t K_t rho K_t^dag for Kraus maps with K_t[a, a - d_t] = v_t[a]."""
    din = rho.shape[0]
    out = np.zeros((dim_out, dim_out), dtype=complex)
    for d, v, w in terms:
        lo, hi = max(0, d), min(dim_out, din + d)
        if hi <= lo:
            continue
        seg = v[lo:hi]
        out[lo:hi, lo:hi] += w * np.outer(seg, seg.conj()) * rho[lo - d : hi - d, lo - d : hi - d]
    return out


def _dual_shift_kraus(A, terms, dim_in):
    """sum_t w_t K_t^dag A K_t for the same Kraus family, restricted to dim_in inputs."""
    dout = A.shape[0]
    out = np.zeros((dim_in, dim_in), dtype=complex)
    for d, v, w in terms:
        lo, hi = max(0, d), min(dout, dim_in + d)
        if hi <= lo:
            continue
        seg = v[lo:hi]
        out[lo - d : hi - d, lo - d : hi - d] += w * np.outer(seg.conj(), seg) * A[lo:hi, lo:hi]
    return out


# ---------------------------------------------------------------------------
# classical noise: analytic Fock representation


def fock_output_eigenvalues(k: int, n: float, dim: int) -> np.ndarray:
    """Diagonal of N_n(|k><k|) on levels 0..dim-1 (the output is diagonal)."""
    if not 0 <= k < dim:
        raise IndexError(f"Fock level {k} outside truncation dim {dim}")
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        out = np.zeros(dim)
        out[k] = 1.0
        return out
    i = np.arange(dim)[:, None]
    j = np.arange(k + 1)[None, :]
    valid = j <= i
    ii, jj = np.broadcast_arrays(i, j)
    jj = np.where(valid, jj, 0)
    log_terms = (
        gammaln(ii + 1) - gammaln(jj + 1) - gammaln(ii - jj + 1)
        + gammaln(k + 1) - gammaln(jj + 1) - gammaln(k - jj + 1)
        + (k + ii - 2 * jj) * math.log(n)
        - (k + ii + 1) * math.log1p(n)
    )
    log_terms = np.where(valid, log_terms, -np.inf)
    return np.exp(logsumexp(log_terms, axis=1))


@lru_cache(maxsize=256)
def _numbrep_block(n: float, dim_out: int, dim_in: int, l: int) -> np.ndarray:
    """Matrix M with <k+l|N_n(rho)|k> = sum_j M[k, j] <j+l|rho|j>.

    The terminating hypergeometric series is summed in log space. For n > 1
    its terms alternate in sign, so the Pfaff transform (argument 1 - n^2)
    is used instead, which makes every term positive.
    """
    kk = np.arange(dim_out - l)[:, None, None]
    jj = np.arange(dim_in - l)[None, :, None]
    if n == 1:
        ss = np.zeros((1, 1, 1), dtype=int)
    else:
        ss = np.arange(min(dim_in - l, dim_out - l))[None, None, :]
    c = jj + kk + l
    lg = gammaln
    if n <= 1:
        valid = (ss <= jj) & (ss <= kk)
        s = np.where(valid, ss, 0)
        log_t = lg(c - s + 1) - lg(jj - s + 1) - lg(kk - s + 1) - lg(s + 1) + (jj + kk - 2 * s) * math.log(n)
        if n < 1:
            log_t = log_t + s * math.log1p(-n * n)
    else:
        valid = ss <= jj
        s = np.where(valid, ss, 0)
        log_t = (
            lg(c - s + 1) + lg(jj + l + 1) - lg(jj - s + 1) - lg(jj + l - s + 1)
            - lg(kk + 1) - lg(s + 1)
            + (kk - jj) * math.log(n) + s * math.log(n * n - 1)
        )
    log_t = np.where(valid, log_t, -np.inf)
    log_coef = logsumexp(log_t, axis=2) - (kk[:, :, 0] + jj[:, :, 0] + l + 1) * math.log1p(n)
    k2 = kk[:, :, 0]
    j2 = jj[:, :, 0]
    log_norm = 0.5 * (lg(k2 + 1) - lg(k2 + l + 1) + lg(j2 + 1) - lg(j2 + l + 1))
    return np.exp(log_coef + log_norm)


def classical_noise_fock(rho, n, dim_out):
    """N_n(rho) on ``dim_out`` levels from the closed-form Fock matrix elements (linear in rho)."""
    din = rho.shape[0]
    out = np.zeros((dim_out, dim_out), dtype=complex)
    for l in range(min(din, dim_out)):
        src = np.diagonal(rho, offset=-l)
        if not np.any(src):
            continue
        vals = _numbrep_block(float(n), dim_out, din, l) @ src
        idx = np.arange(dim_out - l)
        out[idx + l, idx] = vals
        if l:
            out[idx, idx + l] = vals.conj()
    return out


def pure_state_output_matrix(psi: np.ndarray, n: float, dim_out: int | None = None) -> np.ndarray:
    """N_n(|psi><psi|) from the hypergeometric Fock-basis matrix elements."""
    if n <= 0:
        raise DomainError("pure_state_output_matrix needs n > 0")
    psi = np.asarray(psi, dtype=complex)
    return classical_noise_fock(density_matrix(psi), n, dim_out or psi.shape[0])


# ---------------------------------------------------------------------------
# classical noise: quadrature over displacements


@dataclass(frozen=True)
class KrausQuadrature:
    """Polar product rule for integrals against P_n(mu) = exp(-|mu|^2/n)/(pi n).

    The radial Gauss-Laguerre rule is built for the weight exp(-(1+n)|mu|^2/n),
    which makes it exact for displaced-operator matrix elements (a Gaussian
    exp(-|mu|^2) times a polynomial) rather than for bare polynomials.
    """

    n: float
    radii: np.ndarray
    radial_weights: np.ndarray
    angles: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return (self.radii[:, None] * np.exp(1j * self.angles[None, :])).ravel()

    @property
    def weights(self) -> np.ndarray:
        m = self.angles.size
        return np.repeat(self.radial_weights / m, m)


def classical_noise_quadrature(n: float, radial: int = 24, angular: int = 48) -> KrausQuadrature:
    if n <= 0:
        raise DomainError("quadrature needs n > 0")
    s, w = roots_laguerre(radial)
    frac = n / (1.0 + n)
    radii = np.sqrt(frac * s)
    weights = w * np.exp(frac * s) / (1.0 + n)
    angles = 2 * np.pi * np.arange(angular) / angular
    return KrausQuadrature(float(n), radii, weights, angles)


def displacement_block(r: float, dim_out: int, dim_in: int) -> np.ndarray:
    """<i|D(r)|m> for real r >= 0, i < dim_out, m < dim_in (Laguerre closed form)."""
    i = np.arange(dim_out)[:, None]
    m = np.arange(dim_in)[None, :]
    if r == 0:
        return (i == m).astype(float)
    x = r * r
    lo = np.minimum(i, m)
    dif = np.abs(i - m)
    lag = eval_genlaguerre(lo, dif, x)
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(lo + dif + 1)) + dif * math.log(r) - 0.5 * x
    sign = np.where((i < m) & (dif % 2 == 1), -1.0, 1.0)
    return sign * np.exp(log_pref) * lag


def _classical_noise_quadrature(rho, n, dim_out, radial, angular):
    k = _support_dim(rho)
    rho = rho[:k, :k]
    # exactness: radial degree (dim_out + k - 2) in |mu|^2, angular frequencies up to dim_out + k - 2
    radial = max(radial, (dim_out + k) // 2 + 1)
    angular = max(angular, dim_out + k)
    q = classical_noise_quadrature(n, radial, angular)
    pi = np.arange(k)
    po = np.arange(dim_out)
    # R(th) D(r) R(th)^dag = D(r e^{i th}); rotations act as elementwise phases
    src_phase = np.exp(-1j * q.angles[:, None, None] * (pi[:, None] - pi[None, :]))
    dst_phase = np.exp(1j * q.angles[:, None, None] * (po[:, None] - po[None, :]))
    out = np.zeros((dim_out, dim_out), dtype=complex)
    for r, w in zip(q.radii, q.radial_weights):
        b = displacement_block(r, dim_out, k)
        moved = b @ (rho[None, :, :] * src_phase) @ b.T
        out += w / q.angles.size * np.sum(moved * dst_phase, axis=0)
    return out


def apply_classical_noise(
    rho,
    n: float,
    method: str = "fock_analytic",
    dim_out: int | None = None,
    max_deficit: float | None = MAX_DEFICIT,
    full_output: bool = False,
    radial: int = 24,
    angular: int = 48,
):
    """Classical Gaussian noise N_n: random displacement with variance n."""
    rho = np.asarray(rho, dtype=complex)
    if n < 0:
        raise DomainError("n must be >= 0")
    dim_out = dim_out or rho.shape[0]
    if n == 0:
        out = np.zeros((dim_out, dim_out), dtype=complex)
        d = min(dim_out, rho.shape[0])
        out[:d, :d] = rho[:d, :d]
    elif method == "fock_analytic":
        out = classical_noise_fock(rho, n, dim_out)
    elif method == "quadrature":
        out = _classical_noise_quadrature(rho, n, dim_out, radial, angular)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(rho, out, max_deficit, full_output, "classical noise")


# ---------------------------------------------------------------------------
# pure loss and amplifier (closed-form Kraus operators)


def _loss_terms(eta, dim_in, dim_out):
    terms = []
    m = np.arange(dim_in)
    for k in range(dim_in):
        # K_k |m> = sqrt(C(m, k)) eta^{(m-k)/2} (1-eta)^{k/2} |m-k>
        v = np.zeros(dim_out)
        mm = m[k:]
        a = mm - k
        keep = a < dim_out
        mm, a = mm[keep], a[keep]
        if eta == 0:
            vals = np.where(a == 0, 1.0, 0.0)
        elif eta == 1:
            vals = np.where(mm == a, 1.0, 0.0)
        else:
            logv = 0.5 * (gammaln(mm + 1) - gammaln(k + 1) - gammaln(a + 1)) + 0.5 * a * math.log(eta) + 0.5 * k * math.log1p(-eta)
            vals = np.exp(logv)
        v[a] = vals
        terms.append((-k, v, 1.0))
    return terms


def _amplifier_terms(kappa, dim_in, dim_out):
    terms = []
    a = np.arange(dim_out)
    x = (kappa - 1.0) / kappa
    for k in range(dim_out):
        if k > 0 and x == 0:
            break
        m = a - k
        keep = (m >= 0) & (m < dim_in)
        v = np.zeros(dim_out)
        mm = m[keep]
        logv = 0.5 * (gammaln(mm + k + 1) - gammaln(k + 1) - gammaln(mm + 1)) - 0.5 * (mm + 1) * math.log(kappa)
        if k:
            logv = logv + 0.5 * k * math.log(x)
        v[keep] = np.exp(logv)
        terms.append((k, v, 1.0))
    return terms


def apply_pure_loss(rho, eta: float, dim_out=None, max_deficit=MAX_DEFICIT, full_output=False):
    """Beam splitter with a vacuum environment (thermal noise at N = 0)."""
    PureLoss(eta)
    rho = np.asarray(rho, dtype=complex)
    dim_out = dim_out or rho.shape[0]
    out = _apply_shift_kraus(rho, _loss_terms(eta, rho.shape[0], dim_out), dim_out)
    return _finish(rho, out, max_deficit, full_output, "pure loss")


def apply_amplifier(rho, kappa: float, dim_out=None, max_deficit=MAX_DEFICIT, full_output=False):
    """Phase-insensitive amplifier a -> sqrt(kappa) a + sqrt(kappa-1) c^dag, idler in vacuum.

    Kraus operators are the two-mode-squeezer amplitudes
    <m+k, k|S|m, 0> = sqrt(C(m+k, k)) tanh(r)^k / cosh(r)^(m+1), cosh(r)^2 = kappa.
    """
    Amplifier(kappa)
    rho = np.asarray(rho, dtype=complex)
    dim_out = dim_out or rho.shape[0]
    out = _apply_shift_kraus(rho, _amplifier_terms(kappa, rho.shape[0], dim_out), dim_out)
    return _finish(rho, out, max_deficit, full_output, "amplifier")


# ---------------------------------------------------------------------------
# thermal noise: beam-splitter dilation


def env_dim_for(N: float, tail: float = ENV_TAIL) -> int:
    """Smallest environment truncation whose discarded thermal tail is <= tail."""
    if N <= 0:
        return 1
    return max(1, int(math.ceil(math.log(tail) / math.log(N / (N + 1.0)))))


@lru_cache(maxsize=1024)
def _beam_splitter_block(theta: float, p: int) -> np.ndarray:
    """exp[theta (b a^dag - b^dag a)] on the p-photon block, basis |a, p-a>."""
    if p == 0:
        return np.ones((1, 1))
    m = np.arange(p)
    up = np.sqrt((p - m) * (m + 1.0))
    gen = np.diag(up, k=-1) - np.diag(up, k=1)
    return scipy.linalg.expm(theta * gen)


@lru_cache(maxsize=64)
def _dilation_terms(eta, N, dim_in, dim_out, env_dim=None):
    """Kraus family <b', e| U |., 0> weighted by the thermal environment populations.

    The beam splitter conserves total photon number, so the Kraus operator
    for environment transition e -> b' shifts photon number by d = e - b'.
    """
    env_dim = env_dim or env_dim_for(N)
    theta = math.atan(math.sqrt((1 - eta) / eta))
    tau = np.real(np.diag(thermal_state(N, env_dim)))
    blocks = [_beam_splitter_block(theta, p) for p in range(dim_in + env_dim - 1)]
    terms = []
    a = np.arange(dim_out)
    for e in range(env_dim):
        if tau[e] == 0:
            continue
        for d in range(-(dim_in - 1), e + 1):
            m = a - d
            keep = (m >= 0) & (m < dim_in)
            if not np.any(keep):
                continue
            v = np.zeros(dim_out)
            v[a[keep]] = [blocks[mm + e][aa, mm] for aa, mm in zip(a[keep], m[keep])]
            terms.append((d, v, tau[e]))
    return tuple(terms)


def _check_thermal(eta, N):
    ThermalNoise(eta, N)


def apply_thermal_noise(
    rho,
    eta: float,
    N: float,
    method: str = "dilation",
    dim_out: int | None = None,
    env_dim: int | None = None,
    max_deficit: float | None = MAX_DEFICIT,
    full_output: bool = False,
):
    """Thermal-noise channel E_eta^N.

    ``dilation`` couples the input to a truncated thermal environment through
    the beam-splitter unitary and traces the environment out; ``decomposition``
    applies pure loss followed by classical noise of strength (1-eta) N.
    """
    _check_thermal(eta, N)
    rho = np.asarray(rho, dtype=complex)
    dim_out = dim_out or rho.shape[0]
    if eta == 1:
        out = np.zeros((dim_out, dim_out), dtype=complex)
        d = min(dim_out, rho.shape[0])
        out[:d, :d] = rho[:d, :d]
    elif eta == 0:
        out = thermal_state(N, dim_out) * np.trace(rho)
    elif method == "dilation":
        out = _apply_shift_kraus(rho, _dilation_terms(eta, N, rho.shape[0], dim_out, env_dim), dim_out)
    elif method == "decomposition":
        lost = _apply_shift_kraus(rho, _loss_terms(eta, rho.shape[0], rho.shape[0]), rho.shape[0])
        out = apply_classical_noise(lost, (1 - eta) * N, dim_out=dim_out, max_deficit=None)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(rho, out, max_deficit, full_output, "thermal noise")


def apply_channel(spec, rho, **kwargs):
    if isinstance(spec, ClassicalNoise):
        return apply_classical_noise(rho, spec.n, **kwargs)
    if isinstance(spec, ThermalNoise):
        return apply_thermal_noise(rho, spec.eta, spec.N, **kwargs)
    if isinstance(spec, PureLoss):
        return apply_pure_loss(rho, spec.eta, **kwargs)
    if isinstance(spec, Amplifier):
        return apply_amplifier(rho, spec.kappa, **kwargs)
    raise TypeError(f"not a channel spec: {spec!r}")


# ---------------------------------------------------------------------------
# dual maps


def dual_map(spec, A, dim_in: int | None = None, method: str | None = None) -> np.ndarray:
    """Adjoint M^* with respect to the trace inner product, Tr[A M(B)] = Tr[M^*(A) B].

    ``A`` acts on the (truncated) output space; the result acts on the first
    ``dim_in`` input levels (default: same size as ``A``).
    """
    A = np.asarray(A, dtype=complex)
    dout = A.shape[0]
    dim_in = dim_in or dout
    if isinstance(spec, ClassicalNoise):
        if spec.n == 0:
            out = np.zeros((dim_in, dim_in), dtype=complex)
            d = min(dim_in, dout)
            out[:d, :d] = A[:d, :d]
            return out
        if (method or "fock_analytic") == "quadrature":
            return _classical_noise_quadrature_dual(A, spec.n, dim_in)
        # N_n is self-dual: P_n(mu) = P_n(-mu)
        return classical_noise_fock(A, spec.n, dim_in)
    if isinstance(spec, PureLoss):
        return _dual_shift_kraus(A, _loss_terms(spec.eta, dim_in, dout), dim_in)
    if isinstance(spec, Amplifier):
        return _dual_shift_kraus(A, _amplifier_terms(spec.kappa, dim_in, dout), dim_in)
    if isinstance(spec, ThermalNoise):
        eta, N = spec.eta, spec.N
        if eta == 1:
            return dual_map(ClassicalNoise(0.0), A, dim_in)
        if eta == 0:
            tau = thermal_state(N, dout)
            return np.trace(tau @ A) * np.eye(dim_in, dtype=complex)
        if (method or "decomposition") == "dilation":
            return _dual_shift_kraus(A, _dilation_terms(eta, N, dim_in, dout), dim_in)
        # (N_M o E^0)^* = E^0* o N_M*
        inner = dual_map(ClassicalNoise((1 - eta) * N), A, dout)
        return _dual_shift_kraus(inner, _loss_terms(eta, dim_in, dout), dim_in)
    raise TypeError(f"not a channel spec: {spec!r}")


def _classical_noise_quadrature_dual(A, n, dim_in, radial=24, angular=48):
    dout = A.shape[0]
    radial = max(radial, (dout + dim_in) // 2 + 1)
    angular = max(angular, dout + dim_in)
    q = classical_noise_quadrature(n, radial, angular)
    po = np.arange(dout)
    pi = np.arange(dim_in)
    out_phase = np.exp(-1j * q.angles[:, None, None] * (po[:, None] - po[None, :]))
    in_phase = np.exp(1j * q.angles[:, None, None] * (pi[:, None] - pi[None, :]))
    out = np.zeros((dim_in, dim_in), dtype=complex)
    for r, w in zip(q.radii, q.radial_weights):
        b = displacement_block(r, dout, dim_in)
        moved = b.T @ (A[None, :, :] * out_phase) @ b
        out += w / q.angles.size * np.sum(moved * in_phase, axis=0)
    return out


# ---------------------------------------------------------------------------
# composition rules


COMPOSITION_RULES = (
    "NN",
    "EE",
    "NE_decomp",
    "EN_decomp",
    "amp_loss",
    "loss_amp",
    "amp_thermal",
    "thermal_amp",
)


def _rule_sides(rule, p):
    """Return (lhs, rhs) as lists of channel specs applied left to right."""
    if rule == "NN":
        return [ClassicalNoise(p["n1"]), ClassicalNoise(p["n2"])], [ClassicalNoise(p["n1"] + p["n2"])]
    if rule == "EE":
        e1, e2, n1, n2 = p["eta1"], p["eta2"], p["N1"], p["N2"]
        if e1 * e2 == 1:
            raise DomainError("EE rule needs eta1*eta2 < 1")
        Np = (e2 * (1 - e1) * n1 + (1 - e2) * n2) / (1 - e1 * e2)
        return [ThermalNoise(e1, n1), ThermalNoise(e2, n2)], [ThermalNoise(e1 * e2, Np)]
    if rule == "NE_decomp":
        eta, N = p["eta"], p["N"]
        return [ThermalNoise(eta, N)], [PureLoss(eta), ClassicalNoise((1 - eta) * N)]
    if rule == "EN_decomp":
        eta, N = p["eta"], p["N"]
        if eta == 0:
            raise DomainError("EN_decomp needs eta > 0")
        return [ThermalNoise(eta, N)], [ClassicalNoise((1 - eta) * N / eta), PureLoss(eta)]
    if rule == "amp_loss":
        eta = p["eta"]
        if not 0 < eta <= 1:
            raise DomainError("amp_loss needs eta in (0, 1]")
        return [ClassicalNoise((1 - eta) / eta)], [PureLoss(eta), Amplifier(1 / eta)]
    if rule == "loss_amp":
        n = p["n"]
        if not 0 <= n < 1:
            raise DomainError("loss_amp needs n in [0, 1)")
        return [ClassicalNoise(n)], [Amplifier(1 / (1 - n)), PureLoss(1 - n)]
    if rule == "amp_thermal":
        eta, N, etap = p["eta"], p["N"], p["eta_prime"]
        if not etap <= eta or etap >= 1 or etap <= 0:
            raise DomainError("amp_thermal needs 0 < eta' <= eta and eta' < 1")
        Np = ((1 - eta) * N + etap - eta) / (1 - etap)
        if Np < 0:
            raise DomainError("amp_thermal needs (1-eta) N >= eta - eta'")
        return [ThermalNoise(eta, N)], [Amplifier(eta / etap), ThermalNoise(etap, Np)]
    if rule == "thermal_amp":
        n, npr = p["n"], p["n_prime"]
        if not 0 < npr <= min(1.0, n) or npr == 1:
            raise DomainError("thermal_amp needs n' in (0, min(1, n)] and n' < 1")
        return [ClassicalNoise(n)], [Amplifier(1 / (1 - npr)), ThermalNoise(1 - npr, (n - npr) / npr)]
    raise ValueError(f"unknown composition rule {rule!r}")


def _apply_chain(chain, rho, work_dim):
    out = rho
    for spec in chain:
        kwargs = {"dim_out": work_dim, "max_deficit": None}
        if isinstance(spec, ThermalNoise):
            kwargs["method"] = "dilation"
        out = apply_channel(spec, out, **kwargs)
    return out


def verify_composition(rule: str, params: dict, probe_states, dim: int = 32, work_dim: int | None = None) -> float:
    """Max trace-norm deviation between the two sides of a composition identity.

    Both sides run on ``work_dim`` levels (default ``max(2 * dim, 64)``) so that
    intermediate truncation does not bias either side; the comparison is on
    the leading ``dim x dim`` block.
    """
    lhs, rhs = _rule_sides(rule, params)
    work_dim = work_dim or max(2 * dim, 64)
    worst = 0.0
    for rho in probe_states:
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim == 1:
            rho = density_matrix(rho)
        padded = np.zeros((work_dim, work_dim), dtype=complex)
        k = min(work_dim, rho.shape[0])
        padded[:k, :k] = rho[:k, :k]
        a = _apply_chain(lhs, padded, work_dim)[:dim, :dim]
        b = _apply_chain(rhs, padded, work_dim)[:dim, :dim]
        worst = max(worst, trace_norm(a - b))
    return worst


# ---------------------------------------------------------------------------
# local-minimum structure


def log_state(rho: np.ndarray, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    """Matrix logarithm of a full-rank state, computed in its eigenbasis.

    Exactly diagonal states must be strictly positive. For other states the
    eigenvalues below ``support_tol`` times the largest are at the
    double-precision noise floor of the eigensolver and are raised to it.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = hermitian_eigh(rho)
    if is_diagonal(rho):
        if np.min(w) <= 0:
            raise SupportError(f"state is rank deficient (min eigenvalue {np.min(w):.3e})")
    else:
        w = np.maximum(w, support_tol * float(np.max(w)))
    return (v * np.log(w)) @ v.conj().T


def default_work_dim(spec, dim: int) -> int:
    M = getattr(spec, "vacuum_mean_photons", 0.0)
    return max(2 * dim, dim + 40 + int(20 * M))


def local_minimum_operator(spec, sigma0, dim: int | None = None, work_dim: int | None = None) -> np.ndarray:
    """F(sigma0) = -M^*(ln M(sigma0)), returned on the leading ``dim`` levels.

    The channel output and its logarithm live on ``work_dim`` levels, so the
    returned block is insensitive to the truncation edge.
    """
    sigma0 = np.asarray(sigma0, dtype=complex)
    if sigma0.ndim == 1:
        sigma0 = density_matrix(sigma0)
    dim = dim or sigma0.shape[0]
    work_dim = work_dim or default_work_dim(spec, dim)
    padded = np.zeros((work_dim, work_dim), dtype=complex)
    k = min(work_dim, sigma0.shape[0])
    padded[:k, :k] = sigma0[:k, :k]
    kwargs = {"max_deficit": None}
    if isinstance(spec, ThermalNoise):
        # the dilation truncates the environment and zeroes the far tail; the
        # loss-then-noise route keeps every output eigenvalue strictly positive
        kwargs["method"] = "decomposition"
    out = apply_channel(spec, padded, **kwargs)
    logm = log_state(out)
    return -dual_map(spec, logm, dim_in=work_dim)[:dim, :dim]


def entropy_decomposition_check(psi, spec, dim_out: int = 64):
    """Residual of S(M(rho)) = g(M) + zeta E ln((M+1)/M) - S(M(rho) || rho0').

    Returns ``(residual, gap)`` where gap = zeta E ln((M+1)/M) - S(M(rho)||rho0')
    is nonnegative exactly when the output entropy is at least g(M).
    """
    if isinstance(spec, ClassicalNoise):
        zeta, M = 1.0, spec.n
    elif isinstance(spec, ThermalNoise):
        zeta, M = spec.eta, (1 - spec.eta) * spec.N
    else:
        raise TypeError("entropy decomposition applies to classical or thermal noise")
    if M <= 0:
        raise DomainError("entropy decomposition needs a noisy channel (M > 0)")
    psi = np.asarray(psi, dtype=complex)
    rho = density_matrix(psi)
    padded = np.zeros((dim_out, dim_out), dtype=complex)
    k = min(dim_out, rho.shape[0])
    padded[:k, :k] = rho[:k, :k]
    out = apply_channel(spec, padded)
    E = mean_photon_number(psi)
    ref = thermal_state(M, dim_out)
    rel = relative_entropy(out, ref)
    lhs = von_neumann_entropy(out)
    linear = zeta * E * math.log((M + 1) / M)
    residual = abs(lhs - (g_function(M) + linear - rel))
    return residual, linear - rel
