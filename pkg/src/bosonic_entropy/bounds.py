"""Lower bounds on minimum output entropy, envelopes, and the (eta, N) region classifier.

A bound that does not apply at the requested parameters returns ``None``;
envelopes skip those entries instead of doing arithmetic with -inf.
All values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .channels import apply_classical_noise, apply_thermal_noise
from .fock import DomainError, density_matrix, g_function, von_neumann_entropy

K_MAX = 64
EARLY_EXIT = 5


def _g_or_none(x: float) -> float | None:
    return g_function(x) if x >= 0 else None


def _max_defined(values) -> float:
    vals = [v for v in values if v is not None]
    return max(vals) if vals else 0.0


# ---------------------------------------------------------------------------
# classical-noise bounds


def bound_a(n: float) -> float | None:
    return _g_or_none(n - 1) if n >= 1 else None


def bound_b(n: float) -> float:
    if n < 0:
        raise DomainError("n must be >= 0")
    return math.log1p(2 * n)


def lambda_k(n: float, k: int) -> float:
    """Smaller eigenvalue of the purity-constrained minimizer with purity 1/(2n+1)."""
    radicand = 1 - (k + 1) * (1 - k / (2 * n + 1))
    return (1 - math.sqrt(max(radicand, 0.0))) / (k + 1)


def _two_level_entropy(lam: float, k: int) -> float:
    rest = 1 - lam
    out = 0.0
    if lam > 0:
        out -= lam * math.log(lam)
    if rest > 0:
        out -= rest * math.log(rest / k)
    return out


def bound_c(n: float) -> float:
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 0.0
    k = max(1, math.ceil(2 * n))
    return _two_level_entropy(lambda_k(n, k), k)


def bound_d(n: float) -> float | None:
    return 1 + math.log(n) if n > 0 else None


def classical_bounds(n: float) -> dict:
    return {"a": bound_a(n), "b": bound_b(n), "c": bound_c(n), "d": bound_d(n)}


def classical_lower_envelope(n: float) -> float:
    if n == 0:
        return 0.0
    return _max_defined(classical_bounds(n).values())


# ---------------------------------------------------------------------------
# thermal-noise bounds


def _check_thermal(eta, N):
    if not 0 <= eta <= 1 or N < 0:
        raise DomainError(f"need eta in [0, 1] and N >= 0, got ({eta}, {N})")


def bound_A(eta: float, N: float) -> float | None:
    _check_thermal(eta, N)
    x = (1 - eta) * N - eta
    return g_function(x) if x >= 0 else None


def bounds_BCD(eta: float, N: float):
    _check_thermal(eta, N)
    n = (1 - eta) * N
    return bound_b(n), bound_c(n), bound_d(n)


def bound_E(eta: float, N: float, k: int) -> float | None:
    _check_thermal(eta, N)
    if k < 1:
        raise DomainError("k must be a positive integer")
    if k == 1:
        return 0.0
    scale = k / (k - 1)
    if eta <= 1 / k:
        x = (1 - eta) * N
    else:
        x = (1 - eta) * N - eta + 1 / k
    return (k - 1) / k * g_function(scale * x) if x >= 0 else None


def bound_F(eta: float, N: float, k: int, floor=classical_lower_envelope) -> float | None:
    """Beam-splitter bound with S(N_n) replaced by ``floor(n)`` (the classical envelope by default)."""
    _check_thermal(eta, N)
    if k < 1:
        raise DomainError("k must be a positive integer")
    x = (1 - eta) * N if eta <= 1 / k else (1 - eta) * N - eta + 1 / k
    if x < 0:
        return None
    return (k - 1) / k * g_function(x) + floor(x) / k


def _best_over_k(fn, eta, N, k_min, k_max):
    best, prev, falling = None, None, 0
    for k in range(k_min, k_max + 1):
        v = fn(eta, N, k)
        if v is not None and (best is None or v > best):
            best = v
        if prev is not None and (v is None or v < prev):
            falling += 1
            if falling >= EARLY_EXIT:
                break
        else:
            falling = 0
        prev = v
    return best


def thermal_bounds(eta: float, N: float, k_max: int = K_MAX) -> dict:
    b, c, d = bounds_BCD(eta, N)
    return {
        "A": bound_A(eta, N),
        "B": b,
        "C": c,
        "D": d,
        "E": _best_over_k(bound_E, eta, N, 2, k_max),
        "F": _best_over_k(bound_F, eta, N, 1, k_max),
    }


def thermal_lower_envelope(eta: float, N: float, k_max: int = K_MAX) -> float:
    if k_max < 2:
        raise DomainError("k_max must be >= 2")
    return _max_defined(thermal_bounds(eta, N, k_max).values())


def thermal_upper(eta: float, N: float) -> float:
    return g_function((1 - eta) * N)


# ---------------------------------------------------------------------------
# entropy floor at fixed purity


def purity_entropy_floor(t: float) -> float:
    """Minimum entropy among states with purity Tr rho^2 = t (closed form)."""
    if not 0 < t <= 1:
        raise DomainError("purity t must lie in (0, 1]")
    k = math.floor(1 / t)
    radicand = 1 - (k + 1) * (1 - k * t)
    lam0 = (1 - math.sqrt(max(radicand, 0.0))) / (k + 1)
    return _two_level_entropy(lam0, k)


def min_entropy_with_purity(t: float, dim: int | None = None, starts: int = 24, seed: int = 0) -> float:
    """Numerical minimum of -sum p ln p over probability vectors with sum p^2 = t.

    Multi-start SLSQP on the simplex; serves as an independent check of the
    closed form. ``dim`` defaults to one level more than the minimizer needs.
    """
    if not 0 < t <= 1:
        raise DomainError("purity t must lie in (0, 1]")
    dim = dim or max(3, math.floor(1 / t) + 2)
    if t < 1 / dim - 1e-15:
        raise DomainError(f"purity {t} unreachable in dimension {dim}")
    if t > 1 - 1e-12:
        return 0.0
    rng = np.random.default_rng(seed)

    def entropy(p):
        q = np.clip(p, 1e-300, None)
        return float(-np.sum(q * np.log(q)))

    def grad(p):
        q = np.clip(p, 1e-300, None)
        return -(np.log(q) + 1)

    cons = [
        {"type": "eq", "fun": lambda p: np.sum(p) - 1, "jac": lambda p: np.ones_like(p)},
        {"type": "eq", "fun": lambda p: np.sum(p * p) - t, "jac": lambda p: 2 * p},
    ]
    best = math.inf
    for _ in range(starts):
        p0 = rng.dirichlet(np.full(dim, 0.5))
        res = minimize(entropy, p0, jac=grad, constraints=cons, bounds=[(0, 1)] * dim, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 500})
        if not res.success:
            continue
        p = np.clip(res.x, 0, None)
        if abs(np.sum(p) - 1) < 1e-8 and abs(np.sum(p * p) - t) < 1e-8:
            best = min(best, entropy(p))
    return best


# ---------------------------------------------------------------------------
# inequality witnesses from the beam-splitter array construction


def _pad_state(psi, dim_out):
    rho = density_matrix(psi)
    out = np.zeros((dim_out, dim_out), dtype=complex)
    k = min(dim_out, rho.shape[0])
    out[:k, :k] = rho[:k, :k]
    return out


def beam_splitter_witness(psi, k: int, N: float, dim_out: int = 96) -> float:
    """k S(E_{1/k}^N(rho)) - (k-1) g(N); nonnegative for every input."""
    rho = _pad_state(psi, dim_out)
    out = apply_thermal_noise(rho, 1 / k, N, method="decomposition")
    return k * von_neumann_entropy(out) - (k - 1) * g_function(N)


def beam_splitter_classical_witness(psi, k: int, n: float, dim_out: int = 96) -> float:
    """k S(E_{1/k}^{nk/(k-1)}(rho)) - S(N_n(rho)) - (k-1) g(n); nonnegative for every input."""
    rho = _pad_state(psi, dim_out)
    thermal_out = apply_thermal_noise(rho, 1 / k, n * k / (k - 1), method="decomposition")
    classical_out = apply_classical_noise(rho, n)
    return k * von_neumann_entropy(thermal_out) - von_neumann_entropy(classical_out) - (k - 1) * g_function(n)


# ---------------------------------------------------------------------------
# region classifier


GREATER, LESS, EQUAL, UNKNOWN = "GREATER", "LESS", "EQUAL", "UNKNOWN"


def _rule_verdicts(eta1, N1, eta, N):
    """Composition-rule predicates: (provenance, relation of the reference to the cell)."""
    out = []
    if eta <= eta1 and N >= N1:
        out.append(("rule-1", LESS))
    if eta >= eta1 and N <= N1:
        out.append(("rule-4", GREATER))
    # the cell channel is a degraded version of the reference (or vice versa);
    # written multiplicatively to stay finite at eta = 1
    if eta1 >= eta and N * (1 - eta) >= (1 - eta1) * N1:
        out.append(("rule-3", LESS))
    if eta >= eta1 and N1 * (1 - eta1) >= (1 - eta) * N:
        out.append(("rule-6", GREATER))
    if eta >= eta1 and N1 * (1 - eta1) <= (1 - eta) * N + eta1 - eta:
        out.append(("rule-2", LESS))
    if eta1 >= eta and N * (1 - eta) <= (1 - eta1) * N1 + eta - eta1:
        out.append(("rule-5", GREATER))
    if N == 0 or eta == 1:
        out.append(("zero-line", GREATER))
    if N1 == 0 or eta1 == 1:
        out.append(("zero-reference", LESS))
    return out


@dataclass(frozen=True)
class RegionLabel:
    label: str
    provenance: tuple

    def __iter__(self):
        return iter((self.label, self.provenance))


def classify_region(eta1: float, N1: float, eta: float, N: float, k_max: int = K_MAX, ref_envelope=None) -> RegionLabel:
    """Relation of the reference minimum entropy S(E_{eta1}^{N1}) to that of E_eta^N.

    GREATER means the reference minimum entropy is at least the cell's,
    LESS at most; EQUAL when rules give both directions. Undecided cells
    fall back to the bound comparisons L and U.
    """
    _check_thermal(eta1, N1)
    _check_thermal(eta, N)
    verdicts = _rule_verdicts(eta1, N1, eta, N)
    if verdicts:
        kinds = {v for _, v in verdicts}
        prov = tuple(p for p, _ in verdicts)
        if kinds == {GREATER, LESS}:
            return RegionLabel(EQUAL, prov)
        return RegionLabel(kinds.pop(), prov)
    if ref_envelope is None:
        ref_envelope = thermal_lower_envelope(eta1, N1, k_max)
    if ref_envelope > thermal_upper(eta, N):
        return RegionLabel(GREATER, ("L",))
    if thermal_upper(eta1, N1) < thermal_lower_envelope(eta, N, k_max):
        return RegionLabel(LESS, ("U",))
    return RegionLabel(UNKNOWN, ())


@dataclass
class RegionGrid:
    eta1: float
    N1: float
    etas: np.ndarray
    Ns: np.ndarray
    labels: np.ndarray  # shape (len(Ns), len(etas)), str
    provenance: list = field(default_factory=list)  # rows of tuples

    def counts(self) -> dict:
        out = {}
        for row in self.provenance:
            for prov in row:
                key = "+".join(prov) if prov else "none"
                out[key] = out.get(key, 0) + 1
        return out

    def label_counts(self) -> dict:
        vals, cnt = np.unique(self.labels, return_counts=True)
        return {str(v): int(c) for v, c in zip(vals, cnt)}

    def contradictions(self) -> int:
        """Cells where a rule says one direction and a bound test the other (always 0 by construction)."""
        bad = 0
        for i, N in enumerate(self.Ns):
            for j, eta in enumerate(self.etas):
                kinds = {v for _, v in _rule_verdicts(self.eta1, self.N1, eta, N)}
                lab = self.labels[i, j]
                if lab in (GREATER, LESS) and kinds and lab not in kinds:
                    bad += 1
        return bad


def region_grid(eta1: float = 0.7, N1: float = 0.6, n_eta: int = 201, n_N: int = 201, N_max: float | None = None,
                k_max: int = K_MAX) -> RegionGrid:
    N_max = 2 * N1 + 1 if N_max is None else N_max
    etas = np.linspace(0.0, 1.0, n_eta)
    Ns = np.linspace(0.0, N_max, n_N)
    ref_env = thermal_lower_envelope(eta1, N1, k_max)
    labels = np.empty((n_N, n_eta), dtype=object)
    prov = []
    for i, N in enumerate(Ns):
        row = []
        for j, eta in enumerate(etas):
            lab = classify_region(eta1, N1, float(eta), float(N), k_max, ref_envelope=ref_env)
            labels[i, j] = lab.label
            row.append(lab.provenance)
        prov.append(row)
    flat = [p for row in prov for p in row]
    return RegionGrid(eta1, N1, etas, Ns, labels.astype(str), [flat[i * n_eta:(i + 1) * n_eta] for i in range(n_N)])


# ---------------------------------------------------------------------------
# bound curves


@dataclass
class BoundCurve:
    kind: str
    grid: np.ndarray
    values: dict
    upper: np.ndarray
    envelope: np.ndarray
    N: float | None = None

    def max_violation(self) -> float:
        """Largest amount by which any lower bound exceeds the upper curve."""
        worst = -math.inf
        for arr in self.values.values():
            arr = np.asarray(arr, dtype=float)
            ok = ~np.isnan(arr)
            if np.any(ok):
                worst = max(worst, float(np.max(arr[ok] - self.upper[ok])))
        return worst


def classical_curve(ns=None) -> BoundCurve:
    ns = np.logspace(-3, 3, 200) if ns is None else np.asarray(ns, dtype=float)
    vals = {key: [] for key in "abcd"}
    for n in ns:
        for key, v in classical_bounds(float(n)).items():
            vals[key].append(np.nan if v is None else v)
    values = {k: np.array(v) for k, v in vals.items()}
    env = np.array([classical_lower_envelope(float(n)) for n in ns])
    return BoundCurve("classical", ns, values, g_function(ns), env)


def thermal_curve(N: float, etas=None, k_max: int = K_MAX) -> BoundCurve:
    etas = np.linspace(0, 1, 201) if etas is None else np.asarray(etas, dtype=float)
    vals = {key: [] for key in "ABCDEF"}
    env = []
    for eta in etas:
        b = thermal_bounds(float(eta), N, k_max)
        for key, v in b.items():
            vals[key].append(np.nan if v is None else v)
        env.append(_max_defined(b.values()))
    values = {k: np.array(v) for k, v in vals.items()}
    upper = g_function((1 - etas) * N)
    return BoundCurve("thermal", etas, values, upper, np.array(env), N)


# names required by the published interface
appendix_c_F = purity_entropy_floor
