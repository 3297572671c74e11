"""Entropy, bounds and majorization tools for single-mode bosonic Gaussian channels."""

__version__ = "0.1.0"

from .fock import (
    DomainError,
    ValidationError,
    coherent_state,
    displacement_operator,
    fock_state,
    g_function,
    relative_entropy,
    renyi2_entropy,
    spectrum,
    thermal_state,
    von_neumann_entropy,
)
from .channels import (
    Amplifier,
    ClassicalNoise,
    PureLoss,
    ThermalNoise,
    TruncationError,
    apply_amplifier,
    apply_channel,
    apply_classical_noise,
    apply_pure_loss,
    apply_thermal_noise,
    dual_map,
    fock_output_eigenvalues,
    pure_state_output_matrix,
)
from .channels import (
    KrausQuadrature,
    SupportError,
    entropy_decomposition_check,
    local_minimum_operator,
    verify_composition,
)
from .gaussian import GaussianState, evolve_gaussian, gaussian_conjecture_check, gaussian_entropy
from .bounds import classical_lower_envelope, classify_region, thermal_lower_envelope
from .majorization import majorizes, partial_sums
from .annealing import AnnealConfig, anneal_min_entropy, coherent_fit
