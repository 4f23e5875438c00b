"""Bare-excitation ground states of a fermion-boson lattice and W-state preparation."""
from .analysis import (
    CrossingResult,
    NoBracketError,
    SpectrumResult,
    critical_coupling_from_circuit,
    find_critical_coupling,
    sector_scan,
    w_state_overlap,
)
from .circuit import (
    CircuitParams,
    MappedModel,
    bessel_j,
    coupling_g,
    effective_hopping,
    feasibility_report,
    flux_for_lambda,
    lambda_of_flux,
    map_circuit,
    model_at_lambda,
    model_params,
)
from .hamiltonian import KBlockOperator, apply_k_block, build_real_space, heb_residual_on_bare
from .hilbert import (
    DimensionError,
    build_k_sector_basis,
    enumerate_boson_configs,
    translation_operator,
)
from .model import ModelParams, Quasimomentum, bare_dispersion, effective_lambda, vertex_gamma
from .protocol import DriveParams, TwoSectorSpace, drive_matrix_element, evolve, prep_time
from .solver import LanczosConfig, dense_ground_state, lanczos_extremal

__version__ = "0.1.0"

__all__ = [
    "CrossingResult",
    "NoBracketError",
    "SpectrumResult",
    "critical_coupling_from_circuit",
    "find_critical_coupling",
    "sector_scan",
    "w_state_overlap",
    "CircuitParams",
    "MappedModel",
    "bessel_j",
    "coupling_g",
    "effective_hopping",
    "feasibility_report",
    "flux_for_lambda",
    "lambda_of_flux",
    "map_circuit",
    "model_at_lambda",
    "model_params",
    "KBlockOperator",
    "apply_k_block",
    "build_real_space",
    "heb_residual_on_bare",
    "DimensionError",
    "build_k_sector_basis",
    "enumerate_boson_configs",
    "translation_operator",
    "ModelParams",
    "Quasimomentum",
    "bare_dispersion",
    "effective_lambda",
    "vertex_gamma",
    "DriveParams",
    "TwoSectorSpace",
    "drive_matrix_element",
    "evolve",
    "prep_time",
    "LanczosConfig",
    "dense_ground_state",
    "lanczos_extremal",
]
