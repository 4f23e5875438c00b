"""Qubit-resonator array knobs mapped onto the lattice model.

Lab convention: every frequency is given as ``f = omega / 2pi`` (MHz or GHz)
and an energy ``E`` is quoted through ``E / h``. The natural energy unit is
``E_u = 1e-3 * dphi0^2 E_J``, i.e. 100 MHz at the default
``dphi0^2 E_J / h = 100 GHz``.

Mapping (with ``E_Jb = 2 E_J J0(pi/2)``)::

    t_0(phi_dc)      = 2 J0(pi/2) dphi0^2 E_J (1 + cos phi_dc)
    g hbar*domega    = dphi0^2 E_J J1(pi/2) dtheta
    lambda(phi_dc)   = g J1(pi/2) dtheta / (J0(pi/2) (1 + cos phi_dc))
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .model import ModelParams

_MAX_BESSEL_ARG = 10.0


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind, orders 0 and 1, by power series.

    ``J_n(x) = sum_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!)``, summed until the
    next term drops below ``1e-16`` of the partial sum.
    """
    if order not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are supported, got {order}")
    if abs(x) > _MAX_BESSEL_ARG:
        raise ValueError(f"|x| = {abs(x)} beyond the supported range {_MAX_BESSEL_ARG}")
    half = 0.5 * x
    term = 1.0 if order == 0 else half
    total = term
    m = 0
    while True:
        m += 1
        term *= -(half * half) / (m * (m + order))
        total += term
        if abs(term) < 1e-16 * abs(total) or m > 200:
            return total


J0_HALF_PI = bessel_j(0, math.pi / 2)
J1_HALF_PI = bessel_j(1, math.pi / 2)


class SingularFluxError(ValueError):
    """Effective coupling diverges because the hopping vanishes (phi_dc = pi)."""


@dataclass(frozen=True)
class CircuitParams:
    """Experimental knobs. Frequencies are ``omega / 2pi``; ``phi_dc`` in radians."""

    delta_theta: float = 3.5e-3
    delta_omega_over_2pi: float = 300.0  # MHz
    ej_dphi2_over_2pi: float = 100.0  # GHz
    phi_dc: float = 0.0
    beta_p_over_2pi: float = 10.0  # MHz
    anharmonicity_over_2pi: float = -200.0  # MHz

    def __post_init__(self):
        if not self.delta_theta > 0:
            raise ValueError("delta_theta must be positive")
        if not self.delta_omega_over_2pi > 0:
            raise ValueError("delta_omega_over_2pi must be positive")
        if not self.ej_dphi2_over_2pi > 0:
            raise ValueError("ej_dphi2_over_2pi must be positive")
        if not 0.0 <= self.phi_dc < 2.0 * math.pi:
            raise ValueError(f"phi_dc must lie in [0, 2pi), got {self.phi_dc}")

    def with_flux(self, phi_dc: float) -> CircuitParams:
        return CircuitParams(**{**asdict(self), "phi_dc": phi_dc})

    @property
    def energy_unit_ghz(self) -> float:
        """``E_u / h`` in GHz."""
        return 1e-3 * self.ej_dphi2_over_2pi


def _to_unit(value_ghz: float, cp: CircuitParams, unit: str) -> float:
    if unit == "GHz":
        return value_ghz
    if unit == "Eu":
        return value_ghz / cp.energy_unit_ghz
    raise ValueError(f"unknown energy unit {unit!r}; use 'Eu' or 'GHz'")


def effective_hopping(cp: CircuitParams, unit: str = "GHz") -> float:
    """Flux-tunable hopping ``t_0``, in GHz (``t_0 / h``) or in ``E_u``."""
    t0 = 2.0 * J0_HALF_PI * cp.ej_dphi2_over_2pi * (1.0 + math.cos(cp.phi_dc))
    return _to_unit(t0, cp, unit)


def coupling_g(cp: CircuitParams) -> float:
    """Dimensionless coupling ``g = (dphi0^2 E_J / hbar*domega) J1(pi/2) dtheta``."""
    domega_ghz = 1e-3 * cp.delta_omega_over_2pi
    if domega_ghz == 0:
        raise ValueError("delta_omega must be nonzero")
    return cp.ej_dphi2_over_2pi / domega_ghz * J1_HALF_PI * cp.delta_theta


def _lambda_numerator(cp: CircuitParams) -> float:
    return coupling_g(cp) * J1_HALF_PI * cp.delta_theta / J0_HALF_PI


def lambda_of_flux(cp: CircuitParams) -> float:
    """Effective coupling as a function of the dc flux."""
    denom = 1.0 + math.cos(cp.phi_dc)
    if denom <= 1e-300 or abs(cp.phi_dc - math.pi) < 1e-15:
        raise SingularFluxError("coupling diverges at phi_dc = pi (vanishing hopping)")
    return _lambda_numerator(cp) / denom


def flux_for_lambda(cp: CircuitParams, lambda_target: float) -> float:
    """The flux in ``[0, pi)`` at which ``lambda_of_flux`` equals ``lambda_target``."""
    floor = _lambda_numerator(cp) / 2.0
    if not lambda_target >= floor:
        raise ValueError(
            f"lambda = {lambda_target} is unreachable; the smallest value (phi_dc = 0) is {floor:.6g}"
        )
    return math.acos(_lambda_numerator(cp) / lambda_target - 1.0)


@dataclass(frozen=True)
class MappedModel:
    """Model parameters implied by a circuit. Energies in ``E_u`` unless noted."""

    t_0: float
    t_0_ghz: float
    g: float
    lambda_eb: float
    E_u: float  # GHz
    hbar_delta_omega: float

    def lambda_from_model(self) -> float:
        return 2.0 * self.g**2 * self.hbar_delta_omega / self.t_0


def map_circuit(cp: CircuitParams) -> MappedModel:
    t0_ghz = effective_hopping(cp, "GHz")
    return MappedModel(
        t_0=effective_hopping(cp, "Eu"),
        t_0_ghz=t0_ghz,
        g=coupling_g(cp),
        lambda_eb=lambda_of_flux(cp),
        E_u=cp.energy_unit_ghz,
        hbar_delta_omega=_to_unit(1e-3 * cp.delta_omega_over_2pi, cp, "Eu"),
    )


def model_params(cp: CircuitParams, n_sites: int, boson_cutoff: int, unit: str = "Eu") -> ModelParams:
    """Build :class:`ModelParams` for the circuit at its current flux."""
    unit_ghz = cp.energy_unit_ghz if unit == "Eu" else 1.0
    return ModelParams(
        t_e=effective_hopping(cp, unit),
        hbar_omega_b=_to_unit(1e-3 * cp.delta_omega_over_2pi, cp, unit),
        g=coupling_g(cp),
        n_sites=n_sites,
        boson_cutoff=boson_cutoff,
        unit_ghz=unit_ghz,
    )


def model_at_lambda(cp: CircuitParams, lambda_eb: float, n_sites: int, boson_cutoff: int, unit: str = "Eu") -> ModelParams:
    return model_params(cp.with_flux(flux_for_lambda(cp, lambda_eb)), n_sites, boson_cutoff, unit)


@dataclass(frozen=True)
class FeasibilityReport:
    tau_prep_ns: float
    leakage_time_ns: float  # hbar/|alpha| with alpha/2pi hbar as given
    leakage_time_ns_alt: float  # hbar/|alpha| reading the number as alpha/hbar
    gap_over_Eu: float
    decoherence_rate_mhz: float
    rate_ratios: dict
    note: str


def prep_time_ns(beta_p_over_2pi_mhz: float) -> float:
    """``pi hbar / (2 beta_p)`` in ns for a drive amplitude quoted as ``beta_p / h`` in MHz."""
    if not beta_p_over_2pi_mhz > 0:
        raise ValueError("drive amplitude must be positive")
    return 1e3 / (4.0 * beta_p_over_2pi_mhz)


def feasibility_report(cp: CircuitParams, decoherence_rate_mhz: float = 0.01) -> FeasibilityReport:
    """Time and energy scales of the preparation protocol.

    Rates are compared as ``f = omega / 2pi`` in MHz against
    ``decoherence_rate_mhz``.
    """
    alpha = abs(cp.anharmonicity_over_2pi)
    leak = 1e3 / (2.0 * math.pi * alpha) if alpha else math.inf
    leak_alt = 1e3 / alpha if alpha else math.inf
    g = coupling_g(cp)
    domega = cp.delta_omega_over_2pi
    try:
        t0_mhz = 1e3 * effective_hopping(cp, "GHz")
    except ValueError:
        t0_mhz = math.nan
    ratios = {
        "delta_omega": domega / decoherence_rate_mhz,
        "g_delta_omega": g * domega / decoherence_rate_mhz,
        "t0_over_hbar": t0_mhz / decoherence_rate_mhz,
    }
    return FeasibilityReport(
        tau_prep_ns=prep_time_ns(cp.beta_p_over_2pi),
        leakage_time_ns=leak,
        leakage_time_ns_alt=leak_alt,
        gap_over_Eu=_to_unit(1e-3 * domega, cp, "Eu"),
        decoherence_rate_mhz=decoherence_rate_mhz,
        rate_ratios=ratios,
        note=(
            "leakage_time_ns reads alpha as alpha/(2 pi hbar) in MHz; "
            "leakage_time_ns_alt reads it as alpha/hbar in 1e6 rad/s"
        ),
    )
