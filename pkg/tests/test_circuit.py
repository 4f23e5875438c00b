import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wstate_polaron.circuit import (
    J0_HALF_PI,
    J1_HALF_PI,
    CircuitParams,
    SingularFluxError,
    bessel_j,
    coupling_g,
    effective_hopping,
    feasibility_report,
    flux_for_lambda,
    lambda_of_flux,
    map_circuit,
    model_params,
    prep_time_ns,
)

CP = CircuitParams()
FLUX_C = 0.972026 * math.pi


def test_bessel_half_pi():
    assert J0_HALF_PI == pytest.approx(0.4720011, abs=1e-6)
    assert J1_HALF_PI == pytest.approx(0.5668241, abs=1e-6)


@given(x=st.floats(0, 4), order=st.sampled_from([0, 1]))
def test_bessel_against_mpmath(x, order):
    assert abs(bessel_j(order, x) - float(mpmath.besselj(order, x))) < 1e-12


def test_bessel_domain():
    with pytest.raises(ValueError):
        bessel_j(2, 1.0)
    with pytest.raises(ValueError):
        bessel_j(0, 11.0)


def test_hopping_anchors():
    assert effective_hopping(CP) == pytest.approx(188.800, abs=1e-3)
    near = CP.with_flux(FLUX_C)
    assert effective_hopping(near) == pytest.approx(0.36443, abs=5e-4)
    assert effective_hopping(near, "Eu") == pytest.approx(3.6443, abs=5e-3)
    assert effective_hopping(CP.with_flux(math.pi)) == pytest.approx(0.0, abs=1e-12)


def test_coupling_anchors():
    assert coupling_g(CP) == pytest.approx(0.66129, abs=5e-4)
    assert coupling_g(CircuitParams(delta_omega_over_2pi=200.0)) == pytest.approx(0.99194, abs=8e-4)


def test_lambda_anchors():
    assert lambda_of_flux(CP) == pytest.approx(1.3898e-3, abs=1e-6)
    assert lambda_of_flux(CP.with_flux(FLUX_C)) == pytest.approx(0.7200, abs=2e-3)
    assert flux_for_lambda(CP, 0.72) / math.pi == pytest.approx(0.97203, abs=5e-4)


def test_lambda_singular_at_pi():
    with pytest.raises(SingularFluxError):
        lambda_of_flux(CP.with_flux(math.pi))


def test_unreachable_lambda():
    with pytest.raises(ValueError):
        flux_for_lambda(CP, 1e-6)


@pytest.mark.parametrize("phi", np.linspace(0.001, 0.999, 40) * math.pi)
def test_lambda_consistent_with_model_form(phi):
    m = map_circuit(CP.with_flux(phi))
    assert abs(m.lambda_eb - m.lambda_from_model()) / m.lambda_eb < 1e-12
    p = model_params(CP.with_flux(phi), 4, 1)
    assert abs(p.lambda_eb - m.lambda_eb) / m.lambda_eb < 1e-12


def test_monotonicity():
    phis = np.linspace(1e-3, 0.999, 300) * math.pi
    lam = [lambda_of_flux(CP.with_flux(p)) for p in phis]
    hop = [effective_hopping(CP.with_flux(p)) for p in phis]
    assert np.all(np.diff(lam) > 0)
    assert np.all(np.diff(hop) < 0)


@given(x=st.floats(0.5, 0.99))
def test_flux_round_trip(x):
    phi = x * math.pi
    assert abs(flux_for_lambda(CP, lambda_of_flux(CP.with_flux(phi))) - phi) < 1e-10


def test_units_agree():
    near = CP.with_flux(FLUX_C)
    ghz = model_params(near, 4, 1, unit="GHz")
    eu = model_params(near, 4, 1, unit="Eu")
    assert eu.t_e * eu.unit_ghz == pytest.approx(ghz.t_e * ghz.unit_ghz, rel=1e-14)
    assert eu.hbar_omega_b == pytest.approx(3.0)
    with pytest.raises(ValueError):
        effective_hopping(CP, "meV")


def test_feasibility_report():
    rep = feasibility_report(CP)
    assert rep.tau_prep_ns == pytest.approx(25.0)
    assert rep.gap_over_Eu == pytest.approx(3.0)
    assert rep.leakage_time_ns == pytest.approx(0.796, abs=1e-3)
    assert rep.leakage_time_ns_alt == pytest.approx(5.0)
    assert rep.rate_ratios["delta_omega"] == pytest.approx(3e4)
    assert "alpha" in rep.note
    assert feasibility_report(CircuitParams(delta_omega_over_2pi=200.0)).gap_over_Eu == pytest.approx(2.0)


def test_prep_time_scaling():
    assert prep_time_ns(20.0) == pytest.approx(12.5)
    with pytest.raises(ValueError):
        prep_time_ns(0.0)


@pytest.mark.parametrize("field", ["delta_theta", "delta_omega_over_2pi", "ej_dphi2_over_2pi"])
def test_circuit_params_validation(field):
    with pytest.raises(ValueError):
        CircuitParams(**{field: 0.0})
    with pytest.raises(ValueError):
        CircuitParams(phi_dc=7.0)
