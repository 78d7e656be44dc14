import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singflow.core import DomainError, EnergyPoint, ObservableInfeasibleError, PoleError, PotentialSpec
from singflow.radial import BoundaryState, integrate_exterior
from singflow.zero_energy import (
    BoundStateEnergy,
    ScatteringLength,
    ZeroEnergyPhase,
    bessel_coefficients,
    exterior_log_derivative,
    exterior_nodes,
    kappa_n2,
    log_derivative_closed_form,
    phase_from_bessel_coefficients,
    phase_from_observable,
    scattering_length_n4,
    spectrum_n2,
    zero_energy_wavefunction,
    zero_energy_wavefunction_leading,
)

phis = st.floats(-3.0, 3.0)
ns = st.sampled_from([3, 4, 5, 6])


@settings(max_examples=200)
@given(ns, st.floats(0.3, 4.0), phis, st.floats(0.01, 0.3))
def test_closed_form_log_derivative_differentiates_the_wavefunction(n, lam, phi, x):
    spec = PotentialSpec(n, lam)
    phase = ZeroEnergyPhase(n, phi)
    u, du = zero_energy_wavefunction_leading(spec, phase, x)
    if abs(u) < 1e-6 * abs(du) * x:
        return
    # step of 1e-3 rad in the local phase, five-point stencil
    p = n / 2 - 1
    h = 1e-3 / (math.sqrt(lam) * x ** (-p - 1) + 1 / x)
    f = lambda t: zero_energy_wavefunction_leading(spec, phase, x + t * h)[0]  # noqa: E731
    fd = (f(-2) - 8 * f(-1) + 8 * f(1) - f(2)) / (12 * h)
    assert du == pytest.approx(fd, rel=1e-8, abs=1e-9 * abs(u) / x)
    assert log_derivative_closed_form(spec, phase, x) == pytest.approx(du / u, rel=1e-10)


def test_minus_sign_variant_disagrees_with_the_ode():
    spec = PotentialSpec(4, 1.0)
    phase = ZeroEnergyPhase(4, 0.3)
    x = 0.137
    exact = exterior_log_derivative(spec, phase, x)
    assert log_derivative_closed_form(spec, phase, x, tan_sign=+1) == pytest.approx(exact, rel=1e-12)
    assert abs(log_derivative_closed_form(spec, phase, x, tan_sign=-1) - exact) > 1.0


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("phi", [-1.2, 0.0, 0.7])
def test_wavefunction_solves_zero_energy_ode(n, phi):
    spec = PotentialSpec(n, 1.25 if n == 2 else 1.0)
    phase = ZeroEnergyPhase(n, phi)
    x0, x1 = (1e-3, 5.0) if n == 2 else (0.05, 5.0)
    u0, du0 = zero_energy_wavefunction(spec, phase, x0)
    end = integrate_exterior(spec, BoundaryState(x0, u0, du0), EnergyPoint(), x1)
    u1, du1 = zero_energy_wavefunction(spec, phase, x1)
    scale = math.hypot(u1, x1 * du1)
    assert abs(end.u - u1) / scale < 1e-8
    assert abs(end.du - du1) * x1 / scale < 1e-8


@given(ns, st.floats(0.5, 2.0), phis, st.floats(0.02, 2.0))
def test_phase_is_defined_mod_pi(n, lam, phi, x):
    spec = PotentialSpec(n, lam)
    a = zero_energy_wavefunction(spec, ZeroEnergyPhase(n, phi), x)
    b = zero_energy_wavefunction(spec, ZeroEnergyPhase(n, phi + math.pi), x)
    assert np.allclose(np.abs(a), np.abs(b), rtol=1e-9, atol=1e-12 * (abs(a[0]) + abs(a[1]) * x))
    assert ZeroEnergyPhase(n, phi).same_physics(ZeroEnergyPhase(n, phi + 3 * math.pi))


@given(st.sampled_from([3, 5, 6]), phis)
def test_bessel_coefficients_round_trip(n, phi):
    A, B = bessel_coefficients(n, phi)
    assert A * A + B * B == pytest.approx(1.0)
    back = phase_from_bessel_coefficients(n, A, B)
    assert ZeroEnergyPhase(n, back).same_physics(ZeroEnergyPhase(n, phi), atol=1e-10)


def test_bessel_form_approaches_cosine_form_as_x2_for_n6():
    """For n = 6 the Bessel solution differs from the leading form at O(x^2)."""
    spec = PotentialSpec(6, 1.0)
    phase = ZeroEnergyPhase(6, 0.4)
    xs = np.geomspace(0.02, 0.08, 6)
    diffs = []
    for x in xs:
        u, du = zero_energy_wavefunction(spec, phase, x)
        ul, dul = zero_energy_wavefunction_leading(spec, phase, x)
        diffs.append(math.hypot(u - ul, (du - dul) * x**3) / math.hypot(ul, dul * x**3))
    slope = np.polyfit(np.log(xs), np.log(diffs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


@pytest.mark.parametrize("n,lam", [(2, 1.25), (4, 1.0), (5, 2.0)])
def test_exterior_nodes_are_zeros(n, lam):
    spec = PotentialSpec(n, lam)
    phase = ZeroEnergyPhase(n, 0.2)
    nodes = exterior_nodes(spec, phase, 0.01, 1.0)
    assert nodes and nodes == sorted(nodes)
    for x in nodes:
        u, du = zero_energy_wavefunction(spec, phase, x)
        assert abs(u) < 1e-10 * abs(du) * x
        with pytest.raises(PoleError):
            exterior_log_derivative(spec, phase, x)


def test_scattering_length_inversion_round_trip():
    spec = PotentialSpec(4, 2.0)
    for a in (-3.0, -0.1, 0.0, 0.5, 40.0):
        phase = phase_from_observable(spec, ScatteringLength(a))
        assert scattering_length_n4(2.0, phase) == pytest.approx(a, abs=1e-12)
    with pytest.raises(ObservableInfeasibleError):
        phase_from_observable(PotentialSpec(4, 0.0), ScatteringLength(1.0))
    with pytest.raises(PoleError):
        scattering_length_n4(1.0, ZeroEnergyPhase(4, math.pi / 2))


@given(st.floats(0.3, 3.0), st.floats(-1.5, 1.5), st.integers(0, 5))
def test_bound_state_inversion_round_trip(nu, phi, m):
    lam = nu * nu + 0.25
    kappa = kappa_n2(lam, phi, m)
    if not 1e-150 < kappa < 1e150:
        return
    phase = phase_from_observable(PotentialSpec(2, lam), BoundStateEnergy(-kappa * kappa, m))
    assert phase.same_physics(ZeroEnergyPhase(2, phi), atol=1e-9)


def test_spectrum_ratios():
    lam = 4.25  # nu = 2
    states = spectrum_n2(lam, ZeroEnergyPhase(2, 0.1), range(4))
    ratios = [b.kappa / a.kappa for a, b in zip(states, states[1:])]
    assert np.allclose(ratios, math.exp(-math.pi / 2), rtol=1e-14)
    with pytest.raises(DomainError):
        spectrum_n2(lam, ZeroEnergyPhase(4, 0.1), range(2))


def test_domain_errors():
    with pytest.raises(DomainError):
        zero_energy_wavefunction(PotentialSpec(4, 1.0), ZeroEnergyPhase(5, 0.0), 0.1)
    with pytest.raises(DomainError):
        zero_energy_wavefunction(PotentialSpec(4, 1.0), ZeroEnergyPhase(4, 0.0), 0.0)
    with pytest.raises(ObservableInfeasibleError):
        phase_from_observable(PotentialSpec(2, 1.25), BoundStateEnergy(1.0))
    with pytest.raises(DomainError):
        phase_from_observable(PotentialSpec(5, 1.0), ScatteringLength(1.0))
