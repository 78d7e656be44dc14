import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracle_values import NORM_DIFF_NATURAL, PHI4_NATURAL, PHI4_UNNATURAL
from singflow.core import Counterterm, DomainError, EnergyPoint, PotentialSpec, PreconditionError, ValidityError, reduce_angle
from singflow.flow import tune_counterterm
from singflow.radial import BoundaryState, integrate_exterior, phase_shift
from singflow.wkb import (
    WkbSolution,
    asymptotic_normalization,
    effective_range_shift,
    energy_correction,
    error_functional,
    wkb_wavefunction,
)
from singflow.zero_energy import ZeroEnergyPhase, zero_energy_wavefunction

N4 = PotentialSpec(4, 1.0)
NATURAL = ZeroEnergyPhase(4, PHI4_NATURAL)


@given(st.floats(0.01, 0.2), st.floats(0.01, 0.2))
def test_phase_integral_closed_form_n4(x0, x):
    sol = WkbSolution(N4, 0.0, x0)
    assert sol.phase(x) == pytest.approx(1 / x0 - 1 / x, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("x", [0.02, 0.05, 0.1])
def test_wkb_is_exact_for_n4_at_zero_energy(x):
    x0 = 0.01
    sol = WkbSolution(N4, 0.0, x0)
    u, du = wkb_wavefunction(sol, x)
    # x cos(1/x + phi) with phi = -1/x0
    exact = x * math.cos(1 / x - 1 / x0)
    assert u == pytest.approx(exact, rel=1e-6, abs=1e-9 * x)


def test_langer_wkb_is_exact_for_n2():
    spec = PotentialSpec(2, 36.25)  # nu = 6
    sol = WkbSolution(spec, 0.0, 1e-3, langer=True)
    for x in (2e-3, 1e-2, 0.1):
        u, _ = wkb_wavefunction(sol, x)
        exact = math.sqrt(x) * math.cos(6.0 * math.log(x / 1e-3)) / math.sqrt(6.0)
        assert u == pytest.approx(exact, rel=1e-8, abs=1e-12)
    with pytest.raises(DomainError):
        WkbSolution(N4, 0.0, 1.0, langer=True)


def test_large_x_amplitude_is_plane_wave():
    u, du = wkb_wavefunction(WkbSolution(N4, 1.0, 10.0), 10.0)
    assert math.hypot(u, du) == pytest.approx(1.0, rel=1e-2)


def test_validity_gate():
    with pytest.raises(ValidityError):
        wkb_wavefunction(WkbSolution(N4, 0.0, 0.1), 3.0)


def test_energy_correction_examples():
    assert energy_correction(N4, NATURAL, 0.05, 0.0) == 1.0
    A = energy_correction(N4, NATURAL, 0.05, 0.1)
    assert abs(A - 1) < 1e-4
    with pytest.raises(ValidityError):
        energy_correction(N4, NATURAL, 2.0, 0.1)


def test_energy_correction_against_two_ode_runs():
    """u(x; eta) / u(x; 0) from the ODE agrees with the ratio within eta^4."""
    eta, x0, x = 0.1, 0.004, 0.05
    u0, du0 = zero_energy_wavefunction(N4, NATURAL, x0)
    a = integrate_exterior(N4, BoundaryState(x0, u0, du0), EnergyPoint.scattering(eta), x)
    b = integrate_exterior(N4, BoundaryState(x0, u0, du0), EnergyPoint(), x)
    assert abs(a.u / b.u - energy_correction(N4, NATURAL, x, eta)) < eta**4


def test_error_functional_trivial_and_untuned():
    est = error_functional(N4, NATURAL, 0.1, 0.1)
    assert est.E_value == 0 and est.envelope == 0
    tuned = (tune_counterterm(N4, NATURAL, 0.1), tune_counterterm(N4, NATURAL, 0.05))
    ok = error_functional(N4, NATURAL, 0.1, 0.05, counterterms=tuned)
    assert abs(ok.wronskian) < 1e-8
    bad = (tuned[0], Counterterm.from_H(0.05, tuned[1].H + 0.3))
    with pytest.raises(PreconditionError):
        error_functional(N4, NATURAL, 0.1, 0.05, counterterms=bad)
    with pytest.raises(DomainError):
        error_functional(N4, NATURAL, 0.05, 0.1)


def test_error_functional_envelope_scaling():
    Rs = np.geomspace(0.02, 0.2, 400)
    vals = np.array([abs(error_functional(N4, NATURAL, R, R / 2).E_value) for R in Rs])
    env = np.array([error_functional(N4, NATURAL, R, R / 2).envelope for R in Rs])
    assert np.polyfit(np.log(Rs), np.log(env), 1)[0] == pytest.approx(5.0, abs=1e-9)
    # upper envelope of the oscillating value: top decile in each of 8 log-R bins
    bins = np.array_split(np.arange(len(Rs)), 8)
    tops = [np.quantile(vals[b], 0.5) for b in bins]
    mids = [np.exp(np.mean(np.log(Rs[b]))) for b in bins]
    assert np.polyfit(np.log(mids), np.log(tops), 1)[0] == pytest.approx(5.0, abs=0.5)


@pytest.mark.xfail(
    strict=True,
    reason="measured cutoff differences grow as k^2.76, not k^2; see effective_range_shift for the k^3 law",
)
def test_k2_envelope_within_factor_three():
    R, Rp = 0.16, 0.08
    ks = np.linspace(0.05, 0.3, 6)
    ct, ctp = tune_counterterm(N4, NATURAL, R), tune_counterterm(N4, NATURAL, Rp)
    meas = np.array([abs(reduce_angle(phase_shift(N4, ct, k).delta - phase_shift(N4, ctp, k).delta)) for k in ks])
    est = error_functional(N4, NATURAL, R, Rp).fitted(ks[0], meas[0])
    ratio = meas / est.predicted_delta_error(ks)
    assert np.all((ratio > 1 / 3) & (ratio < 3))


@pytest.mark.parametrize("pair", sorted(NORM_DIFF_NATURAL))
def test_norm_difference_matches_oracle(pair):
    R, Rp = pair
    shift = effective_range_shift(N4, NATURAL, R, Rp)
    assert shift.norm_difference == pytest.approx(NORM_DIFF_NATURAL[pair], rel=1e-6)


@pytest.mark.parametrize("pair", [(0.16, 0.08), (0.04, 0.02)])
def test_cutoff_differences_approach_k3_norm_difference(pair):
    R, Rp = pair
    shift = effective_range_shift(N4, NATURAL, R, Rp)
    ct, ctp = tune_counterterm(N4, NATURAL, R), tune_counterterm(N4, NATURAL, Rp)
    for k in (0.002, 0.005):
        d, dp = phase_shift(N4, ct, k).delta, phase_shift(N4, ctp, k).delta
        assert reduce_angle(d - dp) / k**3 == pytest.approx(shift.norm_difference, rel=1e-2)


def test_unnatural_cutoff_differences_follow_the_resonant_form():
    """Near a zero-energy resonance the (sin delta / a)^2 form holds well past k|a| ~ 1."""
    phase = ZeroEnergyPhase(4, PHI4_UNNATURAL)
    R, Rp = 0.16, 0.08
    shift = effective_range_shift(N4, phase, R, Rp)
    ct, ctp = tune_counterterm(N4, phase, R), tune_counterterm(N4, phase, Rp)
    for k in (0.002, 0.02, 0.05):
        d, dp = phase_shift(N4, ct, k).delta, phase_shift(N4, ctp, k).delta
        assert reduce_angle(d - dp) == pytest.approx(float(shift.delta_difference(k, dp)), rel=2e-2)


def test_asymptotic_normalization_scattering_length():
    C, a = asymptotic_normalization(N4, NATURAL)
    assert a == pytest.approx(math.tan(PHI4_NATURAL), rel=1e-9)
    assert C == pytest.approx(math.cos(PHI4_NATURAL), rel=1e-9)
