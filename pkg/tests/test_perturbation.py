import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracle_values import WEAK_A4
from singflow.core import Counterterm, DivergenceError, DomainError, PoleError, PotentialSpec
from singflow.perturbation import (
    X_MIN,
    a4_weak_coupling,
    born_iterates,
    exact_a4,
    exact_zero_energy,
    perturbative_series,
    phase_for_weak_coupling,
)
from singflow.radial import scattering_length_numeric
from singflow.zero_energy import ZeroEnergyPhase


def _closed_orders(x, a):
    """Order-by-order expansion of x cos(s/x + phi) / cos(phi) at fixed a = s tan(phi)."""
    return (x - a, -1 / (2 * x) + a / (6 * x * x), 1 / (24 * x**3) - a / (120 * x**4))


@pytest.mark.parametrize("phi", [-1.0, 0.0, 0.4])
@pytest.mark.parametrize("x", [0.3, 1.0, 4.0, 20.0])
def test_born_orders_match_closed_forms(phi, x):
    lam = 0.01
    series = perturbative_series(ZeroEnergyPhase(4, phi), lam, 2)
    for j, ref in enumerate(_closed_orders(x, series.a4)):
        assert series.orders[j](x) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_born_iterates_converge_to_exact_solution():
    phase = ZeroEnergyPhase(4, 0.3)
    lam, x = 1e-2, 1.0
    exact = exact_zero_energy(phase, lam, x)
    errs = [abs(born_iterates(phase, lam, j, x) - exact) for j in (0, 1, 2)]
    assert errs[0] > errs[1] > errs[2]
    # each order gains a factor lambda / x^2
    assert errs[2] < 1e-5


def test_born_iterates_solve_their_ode():
    """u_{j+1}'' = -u_j / x^4 by finite differences."""
    series = perturbative_series(ZeroEnergyPhase(4, 0.2), 0.04, 2)
    for x in (0.5, 2.0):
        h = 1e-3 * x
        for j in (1, 2):
            f = series.orders[j]
            d2 = (f(x - h) - 2 * f(x) + f(x + h)) / h**2
            assert d2 == pytest.approx(-series.orders[j - 1](x) / x**4, rel=1e-5)


@pytest.mark.parametrize("key", sorted(WEAK_A4))
def test_weak_coupling_against_independent_solver(key):
    R, H, lam = key
    res = a4_weak_coupling(Counterterm.from_H(R, H), lam)
    assert abs(res.value - WEAK_A4[key]) <= 5 * res.error_bar + 1e-12


@given(st.floats(0.05, 0.5), st.floats(0.1, 2.5), st.floats(1e-6, 1e-3))
def test_weak_coupling_is_analytic_in_lambda(R, H, lam):
    """The first-order coefficient is the derivative of the exact a4 at lambda = 0."""
    ct = Counterterm.from_H(R, H)
    if abs(math.cos(H)) < 0.05:
        return
    res = a4_weak_coupling(ct, lam)
    h = 1e-6 * R * R
    slope = (exact_a4(ct, h) - exact_a4(ct, 0.0)) / h
    assert slope * lam == pytest.approx(res.first_order, rel=1e-3)


@pytest.mark.parametrize("R,H,lam", [(0.3, 1.0, 0.5), (0.2, 2.0, 1.0), (0.1, 4.0, 2.0)])
def test_exact_a4_against_numerical_scattering_length(R, H, lam):
    ct = Counterterm.from_H(R, H)
    assert exact_a4(ct, lam) == pytest.approx(scattering_length_numeric(PotentialSpec(4, lam), ct), rel=1e-8)
    phase = phase_for_weak_coupling(ct, lam)
    assert math.sqrt(lam) * math.tan(phase.phi_raw) == pytest.approx(exact_a4(ct, lam), rel=1e-12)


def test_errors():
    with pytest.raises(DomainError):
        a4_weak_coupling(Counterterm.from_H(0.3, 1.0), -1.0)
    with pytest.raises(PoleError):
        a4_weak_coupling(Counterterm.from_H(0.3, math.pi / 2), 1e-4)
    series = perturbative_series(ZeroEnergyPhase(4, 0.2), 0.01, 2)
    with pytest.raises(DivergenceError):
        series(X_MIN / 2, 1)
    with pytest.raises(DomainError):
        series(1.0, 3)
    with pytest.raises(DomainError):
        series(-1.0, 0)
    with pytest.raises(DomainError):
        born_iterates(ZeroEnergyPhase(4, 0.2), 0.01, 3, 1.0)
    with pytest.raises(DomainError):
        perturbative_series(ZeroEnergyPhase(6, 0.2), 0.01)


def test_series_helps_far_out_and_hurts_close_in():
    phase = ZeroEnergyPhase(4, 0.3)
    series = perturbative_series(phase, 1.0, 2)

    def errs(x):
        exact = exact_zero_energy(phase, 1.0, x)
        return [abs(series(x, j) - exact) for j in (1, 2)]

    far, near = errs(10.0), errs(0.1)
    assert far[1] < far[0]
    assert near[1] > near[0]
