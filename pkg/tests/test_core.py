import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from singflow.core import (
    Counterterm,
    DomainError,
    EnergyPoint,
    PotentialSpec,
    Tabulated,
    Tolerances,
    from_dimensionless,
    nu_of,
    reduce_angle,
    to_dimensionless,
    wkb_phase_scale,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=1, lambda_L=1.0),
        dict(n=2.5, lambda_L=1.0),
        dict(n=4, lambda_L=-1.0),
        dict(n=4, lambda_L=math.inf),
        dict(n=2, lambda_L=0.25),
        dict(n=4, lambda_L=1.0, r0=0.0),
    ],
)
def test_potential_spec_rejects(kwargs):
    with pytest.raises(DomainError):
        PotentialSpec(**kwargs)


def test_potential_spec_free_limit_allowed():
    assert PotentialSpec(4, 0.0).potential_strength(2.0) == 0.0


def test_counterterm_branch_consistency():
    ct = Counterterm.from_H(0.1, 4.0)
    assert ct.branch == 1
    assert ct.H == pytest.approx(4.0, rel=1e-15)
    with pytest.raises(DomainError):
        Counterterm(0.1, (4.0 / 0.1) ** 2, branch=0)
    with pytest.raises(DomainError):
        Counterterm(-0.1, 1.0)


@given(st.floats(1e-3, 1e3), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_energy_round_trip(eta, M, r0):
    ep = EnergyPoint.scattering(eta)
    E = ep.energy(M, r0)
    assert E == pytest.approx(eta**2 / (2 * M * r0**2), rel=1e-14)
    assert EnergyPoint.from_energy(E, M, r0).eta == pytest.approx(eta, rel=1e-13)
    assert EnergyPoint.from_energy(-E, M, r0).kappa == pytest.approx(eta, rel=1e-13)


def test_energy_point_exclusive():
    with pytest.raises(DomainError):
        EnergyPoint(eta=1.0, kappa=1.0)
    assert EnergyPoint.bound(2.0).eta_squared == -4.0


def test_tolerances_from_env():
    tol = Tolerances.from_env({"SINGFLOW_TOL_POINTS_PER_WAVELENGTH": "120", "SINGFLOW_TOL_PHASE_TOL": "1e-7"})
    assert tol.points_per_wavelength == 120 and tol.phase_tol == 1e-7
    with pytest.raises(DomainError):
        Tolerances.from_env({"SINGFLOW_TOL_ROOT_TOL": "abc"})
    with pytest.raises(DomainError):
        Tolerances(points_per_wavelength=8)


@given(finite)
def test_reduce_angle_range_and_congruence(a):
    r = reduce_angle(a)
    assert -math.pi / 2 < r <= math.pi / 2 + 1e-12
    k = (a - r) / math.pi
    assert abs(k - round(k)) < 1e-6


@given(st.floats(1e-6, 1e3), st.floats(1e-6, 1e3), st.floats(0.01, 100.0))
def test_dimensionless_round_trip(r, k, r0):
    spec = PotentialSpec(4, 1.0, r0=r0)
    x, eta = to_dimensionless(r, k, spec)
    rr, kk = from_dimensionless(x, eta, spec)
    assert rr == pytest.approx(r, rel=1e-14) and kk == pytest.approx(k, rel=1e-14)


def test_nu_and_phase_scale():
    assert nu_of(1.25) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        nu_of(0.2)
    spec = PotentialSpec(4, 4.0)
    assert wkb_phase_scale(spec, 0.5) == pytest.approx(0.5 * 2.0 / 0.5)
    assert np.allclose(wkb_phase_scale(spec, np.array([0.5, 1.0])), [2.0, 1.0])


def test_tabulated_profile():
    prof = Tabulated(((0.0, 1.0), (1.0, 0.5), (2.0, 0.0)))
    assert float(prof(0.0)) == 1.0
    assert float(prof(5.0)) == 0.0
    assert 0.5 < float(prof(0.5)) < 1.0
    with pytest.raises(DomainError):
        Tabulated(((0.5, 1.0), (1.0, 0.5)))
    spec = PotentialSpec(4, 1.0, profile=prof)
    assert spec.potential_strength(2.0) == 0.0
