"""Closed-form zero-energy solutions and the short-distance phase phi_n.

Conventions (fixed by direct differentiation and checked against the ODE):

* n = 2:   u(x) = sqrt(x) cos(nu log x + phi),       nu = sqrt(lambda_L - 1/4)
* n >= 3:  u(x) -> x^{n/4} cos(c x^{1-n/2} + phi),   c = sqrt(lambda_L) / (n/2 - 1)

For n >= 3 the phase of the cosine *decreases* with x, so

    u'/u = n/(4x) + sqrt(lambda_L / x^n) tan(c x^{1-n/2} + phi)

with a plus sign in front of the tangent.  For n = 4 the cosine form is exact;
for other n the exact solution is the Bessel combination
sqrt(x) [A J_mu(z) + B J_-mu(z)], mu = 1/(n-2), z = c x^{1-n/2}, normalised so
that it approaches the cosine form as x -> 0.  n = 3 uses Y_1 in place of
J_-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import (
    DomainError,
    ObservableInfeasibleError,
    PoleError,
    PotentialSpec,
    nu_of,
    reduce_angle,
)
from .specfun import bessel_j, bessel_y1, im_log_gamma_one_plus_i


@dataclass(frozen=True)
class ZeroEnergyPhase:
    n: int
    phi_raw: float

    @property
    def phi(self) -> float:
        """phi reduced to (-pi/2, pi/2]."""
        return reduce_angle(self.phi_raw)

    @property
    def convention(self) -> str:
        return "sqrt(x) cos(nu log x + phi)" if self.n == 2 else "x^(n/4) cos(c x^(1-n/2) + phi)"

    def tan(self) -> float:
        return math.tan(self.phi_raw)

    def same_physics(self, other: "ZeroEnergyPhase", atol: float = 1e-10) -> bool:
        return self.n == other.n and abs(reduce_angle(self.phi_raw - other.phi_raw)) <= atol


# -- observables ------------------------------------------------------------------


@dataclass(frozen=True)
class ScatteringLength:
    a: float


@dataclass(frozen=True)
class PhaseAtK:
    k: float
    delta: float
    anchor_R: float = 0.01


@dataclass(frozen=True)
class BoundStateEnergy:
    """A bound state E = -kappa**2 (units 1/(2 M r0**2)) labelled m."""

    E: float
    m: int = 0


Observable = ScatteringLength | PhaseAtK | BoundStateEnergy


# -- wavefunctions ------------------------------------------------------------------


def _tail_coefficient(spec: PotentialSpec) -> float:
    return math.sqrt(spec.lambda_L) / (spec.n / 2.0 - 1.0)


def bessel_coefficients(n: int, phi: float) -> tuple[float, float]:
    """(A_n, B_n) with A**2 + B**2 = 1 reproducing phase phi at small x.

    For n = 3 the pair multiplies (J_1, Y_1) rather than (J_1, J_-1).
    """
    if n < 3:
        raise DomainError("Bessel coefficients are defined for n >= 3")
    mu = 1.0 / (n - 2)
    alpha = 0.5 * mu * math.pi
    if n == 3:
        # J_1 ~ cos(z - 3pi/4), Y_1 ~ sin(z - 3pi/4)
        beta = -0.75 * math.pi - phi
        return math.cos(beta), math.sin(beta)
    # A e^{-i alpha} + B e^{i alpha} must have argument phi + pi/4 (mod pi)
    psi = phi + 0.25 * math.pi
    beta = 0.25 * math.pi + math.atan2(math.sin(psi) * math.cos(alpha), math.cos(psi) * math.sin(alpha))
    return math.cos(beta), math.sin(beta)


def phase_from_bessel_coefficients(n: int, A: float, B: float) -> float:
    """Inverse of ``bessel_coefficients`` (reduced mod pi)."""
    mu = 1.0 / (n - 2)
    if n == 3:
        return reduce_angle(-0.75 * math.pi - math.atan2(B, A))
    alpha = 0.5 * mu * math.pi
    w = complex(A, 0) * complex(math.cos(alpha), -math.sin(alpha)) + B * complex(math.cos(alpha), math.sin(alpha))
    return reduce_angle(math.atan2(w.imag, w.real) - 0.25 * math.pi)


def _bessel_form(spec: PotentialSpec, phi: float, x: float) -> tuple[float, float]:
    n = spec.n
    c = _tail_coefficient(spec)
    p = n / 2.0 - 1.0
    z = c * x ** (-p)
    mu = 1.0 / (n - 2)
    A, B = bessel_coefficients(n, phi)
    ja, dja = bessel_j(mu, z)
    if n == 3:
        jb, djb = bessel_y1(z)
        amp = 1.0
    else:
        jb, djb = bessel_j(-mu, z)
        alpha = 0.5 * mu * math.pi
        amp = abs(complex(A * math.cos(alpha) + B * math.cos(alpha), (B - A) * math.sin(alpha)))
    F = A * ja + B * jb
    dF = A * dja + B * djb
    norm = math.sqrt(0.5 * math.pi * c) / amp
    sx = math.sqrt(x)
    u = norm * sx * F
    du = norm * (F / (2.0 * sx) - sx * dF * p * z / x)
    return u, du


def zero_energy_wavefunction(spec: PotentialSpec, phase: ZeroEnergyPhase, x: float) -> tuple[float, float]:
    """u(x; 0) and u'(x; 0) in the short-distance normalisation."""
    if not x > 0:
        raise DomainError("zero-energy wavefunction needs x > 0")
    if phase.n != spec.n:
        raise DomainError(f"phase is for n={phase.n}, potential has n={spec.n}")
    n, phi = spec.n, phase.phi_raw
    if n == 2:
        nu = nu_of(spec.lambda_L)
        th = nu * math.log(x) + phi
        sx = math.sqrt(x)
        return sx * math.cos(th), (0.5 * math.cos(th) - nu * math.sin(th)) / sx
    if spec.lambda_L == 0.0:
        raise DomainError("the short-distance form needs lambda_L > 0")
    if n == 4:
        c = math.sqrt(spec.lambda_L)
        th = c / x + phi
        return x * math.cos(th), math.cos(th) + (c / x) * math.sin(th)
    return _bessel_form(spec, reduce_angle(phi), x)


def zero_energy_wavefunction_leading(spec: PotentialSpec, phase: ZeroEnergyPhase, x: float) -> tuple[float, float]:
    """The small-x cosine form x^{n/4} cos(c x^{1-n/2} + phi) for any n >= 3."""
    n = spec.n
    c = _tail_coefficient(spec)
    p = n / 2.0 - 1.0
    th = c * x ** (-p) + phase.phi_raw
    xn = x ** (n / 4.0)
    u = xn * math.cos(th)
    du = (n / 4.0) * xn / x * math.cos(th) + xn * math.sin(th) * c * p * x ** (-p - 1.0)
    return u, du


def exterior_log_derivative(spec: PotentialSpec, phase: ZeroEnergyPhase, x: float) -> float:
    u, du = zero_energy_wavefunction(spec, phase, x)
    if abs(u) < 1e-13 * abs(du) * x:
        raise PoleError(f"zero-energy wavefunction has a node at x={x}", location=x)
    return du / u


def log_derivative_closed_form(spec: PotentialSpec, phase: ZeroEnergyPhase, x: float, tan_sign: float = 1.0) -> float:
    """The textbook matching right-hand side.

    n = 2:  (1/x) (1/2 - nu tan(nu log x + phi))
    n >= 3: n/(4x) + tan_sign * sqrt(lambda_L/x^n) tan(c x^{1-n/2} + phi)

    ``tan_sign = +1`` agrees with differentiating the wavefunction; -1 is the
    alternative sign sometimes printed for the n >= 3 condition.
    """
    if spec.n == 2:
        nu = nu_of(spec.lambda_L)
        return (0.5 - nu * math.tan(nu * math.log(x) + phase.phi_raw)) / x
    n = spec.n
    c = _tail_coefficient(spec)
    th = c * x ** (1.0 - n / 2.0) + phase.phi_raw
    return n / (4.0 * x) + tan_sign * math.sqrt(spec.lambda_L / x**n) * math.tan(th)


def exterior_nodes(spec: PotentialSpec, phase: ZeroEnergyPhase, x_min: float, x_max: float) -> list[float]:
    """Zeros of u(x; 0) in [x_min, x_max], ascending."""
    if not 0 < x_min < x_max:
        raise DomainError("need 0 < x_min < x_max")
    n, phi = spec.n, phase.phi_raw
    if n == 2:
        nu = nu_of(spec.lambda_L)
        # nu log x + phi = pi/2 + j pi
        t_lo, t_hi = nu * math.log(x_min) + phi, nu * math.log(x_max) + phi
        j0 = math.ceil((t_lo - 0.5 * math.pi) / math.pi)
        j1 = math.floor((t_hi - 0.5 * math.pi) / math.pi)
        return [math.exp((0.5 * math.pi + j * math.pi - phi) / nu) for j in range(j0, j1 + 1)]
    c = _tail_coefficient(spec)
    p = n / 2.0 - 1.0
    if n == 4:
        # c/x + phi = pi/2 + j pi, phase decreasing in x
        t_lo, t_hi = c / x_max + phi, c / x_min + phi
        j0 = math.ceil((t_lo - 0.5 * math.pi) / math.pi)
        j1 = math.floor((t_hi - 0.5 * math.pi) / math.pi)
        xs = [c / (0.5 * math.pi + j * math.pi - phi) for j in range(j0, j1 + 1)]
        return sorted(x for x in xs if x > 0)
    from scipy.optimize import brentq

    # bracket in the phase variable, refine on the exact form
    zs = c * np.geomspace(x_min, x_max, 2000) ** (-p)
    xs = (zs / c) ** (-1.0 / p)
    us = [zero_energy_wavefunction(spec, phase, float(x))[0] for x in xs]
    out = []
    for i in range(len(xs) - 1):
        if us[i] == 0.0:
            out.append(float(xs[i]))
        elif us[i] * us[i + 1] < 0:
            out.append(brentq(lambda x: zero_energy_wavefunction(spec, phase, x)[0], xs[i], xs[i + 1], xtol=1e-15))
    return out


# -- n = 4 scattering length -----------------------------------------------------------


def scattering_length_n4(lambda_L: float, phase: ZeroEnergyPhase) -> float:
    """a_4 = sqrt(lambda_L) tan(phi_4) in units of r0."""
    if phase.n != 4:
        raise DomainError("the closed-form scattering length is for n = 4")
    c = math.cos(phase.phi_raw)
    if abs(c) < 1e-15:
        raise PoleError("phi_4 = pi/2 (mod pi): infinite scattering length")
    return math.sqrt(lambda_L) * math.sin(phase.phi_raw) / c


# -- n = 2 spectrum ----------------------------------------------------------------------


def kappa_n2(lambda_L: float, phi: float, m: int) -> float:
    nu = nu_of(lambda_L)
    return 2.0 * math.exp((phi + im_log_gamma_one_plus_i(nu) - (m + 0.5) * math.pi) / nu)


def spectrum_n2(lambda_L: float, phase: ZeroEnergyPhase, m_range: Iterable[int]):
    """Bound states kappa_m = 2 exp((phi + Im log Gamma(1+i nu) - (m+1/2) pi) / nu).

    Energies are -kappa**2 in units of 1/(2 M r0**2).
    """
    from .radial import BoundStateResult

    if phase.n != 2:
        raise DomainError("spectrum_n2 needs an n = 2 phase")
    return [BoundStateResult(int(m), kappa_n2(lambda_L, phase.phi_raw, int(m))) for m in m_range]


# -- phase from an observable --------------------------------------------------------------


def phase_from_observable(spec: PotentialSpec, obs: Observable, tol=None) -> ZeroEnergyPhase:
    n = spec.n
    if isinstance(obs, ScatteringLength):
        if n != 4:
            raise DomainError("the scattering-length inversion is implemented for n = 4")
        if spec.lambda_L == 0:
            raise ObservableInfeasibleError("with lambda_L = 0 the phase is undefined")
        return ZeroEnergyPhase(4, math.atan(obs.a / math.sqrt(spec.lambda_L)))
    if isinstance(obs, BoundStateEnergy):
        if n != 2:
            raise DomainError("bound-state inversion is implemented for n = 2")
        if not obs.E < 0:
            raise ObservableInfeasibleError("bound-state energy must be negative")
        nu = nu_of(spec.lambda_L)
        kappa = math.sqrt(-obs.E)
        raw = nu * math.log(0.5 * kappa) - im_log_gamma_one_plus_i(nu) + (obs.m + 0.5) * math.pi
        return ZeroEnergyPhase(2, raw)
    if isinstance(obs, PhaseAtK):
        return _phase_from_phase_shift(spec, obs, tol)
    raise DomainError(f"unknown observable {obs!r}")


def _phase_from_phase_shift(spec: PotentialSpec, obs: PhaseAtK, tol) -> ZeroEnergyPhase:
    from scipy.optimize import brentq

    from .core import DEFAULT_TOL, BranchInfeasibleError
    from .flow import tune_counterterm
    from .radial import phase_shift

    tol = tol or DEFAULT_TOL
    if not obs.k > 0:
        raise DomainError("PhaseAtK needs k > 0")

    def mismatch(phi: float) -> float:
        ph = ZeroEnergyPhase(spec.n, phi)
        ct = tune_counterterm(spec, ph, obs.anchor_R, m=None)
        return reduce_angle(phase_shift(spec, ct, obs.k, tol).delta - obs.delta)

    # phi is periodic mod pi; close the grid so the wrap-around cell is scanned
    grid = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 49)[1:]
    grid = np.append(grid, grid[0] + math.pi)
    vals = []
    for g in grid:
        try:
            vals.append(mismatch(float(g)))
        except (PoleError, BranchInfeasibleError):
            vals.append(math.nan)
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if math.isnan(a) or math.isnan(b):
            continue
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0 and abs(a - b) < 0.5 * math.pi:
            roots.append(brentq(mismatch, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14))
    if not roots:
        raise ObservableInfeasibleError(f"no phase reproduces delta({obs.k}) = {obs.delta}")
    return ZeroEnergyPhase(spec.n, reduce_angle(roots[0]))
