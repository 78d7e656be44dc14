"""Semiclassical wavefunctions and cutoff-error estimates.

``wkb_wavefunction`` evaluates the leading WKB form

    u(x) = p(x)^{-1/2} cos( int_{x0}^{x} p ),   p^2 = eta^2 + lambda_L f(x) / x^n

``energy_correction`` is the leading energy dependence of the amplitude
A(x; eta) = u(x; eta) / u(x; 0) in the region where |u'/u| >> 1.

Two cutoff-error estimates are provided.  ``error_functional`` is the
order-of-magnitude Wronskian estimate R^{n/2-1} u^3 / u' with its
R^{3n/2-1} envelope.  ``effective_range_shift`` is exact to leading order in
k^2: cutoffs tuned to one phase share the scattering length, and their phase
shifts differ through the short-distance norm integral dI,

    delta_R - delta_R' = k (sin delta / a)^2 dI (1 + O(k)),

which behaves as k^3 dI when k|a| << 1.  The relative O(k) term comes from
the long-range 1/x^n tail and is a few percent at k = 0.02 for |a| ~ 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .core import (
    DEFAULT_TOL,
    Counterterm,
    DomainError,
    EnergyPoint,
    PotentialSpec,
    PreconditionError,
    Tabulated,
    Tolerances,
    ValidityError,
    wkb_phase_scale,
)
from .zero_energy import ZeroEnergyPhase, zero_energy_wavefunction

VALIDITY_MIN = 5.0
_QUAD_TOL = 1e-10


def _profile_and_slope(spec: PotentialSpec, x: float) -> tuple[float, float]:
    if isinstance(spec.profile, Tabulated):
        interp = spec.profile._interp
        xs = interp.x
        xc = min(max(x, xs[0]), xs[-1])
        slope = float(interp.derivative()(xc)) if xs[0] < x < xs[-1] else 0.0
        return float(spec.profile(x)), slope
    return 1.0, 0.0


@dataclass(frozen=True)
class WkbSolution:
    spec: PotentialSpec
    eta: float
    x0: float
    langer: bool = False  # n = 2 only: lambda_L -> lambda_L - 1/4

    def __post_init__(self):
        if self.eta < 0 or not self.x0 > 0:
            raise DomainError("need eta >= 0 and x0 > 0")
        if self.langer and self.spec.n != 2:
            raise DomainError("the Langer shift applies to n = 2 only")

    @property
    def strength(self) -> float:
        return self.spec.lambda_L - 0.25 if self.langer else self.spec.lambda_L

    def momentum(self, x: float) -> float:
        f, _ = _profile_and_slope(self.spec, x)
        return math.sqrt(self.eta**2 + self.strength * f / x**self.spec.n)

    def momentum_squared_slope(self, x: float) -> float:
        n = self.spec.n
        f, df = _profile_and_slope(self.spec, x)
        return self.strength * (df / x**n - n * f / x ** (n + 1))

    def amplitude(self, x: float) -> float:
        return self.momentum(x) ** -0.5

    def phase(self, x: float) -> float:
        """int_{x0}^{x} p(x') dx', by quadrature in log x."""
        if not x > 0:
            raise DomainError("x must be positive")
        if x == self.x0:
            return 0.0
        g = lambda t: self.momentum(math.exp(t)) * math.exp(t)  # noqa: E731
        lo, hi = math.log(self.x0), math.log(x)
        val, _ = quad(g, min(lo, hi), max(lo, hi), epsabs=0.0, epsrel=_QUAD_TOL, limit=500)
        return val if hi > lo else -val

    def validity(self, x: float) -> tuple[float, float]:
        """(small-x indicator, large-x indicator); either >= 5 means valid."""
        spec = self.spec
        small = wkb_phase_scale(spec, x) if spec.n > 2 else 2.0 * math.sqrt(max(self.strength, 0.0)) / spec.n
        if self.eta > 0 and spec.lambda_L > 0:
            large = self.eta**3 / (0.5 * spec.n * spec.lambda_L * x ** (-spec.n - 1))
        else:
            large = math.inf if spec.lambda_L == 0 else 0.0
        return float(small), float(large)


def wkb_wavefunction(sol: WkbSolution, x: float) -> tuple[float, float]:
    """(u, u') of the leading WKB solution; raises ValidityError outside its region."""
    small, large = sol.validity(x)
    if max(small, large) < VALIDITY_MIN:
        raise ValidityError(f"WKB not valid at x={x} (indicators {small:.3g}, {large:.3g})", max(small, large))
    p = sol.momentum(x)
    S = sol.phase(x)
    A = p**-0.5
    dA = -0.25 * p**-2.5 * sol.momentum_squared_slope(x)
    return A * math.cos(S), dA * math.cos(S) - A * p * math.sin(S)


# -- leading energy dependence ---------------------------------------------------------


def _derivative_nodes(spec: PotentialSpec, phase: ZeroEnergyPhase, lo: float, hi: float) -> list[float]:
    """Zeros of u'(x; 0) in (lo, hi), bracketed on a grid fine in the local phase."""
    n = spec.n
    if n == 2:
        cycles = math.sqrt(spec.lambda_L) * math.log(hi / lo) / math.pi
    else:
        c = math.sqrt(spec.lambda_L) / (n / 2 - 1)
        cycles = c * (lo ** (1 - n / 2) - hi ** (1 - n / 2)) / math.pi
    npts = int(24 * cycles) + 50
    if n == 2:
        xs = np.geomspace(lo, hi, npts)
    else:
        p = n / 2 - 1
        xs = np.linspace(lo**-p, hi**-p, npts) ** (-1.0 / p)
    du = lambda x: zero_energy_wavefunction(spec, phase, x)[1]  # noqa: E731
    vals = [du(float(x)) for x in xs]
    out = []
    for i in range(npts - 1):
        if vals[i] * vals[i + 1] < 0:
            out.append(brentq(du, float(xs[i]), float(xs[i + 1]), xtol=1e-15, rtol=1e-14))
    return out


def _local_wavelength(spec: PotentialSpec, x: float) -> float:
    return 2.0 * math.pi / math.sqrt(spec.lambda_L / x**spec.n)


def amplitude_integral(spec: PotentialSpec, phase: ZeroEnergyPhase, x: float, max_cycles: float = 400.0) -> float:
    """Principal value of int_0^x u(x';0)/u'(x';0) dx'.

    Poles at zeros of u' are excised with symmetric windows of half-width
    1e-4 local wavelengths.  The integral starts where the phase is
    ``max_cycles`` turns away from x; below that the integrand is O(x'^{n/2})
    and averages out between poles.
    """
    n = spec.n
    if n == 2:
        lo = x * math.exp(-max_cycles * math.pi / math.sqrt(spec.lambda_L))
    else:
        p = n / 2 - 1
        c = math.sqrt(spec.lambda_L) / p
        lo = (x**-p + max_cycles * math.pi / c) ** (-1.0 / p)
        lo = max(lo, 1e-3 * x)
    nodes = _derivative_nodes(spec, phase, lo, x)
    ratio = lambda t: (lambda u: u[0] / u[1])(zero_energy_wavefunction(spec, phase, t))  # noqa: E731
    edges = [lo]
    for z in nodes:
        w = 1e-4 * _local_wavelength(spec, z)
        edges += [z - w, z + w]
    edges.append(x)
    total = 0.0
    for a, b in zip(edges[0::2], edges[1::2]):
        if b > a:
            total += quad(ratio, a, b, epsabs=1e-15, epsrel=_QUAD_TOL, limit=200)[0]
    return total


def energy_correction(spec: PotentialSpec, phase: ZeroEnergyPhase, x: float, eta: float) -> float:
    """A(x; eta) / A_0 = 1 - (eta^2/2) PV int_0^x u/u' dx' (zero-energy input only)."""
    if eta < 0 or not x > 0:
        raise DomainError("need eta >= 0 and x > 0")
    if eta == 0:
        return 1.0
    indicator = math.sqrt(spec.lambda_L / x**spec.n) if spec.n > 2 else math.sqrt(spec.lambda_L) / x
    if indicator < VALIDITY_MIN:
        raise ValidityError(f"|d ln u/dx| ~ {indicator:.3g} is not large at x={x}", indicator)
    return 1.0 - 0.5 * eta**2 * amplitude_integral(spec, phase, x)


# -- cutoff errors ------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorEstimate:
    R: float
    Rprime: float
    E_value: float  # R^{n/2-1} u^3/u' at R, oscillatory
    envelope: float  # same with the oscillating factors set to their amplitudes
    wronskian: float  # zero-energy W[u_R, u_R'](R), zero when tuned
    constant: float = 1.0

    def predicted_delta_error(self, k):
        return self.constant * np.asarray(k, dtype=float) ** 2 * self.envelope

    def fitted(self, k: float, measured: float) -> "ErrorEstimate":
        """Fix the O(1) constant from one measurement (the smallest k)."""
        if self.envelope == 0:
            return self
        return replace(self, constant=abs(measured) / (k**2 * self.envelope))


def _zero_energy_wronskian(spec, ct: Counterterm, ctp: Counterterm, tol: Tolerances) -> float:
    from .radial import integrate_exterior, interior_state, wronskian

    ep = EnergyPoint()
    a = interior_state(ct, ep)
    b = integrate_exterior(spec, interior_state(ctp, ep), ep, ct.R, tol)
    scale = math.hypot(a.u, a.du * ct.R) * math.hypot(b.u, b.du * ct.R)
    return wronskian(a, b) * ct.R / scale


def error_functional(
    spec: PotentialSpec,
    phase: ZeroEnergyPhase,
    R: float,
    Rprime: float,
    counterterms: tuple[Counterterm, Counterterm] | None = None,
    tol: Tolerances = DEFAULT_TOL,
    wronskian_tol: float = 1e-8,
) -> ErrorEstimate:
    """Wronskian cutoff-error estimate for the pair R' <= R.

    The leading boundary and Wronskian terms cancel identically for tuned
    cutoffs (both solutions coincide for x >= R), leaving the remainder
    R^{n/2-1} u(R)^3 / u'(R).  ``counterterms`` lets a caller pass its own
    (possibly untuned) pair; their zero-energy Wronskian must vanish.
    """
    if not 0 < Rprime <= R:
        raise DomainError("need 0 < R' <= R")
    if counterterms is not None:
        ct, ctp = counterterms
        if not (math.isclose(ct.R, R) and math.isclose(ctp.R, Rprime)):
            raise DomainError("counterterm radii do not match (R, R')")
        w = _zero_energy_wronskian(spec, ct, ctp, tol) if Rprime < R else 0.0
        if abs(w) > wronskian_tol:
            raise PreconditionError(f"cutoffs are not tuned to one phase: normalized W = {w:.3g}")
    else:
        w = 0.0
    if R == Rprime:
        return ErrorEstimate(R, Rprime, 0.0, 0.0, 0.0)
    n = spec.n
    u, du = zero_energy_wavefunction(spec, phase, R)
    raw = R ** (n / 2 - 1) * u**3 / du
    envelope = R ** (3 * n / 2 - 1) / math.sqrt(spec.lambda_L)
    return ErrorEstimate(R, Rprime, raw, envelope, w)


def _well_norm(u_R: float, ct: Counterterm) -> float:
    """int_0^R of the well solution scaled to u_R at x = R."""
    q = math.sqrt(ct.lambda_S)
    s = math.sin(q * ct.R)
    if s == 0.0:
        raise DomainError("well solution has a node at the cutoff")
    return (u_R / s) ** 2 * (0.5 * ct.R - math.sin(2 * q * ct.R) / (4 * q))


def asymptotic_normalization(spec: PotentialSpec, phase: ZeroEnergyPhase) -> tuple[float, float]:
    """(C, a) with u(x; 0) -> C (x - a) at large x (n >= 4)."""
    from .radial import BoundaryState, _far_basis, _intercept

    if spec.n < 4:
        raise DomainError("the zero-energy asymptote x - a needs n >= 4")
    x = 50.0 * max(1.0, spec.lambda_L ** (1.0 / (spec.n - 2)))
    u, du = zero_energy_wavefunction(spec, phase, x)
    a = _intercept(spec, BoundaryState(x, u, du))
    (v1, dv1), (v2, dv2) = _far_basis(spec, x)
    C = (u * dv2 - du * v2) / (v1 * dv2 - dv1 * v2)
    return C, a


@dataclass(frozen=True)
class EffectiveRangeShift:
    R: float
    Rprime: float
    a: float
    norm_difference: float  # dI, in the normalization u -> x - a

    def delta_difference(self, k, delta):
        """delta_R - delta_R' at wavenumber k, given delta(k) for either cutoff."""
        k = np.asarray(k, dtype=float)
        delta = np.asarray(delta, dtype=float)
        if self.a == 0.0:
            factor = k**2
        else:
            factor = (np.sin(delta) / self.a) ** 2
        return k * factor * self.norm_difference

    @property
    def effective_range_difference(self) -> float:
        """r_e(R) - r_e(R') in the convention k cot delta = -1/a + r_e k^2 / 2."""
        return -2.0 * self.norm_difference / self.a**2


def effective_range_shift(spec: PotentialSpec, phase: ZeroEnergyPhase, R: float, Rprime: float) -> EffectiveRangeShift:
    """Short-distance norm difference between two cutoffs tuned to ``phase``."""
    from .flow import tune_counterterm

    if not 0 < Rprime <= R:
        raise DomainError("need 0 < R' <= R")
    C, a = asymptotic_normalization(spec, phase)
    if R == Rprime:
        return EffectiveRangeShift(R, Rprime, a, 0.0)
    ct = tune_counterterm(spec, phase, R)
    ctp = tune_counterterm(spec, phase, Rprime)
    uR = zero_energy_wavefunction(spec, phase, R)[0]
    uRp = zero_energy_wavefunction(spec, phase, Rprime)[0]
    sq = lambda x: zero_energy_wavefunction(spec, phase, x)[0] ** 2  # noqa: E731
    n = spec.n
    p = n / 2 - 1
    # integrate the oscillating tail in the phase variable s = x^{-p}
    g = lambda s: sq(s ** (-1.0 / p)) * s ** (-1.0 / p - 1.0) / p  # noqa: E731
    ext, _ = quad(g, R**-p, Rprime**-p, epsabs=0.0, epsrel=1e-12, limit=2000)
    dI = (_well_norm(uR, ct) - _well_norm(uRp, ctp) - ext) / C**2
    return EffectiveRangeShift(R, Rprime, a, dI)
