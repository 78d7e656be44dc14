"""Weak-coupling expansion for the n = 4 tail.

The scattering length of a square well plus a weak 1/x^4 tail is analytic in
lambda_L; ``a4_weak_coupling`` gives the first two orders.  ``born_iterates``
builds the zero-energy wavefunction order by order in lambda_L with the
large-x asymptote x - a4 held fixed:

    u_0 = x - a4,    u_{j+1}(x) = - int_x^inf (x' - x) u_j(x') / x'^4 dx'

so that u_{j+1}'' = -u_j / x^4 and every order vanishes at infinity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import IntegrationWarning, quad

from .core import Counterterm, DivergenceError, DomainError, PoleError
from .zero_energy import ZeroEnergyPhase

X_MAX = 1.0e3
X_MIN = 1.0e-4


@dataclass(frozen=True)
class WeakCouplingResult:
    value: float
    error_bar: float  # first neglected order, R (lambda_L / R^2)^2
    coupling: float  # lambda_L / R^2
    leading: float
    first_order: float


def a4_weak_coupling(ct: Counterterm, lambda_L: float) -> WeakCouplingResult:
    """a4 = R [(1 - t) - (1 + t + t^2) lambda_L / (3 R^2)], t = tan(H)/H."""
    if lambda_L < 0:
        raise DomainError("lambda_L must be non-negative")
    H, R = ct.H, ct.R
    if H == 0.0:
        t = 1.0
    else:
        c = math.cos(H)
        if abs(c) < 1e-15:
            raise PoleError("tan(sqrt(lambda_S) R) diverges: square-well resonance", location=R)
        t = math.tan(H) / H
    g = lambda_L / R**2
    lead = R * (1.0 - t)
    first = -R * (1.0 + t + t * t) * g / 3.0
    return WeakCouplingResult(lead + first, R * g * g, g, lead, first)


def exact_a4(ct: Counterterm, lambda_L: float) -> float:
    """a4 from the exact matching chain: interior log-derivative -> phi_4 -> a4."""
    if lambda_L == 0:
        return a4_weak_coupling(ct, 0.0).leading
    H, R = ct.H, ct.R
    s = math.sqrt(lambda_L)
    # exterior u = x cos(s/x + phi): u'/u = 1/R + s tan(s/R + phi) / R^2
    if H == 0.0:
        L = 1.0 / R
    else:
        L = math.sqrt(ct.lambda_S) * math.cos(H) / math.sin(H)
    # a4 = s tan(phi) with phi = theta - s/R and tan(theta) = (L - 1/R) R^2 / s;
    # written with cot to stay accurate when tan(theta) is huge (weak coupling)
    K = (L - 1.0 / R) * R * R  # = s tan(theta)
    eps = math.atan2(s, K) + s / R  # pi/2 - phi (mod pi)
    return s * math.cos(eps) / math.sin(eps)


def phase_for_weak_coupling(ct: Counterterm, lambda_L: float) -> ZeroEnergyPhase:
    a = exact_a4(ct, lambda_L)
    return ZeroEnergyPhase(4, math.atan(a / math.sqrt(lambda_L)))


# -- Born iterates --------------------------------------------------------------------


def _u0(a4: float) -> Callable[[float], float]:
    return lambda x: x - a4


def _tail(j: int, x: float, a4: float, uX: float) -> float:
    """int_X^inf (x' - x) u_j(x') / x'^4 dx' from the leading large-x power of u_j."""
    X = X_MAX
    if j == 0:
        # (x' - x)(x' - a) / x'^4, exact
        return 1.0 / X - (x + a4) / (2 * X**2) + x * a4 / (3 * X**3)
    # u_j ~ uX * X / x'
    c = uX * X
    return c * (1.0 / (3 * X**3) - x / (4 * X**4))


def _next_order(prev: Callable[[float], float], j: int, a4: float) -> Callable[[float], float]:
    def u_next(x: float) -> float:
        if x > X_MAX:
            raise DomainError(f"Born iterates are evaluated up to x = {X_MAX}")
        g = lambda t: (math.exp(t) - x) * prev(math.exp(t)) * math.exp(-3.0 * t)  # noqa: E731
        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            try:
                val, err = quad(g, math.log(x), math.log(X_MAX), epsabs=1e-13, epsrel=1e-11, limit=200)
            except IntegrationWarning as exc:
                raise DivergenceError(f"Born quadrature failed at x={x}: {exc}") from exc
        total = val + _tail(j, x, a4, prev(X_MAX))
        if not math.isfinite(total):
            raise DivergenceError(f"Born iterate diverged at x={x}")
        return -total

    return u_next


@dataclass(frozen=True)
class PerturbativeSeries:
    a4: float
    lambda_L: float
    orders: tuple[Callable[[float], float], ...]

    def __call__(self, x: float, order: int) -> float:
        if not 0 <= order < len(self.orders):
            raise DomainError(f"order must be in 0..{len(self.orders) - 1}")
        if not x > 0:
            raise DomainError("x must be positive")
        if x < X_MIN:
            raise DivergenceError(f"x = {x} is below the quadrature cap {X_MIN}")
        return sum(self.lambda_L**j * self.orders[j](x) for j in range(order + 1))


def perturbative_series(phase: ZeroEnergyPhase, lambda_L: float, max_order: int = 2) -> PerturbativeSeries:
    if phase.n != 4:
        raise DomainError("Born iterates are implemented for n = 4")
    if lambda_L < 0:
        raise DomainError("lambda_L must be non-negative")
    a4 = math.sqrt(lambda_L) * math.tan(phase.phi_raw)
    fs = [_u0(a4)]
    for j in range(max_order):
        fs.append(_next_order(fs[-1], j, a4))
    return PerturbativeSeries(a4, lambda_L, tuple(fs))


def born_iterates(phase: ZeroEnergyPhase, lambda_L: float, order: int, x: float) -> float:
    """sum_{j <= order} lambda_L^j u_j(x) with u -> x - a4 at large x."""
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1 or 2")
    return perturbative_series(phase, lambda_L, order)(x, order)


def exact_zero_energy(phase: ZeroEnergyPhase, lambda_L: float, x: float) -> float:
    """x cos(sqrt(lambda_L)/x + phi) / cos(phi), normalised to x - a4 at large x."""
    if lambda_L == 0:
        return x
    return x * math.cos(math.sqrt(lambda_L) / x + phase.phi_raw) / math.cos(phase.phi_raw)
