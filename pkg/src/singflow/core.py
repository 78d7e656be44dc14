"""Dimensionless problem definition shared by every other module.

Everything is expressed in units of the curvature scale ``r0``::

    x = r / r0,   eta = k * r0,   E = eta**2 / (2 M r0**2)

so the radial equation becomes ``u'' + (eta**2 + lambda_S) u = 0`` inside the
square well (``x < R``) and ``u'' + (eta**2 + lambda_L f(x) / x**n) u = 0``
outside it.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator


class SingflowError(Exception):
    """Base class for every error raised by the package."""


class DomainError(SingflowError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResolutionError(SingflowError):
    """A grid or step budget is too coarse for the requested problem."""


class PoleError(SingflowError):
    """A logarithmic derivative diverges (the wavefunction has a node)."""

    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


class BranchInfeasibleError(SingflowError):
    """The matching condition has no root on the requested branch."""


class ExtractionError(SingflowError):
    """Phase extraction was not stable under a change of extraction radius."""


class ValidityError(SingflowError):
    """An approximation was evaluated outside its region of validity."""

    def __init__(self, message: str, indicator: float | None = None):
        super().__init__(message)
        self.indicator = indicator


class ObservableInfeasibleError(SingflowError):
    """No short-distance phase reproduces the requested observable."""


class PreconditionError(SingflowError):
    """Inputs violate a documented precondition of the operation."""


class DivergenceError(SingflowError):
    """A quadrature or series failed to converge."""


# -- profiles ---------------------------------------------------------------


@dataclass(frozen=True)
class Unity:
    """The pure power-law tail, f(x) = 1."""

    def __call__(self, x):
        return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Tabulated:
    """Long-range shape f(x) given by samples, interpolated with PCHIP.

    The first sample must sit at x = 0 with f = 1.  Beyond the last sample
    the profile is held at its final value.
    """

    samples: tuple[tuple[float, float], ...]
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(sorted((float(a), float(b)) for a, b in self.samples))
        if len(pts) < 2:
            raise DomainError("tabulated profile needs at least two samples")
        x0, f0 = pts[0]
        if abs(x0) > 1e-12 or abs(f0 - 1.0) > 1e-12:
            raise DomainError("tabulated profile must start with f(0) = 1")
        xs = np.array([p[0] for p in pts])
        if np.any(np.diff(xs) <= 0):
            raise DomainError("tabulated profile abscissae must be distinct")
        object.__setattr__(self, "samples", pts)
        object.__setattr__(
            self, "_interp", PchipInterpolator(xs, [p[1] for p in pts], extrapolate=False)
        )

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xs = self._interp.x
        out = self._interp(np.clip(x, xs[0], xs[-1]))
        return np.where(x <= 0.0, 1.0, out)


Profile = Unity | Tabulated


# -- domain types -----------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """Long-distance potential -lambda_L f(x) / x**n.

    ``lambda_L = 0`` is accepted for n >= 3 as the free limit used by
    weak-coupling checks.
    """

    n: int
    lambda_L: float
    profile: Profile = field(default_factory=Unity)
    r0: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not math.isfinite(self.lambda_L) or self.lambda_L < 0:
            raise DomainError(f"lambda_L must be non-negative, got {self.lambda_L}")
        if self.n == 2 and self.lambda_L <= 0.25:
            raise DomainError("n = 2 requires lambda_L > 1/4")
        if not self.r0 > 0:
            raise DomainError(f"r0 must be positive, got {self.r0}")

    @property
    def is_unity(self) -> bool:
        return isinstance(self.profile, Unity)

    def potential_strength(self, x):
        """lambda_L f(x) / x**n, the (positive) attractive tail strength."""
        x = np.asarray(x, dtype=float)
        return self.lambda_L * self.profile(x) / x**self.n


@dataclass(frozen=True)
class Counterterm:
    """Square-well regulator of radius R and depth lambda_S on branch m."""

    R: float
    lambda_S: float
    branch: int = 0

    def __post_init__(self):
        if not 0 < self.R:
            raise DomainError(f"cutoff R must be positive, got {self.R}")
        if not math.isfinite(self.lambda_S) or self.lambda_S < 0:
            raise DomainError(f"lambda_S must be finite and >= 0, got {self.lambda_S}")
        if self.branch < 0:
            raise DomainError("branch index must be >= 0")
        H = self.H
        lo, hi = self.branch * math.pi, (self.branch + 1) * math.pi
        slack = 1e-9 * max(1.0, hi)
        if not (lo - slack <= H < hi + slack):
            raise DomainError(f"H = {H} does not lie on branch {self.branch}")

    @property
    def H(self) -> float:
        return math.sqrt(self.lambda_S) * self.R

    @classmethod
    def from_H(cls, R: float, H: float, branch: int | None = None) -> "Counterterm":
        if branch is None:
            branch = int(H // math.pi)
        return cls(R=R, lambda_S=(H / R) ** 2, branch=branch)


@dataclass(frozen=True)
class EnergyPoint:
    """A scattering wavenumber eta >= 0, or a bound state eta = i kappa."""

    eta: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.eta < 0 or self.kappa < 0:
            raise DomainError("eta and kappa must be non-negative")
        if self.eta > 0 and self.kappa > 0:
            raise DomainError("an energy point is either scattering or bound")

    @classmethod
    def scattering(cls, eta: float) -> "EnergyPoint":
        return cls(eta=float(eta))

    @classmethod
    def bound(cls, kappa: float) -> "EnergyPoint":
        if not kappa > 0:
            raise DomainError("bound states need kappa > 0")
        return cls(kappa=float(kappa))

    @property
    def is_bound(self) -> bool:
        return self.kappa > 0

    @property
    def eta_squared(self) -> float:
        """eta**2, negative for bound states."""
        return -self.kappa**2 if self.is_bound else self.eta**2

    def energy(self, M: float = 0.5, r0: float = 1.0) -> float:
        """Physical energy eta**2 / (2 M r0**2); the defaults give E = eta**2."""
        return self.eta_squared / (2.0 * M * r0**2)

    @classmethod
    def from_energy(cls, E: float, M: float = 0.5, r0: float = 1.0) -> "EnergyPoint":
        e2 = 2.0 * M * r0**2 * E
        return cls.bound(math.sqrt(-e2)) if e2 < 0 else cls.scattering(math.sqrt(e2))


@dataclass(frozen=True)
class Tolerances:
    ode_rel_tol: float = 1e-10
    root_tol: float = 1e-12
    phase_tol: float = 1e-6
    points_per_wavelength: int = 80

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise DomainError(f"{f.name} must be positive")
        if self.points_per_wavelength < 16:
            raise DomainError("points_per_wavelength must be >= 16")

    @classmethod
    def from_env(cls, environ=None, base: "Tolerances | None" = None) -> "Tolerances":
        """Override fields from ``SINGFLOW_TOL_<FIELD>`` environment variables."""
        environ = os.environ if environ is None else environ
        base = base or cls()
        updates = {}
        for f in fields(cls):
            raw = environ.get(f"SINGFLOW_TOL_{f.name.upper()}")
            if raw is not None:
                conv = int if f.name == "points_per_wavelength" else float
                try:
                    updates[f.name] = conv(raw)
                except ValueError as exc:
                    raise DomainError(f"bad value for SINGFLOW_TOL_{f.name.upper()}: {raw!r}") from exc
        return replace(base, **updates)


DEFAULT_TOL = Tolerances()


# -- operations -------------------------------------------------------------


def to_dimensionless(r: float, k: float, spec: PotentialSpec) -> tuple[float, float]:
    if not spec.r0 > 0:
        raise DomainError("r0 must be positive")
    if r < 0:
        raise DomainError("r must be non-negative")
    return r / spec.r0, k * spec.r0


def from_dimensionless(x: float, eta: float, spec: PotentialSpec) -> tuple[float, float]:
    return x * spec.r0, eta / spec.r0


def nu_of(lambda_L: float) -> float:
    """nu = sqrt(lambda_L - 1/4) for the strong inverse-square tail."""
    if not lambda_L > 0.25:
        raise DomainError(f"nu needs lambda_L > 1/4, got {lambda_L}")
    return math.sqrt(lambda_L - 0.25)


def wkb_phase_scale(spec: PotentialSpec, x):
    """(2/n) sqrt(lambda_L f(x)) / x**(n/2 - 1); values >> 1 mean WKB holds."""
    x = np.asarray(x, dtype=float)
    n = spec.n
    out = (2.0 / n) * np.sqrt(spec.lambda_L * spec.profile(x)) / x ** (n / 2.0 - 1.0)
    return float(out) if out.ndim == 0 else out


def reduce_angle(a, period: float = math.pi):
    """Map an angle into (-period/2, period/2]."""
    a = np.asarray(a, dtype=float)
    r = a - period * np.ceil(a / period - 0.5)
    return float(r) if np.ndim(r) == 0 else r


def as_floats(values: Sequence[float]) -> np.ndarray:
    return np.asarray(list(values), dtype=float)
