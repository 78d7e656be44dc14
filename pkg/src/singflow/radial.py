"""Numerical solution of the regulated radial equation.

The exterior equation u'' + q(x) u = 0 is linear, so it is propagated with a
sixth-order Magnus integrator: on every step the first-order system
y' = A(x) y, A = [[0, 1], [-q, 0]], is advanced by exp(Omega) with Omega built
from q at three Gauss points.  The exponential of a traceless 2x2 matrix has a
closed form, each step preserves the Wronskian exactly, and the scheme is
exact whenever q is constant, so the far field costs nothing in accuracy.
Steps follow the local wavelength 2 pi / sqrt|q| (and the radius itself where
q is small), so the near-cutoff oscillations of the singular tail are resolved
uniformly.

The solver never enters x < R; the square-well interior is analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import (
    DEFAULT_TOL,
    Counterterm,
    DomainError,
    EnergyPoint,
    ExtractionError,
    PotentialSpec,
    ResolutionError,
    Tolerances,
    reduce_angle,
)

MAX_STEPS = 10**8
_GAUSS = math.sqrt(15.0) / 10.0


@dataclass(frozen=True)
class BoundaryState:
    x: float
    u: float
    du: float

    @property
    def log_derivative(self) -> float:
        return self.du / self.u


@dataclass(frozen=True)
class Path:
    """Solution sampled on every integrator node."""

    x: np.ndarray
    u: np.ndarray
    du: np.ndarray

    def state(self, i: int = -1) -> BoundaryState:
        return BoundaryState(float(self.x[i]), float(self.u[i]), float(self.du[i]))

    def sign_changes(self) -> int:
        s = np.sign(self.u)
        s = s[s != 0]
        return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass(frozen=True)
class PhasePoint:
    k: float
    delta: float
    delta_unwrapped: float
    r_extract: float
    stability: float
    ir_sensitive: bool = False


@dataclass(frozen=True)
class BoundStateResult:
    m: int
    kappa: float

    @property
    def E(self) -> float:
        """Energy in units of 1/(2 M r0**2)."""
        return -self.kappa**2


def q_function(spec: PotentialSpec, ep: EnergyPoint) -> Callable[[np.ndarray], np.ndarray]:
    e2 = ep.eta_squared
    if spec.lambda_L == 0.0:
        return lambda x: np.full_like(np.asarray(x, dtype=float), e2)
    return lambda x: e2 + spec.potential_strength(x)


# -- interior ----------------------------------------------------------------


def interior_state(ct: Counterterm, ep: EnergyPoint) -> BoundaryState:
    """sin(q x) and its derivative at x = R, with q**2 = eta**2 + lambda_S."""
    q2 = ct.lambda_S + ep.eta_squared
    if ep.is_bound and not q2 > 0:
        raise DomainError("bound-state interior needs lambda_S > kappa**2")
    if q2 == 0.0:
        # q -> 0 limit of sin(qx)/q
        return BoundaryState(ct.R, ct.R, 1.0)
    q = math.sqrt(q2)
    return BoundaryState(ct.R, math.sin(q * ct.R), q * math.cos(q * ct.R))


# -- grid and propagation ------------------------------------------------------


def step_grid(x0: float, x1: float, q: Callable, ppw: int) -> np.ndarray:
    """Nodes from x0 to x1 with h <= min(local wavelength, x) / ppw."""
    if not x1 > x0 > 0:
        raise DomainError(f"need 0 < x0 < x1, got {x0}, {x1}")
    efolds = math.log(x1 / x0)
    ns = max(200, int(64 * efolds) + 1)
    t = np.linspace(math.log(x0), math.log(x1), ns)
    xs = np.exp(t)
    qa = np.abs(q(xs))
    with np.errstate(divide="ignore"):
        lam = np.where(qa > 0, 2.0 * np.pi / np.sqrt(qa), np.inf)
    h = np.minimum(lam, xs) / ppw
    dens = xs / h  # dN / dlog x
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t))])
    total = cum[-1]
    if not np.isfinite(total) or total > MAX_STEPS:
        raise ResolutionError(f"integration from {x0} to {x1} needs ~{total:.3g} steps")
    nsteps = max(2, int(math.ceil(total * 1.02)))
    targets = np.linspace(0.0, total, nsteps + 1)
    grid = np.exp(np.interp(targets, cum, t))
    grid[0], grid[-1] = x0, x1
    return grid


def _step_matrices(xs: np.ndarray, q: Callable) -> tuple[np.ndarray, ...]:
    h = np.diff(xs)
    xm = xs[:-1] + 0.5 * h
    q1 = q(xm - _GAUSS * h)
    q2 = q(xm)
    q3 = q(xm + _GAUSS * h)

    def amat(qv):
        a = np.zeros(qv.shape + (2, 2))
        a[..., 0, 1] = 1.0
        a[..., 1, 0] = -qv
        return a

    A1, A2, A3 = amat(q1), amat(q2), amat(q3)
    hh = h[:, None, None]
    a1 = hh * A2
    a2 = hh * (math.sqrt(15.0) / 3.0) * (A3 - A1)
    a3 = hh * (10.0 / 3.0) * (A3 - 2.0 * A2 + A1)

    def comm(a, b):
        return a @ b - b @ a

    c1 = comm(a1, a2)
    c2 = -comm(a1, 2.0 * a3 + c1) / 60.0
    om = a1 + a3 / 12.0 + comm(-20.0 * a1 - a3 + c1, a2 + c2) / 240.0
    # exp of a traceless 2x2 matrix: cosh(s) I + sinh(s)/s Omega, s^2 = -det
    s2 = om[:, 0, 0] ** 2 + om[:, 0, 1] * om[:, 1, 0]
    w = np.sqrt(np.abs(s2))
    ws = np.where(w > 0, w, 1.0)
    osc = s2 < 0
    c = np.where(osc, np.cos(w), np.cosh(w))
    s = np.where(w > 0, np.where(osc, np.sin(w), np.sinh(w)) / ws, 1.0)
    return (
        c + s * om[:, 0, 0],
        s * om[:, 0, 1],
        s * om[:, 1, 0],
        c + s * om[:, 1, 1],
    )


def propagate(xs: np.ndarray, q: Callable, u: float, du: float, keep_path: bool = False):
    a, b, c, d = (m.tolist() for m in _step_matrices(xs, q))
    if not keep_path:
        for i in range(len(a)):
            u, du = a[i] * u + b[i] * du, c[i] * u + d[i] * du
        return u, du
    us = [u]
    dus = [du]
    for i in range(len(a)):
        u, du = a[i] * u + b[i] * du, c[i] * u + d[i] * du
        us.append(u)
        dus.append(du)
    return Path(xs, np.array(us), np.array(dus))


def exterior_path(
    spec: PotentialSpec,
    start: BoundaryState,
    ep: EnergyPoint,
    x_end: float,
    tol: Tolerances = DEFAULT_TOL,
    checkpoints: Sequence[float] = (),
) -> Path:
    """Like ``integrate_exterior`` but returns the solution on every node.

    ``checkpoints`` are radii guaranteed to appear as nodes.
    """
    q = q_function(spec, ep)
    marks = sorted({start.x, x_end, *[c for c in checkpoints if start.x < c < x_end]})
    grids = [step_grid(lo, hi, q, tol.points_per_wavelength) for lo, hi in zip(marks[:-1], marks[1:])]
    xs = np.concatenate([grids[0]] + [g[1:] for g in grids[1:]])
    return propagate(xs, q, start.u, start.du, keep_path=True)


def integrate_exterior(
    spec: PotentialSpec,
    start: BoundaryState,
    ep: EnergyPoint,
    x_end: float,
    tol: Tolerances = DEFAULT_TOL,
) -> BoundaryState:
    """Propagate (u, u') from start.x to x_end through the singular tail."""
    if not x_end > start.x > 0:
        raise DomainError(f"need x_end > start.x > 0, got {start.x} -> {x_end}")
    q = q_function(spec, ep)
    xs = step_grid(start.x, x_end, q, tol.points_per_wavelength)
    u, du = propagate(xs, q, start.u, start.du)
    return BoundaryState(x_end, u, du)


def wronskian(a: BoundaryState, b: BoundaryState) -> float:
    if not math.isclose(a.x, b.x, rel_tol=1e-12, abs_tol=0.0):
        raise DomainError(f"wronskian needs states at one radius, got {a.x} and {b.x}")
    return a.u * b.du - a.du * b.u


# -- scattering ----------------------------------------------------------------


def extraction_radius(spec: PotentialSpec, k: float) -> float:
    r = 40.0 / k
    if spec.lambda_L > 0:
        r = max(r, 20.0 * (spec.lambda_L / k**2) ** (1.0 / spec.n))
    return r


def _raw_phase(state: BoundaryState, k: float) -> float:
    return math.atan2(k * state.u, state.du) - k * state.x


def _tail_phase(spec: PotentialSpec, k: float, r: float, delta: float) -> float:
    """Phase still to accumulate beyond r: int_r^inf V sin^2(kx + delta) / k dx.

    Leading terms of the large-r expansion for V = lambda_L f(r) / x^n.
    """
    if spec.lambda_L == 0.0:
        return 0.0
    v = spec.lambda_L * float(spec.profile(r))
    n = spec.n
    return v * (1.0 / (2.0 * k * (n - 1) * r ** (n - 1)) + math.sin(2.0 * (k * r + delta)) / (4.0 * k * k * r**n))


def _asymptotic_phase(spec: PotentialSpec, state: BoundaryState, k: float) -> float:
    d = _raw_phase(state, k)
    return d + _tail_phase(spec, k, state.x, d)


def phase_shift(
    spec: PotentialSpec,
    ct: Counterterm,
    k: float,
    tol: Tolerances = DEFAULT_TOL,
) -> PhasePoint:
    """S-wave phase shift from u ~ sin(k x + delta) at large x."""
    if not k > 0:
        raise DomainError("phase shifts need k > 0")
    ep = EnergyPoint.scattering(k)
    r1 = extraction_radius(spec, k)
    r2 = 1.25 * r1
    q = q_function(spec, ep)
    start = interior_state(ct, ep)
    g1 = step_grid(ct.R, r1, q, tol.points_per_wavelength)
    u1, du1 = propagate(g1, q, start.u, start.du)
    g2 = step_grid(r1, r2, q, tol.points_per_wavelength)
    u2, du2 = propagate(g2, q, u1, du1)
    d1 = _asymptotic_phase(spec, BoundaryState(r1, u1, du1), k)
    d2 = _asymptotic_phase(spec, BoundaryState(r2, u2, du2), k)
    stability = abs(reduce_angle(d1 - d2))
    if stability > tol.phase_tol:
        raise ExtractionError(
            f"phase at k={k} moved by {stability:.3g} between r={r1:.4g} and {r2:.4g}"
        )
    delta = reduce_angle(d1)
    return PhasePoint(k, delta, delta, r1, stability, ir_sensitive=spec.n <= 3)


def phase_shifts(
    spec: PotentialSpec,
    ct: Counterterm,
    ks: Iterable[float],
    tol: Tolerances = DEFAULT_TOL,
) -> list[PhasePoint]:
    """Phase shifts on a k grid; ``delta_unwrapped`` is continuous along the grid."""
    pts = [phase_shift(spec, ct, k, tol) for k in ks]
    if not pts:
        return []
    unwrapped = np.unwrap([p.delta for p in pts], period=math.pi)
    return [
        PhasePoint(p.k, p.delta, float(w), p.r_extract, p.stability, p.ir_sensitive)
        for p, w in zip(pts, unwrapped)
    ]


# -- zero-energy intercept ------------------------------------------------------


def _far_basis(spec: PotentialSpec, x: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Zero-energy solutions ~x and ~1 at large x, through second Born order."""
    n, lam = spec.n, spec.lambda_L
    # v1 = x - c1 x^{3-n} + d1 x^{5-2n},  v2 = 1 - c2 x^{2-n} + d2 x^{4-2n}
    c1 = lam / ((n - 3) * (n - 2))
    d1 = lam * c1 / ((5 - 2 * n) * (4 - 2 * n))
    c2 = lam / ((n - 2) * (n - 1))
    d2 = lam * c2 / ((4 - 2 * n) * (3 - 2 * n))
    v1 = x - c1 * x ** (3 - n) + d1 * x ** (5 - 2 * n)
    dv1 = 1.0 - c1 * (3 - n) * x ** (2 - n) + d1 * (5 - 2 * n) * x ** (4 - 2 * n)
    v2 = 1.0 - c2 * x ** (2 - n) + d2 * x ** (4 - 2 * n)
    dv2 = -c2 * (2 - n) * x ** (1 - n) + d2 * (4 - 2 * n) * x ** (3 - 2 * n)
    return (v1, dv1), (v2, dv2)


def _intercept(spec: PotentialSpec, s: BoundaryState) -> float:
    (v1, dv1), (v2, dv2) = _far_basis(spec, s.x)
    # u = C (v1 - a v2):  a = W(u, v1) / W(u, v2)
    return (s.u * dv1 - s.du * v1) / (s.u * dv2 - s.du * v2)


def scattering_length_numeric(
    spec: PotentialSpec,
    ct: Counterterm,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """Intercept a of the zero-energy solution u ~ C (x - a)."""
    if spec.n <= 3:
        raise DomainError("scattering lengths need n >= 4 (the tail is infrared-divergent)")
    ep = EnergyPoint.scattering(0.0)
    x1 = 50.0 * max(1.0, spec.lambda_L ** (1.0 / (spec.n - 2)), ct.R)
    x2 = 2.0 * x1
    path = exterior_path(spec, interior_state(ct, ep), ep, x2, tol, checkpoints=(x1,))
    i1 = int(np.searchsorted(path.x, x1))
    a1 = _intercept(spec, path.state(i1))
    a2 = _intercept(spec, path.state(-1))
    if abs(a1 - a2) > 1e-6 * max(1.0, abs(a2)):
        raise ExtractionError(f"scattering length not converged: {a1} vs {a2}")
    return a2


# -- bound states -----------------------------------------------------------------


def _decaying_state(spec: PotentialSpec, kappa: float, x_match: float, tol: Tolerances) -> BoundaryState:
    """Solution decaying at infinity, integrated inward to x_match."""
    ep = EnergyPoint.bound(kappa)
    q = q_function(spec, ep)
    x_far = x_match + 25.0 / kappa
    # local WKB decay rate as starting log-derivative
    loc = math.sqrt(max(-float(q(np.array(x_far))), 1e-300))
    # integrate in the reflected variable y = -x so the grid routine can be reused
    q_ref = lambda y: q(-y)  # noqa: E731
    xs = -step_grid(x_match, x_far, q, tol.points_per_wavelength)[::-1]
    u, du = propagate(xs, q_ref, 1.0, loc)  # d/dy = -d/dx
    return BoundaryState(x_match, u, -du)


def _bound_mismatch(spec, ct, kappa, tol, keep_path=False):
    ep = EnergyPoint.bound(kappa)
    x_match = max(10.0 / kappa, 5.0, 2.0 * ct.R)
    start = interior_state(ct, ep)
    out = exterior_path(spec, start, ep, x_match, tol) if keep_path else None
    end = out.state(-1) if keep_path else integrate_exterior(spec, start, ep, x_match, tol)
    inner = _decaying_state(spec, kappa, x_match, tol)
    scale = math.hypot(end.u, end.du / kappa) * math.hypot(inner.u, inner.du / kappa)
    w = (end.u * inner.du - end.du * inner.u) / (kappa * scale)
    return (w, out) if keep_path else w


def _node_count(spec, ct, kappa, tol) -> int:
    _, path = _bound_mismatch(spec, ct, kappa, tol, keep_path=True)
    q_in = math.sqrt(ct.lambda_S - kappa**2)
    interior = int(math.floor(q_in * ct.R / math.pi - 1e-12))
    # drop the tail beyond the last true node: past the turning point the
    # outward solution has at most one spurious sign change from the growing
    # component, which the matching removes at an eigenvalue.
    x_turn = math.sqrt(spec.lambda_L) / kappa if spec.lambda_L > 0 else 0.0
    keep = path.x <= max(x_turn, ct.R) * 1.5
    s = np.sign(path.u[keep])
    s = s[s != 0]
    return interior + int(np.count_nonzero(s[1:] != s[:-1]))


def bound_states_shooting(
    spec: PotentialSpec,
    ct: Counterterm,
    kappa_window: tuple[float, float],
    tol: Tolerances = DEFAULT_TOL,
    points_per_cycle: int = 20,
) -> list[BoundStateResult]:
    """All bound states with kappa inside the window, deepest first.

    Roots of the Wronskian between the outward (regular) and inward (decaying)
    solutions are bracketed on a log-spaced kappa grid.
    """
    kmin, kmax = kappa_window
    if not 0 < kmin < kmax:
        raise DomainError("need 0 < kappa_min < kappa_max")
    if kmax**2 >= ct.lambda_S:
        raise DomainError("kappa_max**2 must stay below lambda_S")
    if spec.n == 2:
        cycle = math.pi / math.sqrt(spec.lambda_L - 0.25)
    else:
        cycle = 1.0
    npts = max(points_per_cycle, int(math.ceil(points_per_cycle * math.log(kmax / kmin) / cycle)) + 1)
    grid = np.geomspace(kmin, kmax, npts)
    vals = [_bound_mismatch(spec, ct, float(kp), tol) for kp in grid]
    roots = []
    for i in range(npts - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            r = brentq(
                lambda kp: _bound_mismatch(spec, ct, kp, tol),
                grid[i],
                grid[i + 1],
                xtol=1e-300,
                rtol=1e-13,
            )
            roots.append(float(r))
    roots.sort(reverse=True)
    out = [BoundStateResult(_node_count(spec, ct, r, tol), r) for r in roots]
    for a, b in zip(out, out[1:]):
        if b.m != a.m + 1:
            raise ResolutionError(
                f"node counts jump from {a.m} to {b.m} between kappa={a.kappa:.4g} and {b.kappa:.4g}"
            )
    return out
