"""Counterterm tuning and the running coupling H(R) = sqrt(lambda_S) R.

The zero-energy matching condition sqrt(lambda_S) cot(sqrt(lambda_S) R) = L(R),
with L the exterior log-derivative, reads H cot H = y with y = R L(R).  It is
solved here in the pole-free form

    u(R) H cos H - R u'(R) sin H = 0,

which stays smooth when R sits on a node of the exterior solution (y = +-inf).
On branch m >= 1 the left side changes sign between m pi and (m+1) pi for any
y, so the root always exists; branch 0 needs y < 1.

Closed forms in terms of y:

* A, near a branch edge (|y| large):   H = m pi (1 - 1 / (1 - y))
* B, near H = (m + 1/2) pi (|y| small): H = (m + 1/2) pi - y / ((m + 1/2) pi)

For y > 0 the root approaches m pi from above and A is expanded about m pi; for
y < 0 it approaches (m+1) pi from below and A uses m + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .core import (
    BranchInfeasibleError,
    Counterterm,
    DomainError,
    PoleError,
    PotentialSpec,
)
from .zero_energy import ZeroEnergyPhase, exterior_log_derivative, exterior_nodes, zero_energy_wavefunction

VALIDITY_THRESHOLD = 5.0


class Source(str, Enum):
    NUMERIC = "NumericRoot"
    FORMULA_A = "BranchFormulaA"
    FORMULA_B = "BranchFormulaB"


@dataclass(frozen=True)
class FlowPoint:
    R: float
    lambda_S: float
    H: float
    branch: int
    source: Source = Source.NUMERIC
    indicator: float = math.nan  # |R L(R)|
    valid: bool = True


@dataclass(frozen=True)
class FixedBranch:
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise DomainError("branch index must be >= 0")


@dataclass(frozen=True)
class FixedBoundStateCount:
    """Drop one branch each time R moves down through an exterior node.

    ``m_top`` is the branch used at the largest R of a trace; by default it is
    one more than the number of nodes in the range, so the branch never
    falls below 1 (where a root always exists).
    """

    m_top: int | None = None


Policy = FixedBranch | FixedBoundStateCount


@dataclass(frozen=True)
class FlowTrace:
    points: list[FlowPoint]
    policy: Policy
    pole_locations: list[float]
    formula_A: list[FlowPoint] = field(default_factory=list)
    formula_B: list[FlowPoint] = field(default_factory=list)
    gaps: list[float] = field(default_factory=list)

    @property
    def R(self) -> np.ndarray:
        return np.array([p.R for p in self.points])

    @property
    def H(self) -> np.ndarray:
        return np.array([p.H for p in self.points])


# -- matching ------------------------------------------------------------------------


def matching_rhs(spec: PotentialSpec, phase: ZeroEnergyPhase, R: float) -> float:
    """Exterior zero-energy log-derivative at the cutoff."""
    if not R > 0:
        raise DomainError("cutoff must be positive")
    return exterior_log_derivative(spec, phase, R)


def _scaled_rhs(spec, phase, R) -> float:
    """y = R L(R); +-inf at a node."""
    u, du = zero_energy_wavefunction(spec, phase, R)
    if u == 0.0:
        return math.copysign(math.inf, du)
    return R * du / u


def minimal_branch(y: float) -> int:
    return 0 if y < 1.0 else 1


def solve_branch(u: float, Rdu: float, m: int) -> float:
    """Root H in [m pi, (m+1) pi) of u H cos H - Rdu sin H = 0."""

    def g(H):
        return u * H * math.cos(H) - Rdu * math.sin(H)

    lo, hi = m * math.pi, (m + 1) * math.pi
    scale = abs(u) + abs(Rdu)
    if abs(u) <= 1e-15 * scale:
        if m == 0:
            raise BranchInfeasibleError("cutoff on an exterior node: branch 0 has no root")
        return lo
    if m == 0:
        if Rdu / u >= 1.0:
            raise BranchInfeasibleError(f"branch 0 needs R L(R) < 1, got {Rdu / u:.6g}")
        lo = 1e-12
        if g(lo) * g(hi) > 0:
            raise BranchInfeasibleError("branch-0 root lies below the bracket")
    return brentq(g, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200)


def tune_counterterm(
    spec: PotentialSpec,
    phase: ZeroEnergyPhase,
    R: float,
    m: int | None = None,
) -> Counterterm:
    """Depth lambda_S on branch m matching the exterior phase at R.

    ``m=None`` picks the lowest branch with a root.
    """
    if not R > 0:
        raise DomainError("cutoff must be positive")
    if m is not None and m < 0:
        raise DomainError("branch index must be >= 0")
    u, du = zero_energy_wavefunction(spec, phase, R)
    if m is None:
        m = 1 if u == 0.0 else minimal_branch(R * du / u)
    H = solve_branch(u, R * du, m)
    return Counterterm.from_H(R, H, branch=m)


# -- closed forms ------------------------------------------------------------------------


def _formula_A(y: float, m: int) -> tuple[float, int]:
    edge = m if y >= 0 else m + 1
    if math.isinf(y):
        return edge * math.pi, edge
    return edge * math.pi * (1.0 - 1.0 / (1.0 - y)), edge


def _formula_B(y: float, m: int) -> float:
    c = (m + 0.5) * math.pi
    return c - y / c


def branch_formula_A(
    spec: PotentialSpec, phase: ZeroEnergyPhase, R: float, m: int, threshold: float = VALIDITY_THRESHOLD
) -> FlowPoint:
    """Branch-edge expansion of the root on branch m, valid for |R L| large."""
    y = _scaled_rhs(spec, phase, R)
    H, _ = _formula_A(y, m)
    return FlowPoint(R, (H / R) ** 2, H, m, Source.FORMULA_A, abs(y), abs(y) > threshold)


def branch_formula_B(
    spec: PotentialSpec, phase: ZeroEnergyPhase, R: float, m: int, threshold: float = VALIDITY_THRESHOLD
) -> FlowPoint:
    """Expansion about the branch midpoint, valid for |R L| small."""
    y = _scaled_rhs(spec, phase, R)
    H = _formula_B(y, m) if math.isfinite(y) else math.nan
    return FlowPoint(R, (H / R) ** 2, H, m, Source.FORMULA_B, abs(y), abs(y) < threshold)


# -- flow tracing ----------------------------------------------------------------------------


def trace_flow(
    spec: PotentialSpec,
    phase: ZeroEnergyPhase,
    R_range: tuple[float, float],
    grid_points: int = 200,
    policy: Policy = FixedBranch(1),
    threshold: float = VALIDITY_THRESHOLD,
) -> FlowTrace:
    """Numeric root and both closed forms on a log-spaced R grid (ascending)."""
    r_lo, r_hi = map(float, R_range)
    if not 0 < r_lo <= r_hi:
        raise DomainError("need 0 < R_min <= R_max")
    if r_lo == r_hi:
        grid = np.array([r_lo])
    else:
        if grid_points < 2:
            raise DomainError("grid_points must be >= 2 for a range")
        grid = np.geomspace(r_lo, r_hi, grid_points)
    poles = exterior_nodes(spec, phase, r_lo, r_hi) if r_lo < r_hi else []
    if isinstance(policy, FixedBoundStateCount):
        m_top = policy.m_top if policy.m_top is not None else len(poles) + 1
    pts, fa, fb, gaps = [], [], [], []
    for R in grid:
        R = float(R)
        if isinstance(policy, FixedBranch):
            m = policy.m
        else:
            m = m_top - sum(1 for p in poles if p > R)
        u, du = zero_energy_wavefunction(spec, phase, R)
        y = R * du / u if u != 0.0 else math.copysign(math.inf, du)
        try:
            if m < 0:
                raise BranchInfeasibleError("branch index fell below 0")
            H = solve_branch(u, R * du, m)
        except BranchInfeasibleError:
            gaps.append(R)
            continue
        pts.append(FlowPoint(R, (H / R) ** 2, H, m, Source.NUMERIC, abs(y), True))
        Ha, _ = _formula_A(y, m)
        Hb = _formula_B(y, m) if math.isfinite(y) else math.nan
        fa.append(FlowPoint(R, (Ha / R) ** 2, Ha, m, Source.FORMULA_A, abs(y), abs(y) > threshold))
        fb.append(FlowPoint(R, (Hb / R) ** 2, Hb, m, Source.FORMULA_B, abs(y), abs(y) < threshold))
    return FlowTrace(pts, policy, poles, fa, fb, gaps)


def near_pole(spec: PotentialSpec, phase: ZeroEnergyPhase, R: float, rel: float = 1e-3) -> bool:
    """True when R lies within a relative distance ``rel`` of an exterior node."""
    try:
        exterior_log_derivative(spec, phase, R)
    except PoleError:
        return True
    nodes = exterior_nodes(spec, phase, R * (1 - rel), R * (1 + rel))
    return bool(nodes)
