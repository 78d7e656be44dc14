"""Bessel functions of real order and log-gamma at complex argument.

Only what the zero-energy solutions and the inverse-square spectrum need:

* ``bessel_j`` -- J_nu(z) and its derivative for |nu| <= 5, z >= 0.  The
  ascending series is summed in 40-digit decimal arithmetic for z <= 20
  (the alternating terms cancel by ~8 digits near the switchover), and
  Hankel's large-argument expansion is used above.
* ``bessel_y1`` -- Y_1, needed only for n = 3 where J_{+1} and J_{-1} are
  linearly dependent.
* ``log_gamma`` -- complex Lanczos approximation (g = 7, 9 terms).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

from .core import DomainError

SWITCHOVER = 20.0
_MAX_ORDER = 5.0
_SERIES_PREC = 40


@dataclass(frozen=True)
class BesselEval:
    order: float
    argument: float
    value: float
    derivative_value: float
    divergent: bool = False

    def __iter__(self):
        yield self.value
        yield self.derivative_value


def _is_integer(v: float) -> bool:
    return abs(v - round(v)) < 1e-14


def _series_j(order: float, z: float) -> tuple[float, float]:
    """Ascending series; returns (J, z*J') to avoid a 1/z at the end."""
    # sum_k c_k w^k with c_0 = 1, w = -(z/2)^2, c_{k+1} = c_k / ((k+1)(k+1+order))
    with localcontext() as ctx:
        ctx.prec = _SERIES_PREC
        w = -(Decimal(z) / 2) ** 2
        nu = Decimal(order)
        term = Decimal(1)
        s0 = Decimal(0)
        s1 = Decimal(0)
        eps = Decimal(10) ** (-(_SERIES_PREC - 5))
        k = 0
        while True:
            s0 += term
            s1 += (2 * k + nu) * term
            k += 1
            term = term * w / (k * (k + nu))
            if k > 4 and abs(term) * (1 + 2 * k) < eps * (abs(s0) + abs(s1) + eps):
                break
            if k > 500:
                break
        f0, f1 = float(s0), float(s1)
    pref = (0.5 * z) ** order / math.gamma(order + 1.0) if z > 0 else (1.0 if order == 0 else 0.0)
    return pref * f0, pref * f1


def _hankel_pq(order: float, z: float) -> tuple[float, float]:
    mu = 4.0 * order * order
    p = 0.0
    q = 0.0
    term = 1.0
    k = 0
    last = math.inf
    while k < 200:
        mag = abs(term)
        if mag > last and k > 2:
            break
        last = mag
        if k % 4 == 0:
            p += term
        elif k % 4 == 1:
            q += term
        elif k % 4 == 2:
            p -= term
        else:
            q -= term
        if mag < 1e-17 * (abs(p) + abs(q)) and k > 2:
            break
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
    return p, q


def _asymptotic_j(order: float, z: float) -> float:
    p, q = _hankel_pq(order, z)
    chi = z - (0.5 * order + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (p * math.cos(chi) - q * math.sin(chi))


def _asymptotic_y(order: float, z: float) -> float:
    p, q = _hankel_pq(order, z)
    chi = z - (0.5 * order + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (p * math.sin(chi) + q * math.cos(chi))


def _bessel_eval(order: float, z: float) -> BesselEval:
    if order < 0 and _is_integer(order):
        m = int(round(-order))
        base = _bessel_eval(float(m), z)
        sign = -1.0 if m % 2 else 1.0
        return BesselEval(order, z, sign * base.value, sign * base.derivative_value)
    if z == 0.0:
        if order == 0:
            return BesselEval(order, z, 1.0, 0.0)
        if order > 0:
            if order > 1:
                d = 0.0
            elif order == 1:
                d = 0.5
            else:
                d = math.inf
            return BesselEval(order, z, 0.0, d)
        # negative non-integer order: J ~ (z/2)^order / Gamma(order + 1)
        sign = math.copysign(1.0, math.gamma(order + 1.0))
        return BesselEval(order, z, sign * math.inf, -sign * math.inf, divergent=True)
    if z <= SWITCHOVER:
        j, zdj = _series_j(order, z)
        return BesselEval(order, z, j, zdj / z)
    j = _asymptotic_j(order, z)
    j1 = _asymptotic_j(order + 1.0, z)
    return BesselEval(order, z, j, order / z * j - j1)


def bessel_eval(order: float, z: float) -> BesselEval:
    if z < 0 or not math.isfinite(z):
        raise DomainError(f"bessel_j needs a finite z >= 0, got {z}")
    if abs(order) > _MAX_ORDER:
        raise DomainError(f"|order| must be <= {_MAX_ORDER}")
    return _bessel_eval(float(order), float(z))


def bessel_j(order: float, z: float) -> tuple[float, float]:
    """J_order(z) and dJ/dz.

    At z = 0 with negative non-integer order the value diverges; the pair is
    returned as signed infinities (``bessel_eval`` flags it explicitly).
    """
    ev = bessel_eval(order, z)
    return ev.value, ev.derivative_value


_EULER_GAMMA = Decimal("0.5772156649015328606065120900824024310422")


def bessel_y1(z: float) -> tuple[float, float]:
    """Y_1(z) and its derivative for z > 0."""
    if not z > 0:
        raise DomainError("bessel_y1 needs z > 0")
    if z > SWITCHOVER:
        y = _asymptotic_y(1.0, z)
        y2 = _asymptotic_y(2.0, z)
        return y, y / z - y2
    # Y_1 = (2/pi) J_1 ln(z/2) - 2/(pi z)
    #       - (1/pi) sum_k (-1)^k (psi(k+1) + psi(k+2)) (z/2)^(2k+1) / (k! (k+1)!)
    with localcontext() as ctx:
        ctx.prec = _SERIES_PREC
        h = Decimal(z) / 2
        w = -(h * h)
        term = h  # (z/2)^(2k+1) (-1)^k / (k!(k+1)!) at k = 0
        s = Decimal(0)
        ds = Decimal(0)  # derivative of the sum with respect to z
        eps = Decimal(10) ** (-(_SERIES_PREC - 5))
        # psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        harmonic = Decimal(0)
        k = 0
        while True:
            coef = -2 * _EULER_GAMMA + 2 * harmonic + Decimal(1) / (k + 1)
            s += coef * term
            ds += coef * term * (2 * k + 1) / Decimal(z)
            k += 1
            harmonic += Decimal(1) / k
            term = term * w / (k * (k + 1))
            if k > 4 and abs(term) * (2 * k + 2) < eps:
                break
            if k > 500:
                break
        fs, fds = float(s), float(ds)
    j1, dj1 = bessel_j(1.0, z)
    lg = math.log(0.5 * z)
    y = (2.0 / math.pi) * j1 * lg - 2.0 / (math.pi * z) - fs / math.pi
    dy = (2.0 / math.pi) * (dj1 * lg + j1 / z) + 2.0 / (math.pi * z * z) - fds / math.pi
    return y, dy


# -- log gamma ----------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z) for Re z >= 1/2.

    The branch is the analytic continuation from the positive real axis, so
    Im log Gamma(1 + i nu) grows without bound instead of wrapping at pi.
    """
    z = complex(z)
    if z.real < 0.5:
        raise DomainError("log_gamma is implemented for Re z >= 1/2")
    zm = z - 1.0
    a = _LANCZOS_P[0]
    for k in range(1, len(_LANCZOS_P)):
        a += _LANCZOS_P[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * cmath.log(t) - t + cmath.log(a)


def im_log_gamma_one_plus_i(nu: float) -> float:
    """Im log Gamma(1 + i nu), the phase entering the inverse-square spectrum."""
    if nu < 0:
        raise DomainError("nu must be non-negative")
    return log_gamma(complex(1.0, nu)).imag
