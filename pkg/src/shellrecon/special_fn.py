r"""Modified Bessel functions of integer and half-integer order.

All values are built from a single internal representation that never
overflows: for an order :math:`\nu` and argument :math:`x`

.. math::
    I_\nu(x) = m_I\,2^{e_I}\,e^{x}, \qquad K_\nu(x) = m_K\,2^{e_K}\,e^{-x},

together with the logarithmic derivatives :math:`I_\nu'/I_\nu` and
:math:`K_\nu'/K_\nu`. Ratios of Bessel values (the only thing the ND symbols
need) are formed from this representation with the exponential factors
cancelled analytically, so orders in the hundreds are fine at any argument.

Algorithms
----------
* :math:`I_{\nu+1}/I_\nu` by the continued fraction (modified Lentz) for
  moderate ``x`` and by the Hankel expansion once ``x >= max(500, nu**2)``;
  lower ratios by backward recurrence.
* Integer-order :math:`I_0` normalised by :math:`e^x = I_0 + 2\sum_k I_k`
  (Miller); half-integer orders seeded by :math:`\sqrt{2/(\pi x)}\sinh x`.
* :math:`K_0, K_1` by power series for ``x <= 2`` and Steed's continued
  fraction beyond; :math:`K_{1/2}, K_{3/2}` in closed form. Higher orders by
  forward recurrence, which is stable for ``K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import BesselRangeError, DomainError

EULER_GAMMA = 0.57721566490153286060651209
_EPS = 2.220446049250313e-16
_TINY = 1e-300
_HANKEL_X = 500.0
_MAXITER = 200_000
_LN2 = math.log(2.0)


@dataclass(frozen=True, order=True)
class Order:
    """Bessel order: ``n`` (integer) or ``n + 1/2`` (half-integer)."""

    n: int
    half: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"order index must be non-negative, got {self.n}")

    @property
    def nu(self) -> float:
        return self.n + 0.5 if self.half else float(self.n)

    @classmethod
    def integer(cls, n: int) -> "Order":
        return cls(abs(int(n)), False)

    @classmethod
    def half_integer(cls, n: int) -> "Order":
        return cls(int(n), True)

    @classmethod
    def for_mode(cls, n: int, dimension: int) -> "Order":
        """Order used by mode ``n`` in the given dimension (``|n|`` in 2-D)."""
        if dimension == 2:
            return cls(abs(int(n)), False)
        if dimension == 3:
            return cls(int(n), True)
        raise DomainError(f"dimension must be 2 or 3, got {dimension}")

    def __str__(self):
        return f"{self.n}+1/2" if self.half else str(self.n)


@dataclass(frozen=True)
class BesselPair:
    """Values and derivatives of ``I_nu`` and ``K_nu`` at one point.

    With ``scale == "exp_scaled"`` the ``i_*`` fields carry a factor
    ``exp(-x)`` and the ``k_*`` fields a factor ``exp(x)``.
    """

    i_val: float
    i_deriv: float
    k_val: float
    k_deriv: float
    scale: str = "unscaled"


class IKScaled(NamedTuple):
    """Overflow-free representation of ``I_nu(x)``, ``K_nu(x)``.

    ``I_nu(x) = i_mant * 2**i_exp * exp(x)`` and
    ``K_nu(x) = k_mant * 2**k_exp * exp(-x)``.
    """

    i_mant: float
    i_exp: int
    k_mant: float
    k_exp: int
    i_logderiv: float
    k_logderiv: float


# --- mantissa/exponent helpers -------------------------------------------

def _bf_prod(m: float, e: int, factors) -> tuple[float, int]:
    for f in factors:
        m *= f
        if not 1e-150 < m < 1e150:
            m, de = math.frexp(m)
            e += de
    m, de = math.frexp(m)
    return m, e + de


def bf_to_float(m: float, e: int, exp_arg: float = 0.0, underflow_ok: bool = False) -> float:
    """Evaluate ``m * 2**e * exp(exp_arg)``.

    Raises :class:`BesselRangeError` on overflow, and on underflow unless
    ``underflow_ok`` (then the result may be subnormal or zero).
    """
    if m == 0.0:
        return 0.0
    f, de = math.frexp(m)
    e += de
    if abs(exp_arg) <= 700.0:
        y = f * math.exp(exp_arg)
    else:
        k = round(exp_arg / _LN2)
        y = f * math.exp(exp_arg - k * _LN2)
        e += k
    try:
        out = math.ldexp(y, e)
    except OverflowError:
        raise BesselRangeError("value overflows a float; use the scaled form") from None
    if underflow_ok or (out != 0.0 and abs(out) >= 2.2250738585072014e-308):
        return out
    raise BesselRangeError("value underflows a float; use the scaled form")


# --- I ratio ---------------------------------------------------------------

def _check_x(x: float) -> float:
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"argument must be a positive finite real, got {x}")
    return x


def _hankel_series(nu: float, x: float, sign: float) -> float:
    """sum_k sign**k a_k(nu) / x**k, truncated at the smallest term."""
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, 400):
        term *= sign * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if term == 0.0:
            break
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-18 * abs(total):
            break
    return total


def _ratio_i_cf(nu: float, x: float) -> float:
    # I_{nu+1}/I_nu = 1/(b1 + 1/(b2 + ...)), b_k = 2(nu+k)/x
    f = _TINY
    c = f
    d = 0.0
    for k in range(1, _MAXITER):
        b = 2.0 * (nu + k) / x
        d = 1.0 / (b + d)
        c = b + 1.0 / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) <= _EPS:
            return f
    raise ArithmeticError(f"continued fraction for I ratio failed (nu={nu}, x={x})")


def _use_hankel(nu: float, x: float) -> bool:
    return x >= max(_HANKEL_X, nu * nu)


@lru_cache(maxsize=1 << 16)
def _ratio_i(nu: float, x: float) -> float:
    if _use_hankel(nu + 1.0, x):
        return _hankel_series(nu + 1.0, x, -1.0) / _hankel_series(nu, x, -1.0)
    return _ratio_i_cf(nu, x)


def _i_ratio_chain(nu0: float, top: int, x: float) -> list[float]:
    """[I_{nu0+j+1}/I_{nu0+j} for j = 0..top] by backward recurrence."""
    ratios = [0.0] * (top + 1)
    r = _ratio_i(nu0 + top, x)
    ratios[top] = r
    for j in range(top, 0, -1):
        r = 1.0 / (2.0 * (nu0 + j) / x + r)
        ratios[j - 1] = r
    return ratios


# --- K seeds -----------------------------------------------------------------

def _k01_series(x: float) -> tuple[float, float]:
    """Unscaled K_0(x), K_1(x) by the ascending series (x <= 2)."""
    y = 0.25 * x * x
    lnterm = math.log(0.5 * x)
    # K_0
    term = 1.0
    i0 = 1.0
    s0 = 0.0
    harm = 0.0
    k = 0
    while True:
        k += 1
        term *= y / (k * k)
        harm += 1.0 / k
        i0 += term
        s0 += harm * term
        if term < _EPS * 1e-2 * i0:
            break
    k0 = -(lnterm + EULER_GAMMA) * i0 + s0
    # K_1
    term = 1.0
    si = 1.0
    h_k = 0.0
    sp = 1.0 - 2.0 * EULER_GAMMA
    k = 0
    while True:
        k += 1
        term *= y / (k * (k + 1))
        h_k += 1.0 / k
        si += term
        sp += (h_k + h_k + 1.0 / (k + 1) - 2.0 * EULER_GAMMA) * term
        if term < _EPS * 1e-2 * si:
            break
    i1 = 0.5 * x * si
    k1 = 1.0 / x + lnterm * i1 - 0.25 * x * sp
    return k0, k1


def _k01_steed(x: float) -> tuple[float, float]:
    """Scaled K_0, and the ratio K_1/K_0, by Steed's method (x > 2)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS * 0.5:
            break
    h *= a1
    k0s = math.sqrt(math.pi / (2.0 * x)) / s
    return k0s, (x + 0.5 - h) / x


def _k_seeds(half: bool, x: float) -> tuple[float, float]:
    """Scaled K_{nu0}(x) and K_{nu0+1}/K_{nu0} for nu0 in {0, 1/2}."""
    if half:
        return math.sqrt(math.pi / (2.0 * x)), 1.0 + 1.0 / x
    if x <= 2.0:
        k0, k1 = _k01_series(x)
        return k0 * math.exp(x), k1 / k0
    return _k01_steed(x)


# --- core evaluation ---------------------------------------------------------

def _scaled_i0(x: float, ratios: list[float]) -> float:
    """exp(-x) I_0(x), given enough I ratios for the Miller sum."""
    if x >= _HANKEL_X:
        return _hankel_series(0.0, x, -1.0) / math.sqrt(2.0 * math.pi * x)
    total = 0.0
    p = 1.0
    for r in ratios:
        p *= r
        if p < 1e-300:
            break
        total += p
    return 1.0 / (1.0 + 2.0 * total)


@lru_cache(maxsize=1 << 16)
def _ik(n: int, half: bool, x: float) -> IKScaled:
    nu0 = 0.5 if half else 0.0
    nu = nu0 + n
    top = n
    if not half and x < _HANKEL_X:
        top = max(n, int(x + 12.0 * math.sqrt(x) + 30.0))
    ratios = _i_ratio_chain(nu0, top, x)
    if half:
        i_seed = math.sqrt(2.0 / (math.pi * x)) * (-math.expm1(-2.0 * x)) * 0.5
    else:
        i_seed = _scaled_i0(x, ratios)
    i_mant, i_exp = _bf_prod(i_seed, 0, ratios[:n])
    i_logderiv = nu / x + ratios[n]

    k_seed, s = _k_seeds(half, x)
    k_ratios = [s]
    for j in range(1, n + 1):
        s = 1.0 / s + 2.0 * (nu0 + j) / x
        k_ratios.append(s)
    k_mant, k_exp = _bf_prod(k_seed, 0, k_ratios[:n])
    if n == 0:
        below = k_ratios[0] if not half else 1.0  # K_{-nu} = K_nu
    else:
        below = 1.0 / k_ratios[n - 1]
    k_logderiv = -0.5 * (below + k_ratios[n])
    return IKScaled(i_mant, i_exp, k_mant, k_exp, i_logderiv, k_logderiv)


def ik_scaled(order: Order, x: float) -> IKScaled:
    """Overflow-free ``I_nu(x)``, ``K_nu(x)`` and their log-derivatives."""
    return _ik(order.n, order.half, _check_x(x))


# --- public API --------------------------------------------------------------

def bessel_i(order: Order, x: float, scaled: bool = False) -> tuple[float, float]:
    """Return ``(I_nu(x), I_nu'(x))``.

    With ``scaled=True`` both are multiplied by ``exp(-x)``.

    Raises
    ------
    DomainError
        If ``x <= 0``.
    BesselRangeError
        If the requested value is not representable as a float.
    """
    p = ik_scaled(order, x)
    val = bf_to_float(p.i_mant, p.i_exp, 0.0 if scaled else x)
    return val, val * p.i_logderiv


def bessel_k(order: Order, x: float, scaled: bool = False) -> tuple[float, float]:
    """Return ``(K_nu(x), K_nu'(x))``; ``scaled=True`` multiplies by ``exp(x)``."""
    p = ik_scaled(order, x)
    val = bf_to_float(p.k_mant, p.k_exp, 0.0 if scaled else -x)
    return val, val * p.k_logderiv


def bessel_pair(order: Order, x: float, scaled: bool = False) -> BesselPair:
    i, di = bessel_i(order, x, scaled)
    k, dk = bessel_k(order, x, scaled)
    return BesselPair(i, di, k, dk, "exp_scaled" if scaled else "unscaled")


def bessel_ratio_i(order: Order, x: float) -> float:
    """``I_{nu+1}(x) / I_nu(x)``, computed without forming either value."""
    return _ratio_i(order.nu, _check_x(x))


def logderiv_i(order: Order, x: float) -> float:
    """``I_nu'(x) / I_nu(x) = nu/x + I_{nu+1}(x)/I_nu(x)``."""
    x = _check_x(x)
    return order.nu / x + _ratio_i(order.nu, x)


def logderiv_k(order: Order, x: float) -> float:
    """``K_nu'(x) / K_nu(x)``."""
    return ik_scaled(order, x).k_logderiv


def quotient(order: Order, num: list[tuple[str, float]], den: list[tuple[str, float]]) -> float:
    """Product of Bessel values over another, exponentials cancelled first.

    ``num`` and ``den`` hold ``("i", x)`` or ``("k", x)`` factors, e.g.
    ``quotient(o, [("i", r), ("k", 1)], [("k", r), ("i", 1)])`` gives
    ``I(r)K(1) / (K(r)I(1))``. Results below the float range flush to zero.
    """
    m, e, arg = 1.0, 0, 0.0
    for sign, factors in ((1, num), (-1, den)):
        for kind, x in factors:
            p = ik_scaled(order, x)
            if kind == "i":
                fm, fe, farg = p.i_mant, p.i_exp, x
            elif kind == "k":
                fm, fe, farg = p.k_mant, p.k_exp, -x
            else:
                raise ValueError(f"unknown factor kind {kind!r}")
            if sign > 0:
                m *= fm
                e += fe
            else:
                m /= fm
                e -= fe
            arg += sign * farg
            m, de = math.frexp(m)
            e += de
    return bf_to_float(m, e, arg, underflow_ok=True)


def assoc_legendre(n: int, m: int, mu: float) -> float:
    """Associated Legendre function ``P_n^{|m|}(mu)`` with the Condon-Shortley phase.

    Uses the upward recurrence in ``n`` from ``P_{|m|}^{|m|}``.
    """
    am = abs(int(m))
    if n < 0 or am > n:
        raise IndexError(f"need 0 <= |m| <= n, got n={n}, m={m}")
    if not -1.0 <= mu <= 1.0:
        raise DomainError(f"mu must lie in [-1, 1], got {mu}")
    pmm = 1.0
    if am > 0:
        somx2 = math.sqrt((1.0 - mu) * (1.0 + mu))
        fact = 1.0
        for _ in range(am):
            pmm *= -fact * somx2
            fact += 2.0
    if n == am:
        return pmm
    pmmp1 = mu * (2 * am + 1) * pmm
    if n == am + 1:
        return pmmp1
    for ll in range(am + 2, n + 1):
        pll = (mu * (2 * ll - 1) * pmmp1 - (ll + am - 1) * pmm) / (ll - am)
        pmm, pmmp1 = pmmp1, pll
    return pmmp1


def legendre_norm_sq(n: int, m: int) -> float:
    """``int_{-1}^{1} (P_n^{|m|})^2 dmu = 2/(2n+1) (n+|m|)!/(n-|m|)!``."""
    am = abs(m)
    return 2.0 / (2 * n + 1) * math.exp(math.lgamma(n + am + 1) - math.lgamma(n - am + 1))
