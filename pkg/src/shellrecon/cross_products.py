"""Bessel cross-products ``D(x, y) = I(x)K(y) - K(x)I(y)`` and derivatives.

Every quantity is a combination of ``A = I(x)K(y)`` and ``B = K(x)I(y)``
weighted by logarithmic derivatives, e.g.
``D_{1,0}(x, y) = A I'(x)/I(x) - B K'(x)/K(x)``. ``A`` and ``B`` are formed
with the ``exp(x - y)`` and ``exp(y - x)`` factors applied once, so large
arguments do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import special_fn as sf
from .errors import DomainError
from .special_fn import Order


@dataclass(frozen=True)
class CrossProductValues:
    d: float
    d10: float
    d01: float
    d11: float
    order: Order
    x: float
    y: float
    scale: float = 1.0  # values are the true cross-products divided by `scale`


def _check(*args):
    for a in args:
        if not a > 0.0 or not math.isfinite(a):
            raise DomainError(f"cross-product arguments must be positive, got {a}")


def _parts(order, x, y):
    px = sf.ik_scaled(order, x)
    py = sf.ik_scaled(order, y)
    a = (px.i_mant * py.k_mant, px.i_exp + py.k_exp, x - y)
    b = (px.k_mant * py.i_mant, px.k_exp + py.i_exp, y - x)
    return px, py, a, b


def _assemble(order, x, y, px, py, a, b, scale):
    li_x, lk_x = px.i_logderiv, px.k_logderiv
    li_y, lk_y = py.i_logderiv, py.k_logderiv
    return CrossProductValues(
        d=a - b,
        d10=li_x * a - lk_x * b,
        d01=lk_y * a - li_y * b,
        d11=li_x * lk_y * a - lk_x * li_y * b,
        order=order,
        x=x,
        y=y,
        scale=scale,
    )


def cross_products(order: Order, x: float, y: float) -> CrossProductValues:
    """``D``, ``D_{1,0}``, ``D_{0,1}``, ``D_{1,1}`` at ``(x, y)`` as plain floats."""
    _check(x, y)
    px, py, a, b = _parts(order, x, y)
    av = sf.bf_to_float(*a)
    bv = sf.bf_to_float(*b)
    return _assemble(order, x, y, px, py, av, bv, 1.0)


def cross_products_normalized(order: Order, x: float, y: float) -> CrossProductValues:
    """Cross-products divided by ``max(I(x)K(y), K(x)I(y))``.

    The common positive factor cancels in every homogeneous expression
    (symbol quotients, determinant signs), and the normalised values stay
    finite for any order. ``scale`` records the factor when it is
    representable, else ``inf``/``0``.
    """
    _check(x, y)
    px, py, a, b = _parts(order, x, y)
    # log2 magnitudes decide which term dominates
    la = math.log2(a[0]) + a[1] + a[2] / math.log(2.0)
    lb = math.log2(b[0]) + b[1] + b[2] / math.log(2.0)
    big, small = (a, b) if la >= lb else (b, a)
    rel = sf.bf_to_float(small[0] / big[0], small[1] - big[1], small[2] - big[2], underflow_ok=True)
    try:
        scale = sf.bf_to_float(*big, underflow_ok=True)
    except OverflowError:
        scale = math.inf
    av, bv = (1.0, rel) if big is a else (rel, 1.0)
    return _assemble(order, x, y, px, py, av, bv, scale)


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of the five cross-product identities.

    ``scales[i]`` is the largest magnitude among the terms of identity ``i``;
    ``relative`` divides each residual by it.
    """

    residuals: tuple[float, ...]
    scales: tuple[float, ...]

    @property
    def relative(self) -> tuple[float, ...]:
        return tuple(abs(r) / s if s > 0 else abs(r) for r, s in zip(self.residuals, self.scales))

    @property
    def worst(self) -> float:
        return max(self.relative)


def check_identities(order: Order, x: float, y: float, z: float) -> IdentityReport:
    """Evaluate the five algebraic identities linking ``D`` and its partials.

    1. ``D_{1,0}(x,x) = 1/x``
    2. ``D_{0,1}(x,y) = -D_{1,0}(y,x)``
    3. ``D(x,y)D_{1,0}(x,z) - D(x,z)D_{1,0}(x,y) = D(z,y)/x``
    4. ``D(x,y)D_{1,1}(x,z) - D_{0,1}(x,z)D_{1,0}(x,y) = D_{1,0}(z,y)/x``
    5. ``D_{1,1}(x,y)D_{0,1}(x,z) - D_{0,1}(x,y)D_{1,1}(x,z) = -D_{1,1}(z,y)/x``
    """
    _check(x, y, z)
    xx = cross_products(order, x, x)
    xy = cross_products(order, x, y)
    yx = cross_products(order, y, x)
    xz = cross_products(order, x, z)
    zy = cross_products(order, z, y)
    inv = 1.0 / x

    terms = [
        (xx.d10, -inv),
        (xy.d01, yx.d10),
        (xy.d * xz.d10, -xz.d * xy.d10, -inv * zy.d),
        (xy.d * xz.d11, -xz.d01 * xy.d10, -inv * zy.d10),
        (xy.d11 * xz.d01, -xy.d01 * xz.d11, inv * zy.d11),
    ]
    residuals = tuple(math.fsum(t) for t in terms)
    scales = tuple(max(abs(v) for v in t) for t in terms)
    return IdentityReport(residuals, scales)
