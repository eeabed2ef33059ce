r"""Per-mode Neumann-to-Dirichlet symbols of the core-shell model.

For mode ``n`` the ND map multiplies the Neumann coefficient by

.. math::
    \lambda_n = \frac{\rho K_\nu(1) - I_\nu(1)}{\rho K_\nu'(1) - I_\nu'(1)}
              = \frac{I_\nu(x_1) D_{0,1}(1,r_1) - \sigma_1 I_\nu'(x_1) D(1,r_1)}
                     {I_\nu(x_1) D_{1,1}(1,r_1) - \sigma_1 I_\nu'(x_1) D_{1,0}(1,r_1)},

with :math:`x_1 = r_1/\sqrt{\sigma_1}` and :math:`\nu = n` (2-D) or
:math:`n + 1/2` (3-D). The homogeneous disk/ball has
:math:`\lambda_n = I_\nu(1)/I_\nu'(1)`.

Both forms are evaluated after dividing through by a common positive factor,
leaving only logarithmic derivatives, the core impedance
:math:`t = \sigma_1 I_\nu'(x_1)/I_\nu(x_1)` and the coupling
:math:`c = I_\nu(r_1)K_\nu(1) / (K_\nu(r_1)I_\nu(1)) \in (0, 1)`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from . import special_fn as sf
from .cross_products import cross_products_normalized
from .errors import DomainError, NumericDegeneracyError, TruncationWarning
from .parallel import pmap
from .special_fn import Order

DEFAULT_NMAX = 64
NMAX_CAP = 512
_TAIL = 10


@dataclass(frozen=True)
class ShellConfig:
    """Core of radius ``r1`` and coefficient ``sigma1`` inside the unit disk/ball.

    The shell coefficient is fixed to 1.
    """

    dimension: int
    r1: float
    sigma1: float

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise DomainError(f"dimension must be 2 or 3, got {self.dimension}")
        if not 0.0 < self.r1 < 1.0:
            raise DomainError(f"r1 must lie in (0, 1), got {self.r1}")
        if not self.sigma1 > 0.0 or not math.isfinite(self.sigma1):
            raise DomainError(f"sigma1 must be positive, got {self.sigma1}")

    def order(self, n: int) -> Order:
        return Order.for_mode(n, self.dimension)

    @property
    def x1(self) -> float:
        return self.r1 / math.sqrt(self.sigma1)


@dataclass(frozen=True)
class NdSymbolTable:
    dimension: int
    n_max: int
    symbols: tuple[float, ...]

    def __getitem__(self, n: int) -> float:
        return self.symbols[abs(n)]


@dataclass(frozen=True)
class NormResult:
    value: float
    argmax_mode: int
    n_max: int
    certified: bool
    weighted: tuple[float, ...] = field(repr=False, default=())


def core_impedance(config: ShellConfig, n: int) -> float:
    """``t = sigma1 I_nu'(x1) / I_nu(x1)`` for mode ``n``."""
    return config.sigma1 * sf.logderiv_i(config.order(n), config.x1)


def _coupling(order: Order, r1: float) -> float:
    return sf.quotient(order, [("i", r1), ("k", 1.0)], [("k", r1), ("i", 1.0)])


def _shell_q(config: ShellConfig, n: int) -> float:
    """``rho K(r1) / I(r1) = (t - I'/I(r1)) / (t - K'/K(r1))``."""
    order = config.order(n)
    t = core_impedance(config, n)
    li = sf.logderiv_i(order, config.r1)
    lk = sf.logderiv_k(order, config.r1)
    return (t - li) / (t - lk)


def rho(config: ShellConfig, n: int) -> float:
    """Mixing coefficient of ``K_nu`` in the shell solution.

    Zero exactly when ``sigma1 == 1``. Flushes to 0 when the value is below
    the float range (high modes).
    """
    order = config.order(n)
    q = _shell_q(config, n)
    if q == 0.0:
        return 0.0
    ratio = sf.quotient(order, [("i", config.r1)], [("k", config.r1)])
    return q * ratio


def rho_from_symbol(config: ShellConfig, n: int) -> float:
    """Recover ``rho`` from the cross-product symbol: ``(I - lam I')/(K - lam K')`` at 1."""
    order = config.order(n)
    lam = nd_symbol(config, n, form="cross")
    p = sf.bessel_pair(order, 1.0)
    return (p.i_val - lam * p.i_deriv) / (p.k_val - lam * p.k_deriv)


def _guard(den: float, n: int, what: str):
    if not math.isfinite(den) or abs(den) < 1e-300:
        raise NumericDegeneracyError(f"degenerate {what} denominator in mode {n}", mode=n)


def nd_symbol(config: ShellConfig, n: int, form: str = "cross") -> float:
    """ND multiplier ``lambda_n`` for the core-shell configuration.

    ``form="cross"`` uses the cross-product expression (default);
    ``form="rho"`` the expression through ``rho``. The two agree to rounding.
    """
    order = config.order(n)
    t = core_impedance(config, n)
    if form == "cross":
        dv = cross_products_normalized(order, 1.0, config.r1)
        num = dv.d01 - t * dv.d
        den = dv.d11 - t * dv.d10
        _guard(den, n, "cross-product symbol")
        return num / den
    if form == "rho":
        c = _coupling(order, config.r1)
        cq = c * _shell_q(config, n)
        li1 = sf.logderiv_i(order, 1.0)
        lk1 = sf.logderiv_k(order, 1.0)
        den = cq * lk1 - li1
        _guard(den, n, "rho symbol")
        return (cq - 1.0) / den
    raise ValueError(f"unknown symbol form {form!r}")


def reference_symbol(dimension: int, n: int) -> float:
    """``I_nu(1)/I_nu'(1)`` for the homogeneous disk (2-D) or ball (3-D)."""
    return 1.0 / sf.logderiv_i(Order.for_mode(n, dimension), 1.0)


def symbol_gap_to_reference(config: ShellConfig, n: int) -> float:
    """``lambda_n(config) - lambda_n(reference)`` without cancellation.

    Equal to ``c q (L_I - L_K) / (L_I (c q L_K - L_I))`` with log-derivatives
    at 1, which keeps full relative accuracy when the gap is far below the
    symbol itself.
    """
    order = config.order(n)
    c = _coupling(order, config.r1)
    q = _shell_q(config, n)
    cq = c * q
    if cq == 0.0:
        return 0.0
    li1 = sf.logderiv_i(order, 1.0)
    lk1 = sf.logderiv_k(order, 1.0)
    den = li1 * (cq * lk1 - li1)
    _guard(den, n, "gap")
    return cq * (li1 - lk1) / den


def sobolev_weight(n: int) -> float:
    """``(1 + n^2)^{1/2}``; in 3-D the |m| <= n maximum of the same weight."""
    return math.sqrt(1.0 + n * n)


def symbol_table(config: ShellConfig, n_max: int = DEFAULT_NMAX) -> NdSymbolTable:
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    symbols = pmap(lambda n: nd_symbol(config, n), range(n_max + 1))
    return NdSymbolTable(config.dimension, n_max, tuple(symbols))


def reference_table(dimension: int, n_max: int = DEFAULT_NMAX) -> NdSymbolTable:
    return NdSymbolTable(dimension, n_max, tuple(reference_symbol(dimension, n) for n in range(n_max + 1)))


def _tail_ok(values) -> bool:
    tail = values[-_TAIL:] if len(values) >= _TAIL else values
    return all(b <= a for a, b in zip(tail, tail[1:]))


def _sup(weighted, n_max, certified):
    best = max(range(len(weighted)), key=lambda n: (weighted[n], -n))
    return NormResult(weighted[best], best, n_max, certified, tuple(weighted))


def operator_norm(table: NdSymbolTable) -> NormResult:
    """``sup_n w_n |lambda_n|`` over the modes of one table (no extension)."""
    weighted = [sobolev_weight(n) * abs(s) for n, s in enumerate(table.symbols)]
    ok = table.n_max < _TAIL or _tail_ok(weighted)
    if not ok:
        warnings.warn(f"symbol tail not decreasing at n_max={table.n_max}", TruncationWarning, stacklevel=2)
    return _sup(weighted, table.n_max, ok)


def difference_norm(
    config: ShellConfig,
    other: ShellConfig | None = None,
    n_max: int = DEFAULT_NMAX,
    extend: bool = True,
    cap: int = NMAX_CAP,
) -> NormResult:
    """``||R_config - R_other||`` as ``sup_n w_n |lambda_n - lambda_n'|``.

    ``other=None`` compares against the homogeneous reference. With
    ``extend`` the mode range doubles (up to ``cap``) until the last ten
    weighted gaps are non-increasing; an uncertified result warns.
    """
    if other is not None and other.dimension != config.dimension:
        raise DomainError("configurations must share a dimension")

    def gap(n):
        if other is None:
            return symbol_gap_to_reference(config, n)
        return nd_symbol(config, n) - nd_symbol(other, n)

    weighted = []
    limit = n_max
    while True:
        start = len(weighted)
        weighted.extend(pmap(lambda n: sobolev_weight(n) * abs(gap(n)), range(start, limit + 1)))
        ok = limit < _TAIL or _tail_ok(weighted)
        if ok or not extend or limit >= cap:
            break
        limit = min(2 * max(limit, 1), cap)
    if not ok:
        warnings.warn(f"difference tail not decreasing at n_max={limit}", TruncationWarning, stacklevel=2)
    return _sup(weighted, limit, ok)


@dataclass(frozen=True)
class SweepRow:
    parameter: float
    norm: float
    argmax_mode: int
    certified: bool


@dataclass(frozen=True)
class SweepTable:
    axis: str
    rows: tuple[SweepRow, ...]

    @property
    def strictly_decreasing(self) -> bool:
        norms = [r.norm for r in self.rows]
        return all(b < a for a, b in zip(norms, norms[1:]))

    @property
    def certified(self) -> bool:
        return all(r.certified for r in self.rows)


SWEEP_AXES = ("sigma1", "r1")


def norm_sweep(template: ShellConfig, axis: str, points, n_max: int = DEFAULT_NMAX) -> SweepTable:
    """Difference norm to the reference along ``sigma1`` or ``r1``.

    Rows keep the order of ``points``.
    """
    if axis not in SWEEP_AXES:
        raise DomainError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    rows = []
    for p in points:
        if axis == "sigma1":
            cfg = ShellConfig(template.dimension, template.r1, float(p))
        else:
            cfg = ShellConfig(template.dimension, float(p), template.sigma1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            res = difference_norm(cfg, n_max=n_max)
        rows.append(SweepRow(float(p), res.value, res.argmax_mode, res.certified))
    return SweepTable(axis, tuple(rows))
