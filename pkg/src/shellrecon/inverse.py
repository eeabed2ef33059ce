r"""Recovery of ``sigma1`` from one boundary measurement, and indistinguishable pairs.

Recovery
--------
A mode's symbol ``lambda`` determines the core impedance
``t = sigma1 I'(x1)/I(x1)`` through the Moebius map

.. math::
    t = \frac{D_{0,1} - \lambda D_{1,1}}{D - \lambda D_{1,0}}
    \quad\text{at } (1, r_1),

and ``t = F(eta) = eta^2 I'(r1/eta)/I(r1/eta)`` is strictly increasing in
``eta = sqrt(sigma1)``, so ``sigma1`` follows by a bracketed monotone solve.

Nonuniqueness
-------------
Two configurations share the mode-``n`` symbol exactly when

.. math::
    \det\begin{pmatrix}
        D_{1,0} & t_1 & D_{1,1} \\ 1 & 0 & t_2 \\ D & 1 & D_{0,1}
    \end{pmatrix} = D_{1,1} - t_1 D_{0,1} - t_2 D_{1,0} + t_1 t_2 D = 0,

with cross-products at ``(r1, r2)`` and ``t_k = sigma_k I'(x_k)/I(x_k)``
(rows and columns of the original Bessel determinant divided by
``I(x_1)``, ``I(x_2)``). The determinant is affine in ``t_2``, so each mode
has at most one partner ``sigma2`` for a given ``r2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import special_fn as sf
from .cross_products import cross_products_normalized
from .errors import (
    BracketError,
    DomainError,
    IllPosedModeError,
    InconsistentMeasurementError,
    NoRootError,
)
from .forward import BoundaryData
from .nd_map import ShellConfig, core_impedance, nd_symbol
from .parallel import pmap
from .special_fn import Order

G_MIN = 1e-12
ETA_RANGE = (1e-6, 1e6)
SIGMA_RANGE = (1e-6, 1e6)


# --- measurement ---------------------------------------------------------------

@dataclass(frozen=True)
class Measurement:
    neumann: BoundaryData
    dirichlet: BoundaryData

    def __post_init__(self):
        if self.neumann.dimension != self.dirichlet.dimension:
            raise DomainError("Neumann and Dirichlet data differ in dimension")

    @property
    def dimension(self) -> int:
        return self.neumann.dimension

    def usable_modes(self) -> list:
        """Modes with ``|g| > 1e-12``, largest ``|g|`` first (ties by mode order)."""
        keys = [k for k, v in self.neumann.coefficients.items() if abs(v) > G_MIN]
        return sorted(keys, key=lambda k: -abs(self.neumann.coefficients[k]))

    def symbol(self, key) -> complex:
        g = self.neumann[key]
        if abs(g) <= G_MIN:
            raise IllPosedModeError(f"mode {key} has |g| <= {G_MIN:g}")
        return self.dirichlet[key] / g

    def to_dict(self) -> dict:
        return {"neumann": self.neumann.to_dict(), "dirichlet": self.dirichlet.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "Measurement":
        try:
            return cls(BoundaryData.from_dict(data["neumann"]), BoundaryData.from_dict(data["dirichlet"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed measurement: {exc!r}") from exc


def perturb_measurement(meas: Measurement, rel_noise: float, seed: int = 0) -> Measurement:
    """Add complex Gaussian noise of relative size ``rel_noise`` to the Dirichlet data."""
    rng = np.random.default_rng(seed)
    out = {}
    for k, v in meas.dirichlet.coefficients.items():
        z = complex(rng.standard_normal(), rng.standard_normal()) / math.sqrt(2.0)
        out[k] = v + rel_noise * abs(v) * z
    return Measurement(meas.neumann, BoundaryData(meas.dimension, out))


# --- F(eta) ------------------------------------------------------------------------

def monotone_f(order: Order, r: float, eta: float, alpha: float = 2.0) -> float:
    """``F(eta) = eta^alpha I_nu'(r/eta) / I_nu(r/eta)``."""
    return eta**alpha * sf.logderiv_i(order, r / eta)


def monotone_f_prime(order: Order, r: float, eta: float) -> float:
    """``dF/deta`` for ``alpha = 2`` using ``L' = 1 + nu^2/x^2 - L/x - L^2``."""
    x = r / eta
    lg = sf.logderiv_i(order, x)
    dl = 1.0 + (order.nu / x) ** 2 - lg / x - lg * lg
    return 2.0 * eta * lg - r * dl


def target_from_symbol(dimension: int, n: int, r1: float, lam: float) -> float:
    """Invert the Moebius map ``t -> lambda`` for mode ``n``.

    Raises
    ------
    IllPosedModeError
        If the denominator is below ``1e-12`` of the term scale.
    InconsistentMeasurementError
        If the implied ``t`` is not positive.
    """
    order = Order.for_mode(n, dimension)
    dv = cross_products_normalized(order, 1.0, r1)
    num = dv.d01 - lam * dv.d11
    den = dv.d - lam * dv.d10
    scale = max(abs(dv.d01), abs(lam * dv.d11), abs(dv.d), abs(lam * dv.d10))
    if abs(den) < 1e-12 * scale:
        raise IllPosedModeError(f"mode {n}: symbol inversion is degenerate")
    t = num / den
    if not t > 0.0:
        raise InconsistentMeasurementError(f"mode {n}: implied core impedance {t:.6g} is not positive")
    return t


def _real_symbol(meas: Measurement, key) -> float:
    lam = meas.symbol(key)
    if not math.isfinite(abs(lam)):
        raise IllPosedModeError(f"mode {key}: non-finite Dirichlet coefficient")
    if abs(lam.imag) > 1e-8 * max(abs(lam.real), 1e-300):
        raise InconsistentMeasurementError(f"mode {key}: symbol has imaginary part {lam.imag:.3g}")
    return lam.real


def target_from_measurement(meas: Measurement, key, r1: float) -> float:
    """Core impedance ``t`` implied by mode ``key`` of the measurement."""
    lam = _real_symbol(meas, key)
    return target_from_symbol(meas.dimension, BoundaryData.radial_index(key), r1, lam)


# --- monotone solve ----------------------------------------------------------------

@dataclass(frozen=True)
class RootSolve:
    eta: float
    bracket: tuple[float, float]
    residual: float


def solve_monotone(fn, target: float, lo: float, hi: float, n_scan: int = 64, xtol: float = 1e-14) -> RootSolve:
    """Root of increasing ``fn(x) = target`` on ``[lo, hi]``.

    Log-spaced pre-scan to bracket, bisection to relative width ``xtol``,
    then a secant step kept inside the bracket.
    """
    grid = np.geomspace(lo, hi, n_scan)
    vals = [fn(x) for x in grid]
    if not vals[0] <= target <= vals[-1]:
        raise BracketError(f"target {target:.6g} outside [{vals[0]:.6g}, {vals[-1]:.6g}]")
    i = int(np.searchsorted(vals, target))
    i = min(max(i, 1), n_scan - 1)
    a, b = float(grid[i - 1]), float(grid[i])
    fa, fb = vals[i - 1] - target, vals[i] - target
    if fa == 0.0:
        return RootSolve(a, (a, a), 0.0)
    if fb == 0.0:
        return RootSolve(b, (b, b), 0.0)
    while b - a > xtol * b:
        m = math.sqrt(a * b) if b > 4 * a else 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = fn(m) - target
        if fm == 0.0:
            return RootSolve(m, (m, m), 0.0)
        if fm < 0:
            a, fa = m, fm
        else:
            b, fb = m, fm
    x = a - fa * (b - a) / (fb - fa)
    if not a <= x <= b:
        x = 0.5 * (a + b)
    fx = fn(x) - target
    best = min(((abs(fx), x), (abs(fa), a), (abs(fb), b)))
    return RootSolve(best[1], (a, b), best[0])


# --- recovery -------------------------------------------------------------------

@dataclass(frozen=True)
class RecoveryOptions:
    mode: object = None  # force a mode; default picks the largest |g| among well-conditioned modes
    cross_validate: bool = True
    xval_tol: float = 1e-4
    agree_tol: float = 1e-6
    max_condition: float = 1e12
    xval_condition: float = 1e8
    eta_range: tuple[float, float] = ETA_RANGE
    n_scan: int = 64
    xtol: float = 1e-14


@dataclass(frozen=True)
class ModeEstimate:
    mode: object
    sigma1: float
    target: float
    condition: float
    residual: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class RecoveryResult:
    sigma1: float
    mode_used: object
    bracket: tuple[float, float]
    residual: float
    per_mode_estimates: list = field(default_factory=list)
    spread: float = 0.0

    def to_dict(self) -> dict:
        return {
            "sigma1": self.sigma1,
            "mode_used": _mode_json(self.mode_used),
            "residual": self.residual,
            "bracket": list(self.bracket),
            "spread": self.spread,
            "per_mode": [
                {
                    "mode": _mode_json(e.mode),
                    "sigma1": e.sigma1,
                    "target": e.target,
                    "condition": e.condition,
                    "residual": e.residual,
                }
                for e in self.per_mode_estimates
            ],
        }


def _mode_json(key):
    return {"n": key[0], "m": key[1]} if isinstance(key, tuple) else {"n": key}


def recovery_condition(dimension: int, n: int, r1: float, sigma1: float) -> float:
    """Relative condition number ``|d sigma / d lambda| |lambda| / sigma`` of mode ``n``."""
    order = Order.for_mode(n, dimension)
    cfg = ShellConfig(dimension, r1, sigma1)
    lam = nd_symbol(cfg, n)
    dv = cross_products_normalized(order, 1.0, r1)
    den = dv.d - lam * dv.d10
    dt_dlam = (dv.d01 * dv.d10 - dv.d11 * dv.d) / den**2
    eta = math.sqrt(sigma1)
    fp = monotone_f_prime(order, r1, eta)
    dsig_dlam = 2.0 * eta * dt_dlam / fp
    return abs(dsig_dlam * lam / sigma1)


def _estimate(meas: Measurement, key, r1: float, opts: RecoveryOptions) -> ModeEstimate:
    n = BoundaryData.radial_index(key)
    order = Order.for_mode(n, meas.dimension)
    t = target_from_measurement(meas, key, r1)
    root = solve_monotone(lambda e: monotone_f(order, r1, e), t, *opts.eta_range, opts.n_scan, opts.xtol)
    sigma = root.eta**2
    cond = recovery_condition(meas.dimension, n, r1, sigma)
    lo, hi = root.bracket
    return ModeEstimate(key, sigma, t, cond, root.residual, (lo * lo, hi * hi))


def recover_sigma(meas: Measurement, r1: float, options: RecoveryOptions | None = None) -> RecoveryResult:
    """Recover ``sigma1`` for known ``r1``.

    Every usable mode yields an estimate. Modes whose condition number
    exceeds ``max_condition`` are dropped; among modes with condition at most
    ``xval_condition`` the estimates must agree to ``xval_tol`` relative.

    Raises
    ------
    IllPosedModeError
        No usable mode.
    BracketError
        The single usable mode's target lies outside ``F``'s range on ``eta_range``.
    InconsistentMeasurementError
        Estimates disagree, or a mode is incompatible with every configuration.
    """
    opts = options or RecoveryOptions()
    if not 0.0 < r1 < 1.0:
        raise DomainError(f"r1 must lie in (0, 1), got {r1}")
    if opts.mode is not None:
        keys = [meas.neumann._key(opts.mode)]
        if abs(meas.neumann[keys[0]]) <= G_MIN:
            raise IllPosedModeError(f"mode {opts.mode} has |g| <= {G_MIN:g}")
    else:
        keys = meas.usable_modes()
    if not keys:
        raise IllPosedModeError("measurement has no mode with |g| > 1e-12")
    if not opts.cross_validate:
        keys = keys[:1]

    results = pmap(lambda k: _try_estimate(meas, k, r1, opts), keys)
    failures = [(k, exc) for k, exc in zip(keys, results) if isinstance(exc, Exception)]
    estimates = [e for e in results if not isinstance(e, Exception)]
    if failures:
        k, exc = failures[0]
        if len(keys) == 1:
            raise exc
        if not isinstance(exc, IllPosedModeError):
            raise InconsistentMeasurementError(str(exc), estimates=estimates) from exc
    usable = [e for e in estimates if e.condition <= opts.max_condition]
    if not usable:
        raise IllPosedModeError("every mode is too ill-conditioned to recover sigma1")
    good = [e for e in usable if e.condition <= opts.xval_condition] or usable[:1]
    primary = good[0]
    spread = max(abs(e.sigma1 - primary.sigma1) / primary.sigma1 for e in good)
    if spread > opts.xval_tol:
        raise InconsistentMeasurementError(
            f"per-mode estimates disagree (relative spread {spread:.3g})", estimates=estimates
        )
    if spread > opts.agree_tol:
        warnings.warn(f"per-mode estimates agree only to {spread:.3g}", RuntimeWarning, stacklevel=2)
    return RecoveryResult(primary.sigma1, primary.mode, primary.bracket, primary.residual, estimates, spread)


def _try_estimate(meas, key, r1, opts):
    try:
        return _estimate(meas, key, r1, opts)
    except (IllPosedModeError, InconsistentMeasurementError, BracketError) as exc:
        return exc


def synthesize_measurement(config: ShellConfig, g: BoundaryData) -> Measurement:
    from .forward import dirichlet_trace

    return Measurement(g, dirichlet_trace(config, g))


# --- nonuniqueness --------------------------------------------------------------

def _det_parts(order: Order, r1: float, t1: float, r2: float, t2: float):
    dv = cross_products_normalized(order, r1, r2)
    rows = [(dv.d10, t1, dv.d11), (1.0, 0.0, t2), (dv.d, 1.0, dv.d01)]
    det = math.fsum([dv.d11, -t1 * dv.d01, -t2 * dv.d10, t1 * t2 * dv.d])
    norms = [math.hypot(*row) for row in rows]
    return det, norms[0] * norms[1] * norms[2]


def nonuniq_determinant(config_a: ShellConfig, r2: float, sigma2: float, mode_n: int) -> float:
    """Scaled determinant: zero iff ``(r1, s1)`` and ``(r2, s2)`` share the mode-``n`` symbol."""
    cfg_b = ShellConfig(config_a.dimension, r2, sigma2)
    t1 = core_impedance(config_a, mode_n)
    t2 = core_impedance(cfg_b, mode_n)
    det, norm = _det_parts(config_a.order(mode_n), config_a.r1, t1, r2, t2)
    return det / norm


@dataclass(frozen=True)
class NonuniqOptions:
    sigma_range: tuple[float, float] = SIGMA_RANGE
    n_scan: int = 64
    xtol: float = 1e-14
    diagnostic_modes: int = 8


@dataclass(frozen=True)
class NonuniqPair:
    config_a: ShellConfig
    config_b: ShellConfig
    mode_n: int
    det_residual: float
    symbol_gap: float
    cross_mode_gaps: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "a": {"r1": self.config_a.r1, "sigma1": self.config_a.sigma1},
            "b": {"r1": self.config_b.r1, "sigma1": self.config_b.sigma1},
            "n": self.mode_n,
            "det_residual": self.det_residual,
            "symbol_gap": self.symbol_gap,
            "cross_mode_gaps": [{"n": k, "gap": v} for k, v in sorted(self.cross_mode_gaps.items())],
        }


def _bisect_sign(fn, a: float, b: float, fa: float, xtol: float) -> float:
    while b - a > xtol * b:
        m = math.sqrt(a * b) if b > 4 * a else 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = fn(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def find_nonuniq_pairs(config_a: ShellConfig, r2: float, mode_n: int, options: NonuniqOptions | None = None) -> list:
    """All ``sigma2`` in the search range with ``det(r1, s1, r2, s2) = 0`` for mode ``n``.

    Sign scan on a log grid, bisection in each bracket, then an independent
    check of the mode-``n`` symbols. Cross-mode gaps for the first
    ``diagnostic_modes`` other modes are attached for inspection.

    Raises
    ------
    NoRootError
        When the scan finds no sign change.
    """
    opts = options or NonuniqOptions()
    lo, hi = opts.sigma_range
    if not 0.0 < lo < hi:
        raise DomainError("sigma range must satisfy 0 < lo < hi")
    if not 0.0 < r2 < 1.0:
        raise DomainError(f"r2 must lie in (0, 1), got {r2}")

    def det(s):
        return nonuniq_determinant(config_a, r2, s, mode_n)

    grid = [float(s) for s in np.geomspace(lo, hi, opts.n_scan)]
    vals = pmap(det, grid)
    roots = []
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(_bisect_sign(det, a, b, fa, opts.xtol))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    if not roots:
        raise NoRootError(f"no sign change of the mode-{mode_n} determinant for sigma2 in [{lo:g}, {hi:g}]")
    if len(roots) > 1:
        warnings.warn(f"{len(roots)} roots found; all are returned", RuntimeWarning, stacklevel=2)
    pairs = []
    for s2 in sorted(roots):
        cfg_b = ShellConfig(config_a.dimension, r2, s2)
        gap = abs(nd_symbol(config_a, mode_n) - nd_symbol(cfg_b, mode_n))
        others = {}
        for k in range(opts.diagnostic_modes + 1):
            if k != mode_n:
                others[k] = abs(nd_symbol(config_a, k) - nd_symbol(cfg_b, k))
        pairs.append(NonuniqPair(config_a, cfg_b, mode_n, abs(det(s2)), gap, others))
    return pairs


def find_nonuniq_pair(config_a: ShellConfig, r2: float, mode_n: int, options: NonuniqOptions | None = None) -> NonuniqPair:
    """The smallest root of :func:`find_nonuniq_pairs`."""
    return find_nonuniq_pairs(config_a, r2, mode_n, options)[0]


# --- potentials ----------------------------------------------------------------

@dataclass(frozen=True)
class PotentialReport:
    sigma1: float
    e_tilde: float
    u_tilde_core: float
    u_tilde_shell: float


def potential_report(sigma1: float, e_tilde: float = 0.0) -> PotentialReport:
    """Reduced potential levels ``E + 1/sigma1`` (core) and ``E + 1`` (shell)."""
    if not sigma1 > 0.0:
        raise DomainError(f"sigma1 must be positive, got {sigma1}")
    return PotentialReport(sigma1, e_tilde, e_tilde + 1.0 / sigma1, e_tilde + 1.0)
