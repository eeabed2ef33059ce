r"""Forward problem: Neumann data to interior wave and Dirichlet trace.

Per mode the wave is

* 2-D: ``u I_n(r/sqrt(s1))`` in the core, ``v I_n(r) + w K_n(r)`` in the shell,
  times ``exp(i n phi)``;
* 3-D: the same radial functions times ``r^{-1/2}``, with angular factor
  ``P_n^{|m|}(cos theta) exp(i m phi)``.

``u, v, w`` solve the 3x3 system

.. math::
    u I(x_1) = v I(r_1) + w K(r_1), \quad
    u \sigma_1 I'(x_1) = v I'(r_1) + w K'(r_1), \quad
    v I'(1) + w K'(1) = g_n.

Radial profiles are evaluated through Bessel quotients (see
:func:`radial_profile`), so large modes neither overflow nor underflow.

Coefficient convention
----------------------
:class:`BoundaryData` stores expansion coefficients: ``g = sum g_n e^{in phi}``
in 2-D and ``g = sum g_nm P_n^{|m|}(mu) e^{im phi}`` in 3-D, with the
un-normalised Condon-Shortley ``P_n^{|m|}``. The projections below divide
by ``2 pi`` and ``2 pi int (P_n^{|m|})^2 dmu`` respectively.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import special_fn as sf
from .errors import BesselRangeError, DomainError, NumericDegeneracyError
from .nd_map import ShellConfig, _coupling, _shell_q, nd_symbol, reference_symbol
from .parallel import pmap

BASIS = {2: "fourier", 3: "spherical_harmonic"}
_SMALL_R = 1e-8


# --- boundary data ----------------------------------------------------------

@dataclass
class BoundaryData:
    """Finitely supported boundary coefficients.

    Keys are ``n`` (2-D, any integer) or ``(n, m)`` with ``|m| <= n`` (3-D).
    """

    dimension: int
    coefficients: dict = field(default_factory=dict)
    basis: str = ""

    def __post_init__(self):
        if self.dimension not in BASIS:
            raise DomainError(f"dimension must be 2 or 3, got {self.dimension}")
        if not self.basis:
            self.basis = BASIS[self.dimension]
        if self.basis != BASIS[self.dimension]:
            raise DomainError(f"basis {self.basis!r} does not match dimension {self.dimension}")
        clean = {}
        for key, val in self.coefficients.items():
            key = self._key(key)
            val = complex(val)
            if not (math.isfinite(val.real) and math.isfinite(val.imag)):
                raise DomainError(f"non-finite coefficient at mode {key}")
            clean[key] = val
        self.coefficients = dict(sorted(clean.items()))

    def _key(self, key):
        if self.dimension == 2:
            if isinstance(key, tuple):
                raise DomainError("2-D modes are single integers")
            return int(key)
        n, m = (int(k) for k in key)
        if n < 0 or abs(m) > n:
            raise DomainError(f"3-D mode needs 0 <= |m| <= n, got ({n}, {m})")
        return (n, m)

    @staticmethod
    def radial_index(key) -> int:
        """Index ``n`` that selects the radial problem (``|n|`` in 2-D)."""
        return key[0] if isinstance(key, tuple) else abs(key)

    def modes(self):
        return list(self.coefficients)

    def __getitem__(self, key):
        return self.coefficients.get(self._key(key), 0j)

    def scaled(self, a) -> "BoundaryData":
        return BoundaryData(self.dimension, {k: a * v for k, v in self.coefficients.items()})

    def __add__(self, other: "BoundaryData") -> "BoundaryData":
        if other.dimension != self.dimension:
            raise DomainError("cannot add boundary data of different dimensions")
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, 0j) + v
        return BoundaryData(self.dimension, out)

    def conjugate_key(self, key):
        return (key[0], -key[1]) if self.dimension == 3 else -key

    def is_real(self, tol: float = 1e-12) -> bool:
        """Conjugate symmetry ``g_{-k} = conj(g_k)``, i.e. the data is a real function."""
        for k, v in self.coefficients.items():
            if abs(self[self.conjugate_key(k)] - v.conjugate()) > tol * max(1.0, abs(v)):
                return False
        return True

    def to_dict(self) -> dict:
        modes = []
        for k, v in self.coefficients.items():
            entry = {"n": k[0], "m": k[1]} if self.dimension == 3 else {"n": k}
            entry.update(re=v.real, im=v.imag)
            modes.append(entry)
        return {"dimension": self.dimension, "basis": self.basis, "modes": modes}

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryData":
        try:
            dim = int(data["dimension"])
            coeffs = {}
            for entry in data["modes"]:
                key = (int(entry["n"]), int(entry["m"])) if dim == 3 else int(entry["n"])
                if key in coeffs:
                    raise DomainError(f"duplicate mode {key}")
                coeffs[key] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            return cls(dim, coeffs, data.get("basis", ""))
        except (KeyError, TypeError, AttributeError) as exc:
            raise DomainError(f"malformed boundary data: {exc!r}") from exc


# --- coefficients ------------------------------------------------------------

@dataclass(frozen=True)
class ModeCoefficients:
    u: complex
    v: complex
    w: complex
    g: complex


@dataclass(frozen=True)
class WaveCoefficients:
    config: ShellConfig
    modes: dict  # BoundaryData key -> ModeCoefficients

    def residuals(self) -> dict:
        """Relative residual of each of the three equations, per mode."""
        return {k: system_residuals(self.config, BoundaryData.radial_index(k), c) for k, c in self.modes.items()}


@dataclass(frozen=True)
class _Profile:
    """Unit-Neumann radial quantities of one mode, all divided by ``I(1)``."""

    c: float  # I(r1)K(1) / (K(r1)I(1))
    q: float  # rho K(r1) / I(r1)
    den: float  # c q K'/K(1) - I'/I(1)
    ir1: float  # I(r1) / I(1)


def _profile(config: ShellConfig, n: int) -> _Profile:
    order = config.order(n)
    c = _coupling(order, config.r1)
    q = _shell_q(config, n)
    den = c * q * sf.logderiv_k(order, 1.0) - sf.logderiv_i(order, 1.0)
    if not math.isfinite(den) or abs(den) < 1e-300:
        raise NumericDegeneracyError(f"Neumann resonance: vanishing denominator in mode {n}", mode=n)
    ir1 = sf.quotient(order, [("i", config.r1)], [("i", 1.0)])
    return _Profile(c, q, den, ir1)


def unit_coefficients(config: ShellConfig, n: int) -> tuple[float, float, float]:
    """``(u, v, w)`` for ``g_n = 1``.

    Raises
    ------
    NumericDegeneracyError
        On a vanishing denominator or when a coefficient is not representable.
    """
    order = config.order(n)
    p = _profile(config, n)
    try:
        i1 = sf.bessel_i(order, 1.0)[0]
        v = -1.0 / (i1 * p.den)
        w = p.q * sf.quotient(order, [("i", config.r1)], [("k", config.r1), ("i", 1.0)]) / p.den
        u = (p.q - 1.0) * sf.quotient(order, [("i", config.r1)], [("i", 1.0), ("i", config.x1)]) / p.den
    except (BesselRangeError, ZeroDivisionError) as exc:
        raise NumericDegeneracyError(f"coefficients of mode {n} are outside the float range", mode=n) from exc
    if not all(math.isfinite(z) for z in (u, v, w)):
        raise NumericDegeneracyError(f"coefficients of mode {n} are outside the float range", mode=n)
    return u, v, w


def system_residuals(config: ShellConfig, n: int, c: ModeCoefficients) -> tuple[float, float, float]:
    order = config.order(n)
    i_x1, di_x1 = sf.bessel_i(order, config.x1)
    p_r1 = sf.bessel_pair(order, config.r1)
    p_1 = sf.bessel_pair(order, 1.0)
    rows = [
        (c.u * i_x1, -c.v * p_r1.i_val, -c.w * p_r1.k_val),
        (c.u * config.sigma1 * di_x1, -c.v * p_r1.i_deriv, -c.w * p_r1.k_deriv),
        (c.v * p_1.i_deriv, c.w * p_1.k_deriv, -c.g),
    ]
    out = []
    for terms in rows:
        scale = max(abs(t) for t in terms)
        out.append(abs(sum(terms)) / scale if scale > 0 else 0.0)
    return tuple(out)


def solve_coefficients(config: ShellConfig, g: BoundaryData) -> WaveCoefficients:
    """Per-mode ``(u, v, w)`` for Neumann data ``g``; modes absent from ``g`` are zero."""
    if g.dimension != config.dimension:
        raise DomainError("boundary data and configuration differ in dimension")
    keys = g.modes()
    units = pmap(lambda k: unit_coefficients(config, BoundaryData.radial_index(k)), keys)
    modes = {}
    for k, (u, v, w) in zip(keys, units):
        gk = g.coefficients[k]
        modes[k] = ModeCoefficients(u * gk, v * gk, w * gk, gk)
    return WaveCoefficients(config, modes)


# --- radial profiles -------------------------------------------------------

def radial_profile(config: ShellConfig, n: int, r: float, derivative: bool = False) -> float:
    """Radial factor of the unit-Neumann wave for mode ``n`` at radius ``r``.

    The shell branch (``r >= r1``) is ``[c_r q - I(r)/I(1)] / den`` with
    ``c_r = I(r1)K(r)/(K(r1)I(1))``; the core branch is
    ``I(r/sqrt(s1))/I(x1) * I(r1)/I(1) * (q - 1) / den``. In 3-D both carry
    ``r^{-1/2}``. With ``derivative=True`` returns ``d/dr`` of the same.
    Below ``r = 1e-8`` the core uses the leading power of ``I``.
    """
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"radius must lie in [0, 1], got {r}")
    order = config.order(n)
    p = _profile(config, n)
    if r >= config.r1:
        c_r = sf.quotient(order, [("i", config.r1), ("k", r)], [("k", config.r1), ("i", 1.0)])
        i_r = sf.quotient(order, [("i", r)], [("i", 1.0)])
        val = (c_r * p.q - i_r) / p.den
        dval = (c_r * p.q * sf.logderiv_k(order, r) - i_r * sf.logderiv_i(order, r)) / p.den
    else:
        amp = p.ir1 * (p.q - 1.0) / p.den
        s = math.sqrt(config.sigma1)
        z = r / s
        if r < _SMALL_R:
            # psi ~ a r^n in both dimensions (r^{-1/2} absorbs the half order)
            p_x1 = sf.ik_scaled(order, config.x1)
            log_a = -order.nu * math.log(2.0 * s) - math.lgamma(order.nu + 1.0)
            log_a -= math.log(p_x1.i_mant) + p_x1.i_exp * math.log(2.0) + config.x1
            a = amp * math.exp(log_a)
            if derivative:
                return n * a * r ** (n - 1) if n >= 1 and r > 0 else (a if n == 1 else 0.0)
            return a * r**n
        ratio = sf.quotient(order, [("i", z)], [("i", config.x1)])
        val = amp * ratio
        dval = val * sf.logderiv_i(order, z) / s
    if config.dimension == 3:
        w = r ** -0.5
        return w * (dval - val / (2.0 * r)) if derivative else w * val
    return dval if derivative else val


def angular_factor(dimension: int, key, phi: float, theta: float | None = None) -> complex:
    if dimension == 2:
        return cmath.exp(1j * key * phi)
    n, m = key
    return sf.assoc_legendre(n, m, math.cos(theta)) * cmath.exp(1j * m * phi)


# --- evaluation --------------------------------------------------------------

@dataclass(frozen=True)
class EvaluationGrid:
    """Sample points as rows ``(r, phi)`` in 2-D or ``(r, phi, theta)`` in 3-D."""

    dimension: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        cols = 2 if self.dimension == 2 else 3
        if pts.shape[1] != cols:
            raise DomainError(f"{self.dimension}-D grid needs {cols} columns")
        if np.any(pts[:, 0] < 0) or np.any(pts[:, 0] > 1):
            raise DomainError("radii must lie in [0, 1]")
        if self.dimension == 3 and (np.any(pts[:, 2] < 0) or np.any(pts[:, 2] > math.pi)):
            raise DomainError("theta must lie in [0, pi]")
        object.__setattr__(self, "points", pts)

    @classmethod
    def polar(cls, radii, phis) -> "EvaluationGrid":
        return cls(2, [(r, p) for r in radii for p in phis])


def evaluate_wave(config: ShellConfig, coeffs: WaveCoefficients, grid: EvaluationGrid) -> np.ndarray:
    """Complex wave values at every grid point (summed over the modes of ``coeffs``)."""
    if grid.dimension != config.dimension:
        raise DomainError("grid and configuration differ in dimension")
    radii = sorted(set(grid.points[:, 0].tolist()))
    keys = list(coeffs.modes)
    profiles = {}
    for k in keys:
        n = BoundaryData.radial_index(k)
        if n not in profiles:
            profiles[n] = dict(zip(radii, pmap(lambda r: radial_profile(config, n, r), radii)))
    out = np.zeros(len(grid.points), dtype=complex)
    for i, pt in enumerate(grid.points):
        r, phi = pt[0], pt[1]
        theta = pt[2] if config.dimension == 3 else None
        out[i] = sum(
            coeffs.modes[k].g * profiles[BoundaryData.radial_index(k)][r] * angular_factor(config.dimension, k, phi, theta)
            for k in keys
        )
    return out


def dirichlet_trace(config: ShellConfig, g: BoundaryData) -> BoundaryData:
    """Trace coefficients ``lambda_n g_n``."""
    if g.dimension != config.dimension:
        raise DomainError("boundary data and configuration differ in dimension")
    keys = g.modes()
    lams = pmap(lambda k: nd_symbol(config, BoundaryData.radial_index(k)), keys)
    return BoundaryData(g.dimension, {k: lam * g.coefficients[k] for k, lam in zip(keys, lams)})


def reference_trace(g: BoundaryData) -> BoundaryData:
    return BoundaryData(
        g.dimension,
        {k: reference_symbol(g.dimension, BoundaryData.radial_index(k)) * v for k, v in g.coefficients.items()},
    )


# --- interface checks ------------------------------------------------------

INTERFACE_LAWS = ("coefficient", "physical")


def interface_mismatch(config: ShellConfig, n: int, law: str = "coefficient") -> tuple[float, float]:
    """``(value jump, flux mismatch)`` at ``r1`` for the unit-Neumann wave.

    ``law="coefficient"`` measures the flux condition the coefficient system
    encodes: ``R'(r1+) = s1^{3/2} R'(r1-)`` for the Bessel-variable radial
    function ``R`` (``R = psi`` in 2-D, ``R = r^{1/2} psi`` in 3-D).
    ``law="physical"`` measures ``psi'(r1+) - s1 psi'(r1-)``, which the
    closed-form solution does not satisfy for ``s1 != 1``.
    """
    if law not in INTERFACE_LAWS:
        raise ValueError(f"law must be one of {INTERFACE_LAWS}")
    r1 = config.r1
    below = math.nextafter(r1, 0.0)
    vp, vm = radial_profile(config, n, r1), radial_profile(config, n, below)
    dp = radial_profile(config, n, r1, derivative=True)
    dm = radial_profile(config, n, below, derivative=True)
    if law == "physical":
        return vp - vm, dp - config.sigma1 * dm
    if config.dimension == 3:
        # R' = r^{1/2} (psi' + psi / (2r))
        h = math.sqrt(r1)
        dp, dm = h * (dp + vp / (2 * r1)), h * (dm + vm / (2 * r1))
    return vp - vm, dp - config.sigma1**1.5 * dm


# --- projection ----------------------------------------------------------------

def project_fourier(samples, n_modes: int) -> BoundaryData:
    """Coefficients ``g_n``, ``|n| <= n_modes``, from samples on a uniform ``phi`` grid.

    The trapezoid rule on ``N`` points is exact for ``|n| < N/2`` band-limited data.
    """
    samples = np.asarray(samples, dtype=complex)
    npts = samples.size
    if npts <= 2 * n_modes:
        raise DomainError("need more than 2*n_modes samples")
    phi = 2.0 * np.pi * np.arange(npts) / npts
    return BoundaryData(2, {n: complex(np.mean(samples * np.exp(-1j * n * phi))) for n in range(-n_modes, n_modes + 1)})


def sphere_grid(n_max: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in ``mu`` by uniform ``phi``; exact for degree ``<= n_max`` products.

    Returns ``(theta, phi, w_mu, phi_step)`` with ``theta``/``phi`` 1-D.
    """
    mu, w_mu = np.polynomial.legendre.leggauss(n_max + 1)
    nphi = 2 * n_max + 2
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    return np.arccos(mu), phi, w_mu, 2.0 * np.pi / nphi


def project_spherical(samples, n_max: int) -> BoundaryData:
    """Coefficients ``g_nm`` from samples ``samples[i_theta, i_phi]`` on :func:`sphere_grid`."""
    theta, phi, w_mu, dphi = sphere_grid(n_max)
    samples = np.asarray(samples, dtype=complex)
    mu = np.cos(theta)
    out = {}
    for n in range(n_max + 1):
        for m in range(-n, n + 1):
            p = np.array([sf.assoc_legendre(n, m, x) for x in mu])
            e = np.exp(-1j * m * phi)
            val = np.einsum("i,i,ij,j->", w_mu, p, samples, e) * dphi
            out[(n, m)] = complex(val / (2.0 * np.pi * sf.legendre_norm_sq(n, m)))
    return BoundaryData(3, out)


def boundary_samples(config: ShellConfig, g: BoundaryData, n_angles: int) -> tuple[np.ndarray, BoundaryData]:
    """Wave at ``r = 1`` on a projection grid, and its projection back onto the basis."""
    coeffs = solve_coefficients(config, g)
    top = max((BoundaryData.radial_index(k) for k in g.modes()), default=0)
    if config.dimension == 2:
        phi = 2.0 * np.pi * np.arange(n_angles) / n_angles
        vals = evaluate_wave(config, coeffs, EvaluationGrid(2, np.column_stack([np.ones_like(phi), phi])))
        return vals, project_fourier(vals, top)
    theta, phi, _, _ = sphere_grid(max(top, n_angles))
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    pts = np.column_stack([np.ones(tt.size), pp.ravel(), tt.ravel()])
    vals = evaluate_wave(config, coeffs, EvaluationGrid(3, pts)).reshape(tt.shape)
    return vals, project_spherical(vals, max(top, n_angles))
