"""Self-check suites behind ``shellrecon verify``.

Each suite returns a :class:`SuiteResult`; ``quick`` runs reduced grids.
Random inputs come from a fixed seed so repeated runs are identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import special_fn as sf
from .cross_products import check_identities
from .forward import BoundaryData
from .inverse import find_nonuniq_pair, monotone_f, recover_sigma, synthesize_measurement
from .nd_map import ShellConfig, nd_symbol
from .oracle import RadialProblem, convergence_study, solve_radial_bvp
from .special_fn import Order

SEED = 20240607


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: int = 0
    worst: float = 0.0
    limit: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checks > 0 and self.failures == 0

    def record(self, value: float, ok: bool):
        self.checks += 1
        self.worst = max(self.worst, value)
        if not ok:
            self.failures += 1


def _orders(top_int: int, half: bool = True):
    out = [Order.integer(n) for n in range(top_int + 1)]
    if half:
        out += [Order.half_integer(n) for n in range(top_int + 1)]
    return out


def suite_identities(quick: bool = False) -> SuiteResult:
    """Five cross-product identities on random triples in ``(0.05, 10)^3``."""
    res = SuiteResult("identities", limit=1e-11)
    n_triples = 100 if quick else 1000
    rng = np.random.default_rng(SEED)
    triples = rng.uniform(0.05, 10.0, size=(n_triples, 3))
    for order in _orders(20):
        for x, y, z in triples:
            worst = check_identities(order, float(x), float(y), float(z)).worst
            res.record(worst, worst <= res.limit)
    return res


def fd_derivative(fn, order: Order, x: float, step: float = 1e-5) -> tuple[float, float]:
    """Central difference at ``h = step * x`` and its rounding floor.

    The floor ``4 eps (|f(x+h)| + |f(x-h)|) / (2h)`` bounds the cancellation
    error of the difference itself; where it exceeds the requested relative
    tolerance (``I_0`` near 0, where ``I_0 ~ 1`` and ``I_0' ~ x/2``) no
    double-precision value function can meet that tolerance.
    """
    h = step * x
    fp, fm = fn(order, x + h)[0], fn(order, x - h)[0]
    return (fp - fm) / (2.0 * h), 4.0 * 2.2e-16 * (abs(fp) + abs(fm)) / (2.0 * h)


def suite_wronskian(quick: bool = False) -> SuiteResult:
    """``I K' - I' K = -1/x`` and central-difference derivative agreement."""
    res = SuiteResult("wronskian", limit=1e-12)
    xs = np.geomspace(1e-3, 50.0, 20 if quick else 120)
    orders = _orders(60)[:: 4 if quick else 1]
    fd_worst = 0.0
    floor_hits = 0
    for order in orders:
        for x in xs:
            x = float(x)
            i, di = sf.bessel_i(order, x)
            k, dk = sf.bessel_k(order, x)
            w = abs(i * dk - di * k + 1.0 / x) * x
            res.record(w, w <= res.limit)
            for fn, d in ((sf.bessel_i, di), (sf.bessel_k, dk)):
                fd, floor = fd_derivative(fn, order, x)
                err = abs(fd - d)
                if err > 1e-6 * abs(d):
                    floor_hits += 1
                else:
                    fd_worst = max(fd_worst, err / abs(d))
                res.checks += 1
                res.failures += err > 1e-6 * abs(d) + floor
    res.notes.append(f"derivative vs central difference: worst {fd_worst:.3g} relative (limit 1e-6)")
    if floor_hits:
        res.notes.append(f"{floor_hits} points where the difference's rounding floor exceeds 1e-6; accepted within that floor")
    return res


def ratio_lower_bound(nu: float, x: float, alpha: float) -> float:
    """Lower bound ``x / (lam + sqrt(lam^2 + x^2))``, ``lam = nu + 1 + (alpha - 1)/2``."""
    lam = nu + 1.0 + 0.5 * (alpha - 1.0)
    return x / (lam + math.sqrt(lam * lam + x * x))


def suite_ratio_bound(quick: bool = False) -> SuiteResult:
    """Strict ratio bound ``I_{nu+1}/I_nu > x/(lam + sqrt(lam^2 + x^2))``."""
    res = SuiteResult("ratio_bound")
    for order in _orders(20):
        for x in (0.01, 0.1, 1.0, 5.0, 20.0):
            ratio = sf.bessel_ratio_i(order, x)
            for alpha in (1.0, 2.0, 3.0):
                bound = ratio_lower_bound(order.nu, x, alpha)
                margin = (ratio - bound) / ratio
                res.record(-margin, ratio > bound)
    return res


def suite_monotonicity(quick: bool = False) -> SuiteResult:
    """``F(eta) = eta^2 I'(r/eta)/I(r/eta)`` strictly increasing on a log grid."""
    res = SuiteResult("monotonicity")
    etas = np.geomspace(1e-3, 1e3, 200)
    for order in _orders(10)[:: 3 if quick else 1]:
        for r in (0.1, 0.5, 0.9):
            vals = [monotone_f(order, r, float(e)) for e in etas]
            for a, b in zip(vals, vals[1:]):
                res.record(0.0, b > a)
    return res


def suite_roundtrip(quick: bool = False) -> SuiteResult:
    """Forward synthesis then recovery returns ``sigma1``."""
    res = SuiteResult("roundtrip", limit=1e-8)
    radii = (0.1, 0.5, 0.9) if quick else tuple(k / 10 for k in range(1, 10))
    for dim in (2, 3):
        key = 1 if dim == 2 else (2, 1)
        for r1 in radii:
            for s1 in (0.1, 0.5, 1.0, 2.0, 10.0):
                meas = synthesize_measurement(ShellConfig(dim, r1, s1), BoundaryData(dim, {key: 1.0}))
                err = abs(recover_sigma(meas, r1).sigma1 / s1 - 1.0)
                res.record(err, err <= res.limit)
    return res


def nonuniq_cases(dim: int, seed: int = SEED):
    """Endless seeded stream of ``(r1, sigma1, r2, n)``."""
    rng = np.random.default_rng(seed + dim)
    while True:
        r1, r2 = (float(v) for v in rng.uniform(0.2, 0.8, 2))
        s1 = float(np.exp(rng.uniform(math.log(0.25), math.log(4.0))))
        yield r1, s1, r2, int(rng.integers(0, 5))


def nonuniq_sample(dim: int, wanted: int, max_tries: int = 200):
    """First ``wanted`` seeded cases whose determinant has a bracket.

    Returns ``(pairs, skipped)`` where ``skipped`` counts cases with no sign change.
    """
    from .errors import NoRootError

    pairs, skipped = [], 0
    for (r1, s1, r2, n), _ in zip(nonuniq_cases(dim), range(max_tries)):
        try:
            pairs.append(find_nonuniq_pair(ShellConfig(dim, r1, s1), r2, n))
        except NoRootError:
            skipped += 1
        if len(pairs) == wanted:
            break
    return pairs, skipped


def suite_nonuniq(quick: bool = False) -> SuiteResult:
    """Determinant roots give matching per-mode symbols; sigma1 = 1 control."""
    res = SuiteResult("nonuniq", limit=1e-10)
    wanted = 3 if quick else 12
    for dim in (2, 3):
        pairs, skipped = nonuniq_sample(dim, wanted)
        res.notes.append(f"dim={dim}: {len(pairs)} bracketed cases, {skipped} without sign change")
        res.failures += len(pairs) < wanted
        for pair in pairs:
            worst = max(pair.det_residual, pair.symbol_gap)
            res.record(worst, worst <= res.limit)
        control = find_nonuniq_pair(ShellConfig(dim, 0.5, 1.0), 0.7, 1)
        err = abs(control.config_b.sigma1 - 1.0)
        res.record(err, err <= 1e-10)
    return res


def standard_oracle_grid():
    for dim in (2, 3):
        for r1 in (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8):
            for s1 in (0.25, 1.0, 4.0):
                for n in range(9):
                    yield ShellConfig(dim, r1, s1), n


def suite_oracle(quick: bool = False) -> SuiteResult:
    """Finite-difference symbols against the closed form, and observed order."""
    res = SuiteResult("oracle", limit=1e-5)
    cases = list(standard_oracle_grid())
    if quick:
        cases = cases[::7]
    for cfg, n in cases:
        est = solve_radial_bvp(RadialProblem(cfg, n, 4000)).symbol_estimate
        err = abs(est - nd_symbol(cfg, n))
        res.record(err, err <= res.limit)
    orders = []
    for cfg, n in cases[:: 9 if quick else 3]:
        table = convergence_study(RadialProblem(cfg, n))
        for p, ratio in zip(table.orders, table.ratios):
            orders.append(p)
            ok = 1.8 <= p <= 2.2 and 3.5 <= ratio <= 4.5
            res.checks += 1
            res.failures += not ok
    res.notes.append(f"observed orders in [{min(orders):.4f}, {max(orders):.4f}]")
    return res


SUITES = {
    "identities": suite_identities,
    "wronskian": suite_wronskian,
    "ratio_bound": suite_ratio_bound,
    "monotonicity": suite_monotonicity,
    "roundtrip": suite_roundtrip,
    "nonuniq": suite_nonuniq,
    "oracle": suite_oracle,
}


def run_suites(names=None, quick: bool = False) -> list[SuiteResult]:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    return [SUITES[n](quick) for n in names]


def format_table(results) -> str:
    lines = [f"{'suite':<14}{'status':<8}{'checks':>8}{'fail':>6}  worst"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<14}{status:<8}{r.checks:>8}{r.failures:>6}  {r.worst:.3e}")
        lines.extend(f"    {note}" for note in r.notes)
    return "\n".join(lines)
