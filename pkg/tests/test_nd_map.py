import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shellrecon import special_fn as sf
from shellrecon.errors import DomainError, TruncationWarning
from shellrecon.nd_map import (
    NdSymbolTable,
    ShellConfig,
    difference_norm,
    nd_symbol,
    norm_sweep,
    operator_norm,
    reference_symbol,
    reference_table,
    rho,
    rho_from_symbol,
    symbol_gap_to_reference,
    symbol_table,
)
from shellrecon.oracle import RadialProblem, solve_radial_bvp
from shellrecon.special_fn import Order

mp.mp.dps = 40

configs = st.builds(
    ShellConfig,
    st.sampled_from([2, 3]),
    st.floats(0.05, 0.95),
    st.floats(0.02, 50.0),
)


def mp_symbol(cfg, n):
    """Cross-product form evaluated from raw Bessel values at 40 digits."""
    nu = abs(n) + (0.5 if cfg.dimension == 3 else 0)
    r1, s1 = mp.mpf(cfg.r1), mp.mpf(cfg.sigma1)
    i = lambda x: mp.besseli(nu, x)  # noqa: E731
    k = lambda x: mp.besselk(nu, x)  # noqa: E731
    di = lambda x: mp.diff(i, x)  # noqa: E731
    dk = lambda x: mp.diff(k, x)  # noqa: E731
    d = i(1) * k(r1) - k(1) * i(r1)
    d10 = di(1) * k(r1) - dk(1) * i(r1)
    d01 = i(1) * dk(r1) - k(1) * di(r1)
    d11 = di(1) * dk(r1) - dk(1) * di(r1)
    x1 = r1 / mp.sqrt(s1)
    a, b = i(x1), s1 * di(x1)
    return (a * d01 - b * d) / (a * d11 - b * d10)


def mp_rho_symbol(cfg, n):
    """``rho`` form: ``rho`` from matching at ``r1``, then ``(rho K - I)/(rho K' - I')`` at 1."""
    nu = abs(n) + (0.5 if cfg.dimension == 3 else 0)
    r1, s1 = mp.mpf(cfg.r1), mp.mpf(cfg.sigma1)
    x1 = r1 / mp.sqrt(s1)
    t = s1 * mp.diff(lambda x: mp.besseli(nu, x), x1) / mp.besseli(nu, x1)
    ir, kr = mp.besseli(nu, r1), mp.besselk(nu, r1)
    dir_, dkr = mp.diff(lambda x: mp.besseli(nu, x), r1), mp.diff(lambda x: mp.besselk(nu, x), r1)
    rho_v = (t * ir - dir_) / (t * kr - dkr)
    i1, k1 = mp.besseli(nu, 1), mp.besselk(nu, 1)
    di1, dk1 = mp.diff(lambda x: mp.besseli(nu, x), 1), mp.diff(lambda x: mp.besselk(nu, x), 1)
    return (rho_v * k1 - i1) / (rho_v * dk1 - di1), rho_v


# --- rho ----------------------------------------------------------------------

def test_rho_vanishes_at_unit_sigma():
    assert rho(ShellConfig(2, 0.5, 1.0), 3) == 0.0


@pytest.mark.parametrize("cfg,n", [(ShellConfig(2, 0.5, 2.0), 0), (ShellConfig(3, 0.3, 0.5), 1)])
def test_rho_two_ways(cfg, n):
    assert rho(cfg, n) == pytest.approx(rho_from_symbol(cfg, n), rel=1e-11)
    assert rho(cfg, n) == pytest.approx(float(mp_rho_symbol(cfg, n)[1]), rel=1e-12)


# --- symbols ------------------------------------------------------------------

def test_symbol_at_unit_sigma_is_reference():
    i, di = sf.bessel_i(Order.integer(1), 1.0)
    assert nd_symbol(ShellConfig(2, 0.5, 1.0), 1) == pytest.approx(i / di, rel=1e-14)


@pytest.mark.parametrize("cfg,n", [(ShellConfig(2, 0.5, 2.0), 1), (ShellConfig(3, 0.5, 2.0), 0)])
def test_symbol_matches_oracle(cfg, n):
    est = solve_radial_bvp(RadialProblem(cfg, n, 4000)).symbol_estimate
    assert abs(est - nd_symbol(cfg, n)) <= 1e-6


@given(configs, st.integers(0, 30))
def test_symbol_matches_mpmath(cfg, n):
    assert nd_symbol(cfg, n) == pytest.approx(float(mp_symbol(cfg, n)), rel=1e-12)


@given(configs, st.integers(0, 12))
def test_rho_form_matches_mpmath(cfg, n):
    assert nd_symbol(cfg, n, form="rho") == pytest.approx(float(mp_rho_symbol(cfg, n)[0]), rel=1e-12)


def test_dual_forms_agree_on_500_configs():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(500):
        cfg = ShellConfig(int(rng.integers(2, 4)), float(rng.uniform(0.05, 0.95)), float(np.exp(rng.uniform(-4, 4))))
        n = int(rng.integers(0, 40))
        a, b = nd_symbol(cfg, n, "cross"), nd_symbol(cfg, n, "rho")
        worst = max(worst, abs(a - b) / abs(a))
    assert worst <= 1e-11


def test_unknown_form():
    with pytest.raises(ValueError):
        nd_symbol(ShellConfig(2, 0.5, 2.0), 0, form="other")


@given(configs, st.integers(0, 40))
def test_symbol_positive_and_mode_symmetric(cfg, n):
    lam = nd_symbol(cfg, n)
    assert lam > 0
    if cfg.dimension == 2:
        assert nd_symbol(cfg, -n) == lam


@given(st.sampled_from([2, 3]), st.floats(0.1, 0.9), st.floats(0.05, 20.0), st.floats(1.01, 3.0), st.integers(0, 8))
def test_symbol_decreases_with_sigma(dim, r1, s1, factor, n):
    lo, hi = ShellConfig(dim, r1, s1), ShellConfig(dim, r1, s1 * factor)
    # the raw symbols can tie to within an ulp at high modes; the gaps cannot
    assert nd_symbol(hi, n) <= nd_symbol(lo, n) * (1 + 4e-16)
    assert symbol_gap_to_reference(hi, n) < symbol_gap_to_reference(lo, n)


def test_high_mode_symbols_finite():
    lam = nd_symbol(ShellConfig(3, 0.9, 0.01), 400)
    assert math.isfinite(lam) and lam == pytest.approx(reference_symbol(3, 400), rel=1e-6)


# --- reference ----------------------------------------------------------------

def test_reference_3d_closed_form():
    s, c = math.sinh(1.0), math.cosh(1.0)
    assert reference_symbol(3, 0) == pytest.approx(s / (c - s / 2), rel=1e-14)


def test_reference_2d_derivative_identity():
    i0, _ = sf.bessel_i(Order.integer(0), 1.0)
    i1, _ = sf.bessel_i(Order.integer(1), 1.0)
    assert reference_symbol(2, 0) == pytest.approx(i0 / i1, rel=1e-14)


def test_reference_large_mode():
    assert reference_symbol(2, 40) == pytest.approx(1 / 40, rel=0.05)


@given(configs, st.integers(0, 60))
def test_gap_matches_difference(cfg, n):
    gap = symbol_gap_to_reference(cfg, n)
    direct = nd_symbol(cfg, n) - reference_symbol(cfg.dimension, n)
    assert gap == pytest.approx(direct, rel=1e-9, abs=1e-15)


def test_gap_keeps_relative_accuracy_when_tiny():
    cfg = ShellConfig(2, 0.5, 1.0 + 1e-9)
    exact = mp_symbol(cfg, 1) - mp.besseli(1, 1) / mp.diff(lambda x: mp.besseli(1, x), 1)
    assert symbol_gap_to_reference(cfg, 1) == pytest.approx(float(exact), rel=1e-6)


# --- tables and norms ---------------------------------------------------------

def test_symbol_table_rows():
    assert len(symbol_table(ShellConfig(3, 0.4, 0.25), 64).symbols) == 65
    table = symbol_table(ShellConfig(2, 0.4, 3.0), 0)
    assert len(table.symbols) == 1
    assert table[0] == nd_symbol(ShellConfig(2, 0.4, 3.0), 0)


def test_symbol_table_rejects_negative():
    with pytest.raises(DomainError):
        symbol_table(ShellConfig(2, 0.4, 3.0), -1)


def test_difference_norm_zero_at_unit_sigma():
    res = difference_norm(ShellConfig(2, 0.37, 1.0))
    assert res.value == 0.0 and res.certified


def test_difference_norm_between_configs():
    a, b = ShellConfig(2, 0.5, 2.0), ShellConfig(2, 0.5, 2.0)
    assert difference_norm(a, b).value == 0.0
    with pytest.raises(DomainError):
        difference_norm(a, ShellConfig(3, 0.5, 2.0))


def test_sigma_sweep_decreasing():
    sweep = norm_sweep(ShellConfig(2, 0.5, 1.5), "sigma1", [1.5, 1.25, 1.125, 1.0625])
    assert sweep.strictly_decreasing and sweep.certified


def test_r1_sweep_decreasing():
    sweep = norm_sweep(ShellConfig(2, 0.4, 4.0), "r1", [0.4, 0.2, 0.1, 0.05])
    assert sweep.strictly_decreasing


@pytest.mark.parametrize("dim", [2, 3])
def test_sweeps_from_below_and_in_3d(dim):
    below = norm_sweep(ShellConfig(dim, 0.5, 0.5), "sigma1", [0.5, 0.75, 0.875, 0.9375])
    assert below.strictly_decreasing
    r_sweep = norm_sweep(ShellConfig(dim, 0.4, 0.25), "r1", [0.4, 0.2, 0.1, 0.05])
    assert r_sweep.strictly_decreasing


def test_single_point_sweep_at_unit_sigma():
    sweep = norm_sweep(ShellConfig(3, 0.5, 1.0), "sigma1", [1.0])
    assert sweep.rows[0].norm == 0.0


def test_sweep_bad_axis():
    with pytest.raises(DomainError):
        norm_sweep(ShellConfig(2, 0.5, 2.0), "r2", [0.1])


def test_operator_norm_reference():
    res = operator_norm(reference_table(2, 64))
    weighted = [math.sqrt(1 + n * n) * reference_symbol(2, n) for n in range(65)]
    assert res.value == max(weighted)
    assert res.argmax_mode == int(np.argmax(weighted))


def test_operator_norm_warns_on_growing_tail():
    table = NdSymbolTable(2, 20, tuple(float(n) for n in range(21)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = operator_norm(table)
    assert not res.certified
    assert any(issubclass(w.category, TruncationWarning) for w in caught)


@pytest.mark.parametrize("kwargs", [dict(dimension=4, r1=0.5, sigma1=1.0), dict(dimension=2, r1=1.0, sigma1=1.0),
                                    dict(dimension=2, r1=0.5, sigma1=0.0), dict(dimension=2, r1=0.5, sigma1=math.inf)])
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        ShellConfig(**kwargs)
