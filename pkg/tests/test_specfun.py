import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frachaos.errors import DomainError, NonConvergence, PoleError
from frachaos.quadrature import QuadratureGrid
from frachaos.specfun import (
    DEFAULT_CONFIG,
    PcfOrder,
    SpecFunConfig,
    digamma,
    hermite,
    kummer_1f1,
    pcf_D,
    pcf_D_log,
    pcf_U,
    pcf_U_integral,
)

mp.mp.dps = 30


# ---------------------------------------------------------------- kummer


def test_kummer_examples():
    assert kummer_1f1(3.2, 0.7, 0.0) == 1.0
    assert kummer_1f1(1, 1, 1) == pytest.approx(math.e, rel=1e-14)
    assert kummer_1f1(-1, 0.5, 0.3) == pytest.approx(0.4, abs=1e-15)


def test_kummer_pole_and_termination():
    with pytest.raises(PoleError):
        kummer_1f1(0.5, -2, 1.0)
    with pytest.raises(PoleError):
        kummer_1f1(0.5, 0, 1.0)
    # a = -1 terminates before the (b)_n pole at n = 3 is reached
    assert kummer_1f1(-1, -2, 1.0) == pytest.approx(1.0 + 0.5, rel=1e-15)


def test_kummer_nonconvergence():
    cfg = SpecFunConfig(max_terms=10)
    with pytest.raises(NonConvergence):
        kummer_1f1(0.5, 1.5, 40.0, cfg)


@pytest.mark.parametrize("k", [0, 1, 2, 5, 8])
def test_kummer_terminating_matches_horner(k):
    a, b, z = -k, 0.75, 2.3
    coeffs = []
    c = 1.0
    for n in range(k + 1):
        coeffs.append(c)
        c *= (a + n) / ((b + n) * (n + 1))
    expected = 0.0
    for c in reversed(coeffs):
        expected = expected * z + c
    assert kummer_1f1(a, b, z) == pytest.approx(expected, rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("a,b,z", [(0.3, 1.7, 12.0), (2.5, 0.5, -9.0), (-3.5, 1.5, 6.0), (1.2, 2.2, -30.0)])
def test_kummer_vs_mpmath(a, b, z):
    assert kummer_1f1(a, b, z) == pytest.approx(float(mp.hyp1f1(a, b, z)), rel=1e-12)


# ---------------------------------------------------------------- orders


def test_pcf_order_conventions():
    o = PcfOrder.from_alpha(1.3)
    assert o.a == pytest.approx(-1.8)
    assert PcfOrder.from_a(0.2).alpha == pytest.approx(-0.7)
    with pytest.raises(ValueError):
        PcfOrder(1.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SpecFunConfig(series_tol=0.0)
    with pytest.raises(ValueError):
        SpecFunConfig(max_terms=5)
    with pytest.raises(ValueError):
        SpecFunConfig(asym_switch_z=-1.0)


# ---------------------------------------------------------------- U and D


def test_pcf_examples():
    assert pcf_U(-0.5, 1.3) == pytest.approx(math.exp(-1.3**2 / 4), rel=1e-14)
    assert pcf_U(-1.5, 2.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)
    assert pcf_U(0.5, 10.0) == pytest.approx(pcf_U_integral(0.5, 10.0), rel=1e-10)
    assert pcf_D(0, 2) == pytest.approx(math.exp(-1), rel=1e-14)
    assert pcf_D(1, 0) == 0.0
    expected = 2**0.25 * math.cos(math.pi / 4) * math.gamma(0.75) / math.sqrt(math.pi)
    assert pcf_D(0.5, 0.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.3, 3.6, -0.5, -1.0, -2.6, -6.3, 5.5, 10.3, -12.7])
def test_pcf_D_vs_mpmath(alpha):
    zs = np.concatenate([np.linspace(-30, 30, 121), [2.5, 8.0, -20.0]])
    sign, logmag = pcf_D_log(alpha, zs)
    for z, s, lg in zip(zs, sign, logmag):
        ref = mp.pcfd(alpha, z)
        if abs(ref) < mp.mpf(10) ** -280:
            continue
        assert s == float(mp.sign(ref))
        assert abs(math.expm1(lg - float(mp.log(abs(ref))))) < 1e-11, (alpha, z)


def test_pcf_D_large_order_envelope():
    # relative error is meaningless next to zeros; scale by the local envelope
    zs = np.linspace(-10, 12, 89)
    for alpha in (20.5, 29.9):
        got = pcf_D(alpha, zs)
        ref = np.array([float(mp.pcfd(alpha, z)) for z in zs])
        env = np.array([np.abs(ref[max(0, i - 3) : i + 4]).max() for i in range(zs.size)])
        assert np.max(np.abs(got - ref) / env) < 1e-8


def test_pcf_order_limit():
    with pytest.raises(DomainError):
        pcf_D(31.0, 1.0)


def test_pcf_overflow_and_log_domain():
    with pytest.raises(OverflowError):
        pcf_D(0.5, -60.0)
    sign, lg = pcf_D_log(0.5, -60.0)
    assert sign[0] == float(mp.sign(mp.pcfd(0.5, -60)))
    assert lg[0] == pytest.approx(float(mp.log(abs(mp.pcfd(0.5, -60)))), rel=1e-13)


def test_pcf_array_and_scalar_output():
    assert isinstance(pcf_D(0.5, 1.0), float)
    out = pcf_D(0.5, [0.0, 1.0])
    assert isinstance(out, np.ndarray) and out.shape == (2,)


@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.5, 3.0])
def test_oracle_agreement_with_integral(gamma):
    for z in np.linspace(-2, 6, 17):
        u = pcf_U(gamma, z)
        assert abs(u - pcf_U_integral(gamma, z)) <= 1e-9 * (1 + abs(u))


def test_integral_examples():
    assert pcf_U_integral(0.5, 0.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)
    assert pcf_U_integral(0.5, 3.0) == pytest.approx(pcf_U(0.5, 3.0), rel=1e-10)
    assert pcf_U_integral(1.5, 1.0) == pytest.approx(pcf_U(1.5, 1.0), rel=1e-10)
    with pytest.raises(DomainError):
        pcf_U_integral(-0.5, 1.0)


def _stitch_error(alpha, z0, d=1e-6):
    # D'(z) = z D(z)/2 - D_{alpha+1}(z) removes the true slope across the seam
    left, right = pcf_D(alpha, z0 - d), pcf_D(alpha, z0 + d)
    slope = 0.5 * z0 * pcf_D(alpha, z0) - pcf_D(alpha + 1, z0)
    return abs(right - left - 2 * d * slope) / abs(pcf_D(alpha, z0))


@pytest.mark.parametrize("alpha", [-6.3, -2.6, -0.5, 0.3, 1.7, 5.1])
def test_branch_continuity(alpha):
    seams = [DEFAULT_CONFIG.asym_switch_z + abs(alpha), DEFAULT_CONFIG.series_switch_z, -20.0]
    if alpha < -1:
        seams.append(DEFAULT_CONFIG.series_switch_z / math.sqrt(-alpha))
    for z0 in seams:
        assert _stitch_error(alpha, z0) <= 1e-8


# ---------------------------------------------------------------- hermite


def test_hermite_examples():
    assert hermite(0, 7.3, 2.1) == 1.0
    assert hermite(2, 1.5, 0.25) == pytest.approx(2.0)
    assert hermite(3, 2.0, 1.0) == pytest.approx(2.0)


def test_hermite_domain():
    with pytest.raises(DomainError):
        hermite(-1, 1.0, 1.0)
    with pytest.raises(DomainError):
        hermite(2, 1.0, 0.0)


@given(
    n=st.integers(0, 12),
    x=st.floats(-5, 5),
    t=st.floats(0.05, 5),
)
def test_hermite_explicit_sum(n, x, t):
    total = sum(
        (-1) ** j * math.factorial(n) / (2**j * math.factorial(n - 2 * j) * math.factorial(j)) * t**j * x ** (n - 2 * j)
        for j in range(n // 2 + 1)
    )
    scale = sum(
        math.factorial(n) / (2**j * math.factorial(n - 2 * j) * math.factorial(j)) * t**j * abs(x) ** (n - 2 * j)
        for j in range(n // 2 + 1)
    )
    assert abs(hermite(n, x, t) - total) <= 1e-12 * scale


def test_integer_order_consistency():
    xs = np.linspace(-5, 5, 21)
    for t in (0.25, 1.0, 4.0):
        for n in range(11):
            via_d = t ** (n / 2) * np.exp(xs**2 / (4 * t)) * pcf_D(n, xs / math.sqrt(t))
            exact = hermite(n, xs, t)
            scale = np.maximum(np.abs(exact), 1e-300)
            nonzero = np.abs(exact) > 1e-9 * t ** (n / 2)
            assert np.all(np.abs(via_d - exact)[nonzero] / scale[nonzero] <= 1e-10)


# ---------------------------------------------------------------- digamma


def test_digamma_examples():
    g = 0.5772156649015329
    assert digamma(1) == pytest.approx(-g, rel=1e-14)
    assert digamma(2) == pytest.approx(1 - g, rel=1e-14)
    assert digamma(0.5) == pytest.approx(-g - 2 * math.log(2), rel=1e-14)
    with pytest.raises(PoleError):
        digamma(-3.0)


@given(st.floats(0.1, 50))
def test_digamma_shift(z):
    assert abs(digamma(z + 1) - digamma(z) - 1 / z) <= 1e-12


@settings(max_examples=60)
@given(st.floats(-9.9, 60).filter(lambda z: abs(z - round(z)) > 1e-3))
def test_digamma_vs_mpmath(z):
    ref = float(mp.digamma(z))
    assert abs(digamma(z) - ref) <= 1e-12 * max(1.0, abs(ref))


# ---------------------------------------------------------------- grids


@pytest.mark.parametrize("t", [0.01, 1.0, 4.0])
def test_weighted_grids_reproduce_mass(t):
    half = QuadratureGrid.half_line(t)
    full = QuadratureGrid.full_line(t)
    assert half.integrate(np.ones_like) == pytest.approx(math.sqrt(math.pi * t / 2), rel=1e-12)
    assert full.integrate(np.ones_like) == pytest.approx(math.sqrt(2 * math.pi * t), rel=1e-12)
    assert np.all(half.weights > 0) and np.all(np.diff(half.nodes) > 0)


def test_grid_rejects_bad_input():
    with pytest.raises(DomainError):
        QuadratureGrid.half_line(0.0)
    with pytest.raises(ValueError):
        QuadratureGrid("bogus", 1, 1.0, np.array([0.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        QuadratureGrid("finite_panel", 2, 1.0, np.array([1.0, 0.0]), np.array([1.0, 1.0]))
