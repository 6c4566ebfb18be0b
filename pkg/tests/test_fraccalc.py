import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import erfc

from frachaos.errors import AccuracyWarning, DomainError, MissingDerivative, TruncationWarning
from frachaos.fraccalc import (
    LEFT,
    RIGHT,
    FracOrder,
    KernelFn,
    caputo,
    expgauss_fracint_closed,
    expgauss_kernel,
    fracderiv_minus,
    fracint_0plus,
    fracint_kernel,
    fracint_minus,
    gaussian_fracint_closed,
)


def gauss(t=1.0, n=4):
    return KernelFn.gaussian(t, n_derivs=n)


# ---------------------------------------------------------------- FracOrder


@given(st.floats(0.01, 20))
def test_fracorder_ceiling(order):
    fo = FracOrder.of(order)
    if float(order).is_integer():
        assert fo.m == order
    else:
        assert fo.m == math.floor(order) + 1
    assert fo.m - 1 < order <= fo.m


def test_fracorder_rejects():
    with pytest.raises(DomainError):
        FracOrder.of(0.0)
    with pytest.raises(ValueError):
        FracOrder(1.5, 1)


def test_kernel_rejects_bad_decay():
    with pytest.raises(DomainError):
        KernelFn(f=np.exp, decay_rate=0.0)


# ---------------------------------------------------------------- integrals


def test_fracint_minus_examples():
    assert fracint_minus(FracOrder.of(1), gauss(), 0.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    expect = math.sqrt(math.pi / 2) * erfc(1 / math.sqrt(2))
    assert fracint_minus(FracOrder.of(1), gauss(), 1.0) == pytest.approx(expect, rel=1e-12)
    assert fracint_minus(FracOrder.of(0.5), gauss(), 1.0) == pytest.approx(gaussian_fracint_closed(0.5, 1, 1), rel=1e-8)


def test_fracint_0plus_examples():
    one = lambda y: np.ones_like(np.asarray(y, dtype=float))  # noqa: E731
    assert fracint_0plus(FracOrder.of(1), one, 2.0) == pytest.approx(2.0, rel=1e-13)
    assert fracint_0plus(FracOrder.of(0.5), one, 1.0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-12)
    assert fracint_0plus(FracOrder.of(2), lambda y: y, 1.0) == pytest.approx(1 / 6, rel=1e-13)
    with pytest.raises(DomainError):
        fracint_0plus(FracOrder.of(1), one, 0.0)


def test_fracint_minus_against_scipy_quad():
    for beta in (0.3, 0.8, 1.7):
        for x in (-1.0, 0.4, 2.0):
            ref, _ = quad(lambda s: s ** (beta - 1) * math.exp(-(x + s) ** 2 / 2), 0, np.inf, limit=200)
            assert fracint_minus(FracOrder.of(beta), gauss(), x) == pytest.approx(ref / math.gamma(beta), rel=1e-8)


def test_truncation_warning_for_slow_kernel():
    # declared decay far faster than the actual one
    slow = KernelFn(f=lambda y: 1.0 / (1.0 + np.asarray(y) ** 2), decay_rate=50.0)
    with pytest.warns(TruncationWarning):
        fracint_minus(FracOrder.of(0.5), slow, 0.0)


def test_no_warning_for_gaussian():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fracint_minus(FracOrder.of(0.5), gauss(), 0.3)


# ---------------------------------------------------------------- derivatives


def test_fracderiv_examples():
    assert fracderiv_minus(FracOrder.of(1), KernelFn.exponential(1.0), 0.0) == pytest.approx(1.0, rel=1e-12)
    mp.mp.dps = 30
    expect = math.exp(-0.25) * float(mp.pcfd(0.5, 1))
    assert fracderiv_minus(FracOrder.of(0.5), gauss(), 1.0) == pytest.approx(expect, rel=1e-10)
    assert fracderiv_minus(FracOrder.of(2), gauss(), 0.0) == pytest.approx(-1.0, rel=1e-12)


def test_fracderiv_without_derivatives_uses_differences():
    bare = KernelFn(f=gauss().f, decay_rate=0.5)
    with_d = fracderiv_minus(FracOrder.of(0.5), gauss(), 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        fd = fracderiv_minus(FracOrder.of(0.5), bare, 1.0)
    assert fd == pytest.approx(with_d, rel=1e-7)


def test_caputo_examples():
    square = KernelFn(f=lambda y: np.asarray(y) ** 2, derivs=(lambda y: 2 * np.asarray(y), lambda y: 2 + 0 * np.asarray(y)))
    assert caputo(LEFT, FracOrder.of(1), square, 3.0) == pytest.approx(6.0)
    ident = KernelFn(f=lambda y: np.asarray(y, dtype=float), derivs=(lambda y: np.ones_like(np.asarray(y, dtype=float)),))
    assert caputo(LEFT, FracOrder.of(0.5), ident, 1.0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-12)
    assert caputo(RIGHT, FracOrder.of(0.5), KernelFn.exponential(1.0), 0.0) == pytest.approx(1.0, rel=1e-12)


def test_caputo_needs_derivatives():
    with pytest.raises(MissingDerivative):
        caputo(RIGHT, FracOrder.of(1.5), KernelFn(f=gauss().f), 0.0)
    with pytest.raises(ValueError):
        caputo("sideways", FracOrder.of(0.5), gauss(), 0.0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_integer_collapse(m):
    g = gauss()
    for x in (-0.7, 0.4, 1.9):
        plain = float(g.derivative(m)(np.array([x]))[0])
        assert caputo(LEFT, FracOrder.of(m), g, abs(x)) == pytest.approx(float(g.derivative(m)(np.array([abs(x)]))[0]), abs=1e-10)
        assert caputo(RIGHT, FracOrder.of(m), g, x) == pytest.approx((-1) ** m * plain, abs=1e-10)


# ---------------------------------------------------------------- closed forms


def test_closed_form_examples():
    assert gaussian_fracint_closed(1, 1, 0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)
    assert gaussian_fracint_closed(0.5, 2, 1) == pytest.approx(fracint_minus(FracOrder.of(0.5), gauss(2.0), 1.0), rel=1e-8)
    assert gaussian_fracint_closed(2, 1, 0.5) == pytest.approx(fracint_minus(FracOrder.of(2), gauss(), 0.5), rel=1e-8)
    assert expgauss_fracint_closed(1, 1, 0, 0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)
    for beta, t, x, xi in ((0.5, 1, 1, 0.5), (1.5, 2, 0.3, 1)):
        ref, _ = quad(lambda s: s ** (beta - 1) * math.exp(-x * (xi + s) - t * (xi + s) ** 2 / 2), 0, np.inf, limit=200)
        assert expgauss_fracint_closed(beta, t, x, xi) == pytest.approx(ref / math.gamma(beta), rel=1e-8)


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0, 1.5, 2.75])
def test_closed_forms_vs_quadrature(beta):
    order = FracOrder.of(beta)
    for t in (0.5, 1.0, 2.0):
        for xi in (-0.5, 0.0, 0.5, 1.5):
            assert fracint_minus(order, gauss(t), xi) == pytest.approx(gaussian_fracint_closed(beta, t, xi), rel=1e-8)
        for x in (-1.0, 0.3, 2.0):
            for xi in (0.0, 1.0):
                q = fracint_minus(order, expgauss_kernel(x, t), xi)
                assert q == pytest.approx(expgauss_fracint_closed(beta, t, x, xi), rel=1e-8)


def test_closed_form_domain():
    with pytest.raises(DomainError):
        gaussian_fracint_closed(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        expgauss_fracint_closed(1.0, -1.0, 0.0, 0.0)


# ---------------------------------------------------------------- operator identities


@pytest.mark.parametrize("b1,b2", [(0.3, 0.7), (0.7, 1.2), (1.2, 0.3)])
def test_semigroup(b1, b2):
    inner = fracint_kernel(FracOrder.of(b2), gauss())
    for x in (0.0, 0.8):
        lhs = fracint_minus(FracOrder.of(b1), inner, x)
        assert lhs == pytest.approx(fracint_minus(FracOrder.of(b1 + b2), gauss(), x), rel=1e-6)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_derivative_inverts_integral(alpha):
    lifted = fracint_kernel(FracOrder.of(alpha), gauss())
    for x in (0.0, 0.6, 1.5):
        assert fracderiv_minus(FracOrder.of(alpha), lifted, x) == pytest.approx(math.exp(-x * x / 2), rel=1e-6)


def test_expgauss_kernel_derivatives():
    k = expgauss_kernel(0.4, 1.3, n_derivs=3)
    y = np.array([0.2, 1.1])
    h = 1e-5
    for m in (1, 2, 3):
        num = (k.derivative(m - 1)(y + h) - k.derivative(m - 1)(y - h)) / (2 * h)
        np.testing.assert_allclose(k.derivative(m)(y), num, rtol=1e-7)
