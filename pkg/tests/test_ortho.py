import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from frachaos.errors import GridMismatch, NotOrthogonal, PoleError
from frachaos.ortho import (
    AlphaSet,
    a_conjugate,
    a_fn,
    cross_check_l01,
    find_conjugate_roots,
    greedy_alpha_set,
    l01_closed_form_unit,
    norm_sq_H,
    norm_sq_report,
    t_exponent,
    weighted_inner,
)
from frachaos.pncf import PncfSpec, eval_H
from frachaos.quadrature import QuadratureGrid
from frachaos.specfun import hermite

one = lambda x: np.ones_like(x)  # noqa: E731
ident = lambda x: x  # noqa: E731
non_integer = st.floats(-4.9, 4.9).filter(lambda a: abs(a - round(a)) > 1e-3)


def H(alpha, t):
    return lambda x: eval_H(PncfSpec(alpha, t), x)


# ---------------------------------------------------------------- inner products


def test_weighted_inner_examples():
    assert weighted_inner(one, one, 2.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert weighted_inner(ident, one, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert weighted_inner(ident, ident, 1.0) == pytest.approx(math.sqrt(2 * math.pi) / 2, rel=1e-12)


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        weighted_inner(one, one, 1.0, QuadratureGrid.half_line(2.0))
    with pytest.raises(GridMismatch):
        weighted_inner(one, one, 1.0, QuadratureGrid.full_line(1.0))


@given(t=st.floats(0.05, 20))
@settings(max_examples=25, deadline=None)
def test_half_line_grid_invariants(t):
    g = QuadratureGrid.half_line(t)
    assert np.all(g.weights > 0)
    assert np.all(np.diff(g.nodes) > 0)
    assert g.weights.sum() == pytest.approx(math.sqrt(math.pi * t / 2), rel=1e-12)


def test_classical_hermite_orthogonality():
    t = 1.7
    g = QuadratureGrid.full_line(t, n_nodes=40)
    for n in range(9):
        for k in range(9):
            val = g.integrate(lambda x: hermite(n, x, t) * hermite(k, x, t)) / math.sqrt(2 * math.pi * t)
            expect = math.factorial(n) * t**n if n == k else 0.0
            assert abs(val - expect) <= 1e-10 * max(1.0, math.factorial(max(n, k)) * t ** max(n, k))


# ---------------------------------------------------------------- A function


def test_a_fn_examples():
    assert a_fn(1.37, 1.37) == 0.0
    assert a_fn(0.5, 0.5) == 0.0
    assert a_fn(0.3, 0.7) == pytest.approx(a_conjugate(0.3), rel=1e-10)


@pytest.mark.parametrize("bad", [0.0, 1.0, 2.0, 5.0])
def test_a_fn_poles(bad):
    with pytest.raises(PoleError):
        a_fn(bad, 0.3)
    with pytest.raises(PoleError):
        a_fn(0.3, bad)


def test_antisymmetry_grid():
    orders = [-3.7, -2.2, -1.5, -0.6, 0.3, 0.8, 1.4, 2.6, 3.3, 4.45]
    for a in orders:
        for b in orders:
            assert a_fn(a, b) == -a_fn(b, a)


@given(a=non_integer)
@settings(max_examples=80)
def test_conjugate_consistency(a):
    assume(abs((1 - a) - round(1 - a)) > 1e-3)
    full = a_fn(a, 1 - a)
    assert a_conjugate(a) == pytest.approx(full, rel=1e-10, abs=1e-12)


def test_a_conjugate_examples():
    assert abs(a_conjugate(0.5)) <= 1e-14
    assert a_conjugate(3.5) > 0 > a_conjugate(3.9)
    assert a_conjugate(0.999) < -1e3
    with pytest.raises(PoleError):
        a_conjugate(2.0)


# ---------------------------------------------------------------- roots


def test_root_examples():
    assert find_conjugate_roots(0.4, 0.6) == [pytest.approx(0.5, abs=1e-12)]
    roots = find_conjugate_roots(3.05, 3.95)
    assert len(roots) == 1 and roots[0] == pytest.approx(3.6017474734431656, abs=1e-10)
    assert abs(a_conjugate(roots[0])) <= 1e-10


def test_root_count_matches_dense_scan():
    roots = find_conjugate_roots(1.1, 1.9)
    xs = np.arange(1.1, 1.9, 1e-4)
    vals = np.array([a_conjugate(x) for x in xs])
    assert len(roots) == int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1])))


def test_exclude_symmetric_and_no_integer_brackets():
    assert find_conjugate_roots(0.4, 0.6, exclude_symmetric=True) == []
    # the poles at 1 and 2 flip the sign but are not roots
    for r in find_conjugate_roots(0.6, 2.4):
        assert abs(a_conjugate(r)) <= 1e-10
        assert abs(r - round(r)) > 1e-3
    assert find_conjugate_roots(2.0, 1.0) == []


def test_root_pairs_are_orthogonal():
    for lo, hi in ((1.05, 1.95), (3.05, 3.95), (5.05, 5.95)):
        for r in find_conjugate_roots(lo, hi):
            for t in (0.5, 2.0):
                inner = weighted_inner(H(r, t), H(1 - r, t), t)
                bound = 1e-7 * math.sqrt(norm_sq_H(r, t) * norm_sq_H(1 - r, t))
                assert abs(inner) <= bound


# ---------------------------------------------------------------- alpha sets


def test_alpha_set_invariants():
    r = find_conjugate_roots(3.05, 3.95)[0]
    s = AlphaSet.conjugate_pair(r, 1.0)
    assert len(s) == 2 and abs(s.pairwise_A[0, 1]) <= 1e-8
    with pytest.raises(NotOrthogonal):
        AlphaSet.build((0.3, 0.6), 1.0)
    with pytest.raises(NotOrthogonal):
        AlphaSet((2.0,), 1.0, np.zeros((1, 1)))


def test_greedy_alpha_set():
    r1 = find_conjugate_roots(1.05, 1.95)[0]
    r3 = find_conjugate_roots(3.05, 3.95)[0]
    s = greedy_alpha_set([r3, 1 - r3, 2.0, r1, 1 - r1], 1.0)
    assert s.alphas[:2] == (r3, 1 - r3)
    assert 2.0 not in s.alphas


# ---------------------------------------------------------------- norms and the audit


def test_norm_examples():
    assert norm_sq_H(1.0, 1.0) == pytest.approx(math.sqrt(2 * math.pi) / 2, rel=1e-12)
    assert norm_sq_H(-2.6, 1.0) > 0
    rep = norm_sq_report(0.5, 1.0)
    assert rep.quadrature == pytest.approx(rep.audited_closed_form, rel=1e-9)
    assert rep.printed_closed_form == rep.audited_closed_form  # same at t = 1


@pytest.mark.parametrize("alpha", [-1.5, -0.5, 0.3, 0.5, 1.7, 2.4])
def test_norm_scales_as_t_alpha_plus_half(alpha):
    f = lambda t: norm_sq_H(alpha, t)  # noqa: E731
    assert t_exponent(f, 1.0) == pytest.approx(alpha + 0.5, abs=1e-8)
    rep = norm_sq_report(alpha, 3.0)
    assert rep.quadrature == pytest.approx(rep.audited_closed_form, rel=1e-8)
    assert rep.quadrature != pytest.approx(rep.printed_closed_form, rel=1e-3)


def test_natural_orders_route_to_classical_norm():
    for n in range(4):
        rep = norm_sq_report(float(n), 2.0)
        assert rep.quadrature == pytest.approx(0.5 * math.factorial(n) * 2.0**n * math.sqrt(4 * math.pi), rel=1e-10)


def test_l01_examples():
    lhs, rhs = cross_check_l01(0.3, 0.6, 1.0)
    assert lhs == pytest.approx(rhs, rel=1e-9)
    l4 = cross_check_l01(0.3, 0.6, 4.0)
    assert l4.lhs / lhs == pytest.approx(2.0, rel=1e-6)
    # the printed factor t would give 4
    assert l4.rhs / rhs == pytest.approx(4.0, rel=1e-12)
    r = find_conjugate_roots(3.05, 3.95)[0]
    assert abs(cross_check_l01(r, 1 - r, 1.0).lhs) <= 1e-9


def test_l01_closed_form_formula():
    ak, am = 0.3, 0.6
    expect = a_fn(ak, am) / ((am - ak) * 2 ** ((3 + ak + am) / 2) * gamma(-ak) * gamma(-am))
    assert l01_closed_form_unit(ak, am) == pytest.approx(expect, rel=1e-14)
    with pytest.raises(PoleError):
        cross_check_l01(1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        cross_check_l01(0.5, 0.5, 1.0)
