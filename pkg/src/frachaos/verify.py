"""Named verification suites run by ``frachaos verify``.

Every suite returns a list of :class:`Claim` rows. A row with a tolerance is
a check, passed when ``|measured - target| <= tolerance``; a row without one
is a report (for instance a measured exponent next to a printed one) and
never affects the exit status.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .appell import appell_power
from .chaos import expand_fractional, expand_polynomial
from .errors import DivergentIntegral
from .fraccalc import FracOrder, KernelFn, expgauss_fracint_closed, expgauss_kernel, fracint_minus, gaussian_fracint_closed
from .ortho import (
    AlphaSet,
    a_conjugate,
    cross_check_l01,
    find_conjugate_roots,
    l01_closed_form_unit,
    norm_sq_report,
    t_exponent,
    weighted_inner,
)
from .pncf import (
    PncfSpec,
    derivatives_H,
    eval_H,
    heat_residual,
    heat_residual_fd,
    liouville_rep_check,
    ode_residual_D,
    small_t_limit_error,
)
from .specfun import hermite, pcf_D
from .stochproc import (
    BivariateNormalParams,
    conditional_expectation_check,
    covariance_moment_oracle,
    covariance_report,
    ito_strong_order,
    mc_martingale_test,
    mc_mean_test,
    self_similarity_ks,
    simulate_wiener,
)

STOCHASTIC = ("ito", "martingale", "selfsim")


@dataclass(frozen=True)
class Claim:
    suite: str
    claim: str
    params: dict
    measured: float
    target: float | None = None
    tolerance: float | None = None
    note: str = ""
    passed: bool | None = field(init=False)

    def __post_init__(self):
        if self.tolerance is None:
            ok = None
        else:
            ok = bool(np.isfinite(self.measured) and abs(self.measured - self.target) <= self.tolerance)
        object.__setattr__(self, "passed", ok)

    def sort_key(self):
        def k(v):
            if isinstance(v, (int, float)):
                return (0, float(v), "")
            if isinstance(v, (list, tuple)):
                return (1, 0.0, repr(tuple(v)))
            return (2, 0.0, str(v))

        return (self.suite, self.claim, tuple((name, k(v)) for name, v in self.params.items()))


@dataclass(frozen=True)
class Settings:
    seed: int = 42
    alphas: tuple[float, ...] | None = None


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


# --------------------------------------------------------------------------
# Deterministic suites
# --------------------------------------------------------------------------


def suite_specfun(cfg: Settings) -> list[Claim]:
    xs = np.linspace(-5.0, 5.0, 21)
    out = []
    for t in (0.25, 1.0, 4.0):
        worst = 0.0
        for n in range(11):
            via_d = t ** (n / 2) * np.exp(xs**2 / (4 * t)) * pcf_D(n, xs / math.sqrt(t))
            exact = hermite(n, xs, t)
            # exact zeros of H_n (x = +-sqrt(t) for n = 2, ...) have no relative error
            nonzero = np.abs(exact) > 1e-9 * t ** (n / 2)
            worst = max(worst, float(np.max(np.abs(via_d - exact)[nonzero] / np.abs(exact[nonzero]))))
        out.append(Claim("specfun", "integer_reduction", {"t": t, "n_max": 10, "n_x": 21}, worst, 0.0, 1e-10))
    return out


PDE_ALPHAS = (-0.5, 0.5, 1.3, 2.5, 3.7)
PDE_X = (-1.0, 0.5, 1.0, 2.0)
PDE_T = (0.5, 1.0, 4.0)


def suite_pde(cfg: Settings) -> list[Claim]:
    out = []
    for a in (0.5, 1.5, 2.5):
        worst = max(small_t_limit_error(a, x) for x in (0.5, 1.0, 2.0, 3.0))
        out.append(Claim("pde", "small_t_limit", {"alpha": a, "t": 1e-6}, worst, 0.0, 1e-3))
    for a in PDE_ALPHAS:
        fd = rec = ode = 0.0
        for t in PDE_T:
            for x in PDE_X:
                spec = PncfSpec(a, t)
                fd = max(fd, abs(heat_residual_fd(spec, x)))
                scale = 1.0 + abs(a * (a - 1.0) * float(eval_H(spec.shifted(2), x)))
                rec = max(rec, abs(float(heat_residual(spec, x))) / scale)
                f = float(pcf_D(a, x / math.sqrt(t)))
                ode = max(ode, abs(ode_residual_D(a, t, x)) / (1.0 + abs(f)))
        out.append(Claim("pde", "heat_residual_fd", {"alpha": a}, fd, 0.0, 1e-6))
        out.append(Claim("pde", "heat_residual_recurrence", {"alpha": a}, rec, 0.0, 1e-9))
        out.append(Claim("pde", "weber_ode_residual", {"alpha": a}, ode, 0.0, 1e-6))
    for a in (0.5, 1.7, 3.2):
        ex = et = 0.0
        for t in (0.5, 0.8, 1.0, 1.5, 2.0):
            for x in (0.3, 0.8, 1.5, 2.2, 3.0):
                d = derivatives_H(PncfSpec(a, t), x)
                hx, ht = 1e-5 * math.sqrt(t), 1e-5 * t
                fx = (float(eval_H(PncfSpec(a, t), x + hx)) - float(eval_H(PncfSpec(a, t), x - hx))) / (2 * hx)
                ft = (float(eval_H(PncfSpec(a, t + ht), x)) - float(eval_H(PncfSpec(a, t - ht), x))) / (2 * ht)
                ex = max(ex, _rel(fx, float(d.d_dx)))
                et = max(et, _rel(ft, float(d.d_dt)))
        out.append(Claim("pde", "derivative_x", {"alpha": a}, ex, 0.0, 1e-6))
        out.append(Claim("pde", "derivative_t", {"alpha": a}, et, 0.0, 1e-6))
    for a in (0.5, 1.5, 2.5):
        for t in (1.0, 2.0):
            worst = max(_rel(*reversed(liouville_rep_check(a, t, x))) for x in (0.5, 1.0, 2.0))
            out.append(Claim("pde", "liouville_representation", {"alpha": a, "t": t}, worst, 0.0, 1e-6))
    return out


def suite_fraccalc(cfg: Settings) -> list[Claim]:
    out = []
    for beta in (0.25, 0.5, 1.0, 1.5, 2.75):
        order = FracOrder.of(beta)
        g_err = e_err = 0.0
        for t in (0.5, 1.0, 2.0):
            kern = KernelFn.gaussian(t)
            for xi in (-0.5, 0.0, 0.5, 1.5):
                g_err = max(g_err, _rel(fracint_minus(order, kern, xi), gaussian_fracint_closed(beta, t, xi)))
            for x in (-1.0, 0.3, 1.0, 2.0):
                ek = expgauss_kernel(x, t)
                for xi in (0.0, 0.5, 1.0):
                    e_err = max(e_err, _rel(fracint_minus(order, ek, xi), expgauss_fracint_closed(beta, t, x, xi)))
        out.append(Claim("fraccalc", "gaussian_closed_form", {"beta": beta}, g_err, 0.0, 1e-8))
        out.append(Claim("fraccalc", "expgauss_closed_form", {"beta": beta}, e_err, 0.0, 1e-8))
    return out


def _pair_root() -> float:
    roots = find_conjugate_roots(3.05, 3.95)
    if len(roots) != 1:
        raise RuntimeError(f"expected one conjugate root in (3.05, 3.95), found {roots}")
    return roots[0]


def suite_ortho(cfg: Settings) -> list[Claim]:
    root = _pair_root()
    out = [
        Claim("ortho", "conjugate_root", {"lo": 3.05, "hi": 3.95}, root, note="order alpha; partner 1 - alpha"),
        Claim("ortho", "a_conjugate_at_root", {"lo": 3.05, "hi": 3.95}, abs(a_conjugate(root)), 0.0, 1e-10),
    ]
    for t in (0.5, 1.0, 2.0):
        f = lambda x, a=root: eval_H(PncfSpec(a, t), x)  # noqa: E731
        g = lambda x, a=1.0 - root: eval_H(PncfSpec(a, t), x)  # noqa: E731
        inner = weighted_inner(f, g, t)
        # geometric mean of the squared-norm functionals <f, f> and <g, g>
        gm = math.sqrt(weighted_inner(f, f, t) * weighted_inner(g, g, t))
        out.append(Claim("ortho", "pair_inner_over_norms", {"alpha": root, "t": t}, abs(inner) / gm, 0.0, 1e-7))
    for ak, am in ((0.3, 0.6), (-0.5, 1.7), (1.3, 2.4)):
        lhs = lambda t, ak=ak, am=am: cross_check_l01(ak, am, t).lhs  # noqa: E731
        params = {"alpha_k": ak, "alpha_m": am, "t": 1.0}
        ratio = lhs(4.0) / lhs(1.0)
        out.append(Claim("ortho", "l01_ratio_4t", params, ratio, 2.0, 1e-6, note="sqrt(t) scaling"))
        out.append(
            Claim("ortho", "l01_t_exponent", params, t_exponent(lhs, 1.0), 1.0, note="printed factor is t^1")
        )
        out.append(Claim("ortho", "l01_closed_form_at_t1", params, _rel(lhs(1.0), l01_closed_form_unit(ak, am)), 0.0, 1e-8))
    for a in (-0.5, 0.3, 1.7):
        rep = lambda t, a=a: norm_sq_report(a, t).quadrature  # noqa: E731
        params = {"alpha": a, "t": 1.0}
        out.append(
            Claim("ortho", "norm_t_exponent", params, t_exponent(rep, 1.0), 1.0 + a, note=f"audited alpha+1/2 = {a + 0.5:.17g}")
        )
        r = norm_sq_report(a, 1.0)
        out.append(Claim("ortho", "norm_closed_form_at_t1", params, _rel(r.quadrature, r.audited_closed_form), 0.0, 1e-8))
    return out


APPELL_ALPHAS = (-2.5, -1.0, -0.3, 0.0, 1.0, 2.0, 0.5, 1.7, 3.2)


def suite_appell(cfg: Settings) -> list[Claim]:
    out = []
    for a in APPELL_ALPHAS:
        worst = 0.0
        for x in (0.5, 1.0, 2.0):
            for t in (0.5, 1.0, 2.0):
                worst = max(worst, _rel(appell_power(a, x, t), float(eval_H(PncfSpec(a, t), x))))
        out.append(Claim("appell", "transform_equals_H", {"alpha": a}, worst, 0.0, 1e-8))
    return out


def suite_chaos(cfg: Settings) -> list[Claim]:
    poly = expand_polynomial(lambda x: x * x, 4, 1.0)
    out = [
        Claim(
            "chaos",
            "polynomial_x2",
            {"t": 1.0, "max_degree": 4},
            float(np.max(np.abs(poly.coefficients - np.array([1.0, 0.0, 1.0, 0.0, 0.0])))),
            0.0,
            1e-10,
        )
    ]
    for root in (find_conjugate_roots(1.05, 1.95)[0], _pair_root()):
        aset = AlphaSet.conjugate_pair(root, 1.0)
        for k, a in enumerate(aset.alphas):
            exp = expand_fractional(lambda x, a=a: eval_H(PncfSpec(a, 1.0), x), aset, 1.0)
            unit = np.eye(len(aset))[k]
            err = float(np.max(np.abs(exp.coefficients - unit)))
            out.append(Claim("chaos", "fractional_basis_element", {"alpha": a, "pair": root, "t": 1.0}, err, 0.0, 1e-7))
    return out


def _covariance_claims(a: float, s: float, t: float) -> list[Claim]:
    params = {"alpha": a, "s": s, "t": t}
    p = BivariateNormalParams(s, t)
    try:
        rep = covariance_report(a, p)
    except DivergentIntegral as exc:
        msg = "second moment of H_alpha(W_t, t) is infinite: " + str(exc)
        return [Claim("covariance", "correlation", params, math.nan, (s / t) ** (a / 2), 1e-6, note=msg)]
    out = [
        Claim("covariance", "correlation", params, rep.correlation, (s / t) ** (a / 2), 1e-6 * (s / t) ** (a / 2)),
    ]
    n = round(a)
    exact_int = abs(a - n) < 1e-12
    note = f"measured Cov / s^alpha = {rep.measured_constant:.17g}"
    if exact_int:
        note += f"; n! = {math.factorial(n)}"
    if abs(rep.measured_constant - 1.0) > 1e-6:
        note += "; DIFFERS from the printed Cov = s^alpha"
    out.append(Claim("covariance", "covariance_vs_printed_s_alpha", params, rep.covariance, rep.printed_value, note=note))
    if exact_int:
        oracle = covariance_moment_oracle(n, p)
        out.append(
            Claim("covariance", "covariance_vs_moment_oracle", params, rep.covariance, oracle, 1e-6 * abs(oracle), note="n! s^n")
        )
    return out


def suite_covariance(cfg: Settings) -> list[Claim]:
    alphas = cfg.alphas or (0.5, 1.0, 2.0, 3.0)
    out = []
    for a in alphas:
        for s, t in ((0.25, 1.0), (1.0, 4.0)):
            out.extend(_covariance_claims(a, s, t))
    return out


# --------------------------------------------------------------------------
# Stochastic suites
# --------------------------------------------------------------------------

MC_PATHS = 100_000
MC_TIMES = (0.0, 0.5, 1.0)


def suite_martingale(cfg: Settings) -> list[Claim]:
    out = []
    det_alphas = cfg.alphas or (0.5, 1.0, 1.5, 2.0, 3.0, 3.6)
    for a in det_alphas:
        for s, t in ((0.25, 1.0), (0.5, 2.0)):
            worst = 0.0
            for w in np.linspace(-2.0, 3.0, 11):
                lhs, rhs = conditional_expectation_check(a, float(w), s, t)
                worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
            out.append(Claim("martingale", "conditional_expectation", {"alpha": a, "s": s, "t": t}, worst, 0.0, 1e-7))
    ens = simulate_wiener(MC_PATHS, MC_TIMES, cfg.seed)
    for a in cfg.alphas or (0.5, 1.5, 2.5):
        params = {"alpha": a, "n": MC_PATHS, "t": MC_TIMES[-1]}
        m = mc_mean_test(a, ens, len(MC_TIMES) - 1)
        out.append(
            Claim("martingale", "mc_mean", params, m.mean, m.target, 4 * m.std_error, note=f"z = {m.z_score:.6g}")
        )
        d = mc_martingale_test(a, ens, 1, 2)
        params = {"alpha": a, "n": MC_PATHS, "s": MC_TIMES[1], "t": MC_TIMES[2]}
        out.append(
            Claim("martingale", "mc_increment", params, d.mean, d.target, 4 * d.std_error, note=f"z = {d.z_score:.6g}")
        )
    return out


ITO_PATHS = 4000
ITO_STEPS = 1000


def suite_ito(cfg: Settings) -> list[Claim]:
    out = []
    horizon = 1.0
    dt = horizon / ITO_STEPS
    if cfg.alphas is None or 2.0 in cfg.alphas:
        r = ito_strong_order(2.0, ITO_PATHS, horizon, ITO_STEPS, cfg.seed)
        bound = 3.0 * math.sqrt(dt) * horizon
        params = {"alpha": 2.0, "n_paths": ITO_PATHS, "n_steps": ITO_STEPS, "t": horizon}
        out.append(Claim("ito", "endpoint_error", params, r.fine.mean, 0.0, bound, note="bound 3 sqrt(dt) T"))
    for a in cfg.alphas or (1.5, 3.0):
        if a == 2.0 and cfg.alphas is not None:
            continue
        r = ito_strong_order(a, ITO_PATHS, horizon, ITO_STEPS, cfg.seed)
        params = {"alpha": a, "n_paths": ITO_PATHS, "n_steps": ITO_STEPS, "refinement": 4, "t": horizon}
        note = f"coarse {r.coarse.mean:.6g} +- {r.coarse.std_error:.2g}, fine {r.fine.mean:.6g} +- {r.fine.std_error:.2g}"
        out.append(Claim("ito", "strong_order", params, r.order, 0.5, 0.15, note=note))
    return out


SELFSIM_CASES = ((1.0, 9.0), (2.0, 4.0), (0.7, 2.0))
SELFSIM_REPS = 100
SELFSIM_N = 10_000


def suite_selfsim(cfg: Settings) -> list[Claim]:
    cases = [(a, 2.0) for a in cfg.alphas] if cfg.alphas else SELFSIM_CASES
    out = []
    for a, c in cases:
        ps = [self_similarity_ks(a, c, 1.0, SELFSIM_N, cfg.seed + r).p_value for r in range(SELFSIM_REPS)]
        count = sum(p > 0.01 for p in ps)
        params = {"alpha": a, "c": c, "n": SELFSIM_N, "reps": SELFSIM_REPS}
        out.append(
            Claim("selfsim", "ks_pass_count", params, float(count), float(SELFSIM_REPS), 5.0, note=f"min p = {min(ps):.3g}")
        )
    return out


SUITES: dict[str, Callable[[Settings], list[Claim]]] = {
    "appell": suite_appell,
    "chaos": suite_chaos,
    "covariance": suite_covariance,
    "fraccalc": suite_fraccalc,
    "ito": suite_ito,
    "martingale": suite_martingale,
    "ortho": suite_ortho,
    "pde": suite_pde,
    "selfsim": suite_selfsim,
    "specfun": suite_specfun,
}

# suites whose orders can be overridden, with the smallest order each accepts
ALPHA_FLOOR = {"covariance": 0.0, "martingale": 0.0, "selfsim": 0.0, "ito": 1.0}


def _run_one(name: str, cfg: Settings) -> list[Claim]:
    return SUITES[name](cfg)


def run_suites(names: Sequence[str], cfg: Settings, workers: int = 1) -> list[Claim]:
    """Run the named suites and return their claims in a fixed order."""
    names = sorted(set(names))
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites: {unknown}")
    if workers > 1 and len(names) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(workers, len(names))) as pool:
            parts = list(pool.map(_run_one, names, [cfg] * len(names)))
    else:
        parts = [_run_one(n, cfg) for n in names]
    claims = [c for part in parts for c in part]
    return sorted(claims, key=Claim.sort_key)


def record(claim: Claim, command: str, seed: int) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": seed,
        "suite": claim.suite,
        "claim": claim.claim,
        "params": claim.params,
        "measured": claim.measured,
        "target": claim.target,
        "tolerance": claim.tolerance,
        "passed": claim.passed,
        "note": claim.note,
    }
