"""Built-in self-check battery for the spectral formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .spectral import (
    DEFAULT_QUAD,
    QuadratureConfig,
    SpectralModel,
    a_lambda,
    c_alpha,
    c_one,
    check_integrability,
    euler_closed_form,
    euler_integral,
    f_direct,
    f_transformed,
    spectral_density,
)
from .theta_law import make_theta_law

ROUTE_TOL = 1e-8
EULER_TOL = 1e-10
POWER_TOLS = ((1e-3, 0.02), (1e-4, 0.005))
LOG_TOLS = ((1e-4, 0.10), (1e-6, 0.06))
REFLECTION_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<38} value={self.value:.3e}  tol={self.tolerance:.1e}  {self.detail}"


def _model(alpha: float, support: str = "positive", sigma2: float = 1.0) -> SpectralModel:
    return SpectralModel(make_theta_law(alpha, None, support), sigma2)


def route_agreement(n_pairs: int = 200, seed: int = 2024,
                    quad: QuadratureConfig = DEFAULT_QUAD) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < n_pairs:
        alpha = rng.uniform(-0.9, 3.0)
        r = 10 ** rng.uniform(-4.0, -0.5)
        phi = rng.uniform(0.0, 2 * math.pi)
        lam = (r * math.cos(phi), r * math.sin(phi))
        if not a_lambda(lam) > max(10.0, quad.a_lambda_switch):
            continue
        m = _model(alpha)
        d = f_direct(m, lam, quad)
        t = f_transformed(m, lam, quad)
        worst = max(worst, abs(d - t) / d)
        done += 1
    return CheckResult("route agreement", worst <= ROUTE_TOL, worst, ROUTE_TOL,
                       f"{n_pairs} pairs")


def euler_check(alphas: Sequence[float] = tuple(np.round(np.arange(0.1, 0.95, 0.1), 10)),
                quad: QuadratureConfig = DEFAULT_QUAD) -> CheckResult:
    worst = max(abs(euler_integral(a, quad) / euler_closed_form(a) - 1.0) for a in alphas)
    return CheckResult("euler integral closed form", worst <= EULER_TOL, worst, EULER_TOL)


def power_asymptote(alpha: float, quad: QuadratureConfig = DEFAULT_QUAD,
                    c_alpha_fn: Callable[[SpectralModel], float] | None = None) -> list[CheckResult]:
    m = _model(alpha)
    c = (c_alpha_fn or (lambda mm: c_alpha(mm, quad)))(m)
    out = []
    for t, tol in POWER_TOLS:
        ratio = spectral_density(m, (t, t), quad) / (c * (2 * t * t) ** (alpha - 1.0))
        err = abs(ratio - 1.0)
        out.append(CheckResult(f"power asymptote a={alpha:g} t={t:g}", err <= tol, err, tol,
                               f"ratio={ratio:.6f}"))
    return out


def log_asymptote(quad: QuadratureConfig = DEFAULT_QUAD) -> list[CheckResult]:
    m = _model(1.0)
    c = c_one(m)
    out = []
    for t, tol in LOG_TOLS:
        ratio = spectral_density(m, (t, t), quad) / (c * abs(math.log(2 * t * t)))
        err = abs(ratio - 1.0)
        out.append(CheckResult(f"log asymptote a=1 t={t:g}", err <= tol, err, tol,
                               f"ratio={ratio:.6f}"))
    return out


def reflection_duality(alpha: float = 0.5, quad: QuadratureConfig = DEFAULT_QUAD) -> list[CheckResult]:
    pos = _model(alpha)
    mir = _model(alpha, "mirrored")
    out = []
    at_zero = spectral_density(mir, (0.0, 0.0), quad)
    out.append(CheckResult(f"mirrored a={alpha:g} bounded at 0", math.isfinite(at_zero),
                           at_zero, math.inf))
    for delta in (1e-2, 1e-3):
        a = spectral_density(mir, (math.pi - delta, math.pi - delta), quad)
        b = spectral_density(pos, (delta, delta), quad)
        err = abs(a - b) / b
        out.append(CheckResult(f"reflection a={alpha:g} delta={delta:g}", err <= REFLECTION_TOL,
                               err, REFLECTION_TOL))
    return out


def integrability(alpha: float, expect: bool, quad: QuadratureConfig = DEFAULT_QUAD) -> CheckResult:
    rep = check_integrability(_model(alpha), quad)
    word = "integrable" if rep.integrable else "divergent"
    return CheckResult(f"integrability a={alpha:g} -> {word}", rep.integrable == expect,
                       rep.estimate, 0.0, f"decay_rate={rep.decay_rate:.3g}")


def run_battery(
    alphas: Sequence[float] = (0.25, 0.5, 0.75, 1.0, 2.0),
    quad: QuadratureConfig = DEFAULT_QUAD,
    c_alpha_fn: Callable[[SpectralModel], float] | None = None,
) -> list[CheckResult]:
    results = [route_agreement(quad=quad), euler_check(quad=quad)]
    for a in alphas:
        if 0 < a < 1:
            results += power_asymptote(a, quad, c_alpha_fn)
        elif a == 1:
            results += log_asymptote(quad)
    results += reflection_duality(0.5, quad)
    for a in sorted(set(alphas) | {-0.5, 0.0}):
        results.append(integrability(a, a > 0, quad))
    return results
