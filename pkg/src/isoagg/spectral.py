"""Spectral density of the aggregated isotropic field.

With ``s = cos l1 + cos l2`` the density is

    f(l) = sigma2 / (4 pi^2) * E[(1 - 2 theta s)^-2]

Everything depends on the frequency only through ``s`` and ``g = 2 - s``;
``g`` is formed from half-angle sines so that it keeps full relative
precision as ``l -> 0``. A mirrored law is handled through its positive
twin at the reflected frequency ``(pi - l1, pi - l2)``, which flips the
sign of ``s``.

Two scalar routes are provided:

* :func:`f_direct` integrates over ``z = 1/4 - theta`` directly;
* :func:`f_transformed` rescales by ``A = s / g`` so that the peak at
  ``z ~ 1 / (4A)`` is moved to ``u ~ 1``.

:func:`f_values` is a vectorised fixed-rule evaluator used for grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quadrature import (
    QuadratureError,
    adaptive,
    gauss_jacobi_01,
    gauss_legendre_01,
    power_weighted,
)
from .theta_law import QUARTER, ThetaLaw

FOUR_PI2 = 4.0 * math.pi**2


class SpectralDivergenceError(ValueError):
    """The density is infinite at the requested frequency."""


class RouteError(ValueError):
    """The transformed route was asked for outside its domain."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-200
    max_subdivisions: int = 200
    a_lambda_switch: float = 10.0

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.a_lambda_switch > 0:
            raise ValueError("a_lambda_switch must be > 0")


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True)
class SpectralModel:
    law: ThetaLaw
    sigma2_eps: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma2_eps > 0:
            raise ValueError(f"sigma2_eps must be > 0, got {self.sigma2_eps}")

    @property
    def alpha(self) -> float:
        return self.law.alpha

    @property
    def scale(self) -> float:
        return self.sigma2_eps / FOUR_PI2

    def with_sigma2(self, sigma2_eps: float) -> "SpectralModel":
        return SpectralModel(self.law, sigma2_eps)


def _check_freq(freq: Sequence[float]) -> tuple[float, float]:
    l1, l2 = (float(v) for v in freq)
    lim = math.pi * (1 + 1e-12)
    if not (abs(l1) <= lim and abs(l2) <= lim):
        raise ValueError(f"frequency {freq} outside [-pi, pi]^2")
    return l1, l2


def _s_g(l1, l2, mirrored: bool):
    """``(s, g)`` with ``g = 2 - s`` computed without cancellation."""
    if mirrored:
        s = -(np.cos(l1) + np.cos(l2))
        # pi - |l| is exact near the corner, so g vanishes exactly at (pi, pi)
        g = 2.0 * (np.sin(0.5 * (np.pi - np.abs(l1))) ** 2
                   + np.sin(0.5 * (np.pi - np.abs(l2))) ** 2)
    else:
        s = np.cos(l1) + np.cos(l2)
        g = 2.0 * (np.sin(0.5 * l1) ** 2 + np.sin(0.5 * l2) ** 2)
    return s, g


def ar_denominator(theta: float, freq: Sequence[float]) -> float:
    """``1 - 2 theta (cos l1 + cos l2)``."""
    l1, l2 = (float(v) for v in freq)
    return 1.0 - 2.0 * theta * (math.cos(l1) + math.cos(l2))


def a_lambda(freq: Sequence[float]) -> float:
    """``(cos l1 + cos l2) / (2 - cos l1 - cos l2)``; ``inf`` at the origin."""
    l1, l2 = (float(v) for v in freq)
    s, g = _s_g(l1, l2, False)
    if g == 0.0:
        return math.inf
    return float(s / g)


def _is_singular(model: SpectralModel, g: float) -> bool:
    return g == 0.0 and model.alpha <= 1.0


# ---------------------------------------------------------------------------
# scalar routes
# ---------------------------------------------------------------------------

def _origin_value(model: SpectralModel, quad: QuadratureConfig) -> float:
    # g = 0, s = 2: d = 4 z, so f = scale / 16 * int z**(alpha-2) Phi
    law = model.law
    inner = power_weighted(
        lambda z: float(law.phi_effective(QUARTER - z)), law.alpha - 2.0, QUARTER,
        rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, limit=quad.max_subdivisions,
    )
    return model.scale * inner / 16.0


def _direct(model: SpectralModel, s: float, g: float, quad: QuadratureConfig) -> float:
    law = model.law
    if g == 0.0:
        return _origin_value(model, quad)
    half_g = 0.5 * g
    two_s = 2.0 * s

    def h(z: float) -> float:
        d = half_g + two_s * z
        return float(law.phi_effective(QUARTER - z)) / (d * d)

    points: list[float] = []
    if s > 0.0:
        # integrand varies on the scale 1 / (4A) near z = 0
        w = g / (4.0 * s)
        while w < QUARTER:
            points.append(w)
            w *= 10.0
    inner = power_weighted(
        h, law.alpha, QUARTER, rel_tol=quad.rel_tol, abs_tol=quad.abs_tol,
        limit=quad.max_subdivisions, points=points,
    )
    return model.scale * inner


def _transformed_integral(law: ThetaLaw, big_a: float, quad: QuadratureConfig) -> float:
    """``int_0^A u^alpha Phi(1/4 (1 - u/A)) / (1+u)^2 du``."""
    alpha = law.alpha
    head_end = min(1.0, big_a)
    head = power_weighted(
        lambda u: float(law.phi_effective(QUARTER * (1.0 - u / big_a))) / (1.0 + u) ** 2,
        alpha, head_end, rel_tol=quad.rel_tol, abs_tol=quad.abs_tol,
        limit=quad.max_subdivisions,
    )
    if big_a <= 1.0:
        return head

    # u = e^w on [1, A]: u^(alpha+1) / (1+u)^2 dw, smooth in w
    def tail_integrand(w: float) -> float:
        e = math.exp(-w)
        return (
            math.exp((alpha - 1.0) * w) / (1.0 + e) ** 2
            * float(law.phi_effective(QUARTER * (1.0 - math.exp(w) / big_a)))
        )

    tail = adaptive(
        tail_integrand, 0.0, math.log(big_a), quad.rel_tol, quad.abs_tol,
        quad.max_subdivisions,
    )
    return head + tail


def _transformed(model: SpectralModel, s: float, g: float, quad: QuadratureConfig) -> float:
    alpha = model.alpha
    big_a = s / g
    pref = model.scale * 4.0**-alpha * g ** (alpha - 1.0) * s ** (-alpha - 1.0)
    return pref * _transformed_integral(model.law, big_a, quad)


def _prepare(model: SpectralModel, freq) -> tuple[float, float]:
    l1, l2 = _check_freq(freq)
    s, g = _s_g(l1, l2, model.law.mirrored)
    s, g = float(s), float(g)
    if _is_singular(model, g):
        where = "(pi, pi)" if model.law.mirrored else "(0, 0)"
        raise SpectralDivergenceError(
            f"f diverges at {where} for alpha={model.alpha} <= 1"
        )
    return s, g


def f_direct(model: SpectralModel, freq, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Spectral density by adaptive quadrature over the coefficient law.

    Raises
    ------
    SpectralDivergenceError
        At the singular frequency when ``alpha <= 1``.
    QuadratureError
        If the adaptive rule and its tanh-sinh fallback both fail.
    """
    s, g = _prepare(model, freq)
    return _direct(model, s, g, quad)


def f_transformed(model: SpectralModel, freq, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Spectral density via the ``u = 4 z A`` rescaling.

    Only valid when ``A`` (of the reflected frequency for mirrored laws)
    exceeds ``quad.a_lambda_switch``.
    """
    s, g = _prepare(model, freq)
    big_a = math.inf if g == 0.0 else s / g
    if not big_a > quad.a_lambda_switch:
        raise RouteError(
            f"transformed route needs A_lambda > {quad.a_lambda_switch}, got {big_a:.6g}"
        )
    if g == 0.0:
        return _origin_value(model, quad)
    return _transformed(model, s, g, quad)


def spectral_density(model: SpectralModel, freq, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Pick the route by ``A_lambda`` and evaluate."""
    s, g = _prepare(model, freq)
    if g == 0.0:
        return _origin_value(model, quad)
    if s / g > quad.a_lambda_switch:
        return _transformed(model, s, g, quad)
    return _direct(model, s, g, quad)


# ---------------------------------------------------------------------------
# low-frequency constants
# ---------------------------------------------------------------------------

def euler_integral(alpha: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``int_0^inf u^alpha / (1+u)^2 du`` for ``-1 < alpha < 1``.

    With ``u = t / (1 - t)`` this is ``int_0^1 t^alpha (1-t)^-alpha dt``;
    the interval is split at 1/2 and the right half reflected so both
    endpoint factors sit at 0 where :func:`power_weighted` removes them.
    """
    if not -1.0 < alpha < 1.0:
        raise ValueError(f"Euler integral needs -1 < alpha < 1, got {alpha}")
    kw = dict(rel_tol=min(quad.rel_tol, 1e-13), abs_tol=quad.abs_tol, limit=quad.max_subdivisions)
    left = power_weighted(lambda t: (1.0 - t) ** -alpha, alpha, 0.5, **kw)
    right = power_weighted(lambda r: (1.0 - r) ** alpha, -alpha, 0.5, **kw)
    return left + right


def euler_closed_form(alpha: float) -> float:
    if alpha == 0.0:
        return 1.0
    return math.pi * alpha / math.sin(math.pi * alpha)


def c_alpha(model: SpectralModel, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Constant of the power-law blow-up at the singular frequency."""
    alpha = model.alpha
    if not -1.0 < alpha < 1.0:
        raise ValueError(f"c_alpha is defined for -1 < alpha < 1, got {alpha}")
    phi_end = float(model.law.phi_effective(QUARTER))
    return model.scale * 16.0**-alpha * phi_end * euler_integral(alpha, quad)


def c_one(model: SpectralModel) -> float:
    """Constant of the logarithmic blow-up when ``alpha == 1``."""
    if model.alpha != 1.0:
        raise ValueError(f"c_one is defined for alpha == 1, got {model.alpha}")
    return model.scale / 16.0 * float(model.law.phi_effective(QUARTER))


def asymptote(model: SpectralModel, freq, quad: QuadratureConfig = DEFAULT_QUAD,
              const: float | None = None) -> float:
    """Leading low-frequency behaviour for ``0 < alpha <= 1``.

    For mirrored laws ``freq`` is measured from ``(pi, pi)``: pass the
    offset ``(pi - l1, pi - l2)``. ``const`` overrides the constant.
    """
    alpha = model.alpha
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"asymptote needs 0 < alpha <= 1, got {alpha}")
    l1, l2 = (float(v) for v in freq)
    r2 = l1 * l1 + l2 * l2
    if r2 == 0.0:
        raise SpectralDivergenceError("asymptote is infinite at the singular point")
    if alpha < 1.0:
        c = c_alpha(model, quad) if const is None else const
        return c * r2 ** (alpha - 1.0)
    c = c_one(model) if const is None else const
    return c * abs(math.log(r2))


# ---------------------------------------------------------------------------
# vectorised evaluation
# ---------------------------------------------------------------------------

_N_JACOBI = 96
_N_PANELS = 24
_N_PANEL_NODES = 12
_CHUNK = 4096


def _direct_fixed(law: ThetaLaw, s: np.ndarray, g: np.ndarray) -> np.ndarray:
    # z in [0, 1/4]: z = u / 4
    u, w = gauss_jacobi_01(_N_JACOBI, law.alpha)
    z = 0.25 * u
    w = w * 0.25 ** (law.alpha + 1.0)
    phi = law.phi_effective(QUARTER - z)
    d = 0.5 * g[:, None] + 2.0 * s[:, None] * z[None, :]
    return (phi / (d * d)) @ w


def _transformed_fixed(law: ThetaLaw, s: np.ndarray, g: np.ndarray) -> np.ndarray:
    alpha = law.alpha
    big_a = s / g
    u, w = gauss_jacobi_01(_N_JACOBI, alpha)
    head = (law.phi_effective(QUARTER * (1.0 - u[None, :] / big_a[:, None]))
            / (1.0 + u) ** 2) @ w

    L = np.log(big_a)
    pu, pw = gauss_legendre_01(_N_PANEL_NODES)
    frac = (np.arange(_N_PANELS)[:, None] + pu[None, :]).ravel() / _N_PANELS
    wt = np.tile(pw, _N_PANELS) / _N_PANELS
    wv = L[:, None] * frac[None, :]
    integrand = (
        np.exp((alpha - 1.0) * wv) / (1.0 + np.exp(-wv)) ** 2
        * law.phi_effective(QUARTER * (1.0 - np.exp(wv) / big_a[:, None]))
    )
    tail = L * (integrand @ wt)
    pref = 4.0**-alpha * g ** (alpha - 1.0) * s ** (-alpha - 1.0)
    return pref * (head + tail)


def f_values(model: SpectralModel, l1, l2, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Spectral density on arrays of frequencies with fixed quadrature rules.

    Singular points (``alpha <= 1``) come back as ``inf``.
    """
    l1, l2 = np.broadcast_arrays(np.asarray(l1, float), np.asarray(l2, float))
    shape = l1.shape
    s, g = _s_g(l1.ravel(), l2.ravel(), model.law.mirrored)
    out = np.empty(s.shape)
    law = model.law
    origin = g == 0.0
    if origin.any():
        out[origin] = math.inf if model.alpha <= 1.0 else _origin_value(model, quad) / model.scale
    with np.errstate(divide="ignore"):
        big_a = np.where(origin, np.inf, s / np.where(origin, 1.0, g))
    trans = ~origin & (big_a > quad.a_lambda_switch)
    direct = ~origin & ~trans
    for mask, fn in ((direct, _direct_fixed), (trans, _transformed_fixed)):
        idx = np.flatnonzero(mask)
        for start in range(0, idx.size, _CHUNK):
            sel = idx[start:start + _CHUNK]
            out[sel] = fn(law, s[sel], g[sel])
    finite = np.isfinite(out)
    out[finite] *= model.scale
    return out.reshape(shape)


def fourier_frequencies(n1: int, n2: int) -> tuple[np.ndarray, np.ndarray]:
    """Fourier frequencies ``2 pi k / n`` mapped into ``(-pi, pi]``, ``ij`` layout."""
    k1 = np.arange(n1)
    k2 = np.arange(n2)
    lam1 = 2.0 * math.pi * np.where(k1 <= n1 // 2, k1, k1 - n1) / n1
    lam2 = 2.0 * math.pi * np.where(k2 <= n2 // 2, k2, k2 - n2) / n2
    return np.meshgrid(lam1, lam2, indexing="ij")


def f_grid(model: SpectralModel, n1: int, n2: int,
           quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Density at the Fourier frequencies of an ``n1 x n2`` torus.

    Infinite values (the singular bin when ``alpha <= 1``: the DC bin, or
    the ``(pi, pi)`` bin of a mirrored law on an even lattice) are stored
    as 0. Only the quadrant ``k <= n/2`` is integrated; the rest follows
    from evenness of the density.
    """
    if n1 < 2 or n2 < 2:
        raise ValueError("lattice dimensions must be >= 2")
    h1 = np.arange(n1 // 2 + 1)
    h2 = np.arange(n2 // 2 + 1)
    q1, q2 = np.meshgrid(2 * math.pi * h1 / n1, 2 * math.pi * h2 / n2, indexing="ij")
    quadrant = f_values(model, q1, q2, quad)
    quadrant[~np.isfinite(quadrant)] = 0.0
    k1 = np.arange(n1)
    k2 = np.arange(n2)
    i1 = np.minimum(k1, n1 - k1)
    i2 = np.minimum(k2, n2 - k2)
    grid = quadrant[np.ix_(i1, i2)]
    return grid


# ---------------------------------------------------------------------------
# integrability
# ---------------------------------------------------------------------------

@dataclass
class IntegrabilityReport:
    integrable: bool
    estimate: float
    decay_rate: float
    refinement_trace: list[tuple[float, float]]


def check_integrability(
    model: SpectralModel,
    quad: QuadratureConfig = DEFAULT_QUAD,
    levels: int = 12,
    tol: float = 1e-6,
    bound: float = 1e12,
    rate_threshold: float = 0.02,
    max_levels: int = 60,
) -> IntegrabilityReport:
    """Integrate ``f`` over the torus minus shrinking discs around the singular point.

    The disc radii are ``10**-k``. In polar coordinates, the annulus
    between consecutive radii contributes an increment; the decay rate
    ``rho`` of those increments per decade (increment ratio ``10**-rho``)
    decides the verdict:

    * ``rho <= rate_threshold`` or an estimate above ``bound``: divergent;
    * otherwise integrable, and the geometric tail is added to the
      estimate.

    At least ``levels`` decades are used. Refinement then continues, up
    to ``max_levels``, until the geometric tail is below ``tol`` relative
    to the estimate; slow decay (small ``alpha``) needs more decades.

    A mirrored law is integrated around ``(pi, pi)``; the torus is
    invariant under that shift, so its positive twin is used.
    """
    if not 2 <= levels <= max_levels:
        raise ValueError("need 2 <= levels <= max_levels")
    twin = SpectralModel(model.law.positive_twin(), model.sigma2_eps)

    phi_u, phi_w = gauss_legendre_01(24)
    phis = 0.25 * math.pi * phi_u
    phi_wt = 0.25 * math.pi * phi_w

    # outer region: r from 1 to pi / cos(phi) (octant of the square)
    r_u, r_w = gauss_legendre_01(40)
    r_hi = math.pi / np.cos(phis)
    rr = 1.0 + (r_hi[:, None] - 1.0) * r_u[None, :]
    vals = f_values(twin, rr * np.cos(phis)[:, None], rr * np.sin(phis)[:, None], quad)
    outer = 8.0 * float(np.sum(phi_wt[:, None] * (r_hi[:, None] - 1.0) * r_w[None, :] * vals * rr))

    # annulus between 10^-(k) and 10^-(k-1), integrated in log r
    a_u, a_w = gauss_legendre_01(24)
    ln10 = math.log(10.0)
    trace: list[tuple[float, float]] = [(1.0, outer)]
    increments: list[float] = []
    estimate = outer
    diverged = False
    rate = -math.inf
    tail = math.inf
    for k in range(1, max_levels + 1):
        logr = -k * ln10 + ln10 * a_u
        r = np.exp(logr)
        vals = f_values(twin, r[None, :] * np.cos(phis)[:, None],
                        r[None, :] * np.sin(phis)[:, None], quad)
        inc = 8.0 * float(np.sum(phi_wt[:, None] * ln10 * a_w[None, :] * vals * (r * r)[None, :]))
        increments.append(inc)
        estimate += inc
        trace.append((10.0**-k, estimate))
        if not math.isfinite(estimate) or estimate > bound:
            diverged = True
            break
        if k < 2:
            continue
        rate = math.log10(increments[-2] / increments[-1]) if increments[-1] > 0 else math.inf
        if k < levels:
            continue
        if rate <= rate_threshold:
            break
        ratio = 10.0**-rate
        tail = increments[-1] * ratio / (1.0 - ratio)
        if tail <= tol * estimate:
            break

    if diverged:
        rate = -math.inf
    integrable = (not diverged) and rate > rate_threshold
    if integrable:
        estimate += tail
        if 10.0**-rate < 0.5 and tail > tol * estimate:
            raise QuadratureError(
                f"integrability check did not settle within {max_levels} decades"
            )
    return IntegrabilityReport(integrable, estimate, rate, trace)
