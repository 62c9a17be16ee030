"""Quadrature helpers for integrals with algebraic endpoint behaviour.

Two families live here:

* adaptive scalar routines (``scipy.integrate.quad`` with a tanh-sinh
  fallback) used where accuracy has to be certified point by point;
* fixed Gauss-Jacobi / Gauss-Legendre rules, vectorised over many
  integrands at once, used to fill whole frequency grids.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special


class QuadratureError(RuntimeError):
    """Raised when an integral does not converge within its budget."""


# ---------------------------------------------------------------------------
# tanh-sinh
# ---------------------------------------------------------------------------

def tanh_sinh(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = 1e-12,
    abs_tol: float = 0.0,
    max_level: int = 12,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` with the double-exponential rule.

    The step is halved until two successive levels agree. Nodes are
    generated from their distance to the nearest endpoint and nodes that
    round onto an endpoint are dropped, so ``f`` is never evaluated there.
    Strong singularities resolve best at ``a`` when ``a == 0``, where node
    offsets keep full relative precision.

    Returns
    -------
    value, error_estimate
    """
    if a == b:
        return 0.0, 0.0
    half = 0.5 * (b - a)
    tmax = 6.5  # node distances underflow to zero beyond this

    def level_sum(h: float, offset: float) -> float:
        t = np.arange(offset, tmax + 0.5 * h, h)
        y = 0.5 * math.pi * np.sinh(t)
        # distance from a (for -t) and from b (for +t), normalised to [0, 2]
        e = np.exp(-2.0 * y)
        near = 2.0 * e / (1.0 + e)
        w = 0.5 * math.pi * np.cosh(t) * 4.0 * e / (1.0 + e) ** 2
        keep = near > 0
        near, w, t = near[keep], w[keep], t[keep]
        left = a + half * near
        right = b - half * near
        ok_l = left != a
        ok_r = right != b
        fl = np.zeros_like(left)
        fr = np.zeros_like(right)
        fl[ok_l] = f(left[ok_l])
        fr[ok_r] = f(right[ok_r])
        centre_mask = t == 0.0
        total = np.sum(w * (fl + fr)) - np.sum(w[centre_mask] * fl[centre_mask])
        return float(total)

    h = 0.5
    s = level_sum(h, 0.0)
    prev = s * h * half
    err = math.inf
    for _ in range(max_level):
        s += level_sum(h, 0.5 * h)
        h *= 0.5
        cur = s * h * half
        err = abs(cur - prev)
        if err <= max(abs_tol, rel_tol * abs(cur)):
            return cur, err
        prev = cur
    raise QuadratureError(
        f"tanh-sinh did not reach rel_tol={rel_tol:g} on [{a:g}, {b:g}] "
        f"after {max_level} levels (last change {err:.3g})"
    )


# ---------------------------------------------------------------------------
# adaptive scalar integration
# ---------------------------------------------------------------------------

def adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float,
    abs_tol: float,
    limit: int,
    points: Sequence[float] | None = None,
) -> float:
    """``quad`` with breakpoints; falls back to piecewise tanh-sinh.

    Raises
    ------
    QuadratureError
        If both the adaptive rule and the fallback fail.
    """
    pts = sorted(p for p in (points or ()) if a < p < b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(
            f, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=max(limit, len(pts) + 2),
            points=pts or None, full_output=1,
        )
    value = res[0]
    if len(res) == 3 and math.isfinite(value):
        return float(value)

    fv = np.vectorize(f, otypes=[float])
    edges = [a, *pts, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, _ = tanh_sinh(fv, lo, hi, rel_tol=max(rel_tol, 1e-14), abs_tol=abs_tol)
        total += v
    return total


def power_weighted(
    g: Callable[[float], float],
    alpha: float,
    upper: float,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-300,
    limit: int = 200,
    points: Sequence[float] = (),
) -> float:
    """Return the integral of ``z**alpha * g(z)`` over ``[0, upper]``.

    For ``alpha < 0`` the substitution ``t = z**(alpha + 1)`` is applied
    first, which turns the weight into the constant ``1 / (alpha + 1)`` and
    leaves a bounded integrand. ``points`` are breakpoints in ``z``.
    """
    if alpha <= -1.0:
        raise ValueError(f"z**alpha is not integrable at 0 for alpha={alpha}")
    if upper <= 0.0:
        return 0.0
    if alpha < 0.0:
        q = alpha + 1.0
        p = 1.0 / q

        def h(t: float) -> float:
            return g(t**p)

        pts = [z**q for z in points]
        return adaptive(h, 0.0, upper**q, rel_tol, abs_tol, limit, pts) / q

    def h(z: float) -> float:
        return z**alpha * g(z) if z > 0.0 else (g(0.0) if alpha == 0.0 else 0.0)

    return adaptive(h, 0.0, upper, rel_tol, abs_tol, limit, points)


# ---------------------------------------------------------------------------
# fixed vectorised rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def gauss_jacobi_01(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for the integral of ``u**alpha * h(u)`` over ``[0, 1]``."""
    x, w = special.roots_jacobi(n, 0.0, alpha)
    u = 0.5 * (x + 1.0)
    w = w * 0.5 ** (alpha + 1.0)
    u.flags.writeable = False
    w.flags.writeable = False
    return u, w


@lru_cache(maxsize=16)
def gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    w = 0.5 * w
    u.flags.writeable = False
    w.flags.writeable = False
    return u, w
