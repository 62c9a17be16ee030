"""Memory diagnostics: periodogram, radial spectrum, exponent fit, covariances."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .simulate import FieldRealization, LatticeSpec
from .spectral import SpectralModel, f_values, fourier_frequencies

# classification thresholds
SHORT_SLOPE = -0.1
LOG_MARGIN = 2.0
LOG_ALPHA_BAND = 0.85
SUMMABLE_EXPONENT = -1.0


class InsufficientDataError(ValueError):
    pass


@dataclass
class PeriodogramEstimate:
    lattice: LatticeSpec
    ordinates: np.ndarray
    replicates: int = 1


@dataclass
class RadialSpectrum:
    bin_edges: np.ndarray
    radius: np.ndarray
    mean_ordinate: np.ndarray
    count: np.ndarray
    fundamental: float

    def rows(self) -> list[dict]:
        return [
            {"r_lo": float(lo), "r_hi": float(hi), "radius": float(r),
             "mean_ordinate": float(m), "count": int(c)}
            for lo, hi, r, m, c in zip(self.bin_edges[:-1], self.bin_edges[1:],
                                       self.radius, self.mean_ordinate, self.count)
        ]


Classification = Literal["short", "long_power", "long_log", "inconclusive"]


@dataclass
class MemoryReport:
    slope: float
    alpha_hat: float
    stderr: float
    fit_range: tuple[float, float]
    classification: Classification
    n_bins: int
    sse_power: float
    sse_log: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit_range"] = list(self.fit_range)
        return d


def periodogram(field: FieldRealization | np.ndarray) -> PeriodogramEstimate:
    """``|DFT|^2 / (4 pi^2 n1 n2)`` at every Fourier frequency."""
    values = field.values if isinstance(field, FieldRealization) else np.asarray(field, float)
    n1, n2 = values.shape
    ordinates = np.abs(np.fft.fft2(values)) ** 2 / (4 * math.pi**2 * n1 * n2)
    return PeriodogramEstimate(LatticeSpec(n1, n2), ordinates)


def mean_periodogram(fields: Iterable[FieldRealization | np.ndarray]) -> PeriodogramEstimate:
    """Average periodogram, summed in input order."""
    total = None
    count = 0
    for f in fields:
        p = periodogram(f)
        total = p.ordinates if total is None else total + p.ordinates
        count += 1
    if total is None:
        raise InsufficientDataError("no fields to average")
    return PeriodogramEstimate(p.lattice, total / count, count)


def _radii(lattice: LatticeSpec, center: tuple[float, float]) -> np.ndarray:
    l1, l2 = fourier_frequencies(lattice.n1, lattice.n2)
    d1 = np.angle(np.exp(1j * (l1 - center[0])))
    d2 = np.angle(np.exp(1j * (l2 - center[1])))
    return np.hypot(d1, d2)


def radial_average(
    pgram: PeriodogramEstimate,
    n_bins: int = 24,
    center: tuple[float, float] = (0.0, 0.0),
) -> RadialSpectrum:
    """Average ordinates over log-spaced annuli of ``|lambda - center|``.

    Bin edges run geometrically from the fundamental frequency ``2 pi /
    max(n1, n2)`` to ``pi``; the first bin is widened down to 0 so the bins
    partition ``(0, pi]``. The centre bin itself is excluded. Empty bins
    keep ``count == 0`` and a NaN mean.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    lat = pgram.lattice
    fundamental = 2 * math.pi / max(lat.n1, lat.n2)
    edges = np.geomspace(fundamental, math.pi, n_bins + 1)
    edges[0] = 0.0
    r = _radii(lat, center).ravel()
    y = pgram.ordinates.ravel()
    keep = (r > 0) & (r <= math.pi)
    r, y = r[keep], y[keep]
    idx = np.clip(np.searchsorted(edges, r, side="left") - 1, 0, n_bins - 1)
    count = np.bincount(idx, minlength=n_bins)
    sum_y = np.bincount(idx, weights=y, minlength=n_bins)
    sum_r = np.bincount(idx, weights=r, minlength=n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, sum_y / count, np.nan)
        rad = np.where(count > 0, sum_r / count, np.nan)
    return RadialSpectrum(edges, rad, mean, count, fundamental)


def default_fit_range(rad: RadialSpectrum) -> tuple[float, float]:
    return (4 * rad.fundamental, 0.5)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, np.ndarray]:
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = max(len(x) - 2, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return float(coef[0]), float(coef[1]), math.sqrt(max(cov[1, 1], 0.0)), resid


def estimate_memory(rad: RadialSpectrum,
                    fit_range: tuple[float, float] | None = None) -> MemoryReport:
    """Fit ``log ordinate = c + slope * log r`` and classify.

    ``slope`` estimates the exponent ``2 alpha - 2``. Classification:

    * ``short`` when ``slope > -0.1``;
    * for ``-2 < slope <= -0.1`` a competing model ``a + b |ln r^2|`` is
      fitted and both are scored by the residual sum of squares of the log
      ordinates. The log model wins (``long_log``) when its SSE is smaller
      by a factor ``LOG_MARGIN``; the power model wins (``long_power``) when
      it is better by that factor or when ``alpha_hat < 0.85``; otherwise
      ``inconclusive``;
    * ``inconclusive`` when ``slope <= -2``.
    """
    lo, hi = fit_range or default_fit_range(rad)
    sel = (rad.count > 0) & (rad.radius >= lo) & (rad.radius <= hi) & (rad.mean_ordinate > 0)
    if int(sel.sum()) < 5:
        raise InsufficientDataError(
            f"need >= 5 nonempty bins in fit range [{lo:.4g}, {hi:.4g}], got {int(sel.sum())}"
        )
    r = rad.radius[sel]
    y = rad.mean_ordinate[sel]
    lx, ly = np.log(r), np.log(y)
    _, slope, stderr, resid = _ols(lx, ly)
    sse_pow = float(resid @ resid)

    lr = np.abs(np.log(r * r))
    a, b, _, _ = _ols(lr, y)
    pred = a + b * lr
    sse_log = float(np.sum((ly - np.log(pred)) ** 2)) if np.all(pred > 0) else math.inf

    alpha_hat = slope / 2 + 1
    if slope > SHORT_SLOPE:
        cls: Classification = "short"
    elif slope <= -2:
        cls = "inconclusive"
    elif b > 0 and sse_log * LOG_MARGIN < sse_pow:
        cls = "long_log"
    elif sse_pow * LOG_MARGIN < sse_log or alpha_hat < LOG_ALPHA_BAND:
        cls = "long_power"
    else:
        cls = "inconclusive"
    return MemoryReport(float(slope), float(alpha_hat), float(stderr), (float(lo), float(hi)),
                        cls, int(sel.sum()), sse_pow, sse_log)


def autocovariance_from_spectrum(f_values_grid: np.ndarray,
                                 lattice: LatticeSpec | None = None) -> np.ndarray:
    """Covariances ``sum_k f_k e^{i lambda_k h} (2 pi / n1)(2 pi / n2)``.

    The result is indexed by lag modulo the lattice. Raises ``ValueError``
    if the input is not even (imaginary residue above 1e-10 relative).
    """
    f = np.asarray(f_values_grid, float)
    if not np.all(np.isfinite(f)):
        raise ValueError("spectral grid must be finite")
    n1, n2 = f.shape
    if lattice is not None and lattice.shape != f.shape:
        raise ValueError("grid shape does not match lattice")
    gamma = np.fft.ifft2(f) * (4 * math.pi**2)
    scale = max(float(np.max(np.abs(gamma.real))), 1e-300)
    if float(np.max(np.abs(gamma.imag))) > 1e-10 * scale:
        raise ValueError("spectral grid is not even; covariances would be complex")
    return gamma.real.copy()


def sample_autocovariance(values: np.ndarray, lags: Sequence[tuple[int, int]],
                          center: bool = True) -> np.ndarray:
    """Spatial average of ``X(s) X(s + h)`` on the torus for each lag."""
    x = values - values.mean() if center else values
    return np.array([float(np.mean(x * np.roll(x, (-h1, -h2), (0, 1)))) for h1, h2 in lags])


@dataclass
class SummabilityReport:
    radii: list[int]
    partial_sums: list[float]
    increments: list[float]
    exponent: float
    verdict: Literal["summable-looking", "non-summable-looking"]


def summability_diagnostic(gamma: np.ndarray, radii: Sequence[int]) -> SummabilityReport:
    """Partial sums of ``|gamma(h)|`` over growing sup-norm balls.

    ``increments`` are per unit radius between consecutive radii. A power
    law ``r**e`` is fitted to them; ``e < -1`` reads as summable. Under a
    spectral exponent ``2 alpha - 2`` the covariances decay like
    ``|h|**(-2 alpha)`` in two dimensions, so the shell increments scale
    like ``r**(1 - 2 alpha)`` and ``e = -1`` is the boundary ``alpha = 1``.
    The verdict is a heuristic, not a test.
    """
    gamma = np.asarray(gamma, float)
    n1, n2 = gamma.shape
    radii = sorted(int(r) for r in radii)
    if not radii or radii[0] < 0:
        raise ValueError("radii must be nonnegative")
    if radii[-1] > min(n1, n2) / 4:
        raise ValueError(
            f"radius {radii[-1]} exceeds n/4 = {min(n1, n2) / 4:g}: periodic images bias the sums"
        )
    h1 = np.arange(n1)
    h2 = np.arange(n2)
    h1 = np.minimum(h1, n1 - h1)
    h2 = np.minimum(h2, n2 - h2)
    sup = np.maximum(h1[:, None], h2[None, :])
    shell = np.bincount(sup.ravel(), weights=np.abs(gamma).ravel())
    cum = np.cumsum(shell)
    sums = [float(cum[r]) for r in radii]

    incs: list[float] = []
    mids: list[float] = []
    for (r0, s0), (r1, s1) in zip(zip(radii, sums), zip(radii[1:], sums[1:])):
        if r1 > r0:
            incs.append((s1 - s0) / (r1 - r0))
            mids.append(0.5 * (r0 + r1))
    inc = np.array(incs)
    total = sums[-1] if sums else 0.0
    pos = inc > 1e-12 * max(total, 1e-300)
    if pos.sum() < 2:
        exponent = -math.inf
    else:
        exponent = float(np.polyfit(np.log(np.array(mids)[pos]), np.log(inc[pos]), 1)[0])
    verdict = "summable-looking" if exponent < SUMMABLE_EXPONENT else "non-summable-looking"
    return SummabilityReport(radii, sums, incs, exponent, verdict)


def seasonal_scan(
    model: SpectralModel,
    lattice: LatticeSpec,
    ratio_threshold: float = 1.5,
    deltas: Sequence[float] = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7),
) -> list[tuple[float, float]]:
    """Frequencies where ``f`` blows up.

    Candidates are local maxima of ``f`` on the torus grid (including
    infinite values); each is refined by a shrinking pattern search for
    the supremum, snapped to a multiple of ``pi / 2**20`` and then probed
    along ``lambda* + delta (1, 1) / sqrt 2`` (pointing inwards). A point
    is declared singular when ``f`` is infinite there, or when the probe
    values increase monotonically and ``f(delta_min) / f(delta_max)``
    exceeds ``ratio_threshold``. Points equivalent on the torus are
    reported once with components in ``(-pi, pi]``.
    """
    l1, l2 = fourier_frequencies(lattice.n1, lattice.n2)
    grid = f_values(model, l1, l2)
    big = np.where(np.isfinite(grid), grid, np.inf)
    is_max = np.ones(grid.shape, bool)
    for d1 in (-1, 0, 1):
        for d2 in (-1, 0, 1):
            if d1 or d2:
                is_max &= big >= np.roll(big, (d1, d2), (0, 1))
    found: list[tuple[float, float]] = []
    step0 = 2 * math.pi / min(lattice.n1, lattice.n2)
    for i, j in zip(*np.nonzero(is_max)):
        p = np.array([l1[i, j], l2[i, j]])
        p = _refine_peak(model, p, step0)
        snap = math.pi / 2**20
        p = np.round(p / snap) * snap
        p = _canonical(p)
        if any(np.allclose(p, q, atol=1e-9) for q in found):
            continue
        if _diverges(model, p, ratio_threshold, deltas):
            found.append((float(p[0]), float(p[1])))
    return found


def _canonical(p: np.ndarray) -> np.ndarray:
    q = np.angle(np.exp(1j * p))
    q[np.isclose(q, -math.pi, atol=1e-12)] = math.pi
    q[np.isclose(q, 0.0, atol=1e-15)] = 0.0
    return q


def _eval(model: SpectralModel, p: np.ndarray) -> float:
    q = np.clip(p, -math.pi, math.pi)
    return float(f_values(model, q[0], q[1]))


def _refine_peak(model: SpectralModel, p: np.ndarray, step: float) -> np.ndarray:
    best = _eval(model, p)
    moves = [np.array(m, float) for m in ((1, 0), (-1, 0), (0, 1), (0, -1),
                                          (1, 1), (1, -1), (-1, 1), (-1, -1))]
    while step > 1e-9 and math.isfinite(best):
        improved = False
        for m in moves:
            q = np.clip(p + step * m, -math.pi, math.pi)
            v = _eval(model, q)
            if v > best:
                best, p, improved = v, q, True
        if not improved:
            step *= 0.5
    return p


def _diverges(model: SpectralModel, p: np.ndarray, threshold: float,
              deltas: Sequence[float]) -> bool:
    if not math.isfinite(_eval(model, p)):
        return True
    direction = -np.sign(p)
    direction[direction == 0] = 1.0
    direction /= np.linalg.norm(direction)
    vals = [_eval(model, p + d * direction) for d in deltas]
    increasing = all(b >= a for a, b in zip(vals, vals[1:]))
    return increasing and vals[-1] / vals[0] > threshold
