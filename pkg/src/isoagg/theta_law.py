"""Law of the random autoregressive coefficient.

The coefficient has density ``C * phi(x) * (1/4 - x)**alpha`` on
``[0, 1/4)``. The mirrored variant is the reflection ``x -> -x`` and lives
on ``(-1/4, 0]``. ``phi`` is a constant or a polynomial in ``x`` that is
nonnegative on ``[0, 1/4]`` with ``phi(1/4) != 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.polynomial import polynomial as P

from .quadrature import gauss_legendre_01, power_weighted
from .rng import make_rng

QUARTER = 0.25
CDF_KNOTS = 4096

# largest float strictly inside the support
_X_MAX = math.nextafter(QUARTER, 0.0)


class InvalidExponentError(ValueError):
    pass


class InvalidShapeError(ValueError):
    pass


@dataclass(frozen=True)
class PhiSpec:
    """Shape function ``phi``; ``coeffs`` are ascending powers of ``x``."""

    kind: Literal["constant", "poly"] = "constant"
    coeffs: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "poly"):
            raise InvalidShapeError(f"unknown phi kind {self.kind!r}")
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise InvalidShapeError("phi coefficients must be finite and non-empty")
        if self.kind == "constant" and len(coeffs) != 1:
            raise InvalidShapeError("a constant phi takes exactly one value")
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, x):
        if self.kind == "constant":
            return self.coeffs[0] + 0.0 * np.asarray(x, dtype=float)
        return P.polyval(x, self.coeffs)

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "constant":
            d: dict[str, Any] = {"kind": "constant"}
            if self.coeffs != (1.0,):
                d["value"] = self.coeffs[0]
            return d
        return {"kind": "poly", "coeffs": list(self.coeffs)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PhiSpec":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind == "constant":
            value = d.pop("value", 1.0)
            _reject_extra(d, "phi")
            return cls("constant", (value,))
        if kind == "poly":
            if "coeffs" not in d:
                raise InvalidShapeError("phi.coeffs is required for kind 'poly'")
            coeffs = d.pop("coeffs")
            _reject_extra(d, "phi")
            return cls("poly", tuple(coeffs))
        raise InvalidShapeError(f"phi.kind must be 'constant' or 'poly', got {kind!r}")


def _reject_extra(d: dict, where: str) -> None:
    if d:
        raise InvalidShapeError(f"unknown keys in {where}: {sorted(d)}")


@dataclass(frozen=True)
class ThetaLaw:
    alpha: float
    phi: PhiSpec
    support_sign: Literal["positive", "mirrored"]
    norm_constant: float
    # (t_knots, cdf_knots) in the variable t = (1/4 - |x|)**(alpha + 1)
    _table: tuple[np.ndarray, np.ndarray] = field(repr=False, compare=False, hash=False)

    @property
    def mirrored(self) -> bool:
        return self.support_sign == "mirrored"

    def phi_effective(self, x):
        """``C * phi(x)`` for ``x`` in ``[0, 1/4]``."""
        return self.norm_constant * self.phi(x)

    def positive_twin(self) -> "ThetaLaw":
        """The same law on ``[0, 1/4)``."""
        if not self.mirrored:
            return self
        return ThetaLaw(self.alpha, self.phi, "positive", self.norm_constant, self._table)

    def density(self, x):
        return theta_density(self, x)

    def cdf(self, x):
        """Tabulated distribution function ``P(theta <= x)``."""
        x = np.asarray(x, dtype=float)
        y = -x if self.mirrored else x
        z = np.clip(QUARTER - y, 0.0, QUARTER)
        t = z ** (self.alpha + 1.0)
        t_knots, c_knots = self._table
        upper = np.interp(t, t_knots, c_knots)  # P(1/4 - |theta| <= z)
        # P(theta <= x) for the positive law is P(z_theta >= z)
        out = 1.0 - upper if not self.mirrored else upper
        return out if out.ndim else float(out)

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "phi": self.phi.to_dict(),
            "support": self.support_sign,
        }


def make_theta_law(
    alpha: float,
    phi: PhiSpec | None = None,
    support_sign: str = "positive",
    rel_tol: float = 1e-12,
    max_subdivisions: int = 200,
) -> ThetaLaw:
    """Validate and normalise a coefficient law.

    Raises
    ------
    InvalidExponentError
        ``alpha <= -1``.
    InvalidShapeError
        ``phi(1/4) == 0``, ``phi`` negative somewhere on ``[0, 1/4]`` or a
        bad support name.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= -1.0:
        raise InvalidExponentError(f"alpha must satisfy alpha > -1, got {alpha}")
    phi = phi or PhiSpec()
    if support_sign not in ("positive", "mirrored"):
        raise InvalidShapeError(f"support must be 'positive' or 'mirrored', got {support_sign!r}")

    at_end = float(phi(QUARTER))
    if at_end == 0.0:
        raise InvalidShapeError("phi(1/4) must be nonzero")
    xs = np.linspace(0.0, QUARTER, 4097)
    vals = phi(xs)
    scale = float(np.max(np.abs(vals)))
    if np.min(vals) < -1e-14 * scale:
        raise InvalidShapeError(
            f"phi takes negative values on [0, 1/4] (min {np.min(vals):.3g})"
        )

    mass = power_weighted(
        lambda z: float(phi(QUARTER - z)), alpha, QUARTER,
        rel_tol=rel_tol, limit=max_subdivisions,
    )
    if not mass > 0.0:
        raise InvalidShapeError("phi integrates to zero against the weight")
    norm = 1.0 / mass
    table = _cdf_table(phi, alpha, norm)
    return ThetaLaw(alpha, phi, support_sign, norm, table)


def _cdf_table(phi: PhiSpec, alpha: float, norm: float) -> tuple[np.ndarray, np.ndarray]:
    # In t = z**(alpha+1), z = 1/4 - |x|, the measure is
    # norm / (alpha+1) * phi(1/4 - t**(1/(alpha+1))) dt: bounded, no singular weight.
    q = alpha + 1.0
    t_knots = np.linspace(0.0, QUARTER**q, CDF_KNOTS)
    u, w = gauss_legendre_01(8)
    a, b = t_knots[:-1, None], t_knots[1:, None]
    nodes = a + (b - a) * u
    vals = phi(QUARTER - nodes ** (1.0 / q))
    cells = (b[:, 0] - a[:, 0]) * (vals @ w) * norm / q
    cdf = np.concatenate(([0.0], np.cumsum(cells)))
    cdf /= cdf[-1]
    t_knots.flags.writeable = False
    cdf.flags.writeable = False
    return t_knots, cdf


def theta_density(law: ThetaLaw, x):
    """Density at ``x``; exactly zero outside the support."""
    x = np.asarray(x, dtype=float)
    y = -x if law.mirrored else x
    inside = (y >= 0.0) & (y < QUARTER)
    yc = np.where(inside, y, 0.0)
    val = law.norm_constant * law.phi(yc) * (QUARTER - yc) ** law.alpha
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def sample_theta(law: ThetaLaw, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` coefficients by inverse transform on the tabulated CDF."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = make_rng(seed)
    u = 1.0 - rng.random(count)  # in (0, 1]
    t_knots, c_knots = law._table
    t = np.interp(u, c_knots, t_knots)
    z = t ** (1.0 / (law.alpha + 1.0))
    x = np.clip(QUARTER - z, 0.0, _X_MAX)
    return -x if law.mirrored else x


def law_from_dict(d: dict[str, Any], **kwargs) -> ThetaLaw:
    d = dict(d)
    if "alpha" not in d:
        raise InvalidExponentError("law.alpha is required")
    alpha = d.pop("alpha")
    phi = PhiSpec.from_dict(d.pop("phi", {"kind": "constant"}))
    support = d.pop("support", "positive")
    _reject_extra(d, "law")
    return make_theta_law(alpha, phi, support, **kwargs)


def constant_law(alpha: float, support_sign: str = "positive") -> ThetaLaw:
    return make_theta_law(alpha, PhiSpec(), support_sign)


__all__ = [
    "CDF_KNOTS",
    "InvalidExponentError",
    "InvalidShapeError",
    "PhiSpec",
    "ThetaLaw",
    "constant_law",
    "law_from_dict",
    "make_theta_law",
    "sample_theta",
    "theta_density",
]
