"""Torus synthesis of autoregressive, aggregated and limit fields.

All fields live on an ``n1 x n2`` torus. On the torus the four-neighbour
equation ``X - theta * (sum of neighbours) = eps`` is diagonal in Fourier
space, so single fields are obtained by one forward and one inverse FFT.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from .rng import derive_seed, make_rng
from .spectral import DEFAULT_QUAD, QuadratureConfig, SpectralModel, f_grid
from .theta_law import ThetaLaw, sample_theta


class NonStationaryError(ValueError):
    """``|theta| >= 1/4``: no stationary solution."""


class NonExistenceError(ValueError):
    """The limit field is not in L2 for ``alpha <= 0``."""


class ExistenceWarning(UserWarning):
    """Aggregation requested for a law whose aggregate is not in L2."""


@dataclass(frozen=True)
class LatticeSpec:
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if int(self.n1) != self.n1 or int(self.n2) != self.n2:
            raise ValueError("lattice dimensions must be integers")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError(f"lattice dimensions must be >= 2, got {self.n1}x{self.n2}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def size(self) -> int:
        return self.n1 * self.n2

    @property
    def bin_area(self) -> float:
        return (2 * math.pi / self.n1) * (2 * math.pi / self.n2)


@dataclass
class FieldRealization:
    lattice: LatticeSpec
    values: np.ndarray
    provenance: dict[str, Any]
    seed: int
    sigma2_eps: float
    meta: dict[str, Any] = field(default_factory=dict)


def ar_symbol(theta: float, lattice: LatticeSpec) -> np.ndarray:
    """``1 - 2 theta (cos l1 + cos l2)`` at every Fourier frequency."""
    c1 = np.cos(2 * math.pi * np.arange(lattice.n1) / lattice.n1)
    c2 = np.cos(2 * math.pi * np.arange(lattice.n2) / lattice.n2)
    return 1.0 - 2.0 * theta * (c1[:, None] + c2[None, :])


def four_neighbour_residual(values: np.ndarray, theta: float) -> np.ndarray:
    """Apply ``X - theta * (sum of 4 circular neighbours)``."""
    nb = (np.roll(values, 1, 0) + np.roll(values, -1, 0)
          + np.roll(values, 1, 1) + np.roll(values, -1, 1))
    return values - theta * nb


def white_noise(lattice: LatticeSpec, sigma2_eps: float, seed: int) -> np.ndarray:
    return math.sqrt(sigma2_eps) * make_rng(seed).standard_normal(lattice.shape)


def _check_theta(theta: float) -> None:
    if not abs(theta) < 0.25:
        raise NonStationaryError(
            f"|theta| must be < 1/4 for a stationary solution, got theta={theta}"
        )


def _ar_spectrum(theta: float, lattice: LatticeSpec, sigma2_eps: float, seed: int) -> np.ndarray:
    return np.fft.fft2(white_noise(lattice, sigma2_eps, seed)) / ar_symbol(theta, lattice)


def simulate_ar_field(theta: float, lattice: LatticeSpec, sigma2_eps: float,
                      seed: int) -> FieldRealization:
    """Solve the four-neighbour equation on the torus for Gaussian noise."""
    _check_theta(theta)
    values = np.fft.ifft2(_ar_spectrum(theta, lattice, sigma2_eps, seed)).real
    return FieldRealization(
        lattice, values, {"kind": "single_theta", "theta": float(theta)}, int(seed), sigma2_eps
    )


def replicate_seeds(seed: int, n: int) -> tuple[int, int]:
    """``(theta_seed, noise_seed)`` of replicate ``n``."""
    return derive_seed(seed, n, "theta"), derive_seed(seed, n, "noise")


def aggregate_field(
    law: ThetaLaw,
    n_fields: int,
    lattice: LatticeSpec,
    sigma2_eps: float,
    seed: int,
    workers: int = 1,
) -> FieldRealization:
    """``N**-1/2`` times the sum of ``N`` independent random-coefficient fields.

    Replicate ``n`` draws its coefficient and its noise from streams keyed
    by ``(seed, n)``; spectra are summed in replicate order, so the result
    does not depend on ``workers``.
    """
    if n_fields < 1:
        raise ValueError("N must be >= 1")
    if law.alpha <= 0:
        warnings.warn(
            f"alpha={law.alpha} <= 0: the aggregate has no L2 limit, "
            "its variance grows with N",
            ExistenceWarning,
            stacklevel=2,
        )

    def one(n: int) -> tuple[float, np.ndarray]:
        theta_seed, noise_seed = replicate_seeds(seed, n)
        theta = float(sample_theta(law, theta_seed, 1)[0])
        return theta, _ar_spectrum(theta, lattice, sigma2_eps, noise_seed)

    total = np.zeros(lattice.shape, dtype=complex)
    thetas: list[float] = []
    chunk = max(1, 4 * workers)
    with ThreadPoolExecutor(max_workers=workers) if workers > 1 else _Serial() as pool:
        for start in range(0, n_fields, chunk):
            for theta, spec in pool.map(one, range(start, min(start + chunk, n_fields))):
                thetas.append(theta)
                total += spec
    values = np.fft.ifft2(total).real
    if n_fields > 1:
        values /= math.sqrt(n_fields)
    return FieldRealization(
        lattice,
        values,
        {"kind": "aggregate", "N": int(n_fields), "law": law.to_dict()},
        int(seed),
        sigma2_eps,
        meta={"thetas": thetas},
    )


class _Serial:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    @staticmethod
    def map(fn, it):
        return map(fn, it)


@lru_cache(maxsize=8)
def _amplitude(law: ThetaLaw, sigma2_eps: float, n1: int, n2: int,
               quad: QuadratureConfig) -> np.ndarray:
    f = f_grid(SpectralModel(law, sigma2_eps), n1, n2, quad)
    amp = 2 * math.pi * np.sqrt(f)
    amp[0, 0] = 0.0  # zero-mean field; f(0) is finite only for alpha > 1
    amp.flags.writeable = False
    return amp


def simulate_limit_field(
    law: ThetaLaw,
    lattice: LatticeSpec,
    sigma2_eps: float,
    seed: int,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> FieldRealization:
    """Gaussian field with spectral density ``f`` at the Fourier frequencies.

    White noise is filtered by ``2 pi sqrt(f_k)``: the transform of a real
    noise grid is Hermitian, so the output is real up to round-off and
    ``E|X_k|^2 = 4 pi^2 n1 n2 f_k``. The DC bin is always dropped, so
    every realization has zero mean.
    """
    if law.alpha <= 0:
        raise NonExistenceError(
            f"the limit field needs alpha > 0 (spectral density not integrable), got {law.alpha}"
        )
    amp = _amplitude(law, float(sigma2_eps), lattice.n1, lattice.n2, quad)
    noise = make_rng(seed).standard_normal(lattice.shape)
    out = np.fft.ifft2(np.fft.fft2(noise) * amp)
    imag = float(np.max(np.abs(out.imag))) if out.size else 0.0
    return FieldRealization(
        lattice,
        out.real.copy(),
        {"kind": "limit", "law": law.to_dict()},
        int(seed),
        sigma2_eps,
        meta={"imag_residue": imag},
    )
