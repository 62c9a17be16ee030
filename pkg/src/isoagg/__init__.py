"""Aggregated isotropic four-nearest-neighbour autoregressive fields on Z^2."""

from .memory import (
    MemoryReport,
    PeriodogramEstimate,
    RadialSpectrum,
    autocovariance_from_spectrum,
    estimate_memory,
    mean_periodogram,
    periodogram,
    radial_average,
    seasonal_scan,
    summability_diagnostic,
)
from .simulate import (
    FieldRealization,
    LatticeSpec,
    aggregate_field,
    simulate_ar_field,
    simulate_limit_field,
)
from .spectral import (
    QuadratureConfig,
    SpectralModel,
    a_lambda,
    ar_denominator,
    asymptote,
    c_alpha,
    c_one,
    check_integrability,
    f_direct,
    f_grid,
    f_transformed,
    f_values,
    spectral_density,
)
from .theta_law import (
    PhiSpec,
    ThetaLaw,
    constant_law,
    make_theta_law,
    sample_theta,
    theta_density,
)

__version__ = "0.1.0"

__all__ = [
    "FieldRealization",
    "LatticeSpec",
    "MemoryReport",
    "PeriodogramEstimate",
    "PhiSpec",
    "QuadratureConfig",
    "RadialSpectrum",
    "SpectralModel",
    "ThetaLaw",
    "a_lambda",
    "aggregate_field",
    "ar_denominator",
    "asymptote",
    "autocovariance_from_spectrum",
    "c_alpha",
    "c_one",
    "check_integrability",
    "constant_law",
    "estimate_memory",
    "f_direct",
    "f_grid",
    "f_transformed",
    "f_values",
    "make_theta_law",
    "mean_periodogram",
    "periodogram",
    "radial_average",
    "sample_theta",
    "seasonal_scan",
    "simulate_ar_field",
    "simulate_limit_field",
    "spectral_density",
    "summability_diagnostic",
    "theta_density",
]
