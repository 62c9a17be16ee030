import math

import numpy as np
import pytest

from isoagg.memory import (
    InsufficientDataError,
    PeriodogramEstimate,
    RadialSpectrum,
    autocovariance_from_spectrum,
    estimate_memory,
    mean_periodogram,
    periodogram,
    radial_average,
    sample_autocovariance,
    seasonal_scan,
    summability_diagnostic,
)
from isoagg.rng import derive_seed
from isoagg.simulate import LatticeSpec, simulate_limit_field
from isoagg.spectral import check_integrability, f_grid, fourier_frequencies
from isoagg.theta_law import constant_law

from conftest import model

PI = math.pi


def synthetic_radial(fn, n_bins=24, lo=0.01, hi=3.0):
    """A RadialSpectrum whose ordinates are exactly fn(radius)."""
    r = np.geomspace(lo, hi, n_bins)
    edges = np.concatenate([[0.0], np.sqrt(r[:-1] * r[1:]), [PI]])
    return RadialSpectrum(edges, r, fn(r), np.ones(n_bins, int), lo)


class TestPeriodogram:
    def test_parseval(self):
        x = np.random.default_rng(1).standard_normal((24, 18))
        p = periodogram(x)
        lat = p.lattice
        assert float(np.sum(p.ordinates)) * lat.bin_area == pytest.approx(np.mean(x**2), rel=1e-10)

    def test_constant_field(self):
        p = periodogram(np.full((8, 6), 3.0)).ordinates
        assert p[0, 0] > 0
        rest = p.copy()
        rest[0, 0] = 0
        assert np.max(rest) < 1e-25

    def test_mean_of_nothing(self):
        with pytest.raises(InsufficientDataError):
            mean_periodogram([])

    def test_mean_counts(self):
        xs = [np.ones((4, 4)), np.zeros((4, 4))]
        est = mean_periodogram(xs)
        assert est.replicates == 2
        assert est.ordinates[0, 0] == pytest.approx(0.5 * periodogram(xs[0]).ordinates[0, 0])

    def test_limit_field_ratio_band(self):
        law = constant_law(2.0)
        lat = LatticeSpec(64, 64)
        est = mean_periodogram(simulate_limit_field(law, lat, 1.0, derive_seed(9, r))
                               for r in range(100))
        g = f_grid(model(2.0), 64, 64)
        l1, l2 = fourier_frequencies(64, 64)
        away = np.hypot(l1, l2) > 0
        ratio = est.ordinates[away] / g[away]
        inside = np.mean((ratio >= 0.8) & (ratio <= 1.25))
        assert inside >= 0.95


class TestRadial:
    def test_isotropic_smooth_input(self):
        lat = LatticeSpec(128, 128)
        l1, l2 = fourier_frequencies(128, 128)
        fn = lambda r: np.exp(-r)  # noqa: E731
        rad = radial_average(PeriodogramEstimate(lat, fn(np.hypot(l1, l2))), 16)
        ok = rad.count > 0
        widths = np.diff(rad.bin_edges)[ok]
        err = np.abs(rad.mean_ordinate[ok] / fn(rad.radius[ok]) - 1)
        assert np.all(err <= widths**2 / 8 + 1e-12)

    def test_point_mass(self):
        lat = LatticeSpec(32, 32)
        ords = np.zeros(lat.shape)
        ords[5, 3] = 1.0
        rad = radial_average(PeriodogramEstimate(lat, ords), 10)
        r = math.hypot(2 * PI * 5 / 32, 2 * PI * 3 / 32)
        hit = np.nonzero(np.nan_to_num(rad.mean_ordinate))[0]
        assert len(hit) == 1
        assert rad.bin_edges[hit[0]] < r <= rad.bin_edges[hit[0] + 1]

    def test_bins_partition(self):
        lat = LatticeSpec(20, 30)
        rad = radial_average(PeriodogramEstimate(lat, np.ones(lat.shape)), 12)
        l1, l2 = fourier_frequencies(20, 30)
        r = np.hypot(l1, l2)
        assert rad.count.sum() == np.count_nonzero((r > 0) & (r <= PI))
        assert rad.bin_edges[0] == 0.0 and rad.bin_edges[-1] == pytest.approx(PI)
        assert np.all(np.diff(rad.bin_edges) > 0)

    def test_center_shift(self):
        lat = LatticeSpec(16, 16)
        l1, l2 = fourier_frequencies(16, 16)
        ords = (np.abs(l1) == PI) & (np.abs(l2) == PI)
        rad = radial_average(PeriodogramEstimate(lat, ords.astype(float)), 6, center=(PI, PI))
        assert np.nansum(rad.mean_ordinate * rad.count) == 0.0  # the centre itself is excluded

    def test_rows(self):
        rad = radial_average(PeriodogramEstimate(LatticeSpec(8, 8), np.ones((8, 8))), 4)
        rows = rad.rows()
        assert len(rows) == 4 and set(rows[0]) == {"r_lo", "r_hi", "radius", "mean_ordinate", "count"}

    def test_too_few_bins(self):
        with pytest.raises(ValueError):
            radial_average(PeriodogramEstimate(LatticeSpec(8, 8), np.ones((8, 8))), 1)

    @pytest.mark.slow
    def test_half_alpha_slope(self):
        law = constant_law(0.5)
        lat = LatticeSpec(512, 512)
        est = mean_periodogram(simulate_limit_field(law, lat, 1.0, derive_seed(3, r))
                               for r in range(50))
        rep = estimate_memory(radial_average(est))
        assert rep.slope == pytest.approx(-1.0, abs=0.2)


class TestEstimate:
    def test_noiseless_power(self):
        rep = estimate_memory(synthetic_radial(lambda r: r**-1.0), (0.01, 3.0))
        assert rep.slope == pytest.approx(-1.0, abs=1e-12)
        assert rep.alpha_hat == pytest.approx(0.5, abs=1e-12)
        assert rep.stderr < 1e-10
        assert rep.classification == "long_power"

    def test_noiseless_constant(self):
        rep = estimate_memory(synthetic_radial(lambda r: np.full_like(r, 2.0)), (0.01, 3.0))
        assert rep.slope == pytest.approx(0.0, abs=1e-12)
        assert rep.classification == "short"

    def test_noiseless_log(self):
        rep = estimate_memory(synthetic_radial(lambda r: 0.05 * np.abs(np.log(r * r))), (0.01, 0.5))
        assert rep.classification == "long_log"

    def test_steep_is_inconclusive(self):
        rep = estimate_memory(synthetic_radial(lambda r: r**-2.5), (0.01, 3.0))
        assert rep.classification == "inconclusive"

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            estimate_memory(synthetic_radial(lambda r: r**-1.0), (0.5, 0.6))

    def test_report_dict(self):
        d = estimate_memory(synthetic_radial(lambda r: r**-1.0), (0.01, 3.0)).to_dict()
        assert d["fit_range"] == [0.01, 3.0]

    @pytest.mark.slow
    def test_three_quarter_pipeline(self):
        law = constant_law(0.75)
        lat = LatticeSpec(512, 512)
        est = mean_periodogram(simulate_limit_field(law, lat, 1.0, derive_seed(4, r))
                               for r in range(50))
        rep = estimate_memory(radial_average(est))
        assert 0.6 <= rep.alpha_hat <= 0.9


class TestAutocovariance:
    def test_white_noise(self):
        g = autocovariance_from_spectrum(np.full((8, 8), 2.0 / (4 * PI**2)))
        assert g[0, 0] == pytest.approx(2.0)
        rest = g.copy()
        rest[0, 0] = 0
        assert np.max(np.abs(rest)) < 1e-14

    def test_evenness(self, m_half):
        g = autocovariance_from_spectrum(f_grid(m_half, 32, 32))
        k = np.arange(32)
        np.testing.assert_allclose(g, g[np.ix_(-k % 32, -k % 32)], atol=1e-14)
        np.testing.assert_allclose(g, g.T, atol=1e-14)

    def test_rejects_odd_input(self):
        f = np.zeros((8, 8))
        f[1, 2] = 1.0
        with pytest.raises(ValueError):
            autocovariance_from_spectrum(f)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            autocovariance_from_spectrum(np.ones((4, 4)), LatticeSpec(4, 5))

    def test_alpha_two_matches_integrability(self, m_two):
        g = autocovariance_from_spectrum(f_grid(m_two, 1024, 1024))
        assert g[0, 0] == pytest.approx(check_integrability(m_two).estimate, rel=0.01)

    def test_sample_autocovariance_lags(self):
        x = np.zeros((6, 6))
        x[0, 0], x[1, 0] = 1.0, 2.0
        got = sample_autocovariance(x, [(0, 0), (1, 0), (0, 1)], center=False)
        np.testing.assert_allclose(got, [5 / 36, 2 / 36, 0.0])


class TestSummability:
    def test_white_noise(self):
        g = np.zeros((64, 64))
        g[0, 0] = 1.0
        rep = summability_diagnostic(g, [0, 1, 2, 4, 8, 16])
        assert rep.partial_sums == [1.0] * 6
        assert rep.verdict == "summable-looking"

    def test_radius_guard(self):
        with pytest.raises(ValueError):
            summability_diagnostic(np.zeros((32, 32)), [1, 9])

    def test_half_alpha_flat_increments(self, m_half):
        g = autocovariance_from_spectrum(f_grid(m_half, 1024, 1024))
        rep = summability_diagnostic(g, [1, 2, 4, 8, 16, 32, 64, 128, 256])
        assert rep.verdict == "non-summable-looking"
        assert rep.exponent > -0.5
        head = np.array(rep.increments[:5])
        assert np.ptp(head) / head.mean() < 0.1

    def test_alpha_two_tail(self, m_two):
        g = autocovariance_from_spectrum(f_grid(m_two, 1024, 1024))
        rep = summability_diagnostic(g, [1, 2, 4, 8, 16, 32, 64, 128, 256])
        s32 = rep.partial_sums[rep.radii.index(32)]
        assert (rep.partial_sums[-1] - s32) < 0.01 * rep.partial_sums[-1]
        assert rep.verdict == "summable-looking"


class TestSeasonal:
    def test_mirrored_corner(self, m_half_mirrored):
        assert seasonal_scan(m_half_mirrored, LatticeSpec(32, 32)) == [(PI, PI)]

    def test_positive_origin(self, m_half):
        assert seasonal_scan(m_half, LatticeSpec(32, 32)) == [(0.0, 0.0)]

    def test_mirrored_continuous(self):
        assert seasonal_scan(model(2.0, "mirrored"), LatticeSpec(32, 32)) == []

    def test_odd_lattice_log_case(self):
        assert seasonal_scan(model(1.0, "mirrored"), LatticeSpec(33, 33)) == [(PI, PI)]
