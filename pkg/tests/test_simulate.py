import math
import warnings

import numpy as np
import pytest

from isoagg.rng import derive_seed
from isoagg.simulate import (
    ExistenceWarning,
    LatticeSpec,
    NonExistenceError,
    NonStationaryError,
    aggregate_field,
    ar_symbol,
    four_neighbour_residual,
    replicate_seeds,
    simulate_ar_field,
    simulate_limit_field,
    white_noise,
)
from isoagg.spectral import SpectralModel, f_grid
from isoagg.theta_law import constant_law, sample_theta


def test_lattice_validation():
    with pytest.raises(ValueError):
        LatticeSpec(1, 4)
    lat = LatticeSpec(8, 4)
    assert lat.size == 32 and lat.bin_area == pytest.approx(4 * math.pi**2 / 32)


class TestSingle:
    def test_theta_zero_is_noise(self):
        lat = LatticeSpec(16, 12)
        f = simulate_ar_field(0.0, lat, 2.0, 7)
        np.testing.assert_allclose(f.values, white_noise(lat, 2.0, 7), rtol=0, atol=1e-13)

    @pytest.mark.parametrize("theta", [-0.2499, -0.1, 0.05, 0.2499])
    def test_residual(self, theta):
        lat = LatticeSpec(32, 20)
        f = simulate_ar_field(theta, lat, 1.0, 3)
        eps = white_noise(lat, 1.0, 3)
        res = four_neighbour_residual(f.values, theta) - eps
        assert np.max(np.abs(res)) / np.max(np.abs(eps)) < 1e-10

    @pytest.mark.parametrize("theta", [0.25, -0.25, 0.3, math.nan])
    def test_nonstationary(self, theta):
        with pytest.raises(NonStationaryError):
            simulate_ar_field(theta, LatticeSpec(4, 4), 1.0, 0)

    def test_symbol_matches_residual_operator(self):
        lat = LatticeSpec(6, 5)
        x = np.random.default_rng(0).standard_normal(lat.shape)
        lhs = np.fft.fft2(four_neighbour_residual(x, 0.13))
        np.testing.assert_allclose(lhs, ar_symbol(0.13, lat) * np.fft.fft2(x), atol=1e-12)

    def test_variance_matches_spectral_sum(self):
        lat = LatticeSpec(64, 64)
        theta, sigma2 = 0.2, 1.0
        expected = sigma2 / lat.size * float(np.sum(ar_symbol(theta, lat) ** -2.0))
        stats = np.array([np.mean(simulate_ar_field(theta, lat, sigma2, s).values ** 2)
                          for s in range(400)])
        se = stats.std(ddof=1) / math.sqrt(len(stats))
        assert abs(stats.mean() - expected) < 3 * se

    def test_determinism(self):
        lat = LatticeSpec(8, 8)
        a = simulate_ar_field(0.1, lat, 1.0, 99).values
        b = simulate_ar_field(0.1, lat, 1.0, 99).values
        assert a.tobytes() == b.tobytes()


class TestAggregate:
    def test_single_replicate_is_bitwise_ar_field(self):
        law = constant_law(0.5)
        lat = LatticeSpec(16, 16)
        agg = aggregate_field(law, 1, lat, 1.0, 11)
        theta_seed, noise_seed = replicate_seeds(11, 0)
        theta = float(sample_theta(law, theta_seed, 1)[0])
        single = simulate_ar_field(theta, lat, 1.0, noise_seed)
        assert agg.values.tobytes() == single.values.tobytes()
        assert agg.meta["thetas"] == [theta]

    def test_worker_count_irrelevant(self):
        law = constant_law(0.5)
        lat = LatticeSpec(16, 8)
        a = aggregate_field(law, 13, lat, 1.0, 5, workers=1).values
        b = aggregate_field(law, 13, lat, 1.0, 5, workers=4).values
        assert a.tobytes() == b.tobytes()

    def test_variance_free_of_n(self):
        law = constant_law(0.5)
        lat = LatticeSpec(16, 16)
        means = {}
        # centred: on the torus the DC ordinate 1 / (1 - 4 theta)^2 has infinite
        # mean for alpha <= 1, so raw second moments are not comparable
        for n in (1, 10):
            v = np.array([np.var(aggregate_field(law, n, lat, 1.0, derive_seed(1, n, r)).values)
                          for r in range(300)])
            means[n] = (v.mean(), v.std(ddof=1) / math.sqrt(len(v)))
        (m1, s1), (m10, s10) = means[1], means[10]
        assert abs(m1 - m10) < 3 * math.hypot(s1, s10)

    def test_existence_warning(self):
        with pytest.warns(ExistenceWarning):
            aggregate_field(constant_law(-0.5), 2, LatticeSpec(4, 4), 1.0, 0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            aggregate_field(constant_law(0.5), 2, LatticeSpec(4, 4), 1.0, 0)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            aggregate_field(constant_law(0.5), 0, LatticeSpec(4, 4), 1.0, 0)

    def test_mirrored_law_thetas_negative(self):
        agg = aggregate_field(constant_law(0.5, "mirrored"), 20, LatticeSpec(4, 4), 1.0, 0)
        assert all(-0.25 < t <= 0 for t in agg.meta["thetas"])


class TestLimit:
    def test_real_and_zero_mean(self):
        f = simulate_limit_field(constant_law(0.5), LatticeSpec(64, 48), 1.0, 3)
        assert f.meta["imag_residue"] < 1e-10
        assert abs(f.values.mean()) < 1e-12

    @pytest.mark.parametrize("alpha", [0.0, -0.5])
    def test_non_existence(self, alpha):
        with pytest.raises(NonExistenceError):
            simulate_limit_field(constant_law(alpha), LatticeSpec(8, 8), 1.0, 0)

    def test_variance_alpha_two(self):
        law = constant_law(2.0)
        lat = LatticeSpec(256, 256)
        g = f_grid(SpectralModel(law), 256, 256)
        g[0, 0] = 0.0
        expected = float(np.sum(g)) * lat.bin_area
        v = np.array([np.mean(simulate_limit_field(law, lat, 1.0, s).values ** 2)
                      for s in range(60)])
        se = v.std(ddof=1) / math.sqrt(len(v))
        assert abs(v.mean() - expected) < 3 * se

    def test_sigma2_scales_field(self):
        lat = LatticeSpec(16, 16)
        a = simulate_limit_field(constant_law(0.5), lat, 1.0, 4).values
        b = simulate_limit_field(constant_law(0.5), lat, 4.0, 4).values
        np.testing.assert_allclose(b, 2 * a, rtol=1e-10, atol=1e-14)

    def test_determinism(self):
        lat = LatticeSpec(32, 32)
        a = simulate_limit_field(constant_law(0.5), lat, 1.0, 8).values
        b = simulate_limit_field(constant_law(0.5), lat, 1.0, 8).values
        assert a.tobytes() == b.tobytes()
