import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from scipy import stats

from oracles import meeus_zenith_deg
from skyghi.errors import (
    BelowHorizon,
    InvalidDay,
    OutsideImageCircle,
    SamplingExhausted,
    SunBelowHorizon,
)
from skyghi.geometry import (
    LensModel,
    SolarGeometry,
    cosine_hemisphere_sample,
    day_angle,
    direction_from_uniform,
    pixel_to_ray,
    project_rays,
    ray_to_pixel,
    rotate_samples,
    rotation_to_sun,
    sample_sun_pixels,
    solar_azimuth,
    solar_position,
    sun_direction_from_geometry,
    unit_vector,
)

UTC8 = timezone(timedelta(hours=8))


def random_upper_directions(rng, n):
    v = rng.normal(size=(n, 3))
    v[:, 2] = np.abs(v[:, 2])
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class TestLensModel:
    def test_rejects_nonpositive_focal(self):
        with pytest.raises(ValueError):
            LensModel(0.0, 10, 10, 5)

    def test_rejects_circle_beyond_focal_scale(self):
        with pytest.raises(ValueError):
            LensModel(100.0, 10, 10, 101.0)


class TestRayToPixel:
    def test_zenith_maps_to_center(self, lens):
        u, v = ray_to_pixel(np.array([0.0, 0.0, 1.0]), lens)
        assert (u, v) == (lens.center_x, lens.center_y)

    def test_horizon_ray_equisolid_radius(self):
        lens = LensModel(1000.0, 500.0, 500.0, 1000.0)
        u, v = ray_to_pixel(unit_vector(1, 0, 0), lens)
        assert u == pytest.approx(500.0 + 1000.0 * math.sin(math.radians(45.0)), abs=1e-9)
        assert u == pytest.approx(1207.10678, abs=1e-4)
        assert v == pytest.approx(500.0, abs=1e-9)

    def test_below_horizon_raises(self, lens):
        with pytest.raises(BelowHorizon):
            ray_to_pixel(np.array([0.0, 0.0, -1.0]), lens)

    def test_outside_image_circle_raises(self):
        lens = LensModel(1000.0, 500.0, 500.0, 300.0)
        with pytest.raises(OutsideImageCircle):
            ray_to_pixel(unit_vector(1, 0, 0.2), lens)


class TestPixelToRay:
    def test_center_maps_to_zenith(self, lens):
        assert pixel_to_ray((lens.center_x, lens.center_y), lens).tolist() == [0.0, 0.0, 1.0]

    def test_round_trip_1000_random_directions(self, lens):
        rng = np.random.default_rng(7)
        dirs = random_upper_directions(rng, 1000)
        for d in dirs:
            try:
                uv = ray_to_pixel(d, lens)
            except OutsideImageCircle:
                continue
            back = pixel_to_ray(uv, lens)
            assert np.max(np.abs(back - d)) < 1e-9

    def test_horizon_radius_inverts_to_z_zero(self):
        lens = LensModel(1000.0, 500.0, 500.0, 1000.0)
        r = 1000.0 * math.sin(math.radians(45.0))
        d = pixel_to_ray((500.0 + r, 500.0), lens)
        assert abs(d[2]) < 1e-9

    def test_outside_circle_raises(self, lens):
        with pytest.raises(OutsideImageCircle):
            pixel_to_ray((lens.center_x + lens.image_circle_radius + 1, lens.center_y), lens)


class TestCosineHemisphereSample:
    def test_construction_edge_cases(self):
        assert direction_from_uniform(0.0, 1.0).tolist() == [0.0, 0.0, 1.0]
        d = direction_from_uniform(0.25, 0.25)
        assert d[0] == pytest.approx(0.0, abs=1e-12)
        assert d[1] == pytest.approx(0.86603, abs=1e-5)
        assert d[2] == pytest.approx(0.5, abs=1e-12)

    def test_unit_norm_and_upper_hemisphere(self):
        pts = cosine_hemisphere_sample(3, 500)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
        assert np.all(pts[:, 2] >= 0.0)

    def test_deterministic_for_fixed_seed(self):
        a = cosine_hemisphere_sample(123, 50)
        b = cosine_hemisphere_sample(123, 50)
        assert np.array_equal(a, b)

    def test_cos_squared_theta_uniform_ks(self):
        pts = cosine_hemisphere_sample(2024, 100_000)
        cos2 = pts[:, 2] ** 2
        assert stats.kstest(cos2, "uniform").pvalue > 0.01

    def test_azimuth_uniform_ks(self):
        pts = cosine_hemisphere_sample(2024, 100_000)
        phi = np.arctan2(pts[:, 1], pts[:, 0]) % (2 * np.pi)
        assert stats.kstest(phi / (2 * np.pi), "uniform").pvalue > 0.01

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            cosine_hemisphere_sample(1, 0)


def rotation_errors(r):
    ortho = np.max(np.abs(r.T @ r - np.eye(3)))
    det = abs(np.linalg.det(r) - 1.0)
    return ortho, det


class TestRotationToSun:
    def test_zenith_gives_identity(self):
        assert np.array_equal(rotation_to_sun(np.array([0.0, 0.0, 1.0])), np.eye(3))

    def test_maps_z_to_sun(self):
        r = rotation_to_sun(unit_vector(1, 0, 0))
        assert np.max(np.abs(r @ [0, 0, 1] - [1, 0, 0])) < 1e-9
        ortho, det = rotation_errors(r)
        assert ortho < 1e-9 and det < 1e-9

    def test_antipode_is_x_flip(self):
        r = rotation_to_sun(np.array([0.0, 0.0, -1.0]))
        assert np.array_equal(r, np.diag([1.0, -1.0, -1.0]))
        assert np.allclose(r @ [0, 0, 1], [0, 0, -1])

    def test_random_directions_orthonormal(self):
        rng = np.random.default_rng(11)
        for d in random_upper_directions(rng, 200):
            r = rotation_to_sun(d)
            assert np.max(np.abs(r @ [0, 0, 1] - d)) < 1e-9
            ortho, det = rotation_errors(r)
            assert ortho < 1e-9 and det < 1e-9

    def test_near_antipodal_stays_orthonormal(self):
        d = unit_vector(1e-7, 0.0, -1.0)
        r = rotation_to_sun(d)
        assert np.max(np.abs(r @ [0, 0, 1] - d)) < 1e-9
        ortho, det = rotation_errors(r)
        assert ortho < 1e-9 and det < 1e-9


class TestRotateSamples:
    def test_identity_keeps_points(self):
        pts = cosine_hemisphere_sample(5, 20)
        assert np.array_equal(rotate_samples(pts, np.eye(3)), pts)

    def test_rotation_contract_case(self):
        r = rotation_to_sun(unit_vector(1, 0, 0))
        out = rotate_samples(np.array([[0.0, 0.0, 1.0]]), r)
        assert np.max(np.abs(out[0] - [1, 0, 0])) < 1e-9

    def test_pairwise_angles_preserved(self):
        rng = np.random.default_rng(13)
        pts = random_upper_directions(rng, 40)
        r = rotation_to_sun(random_upper_directions(rng, 1)[0])
        rotated = rotate_samples(pts, r)
        assert np.allclose(
            np.linalg.norm(rotated, axis=1), np.linalg.norm(pts, axis=1), atol=1e-9
        )
        assert np.max(np.abs(rotated @ rotated.T - pts @ pts.T)) < 1e-9

    def test_concentration_toward_sun(self):
        sun = unit_vector(1.0, 1.0, 0.5)
        pts = rotate_samples(cosine_hemisphere_sample(99, 4000), rotation_to_sun(sun))
        perp = unit_vector(1.0, -1.0, 0.0)
        assert np.mean(pts @ sun) > np.mean(pts @ perp)


class TestDayAngle:
    def test_first_day_is_zero(self):
        assert day_angle(1) == 0.0

    def test_mid_year(self):
        assert day_angle(183) == pytest.approx(2 * math.pi * 182 / 365, rel=1e-12)
        assert day_angle(183) == pytest.approx(3.13298, abs=1e-5)

    def test_leap_day_permitted(self):
        assert day_angle(366) == pytest.approx(2 * math.pi, rel=1e-12)

    @pytest.mark.parametrize("bad", [0, 367, -1, 12.5])
    def test_invalid_days(self, bad):
        with pytest.raises(InvalidDay):
            day_angle(bad)


class TestSolarPosition:
    def test_equator_equinox_noon_near_zenith(self):
        ts = datetime(2023, 3, 20, 12, 8, tzinfo=timezone.utc)
        geom = solar_position(ts, 0.0, 0.0)
        assert geom.zenith_deg < 1.0

    def test_local_midnight_below_horizon(self):
        ts = datetime(2016, 9, 1, 0, 0, tzinfo=UTC8)
        geom = solar_position(ts, 1.34, 103.68)
        assert geom.zenith_deg > 90.0

    def test_matches_independent_ephemeris_at_site(self):
        ts = datetime(2016, 9, 1, 13, 0, tzinfo=UTC8)
        geom = solar_position(ts, 1.34, 103.68)
        assert abs(geom.zenith_deg - meeus_zenith_deg(ts, 1.34, 103.68)) < 0.5

    def test_matches_independent_ephemeris_across_year(self):
        worst = 0.0
        for day in range(5, 366, 30):
            ts = datetime(2016, 1, 1, 5, tzinfo=timezone.utc) + timedelta(days=day)
            z = solar_position(ts, 1.34, 103.68).zenith_deg
            worst = max(worst, abs(z - meeus_zenith_deg(ts, 1.34, 103.68)))
        assert worst < 0.5

    def test_zenith_continuous_in_time(self):
        t = datetime(2016, 1, 1, tzinfo=timezone.utc)
        for _ in range(120):
            z1 = solar_position(t, 1.34, 103.68).zenith_deg
            z2 = solar_position(t + timedelta(seconds=60), 1.34, 103.68).zenith_deg
            assert abs(z2 - z1) < 0.3
            t += timedelta(hours=73)  # sweep through days and hours

    def test_fills_day_angle_and_eccentricity(self):
        ts = datetime(2016, 9, 1, 13, 0, tzinfo=UTC8)
        geom = solar_position(ts, 1.34, 103.68)
        # 2016-09-01 13:00 UTC+8 is 05:00 UTC on day 245
        assert geom.day_angle_rad == pytest.approx(2 * math.pi * 244 / 365, rel=1e-12)
        assert 0.96 < geom.eccentricity < 1.04

    def test_rejects_naive_timestamp(self):
        with pytest.raises(ValueError):
            solar_position(datetime(2016, 9, 1, 13, 0), 1.34, 103.68)

    def test_rejects_bad_coordinates(self):
        ts = datetime(2016, 9, 1, 13, 0, tzinfo=UTC8)
        with pytest.raises(ValueError):
            solar_position(ts, 91.0, 0.0)
        with pytest.raises(ValueError):
            solar_position(ts, 0.0, 181.0)


class TestSunDirectionFromGeometry:
    def geom(self, zenith):
        return SolarGeometry(zenith_deg=zenith, day_angle_rad=1.0, eccentricity=1.0)

    def test_zenith_sun(self):
        d = sun_direction_from_geometry(self.geom(0.0), azimuth_deg=123.0)
        assert np.allclose(d, [0, 0, 1], atol=1e-12)

    def test_horizon_north(self):
        d = sun_direction_from_geometry(self.geom(90.0), azimuth_deg=0.0)
        assert np.allclose(d, [0, 1, 0], atol=1e-12)

    def test_east_at_60_degrees(self):
        d = sun_direction_from_geometry(self.geom(60.0), azimuth_deg=90.0)
        assert d[0] == pytest.approx(0.86603, abs=1e-5)
        assert d[1] == pytest.approx(0.0, abs=1e-12)
        assert d[2] == pytest.approx(0.5, abs=1e-12)

    def test_below_horizon_raises(self):
        with pytest.raises(SunBelowHorizon):
            sun_direction_from_geometry(self.geom(95.0), azimuth_deg=0.0)

    def test_azimuth_consistency_with_solar_position(self):
        ts = datetime(2016, 9, 1, 9, 0, tzinfo=UTC8)
        az = solar_azimuth(ts, 1.34, 103.68)
        assert 0.0 <= az < 360.0
        geom = solar_position(ts, 1.34, 103.68)
        d = sun_direction_from_geometry(geom, az)
        # morning sun is in the east
        assert d[0] > 0.5


class TestSampleSunPixels:
    def test_all_samples_inside_image_and_circle(self, lens):
        rng = np.random.default_rng(3)
        sun = unit_vector(0.3, 0.2, 0.9)
        uv = sample_sun_pixels(lens, sun, 500, rng, 240, 240)
        assert uv.shape == (500, 2)
        radius = np.hypot(uv[:, 0] - lens.center_x, uv[:, 1] - lens.center_y)
        assert np.all(radius <= lens.image_circle_radius + 1e-9)
        assert np.all((uv >= 0.0) & (uv <= 239.0))

    def test_deterministic_given_seed_sequence(self, lens):
        sun = unit_vector(0.1, -0.4, 0.9)
        a = sample_sun_pixels(lens, sun, 300, np.random.default_rng([5, 2]), 240, 240)
        b = sample_sun_pixels(lens, sun, 300, np.random.default_rng([5, 2]), 240, 240)
        assert np.array_equal(a, b)

    def test_low_sun_replaces_offscreen_samples(self):
        # a lens whose circle cuts off at ~45 deg zenith discards many draws
        lens = LensModel(150.0, 120.0, 120.0, 60.0)
        sun = unit_vector(0.7, 0.0, 0.72)
        uv = sample_sun_pixels(lens, sun, 400, np.random.default_rng(8), 240, 240)
        radius = np.hypot(uv[:, 0] - 120.0, uv[:, 1] - 120.0)
        assert len(uv) == 400
        assert np.all(radius <= 60.0 + 1e-9)

    def test_budget_exhaustion_raises(self):
        lens = LensModel(150.0, 120.0, 120.0, 0.5)  # nearly nothing lands inside
        with pytest.raises(SamplingExhausted):
            sample_sun_pixels(
                lens, unit_vector(1, 0, 0.05), 50, np.random.default_rng(1), 240, 240
            )

    def test_project_rays_masks_below_horizon(self, lens):
        pts = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])
        uv, valid = project_rays(pts, lens)
        # horizon ray of this lens: r = 150*sin(45 deg) = 106.07 <= 110 -> valid
        assert valid.tolist() == [True, False, True]
        assert np.allclose(uv[0], [120.0, 120.0])
        assert np.hypot(uv[2, 0] - 120.0, uv[2, 1] - 120.0) == pytest.approx(
            150.0 * math.sin(math.radians(45.0)), abs=1e-9
        )


class TestSolarGeometryValidation:
    def test_rejects_zenith_out_of_range(self):
        with pytest.raises(ValueError):
            SolarGeometry(zenith_deg=181.0, day_angle_rad=0.0, eccentricity=1.0)

    def test_rejects_eccentricity_out_of_range(self):
        with pytest.raises(ValueError):
            SolarGeometry(zenith_deg=10.0, day_angle_rad=0.0, eccentricity=1.05)
