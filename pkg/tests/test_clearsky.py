import math
from datetime import date, timedelta

import numpy as np
import pytest

from skyghi.clearsky import (
    ClearSkyConstants,
    clear_sky_curve,
    clear_sky_ghi,
    eccentricity,
    percentage_deviation,
)
from skyghi.config import SiteConfig
from skyghi.errors import InvalidZenith
from skyghi.ingest import IrradianceSeries


def reference_ghi(zenith_deg: float, e0: float) -> float:
    """Independent evaluation of the clear-sky formula, written out in full."""
    return (
        0.8277
        * e0
        * 1366.1
        * math.cos(math.radians(zenith_deg)) ** 1.3644
        * math.exp(-0.0013 * (90.0 - zenith_deg))
    )


EQUATOR_SITE = SiteConfig(
    latitude_deg=1.34,
    longitude_deg=103.68,
    utc_offset_minutes=480,
    focal_scale_px=150.0,
    center_x_px=120.0,
    center_y_px=120.0,
    image_circle_radius_px=110.0,
)


class TestEccentricity:
    def test_zero_day_angle(self):
        assert eccentricity(0.0) == pytest.approx(1.03505, abs=1e-12)

    def test_half_year(self):
        assert eccentricity(math.pi) == pytest.approx(0.966608, abs=1e-12)

    def test_quarter_year(self):
        assert eccentricity(math.pi / 2) == pytest.approx(1.000671, abs=1e-12)

    def test_bounded_over_full_cycle(self):
        g = np.linspace(0.0, 2 * math.pi, 20001)
        values = np.array([eccentricity(x) for x in g])
        assert values.min() >= 0.966
        assert values.max() <= 1.0351

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            eccentricity(-0.1)
        with pytest.raises(ValueError):
            eccentricity(2 * math.pi + 0.1)


class TestClearSkyGhi:
    def test_overhead_sun(self):
        value = clear_sky_ghi(0.0, 1.0)
        ref = reference_ghi(0.0, 1.0)
        assert abs(value - ref) <= 1e-6 * ref
        assert value == pytest.approx(1005.8726325113697, rel=1e-12)

    def test_sun_at_horizon_is_zero(self):
        value = clear_sky_ghi(90.0, 1.0)
        assert abs(value - reference_ghi(90.0, 1.0)) <= 1e-12
        assert value < 1e-12

    def test_sixty_degrees(self):
        # direct evaluation of the formula; frozen from the reference
        value = clear_sky_ghi(60.0, 1.0)
        assert value == pytest.approx(reference_ghi(60.0, 1.0), rel=1e-12)
        assert value == pytest.approx(422.3695837563101, rel=1e-9)

    def test_strictly_decreasing_in_zenith(self):
        # the exp(-decay*(90-z)) factor grows with z, so the curve has a
        # shallow maximum near z = 3.1 deg; beyond it the model decreases
        # strictly all the way to the horizon
        zeniths = np.linspace(3.2, 90.0, 500)
        values = [clear_sky_ghi(z, 1.0) for z in zeniths]
        assert all(a > b for a, b in zip(values, values[1:]))
        low = [clear_sky_ghi(z, 1.0) for z in np.linspace(0.0, 3.2, 50)]
        assert max(low) < values[0] * 1.001

    def test_linear_in_eccentricity(self):
        base = clear_sky_ghi(30.0, 1.0)
        for e0 in (0.97, 1.0, 1.03):
            assert clear_sky_ghi(30.0, e0) == pytest.approx(e0 * base, rel=1e-12)

    def test_rejects_zenith_out_of_range(self):
        with pytest.raises(InvalidZenith):
            clear_sky_ghi(-1.0, 1.0)
        with pytest.raises(InvalidZenith):
            clear_sky_ghi(90.5, 1.0)

    def test_custom_constants(self):
        consts = ClearSkyConstants(scale=1.0, solar_constant=1000.0, cos_exponent=1.0, decay_per_deg=0.0)
        assert clear_sky_ghi(60.0, 1.0, consts) == pytest.approx(500.0, rel=1e-12)


class TestClearSkyCurve:
    def test_zero_outside_daylight(self):
        curve = clear_sky_curve(date(2016, 9, 1), EQUATOR_SITE, 600)
        local_hours = np.array(
            [t.astimezone(EQUATOR_SITE.tzinfo()).hour for t in curve.timestamps]
        )
        night = (local_hours < 6) | (local_hours >= 20)
        assert np.all(curve.ghi[night] == 0.0)
        assert curve.ghi.max() > 800.0

    def test_peak_near_local_solar_noon(self):
        curve = clear_sky_curve(date(2016, 9, 1), EQUATOR_SITE, 120)
        peak_ts = curve.timestamps[int(np.argmax(curve.ghi))]
        local = peak_ts.astimezone(EQUATOR_SITE.tzinfo())
        # longitude 103.68 deg in UTC+8: mean solar noon ~12:25 local
        solar_noon_hour = 12.0 + (120.0 - 103.68) * 4.0 / 60.0
        peak_hour = local.hour + local.minute / 60.0
        assert abs(peak_hour - solar_noon_hour) < 0.5

    def test_consecutive_days_drift_slowly(self):
        a = clear_sky_curve(date(2016, 9, 1), EQUATOR_SITE, 600).ghi
        b = clear_sky_curve(date(2016, 9, 2), EQUATOR_SITE, 600).ghi
        # away from sunrise/sunset the shape drifts by well under 2 percent;
        # near the horizon the relative difference diverges by construction
        mask = (a > 100.0) & (b > 100.0)
        assert mask.sum() > 50
        assert np.max(np.abs(a[mask] - b[mask]) / a[mask]) < 0.02

    def test_step_controls_length(self):
        curve = clear_sky_curve(date(2016, 9, 1), EQUATOR_SITE, 3600)
        assert len(curve) == 24


class TestPercentageDeviation:
    def test_matches_definition(self):
        curve = clear_sky_curve(date(2016, 9, 1), EQUATOR_SITE, 1800)
        daytime = [i for i, g in enumerate(curve.ghi) if g > 0]
        measured = IrradianceSeries(
            [curve.timestamps[i] for i in daytime],
            np.array([0.5 * curve.ghi[i] for i in daytime]),
        )
        times, dev = percentage_deviation(measured, EQUATOR_SITE)
        assert len(times) == len(daytime)
        assert np.allclose(dev, -50.0, atol=1e-9)

    def test_night_points_dropped(self):
        curve = clear_sky_curve(date(2016, 9, 1), EQUATOR_SITE, 1800)
        measured = IrradianceSeries(list(curve.timestamps), np.zeros(len(curve)))
        times, dev = percentage_deviation(measured, EQUATOR_SITE)
        assert 0 < len(times) < len(curve)
        assert np.allclose(dev, -100.0)
