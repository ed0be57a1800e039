"""Clear-sky global horizontal irradiance model for an observation site.

The model is G_c = scale * E0 * I_sc * cos(alpha)^p * exp(-k * (90 - alpha))
with alpha the solar zenith angle in degrees, E0 the Earth-orbit
eccentricity correction and I_sc the solar constant. The default
constants were fitted for an equatorial site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as date_type
from datetime import datetime, time, timedelta

import numpy as np

from .config import SiteConfig
from .errors import InvalidZenith
from .geometry import eccentricity, solar_position
from .ingest import IrradianceSeries

__all__ = [
    "ClearSkyConstants",
    "DEFAULT_CONSTANTS",
    "eccentricity",
    "clear_sky_ghi",
    "clear_sky_curve",
    "percentage_deviation",
]


@dataclass(frozen=True)
class ClearSkyConstants:
    scale: float = 0.8277
    solar_constant: float = 1366.1  # W/m2
    cos_exponent: float = 1.3644
    decay_per_deg: float = 0.0013


DEFAULT_CONSTANTS = ClearSkyConstants()


def clear_sky_ghi(
    zenith_deg: float, e0: float, constants: ClearSkyConstants = DEFAULT_CONSTANTS
) -> float:
    """Clear-sky GHI in W/m2 at the given solar zenith angle (degrees)."""
    if not 0.0 <= zenith_deg <= 90.0:
        raise InvalidZenith(f"zenith must be in [0, 90] degrees, got {zenith_deg}")
    cos_a = max(math.cos(math.radians(zenith_deg)), 0.0)
    return (
        constants.scale
        * e0
        * constants.solar_constant
        * cos_a**constants.cos_exponent
        * math.exp(-constants.decay_per_deg * (90.0 - zenith_deg))
    )


def clear_sky_curve(
    date: date_type,
    site: SiteConfig,
    step_seconds: float = 120.0,
    constants: ClearSkyConstants = DEFAULT_CONSTANTS,
) -> IrradianceSeries:
    """Sample the clear-sky model over one local day.

    The curve spans local midnight to midnight at the given step and is
    zero whenever the sun is at or below the horizon, so the daylight
    window is always fully covered.
    """
    if step_seconds <= 0:
        raise ValueError(f"step must be positive, got {step_seconds}")
    tz = site.tzinfo()
    start = datetime.combine(date, time(0, 0), tzinfo=tz)
    end = start + timedelta(days=1)
    timestamps = []
    values = []
    t = start
    while t < end:
        geom = solar_position(t, site.latitude_deg, site.longitude_deg)
        if geom.zenith_deg >= 90.0:
            # Marginally sub-horizon angles near sunrise clamp to zero
            # instead of erroring inside curve generation.
            values.append(0.0)
        else:
            values.append(clear_sky_ghi(geom.zenith_deg, geom.eccentricity, constants))
        timestamps.append(t)
        t = t + timedelta(seconds=step_seconds)
    return IrradianceSeries(timestamps, np.array(values))


def percentage_deviation(
    series: IrradianceSeries,
    site: SiteConfig,
    constants: ClearSkyConstants = DEFAULT_CONSTANTS,
) -> tuple[list[datetime], np.ndarray]:
    """Percent deviation of measured GHI from the clear-sky model.

    Computes 100 * (measured - G_c) / G_c at each series timestamp and
    drops instants where the model is zero (sun at or below the horizon).
    """
    timestamps = []
    deviation = []
    for i, ts in enumerate(series.timestamps):
        geom = solar_position(ts, site.latitude_deg, site.longitude_deg)
        if geom.zenith_deg >= 90.0:
            continue
        gc = clear_sky_ghi(geom.zenith_deg, geom.eccentricity, constants)
        if gc <= 0.0:
            continue
        timestamps.append(ts)
        deviation.append(100.0 * (float(series.ghi[i]) - gc) / gc)
    return timestamps, np.array(deviation)
