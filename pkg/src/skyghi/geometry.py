"""Fisheye lens geometry, solar position, and sun-centred hemisphere sampling.

Conventions used throughout: the world frame is x = east, y = north,
z = up; directions are unit vectors as numpy arrays of shape (3,).
Pixel coordinates are (u, v) with u along columns and v along rows,
both measured in pixels from the top-left pixel centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import (
    BelowHorizon,
    InvalidDay,
    OutsideImageCircle,
    SamplingExhausted,
    SunBelowHorizon,
)

_UNIT_TOL = 1e-9

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LensModel:
    """Equisolid fisheye lens, r = focal_scale * sin(theta / 2).

    ``focal_scale`` is twice the focal length expressed in pixels,
    ``theta`` the zenith angle of the incoming ray, and ``r`` the radial
    pixel distance from the projection centre (``center_x``, ``center_y``).
    ``image_circle_radius`` bounds the exposed circle on the sensor.
    """

    focal_scale: float
    center_x: float
    center_y: float
    image_circle_radius: float

    def __post_init__(self):
        if self.focal_scale <= 0:
            raise ValueError("focal_scale must be positive")
        if not 0 < self.image_circle_radius <= self.focal_scale:
            raise ValueError(
                "image_circle_radius must be in (0, focal_scale]; "
                f"got {self.image_circle_radius} vs {self.focal_scale}"
            )


@dataclass(frozen=True)
class SolarGeometry:
    """Solar zenith angle plus the annual-orbit quantities for one instant."""

    zenith_deg: float
    day_angle_rad: float
    eccentricity: float

    def __post_init__(self):
        if not 0.0 <= self.zenith_deg <= 180.0:
            raise ValueError(f"zenith_deg out of [0, 180]: {self.zenith_deg}")
        if not 0.0 <= self.day_angle_rad <= TWO_PI:
            raise ValueError(f"day_angle_rad out of [0, 2*pi]: {self.day_angle_rad}")
        if not 0.96 < self.eccentricity < 1.04:
            raise ValueError(f"eccentricity out of (0.96, 1.04): {self.eccentricity}")


def unit_vector(x: float, y: float, z: float) -> np.ndarray:
    """Normalize (x, y, z) into a unit direction vector."""
    v = np.array([x, y, z], dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("zero vector has no direction")
    return v / norm


def _require_unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected shape (3,), got {v.shape}")
    if abs(float(v @ v) - 1.0) > 3.0 * _UNIT_TOL:
        raise ValueError(f"not a unit vector: {v}")
    return v


def ray_to_pixel(direction: np.ndarray, lens: LensModel) -> tuple[float, float]:
    """Project an upper-hemisphere direction to pixel coordinates.

    Applies the equisolid mapping r = focal_scale * sin(theta / 2) with
    theta = arccos(z); the zenith direction maps to the lens centre.
    """
    x, y, z = (float(c) for c in _require_unit(direction))
    if z < 0.0:
        raise BelowHorizon(f"direction z={z} points below the horizon")
    theta = math.acos(min(z, 1.0))
    r = lens.focal_scale * math.sin(theta / 2.0)
    if r > lens.image_circle_radius:
        raise OutsideImageCircle(
            f"radius {r:.3f} px beyond image circle {lens.image_circle_radius} px"
        )
    if r == 0.0:
        return (lens.center_x, lens.center_y)
    horiz = math.hypot(x, y)
    return (lens.center_x + r * x / horiz, lens.center_y + r * y / horiz)


def pixel_to_ray(pixel: tuple[float, float], lens: LensModel) -> np.ndarray:
    """Invert the equisolid projection: theta = 2 * arcsin(r / focal_scale)."""
    du = float(pixel[0]) - lens.center_x
    dv = float(pixel[1]) - lens.center_y
    r = math.hypot(du, dv)
    if r > lens.image_circle_radius:
        raise OutsideImageCircle(
            f"pixel {pixel} at radius {r:.3f} px beyond image circle "
            f"{lens.image_circle_radius} px"
        )
    if r == 0.0:
        return np.array([0.0, 0.0, 1.0])
    theta = 2.0 * math.asin(min(r / lens.focal_scale, 1.0))
    sin_theta = math.sin(theta)
    return np.array([sin_theta * du / r, sin_theta * dv / r, math.cos(theta)])


def direction_from_uniform(r1: float, r2: float) -> np.ndarray:
    """Map two uniforms in [0, 1] to a cosine-weighted hemisphere direction.

    phi = 2*pi*r1 and theta = arccos(sqrt(r2)), so that cos(theta)^2 is
    uniform and the sample density is proportional to cos(theta).
    """
    phi = TWO_PI * r1
    theta = math.acos(math.sqrt(r2))
    sin_theta = math.sin(theta)
    return np.array(
        [sin_theta * math.cos(phi), sin_theta * math.sin(phi), math.cos(theta)]
    )


def as_rng(seed) -> np.random.Generator:
    """Accept a Generator, an int seed, or a seed sequence (list/tuple)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def cosine_hemisphere_sample(rng_seed, n: int) -> np.ndarray:
    """Draw n cosine-weighted unit directions on the upper hemisphere.

    Deterministic for a fixed seed. Returns an array of shape (n, 3).
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = as_rng(rng_seed)
    r = rng.random((n, 2))
    phi = TWO_PI * r[:, 0]
    theta = np.arccos(np.sqrt(r[:, 1]))
    sin_theta = np.sin(theta)
    return np.column_stack(
        (sin_theta * np.cos(phi), sin_theta * np.sin(phi), np.cos(theta))
    )


def rotation_to_sun(sun_dir: np.ndarray) -> np.ndarray:
    """Minimal rotation carrying the z axis onto ``sun_dir``.

    Axis is z x sun_dir, angle arccos(z . sun_dir). The antipodal case
    (sun_dir = -z) degenerates to the 180-degree rotation about x.
    """
    s = _require_unit(sun_dir)
    sx, sy, c = float(s[0]), float(s[1]), float(s[2])
    sin2 = sx * sx + sy * sy
    if sin2 < 1e-30:
        if c > 0.0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])
    # Rodrigues with a normalized axis stays orthonormal arbitrarily close
    # to the antipode, unlike the common K + K^2/(1+c) shortcut.
    sin_a = math.sqrt(sin2)
    ax, ay = -sy / sin_a, sx / sin_a
    k = np.array([[0.0, 0.0, ay], [0.0, 0.0, -ax], [-ay, ax, 0.0]])
    return np.eye(3) + sin_a * k + (1.0 - c) * (k @ k)


def rotate_samples(points: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """Apply a rotation matrix to an array of direction vectors (n, 3)."""
    pts = np.asarray(points, dtype=float)
    return pts @ np.asarray(rotation, dtype=float).T


def day_angle(day_of_year: int) -> float:
    """Annual phase angle 2*pi*(d - 1)/365 in radians for day-of-year d."""
    d = int(day_of_year)
    if d != day_of_year or not 1 <= d <= 366:
        raise InvalidDay(f"day_of_year must be an integer in [1, 366], got {day_of_year}")
    # ratio first so day 366 lands exactly on 2*pi instead of 1 ulp above
    return TWO_PI * ((d - 1) / 365.0)


def eccentricity(day_angle_rad: float) -> float:
    """Earth orbit eccentricity correction factor E0 for a day angle.

    Five-term Fourier expansion:
    E0 = 1.00011 + 0.034221 cos(G) + 0.001280 sin(G)
       + 0.000719 cos(2G) + 0.000077 sin(2G)
    """
    g = float(day_angle_rad)
    if not 0.0 <= g <= TWO_PI:
        raise ValueError(f"day angle out of [0, 2*pi]: {g}")
    return (
        1.00011
        + 0.034221 * math.cos(g)
        + 0.001280 * math.sin(g)
        + 0.000719 * math.cos(2.0 * g)
        + 0.000077 * math.sin(2.0 * g)
    )


def solar_declination(day_angle_rad: float) -> float:
    """Solar declination in radians from the (possibly fractional) day angle."""
    g = day_angle_rad
    return (
        0.006918
        - 0.399912 * math.cos(g)
        + 0.070257 * math.sin(g)
        - 0.006758 * math.cos(2.0 * g)
        + 0.000907 * math.sin(2.0 * g)
        - 0.002697 * math.cos(3.0 * g)
        + 0.001480 * math.sin(3.0 * g)
    )


def equation_of_time(day_angle_rad: float) -> float:
    """Equation of time in minutes from the (possibly fractional) day angle."""
    g = day_angle_rad
    return 229.18 * (
        0.000075
        + 0.001868 * math.cos(g)
        - 0.032077 * math.sin(g)
        - 0.014615 * math.cos(2.0 * g)
        - 0.040849 * math.sin(2.0 * g)
    )


def _to_utc(timestamp: datetime) -> datetime:
    if timestamp.tzinfo is None:
        raise ValueError("timestamp must be timezone-aware")
    return timestamp.astimezone(timezone.utc)


def _fractional_day_angle(ts_utc: datetime) -> float:
    doy = ts_utc.timetuple().tm_yday
    hours = ts_utc.hour + ts_utc.minute / 60.0 + ts_utc.second / 3600.0
    return TWO_PI * (doy - 1 + (hours - 12.0) / 24.0) / 365.0


def _solar_angles(ts_utc: datetime, latitude_deg: float, longitude_deg: float):
    """Zenith and azimuth (degrees) from declination, equation of time and
    hour angle. Accuracy is a few tenths of a degree, which is sufficient
    for seeding the cosine weighting and the geometric sun fallback.
    """
    g = _fractional_day_angle(ts_utc)
    decl = solar_declination(g)
    eot = equation_of_time(g)
    minutes = ts_utc.hour * 60.0 + ts_utc.minute + ts_utc.second / 60.0
    true_solar_min = minutes + eot + 4.0 * longitude_deg
    hour_angle = math.radians(true_solar_min / 4.0 - 180.0)
    phi = math.radians(latitude_deg)
    cos_z = math.sin(phi) * math.sin(decl) + math.cos(phi) * math.cos(decl) * math.cos(
        hour_angle
    )
    zenith = math.degrees(math.acos(max(-1.0, min(1.0, cos_z))))
    east = -math.cos(decl) * math.sin(hour_angle)
    north = math.sin(decl) * math.cos(phi) - math.cos(decl) * math.sin(phi) * math.cos(
        hour_angle
    )
    azimuth = math.degrees(math.atan2(east, north)) % 360.0
    return zenith, azimuth


def solar_position(
    timestamp: datetime, latitude_deg: float, longitude_deg: float
) -> SolarGeometry:
    """Solar zenith angle plus day angle and eccentricity for one instant.

    The timestamp must be timezone-aware; the day angle and eccentricity
    refer to the UTC date.
    """
    if not -90.0 <= latitude_deg <= 90.0:
        raise ValueError(f"latitude out of [-90, 90]: {latitude_deg}")
    if not -180.0 <= longitude_deg <= 180.0:
        raise ValueError(f"longitude out of [-180, 180]: {longitude_deg}")
    ts = _to_utc(timestamp)
    zenith, _ = _solar_angles(ts, latitude_deg, longitude_deg)
    gamma = day_angle(ts.timetuple().tm_yday)
    return SolarGeometry(
        zenith_deg=zenith, day_angle_rad=gamma, eccentricity=eccentricity(gamma)
    )


def solar_azimuth(
    timestamp: datetime, latitude_deg: float, longitude_deg: float
) -> float:
    """Solar azimuth in degrees, measured clockwise from north (east = 90)."""
    ts = _to_utc(timestamp)
    _, azimuth = _solar_angles(ts, latitude_deg, longitude_deg)
    return azimuth


def sun_direction_from_geometry(geom: SolarGeometry, azimuth_deg: float) -> np.ndarray:
    """Unit vector toward the sun from zenith angle and azimuth."""
    if geom.zenith_deg > 90.0:
        raise SunBelowHorizon(f"solar zenith {geom.zenith_deg:.2f} deg exceeds 90")
    zen = math.radians(geom.zenith_deg)
    azi = math.radians(azimuth_deg)
    sin_z = math.sin(zen)
    return np.array([sin_z * math.sin(azi), sin_z * math.cos(azi), math.cos(zen)])


def project_rays(points: np.ndarray, lens: LensModel):
    """Vectorized equisolid projection of direction vectors to pixels.

    Returns (uv, valid) where ``uv`` has shape (n, 2) and ``valid`` marks
    directions above the horizon that land inside the image circle.
    Invalid rows hold unusable coordinates and must be masked out.
    """
    pts = np.asarray(points, dtype=float)
    z = pts[:, 2]
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    r = lens.focal_scale * np.sin(theta / 2.0)
    valid = (z >= 0.0) & (r <= lens.image_circle_radius)
    horiz = np.hypot(pts[:, 0], pts[:, 1])
    safe = np.where(horiz > 0.0, horiz, 1.0)
    u = lens.center_x + r * pts[:, 0] / safe
    v = lens.center_y + r * pts[:, 1] / safe
    at_zenith = horiz == 0.0
    u = np.where(at_zenith, lens.center_x, u)
    v = np.where(at_zenith, lens.center_y, v)
    return np.column_stack((u, v)), valid


def sample_sun_pixels(
    lens: LensModel,
    sun_dir: np.ndarray,
    n: int,
    rng,
    width: int,
    height: int,
) -> np.ndarray:
    """Cosine-weighted pixel sample locations concentrated on the sun.

    Draws hemisphere samples, rotates them so the distribution peak sits on
    ``sun_dir``, and projects them to pixel coordinates. Samples that land
    below the horizon, outside the image circle, or beyond interpolable
    image bounds are discarded and replaced with fresh draws until exactly
    ``n`` remain. The total draw budget is 100 * n; exceeding it raises
    SamplingExhausted.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = as_rng(rng)
    rotation = rotation_to_sun(sun_dir)
    budget = 100 * n
    drawn = 0
    chunks: list[np.ndarray] = []
    filled = 0
    while filled < n:
        want = min(n - filled, budget - drawn)
        if want == 0:
            raise SamplingExhausted(
                f"drew {drawn} samples but only {filled} of {n} landed on the image"
            )
        pts = rotate_samples(cosine_hemisphere_sample(rng, want), rotation)
        drawn += want
        uv, valid = project_rays(pts, lens)
        valid &= (
            (uv[:, 0] >= 0.0)
            & (uv[:, 0] <= width - 1.0)
            & (uv[:, 1] >= 0.0)
            & (uv[:, 1] <= height - 1.0)
        )
        kept = uv[valid]
        if len(kept):
            chunks.append(kept)
            filled += len(kept)
    return np.concatenate(chunks)[:n]
