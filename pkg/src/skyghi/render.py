"""Synthetic fisheye sky renderer with known ground truth.

Rendering inverts the measurement chain: scene radiance is scaled by
e_t * ISO / f^2, gamma encoded with exponent 1/2.2, quantized to 8 bits,
and optionally perturbed with Gaussian noise. The sun is a saturated
disk. Datasets rendered over a simulated day come with the exact
irradiance series implied by the packaged reference cubic, which makes
the full estimation pipeline testable end to end.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable

import numpy as np
from PIL import Image

from .clearsky import clear_sky_ghi
from .config import SiteConfig
from .errors import SunBelowHorizon
from .geometry import (
    LensModel,
    SolarGeometry,
    as_rng,
    solar_azimuth,
    solar_position,
    sun_direction_from_geometry,
)
from .ingest import (
    SIDECAR_HEADER,
    CaptureMeta,
    IrradianceSeries,
    SkyImage,
    save_irradiance_series,
)
from .luminance import gamma_encode
from .regress import REFERENCE_CUBIC, predict


@dataclass(frozen=True)
class SceneSpec:
    """One synthetic frame: radiance field, sun, camera, and noise level."""

    sky_radiance: Callable[[np.ndarray], np.ndarray]  # (m, 3) dirs -> (m,) radiance
    sun_direction: np.ndarray
    sun_disk_radius_deg: float
    meta: CaptureMeta
    lens: LensModel
    width: int
    height: int
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.sun_direction[2] < 0:
            raise SunBelowHorizon("scene sun must be above the horizon")
        if self.sun_disk_radius_deg < 0 or self.noise_sigma < 0:
            raise ValueError("disk radius and noise sigma must be non-negative")


def uniform_sky(radiance: float) -> Callable[[np.ndarray], np.ndarray]:
    """Radiance field that is constant over the whole hemisphere."""
    if radiance < 0:
        raise ValueError("radiance must be non-negative")

    def field(directions: np.ndarray) -> np.ndarray:
        return np.full(len(directions), float(radiance))

    return field


def render_scene(spec: SceneSpec, rng=None) -> SkyImage:
    """Render one frame; deterministic for a fixed rng seed."""
    lens = spec.lens
    v, u = np.mgrid[0 : spec.height, 0 : spec.width]
    du = u - lens.center_x
    dv = v - lens.center_y
    r = np.hypot(du, dv)
    inside = r <= lens.image_circle_radius
    theta = 2.0 * np.arcsin(np.clip(r / lens.focal_scale, 0.0, 1.0))
    sin_theta = np.sin(theta)
    safe_r = np.where(r > 0, r, 1.0)
    dirs = np.stack(
        (
            np.where(r > 0, sin_theta * du / safe_r, 0.0),
            np.where(r > 0, sin_theta * dv / safe_r, 0.0),
            np.cos(theta),
        ),
        axis=-1,
    )
    radiance = np.zeros((spec.height, spec.width))
    radiance[inside] = spec.sky_radiance(dirs[inside].reshape(-1, 3))
    exposure_gain = spec.meta.exposure_time * spec.meta.iso / spec.meta.f_number**2
    linear = radiance * exposure_gain
    encoded = gamma_encode(np.clip(linear, 0.0, None))
    value = np.rint(np.clip(encoded, 0.0, 255.0))
    sun_cos = dirs @ np.asarray(spec.sun_direction, dtype=float)
    sun_disk = inside & (sun_cos >= np.cos(np.radians(spec.sun_disk_radius_deg)))
    value[sun_disk] = 255.0
    if spec.noise_sigma > 0.0:
        value = value + as_rng(rng).normal(0.0, spec.noise_sigma, value.shape)
    value = np.clip(np.rint(value), 0.0, 255.0)
    value[~inside] = 0.0
    pixels = np.repeat(value.astype(np.uint8)[:, :, None], 3, axis=2)
    return SkyImage(pixels=np.ascontiguousarray(pixels), meta=spec.meta)


@dataclass(frozen=True)
class DayProfile:
    """Radiance and sun-position schedule over a simulated day.

    The sun follows the true astronomical path for the site; the sky
    radiance scale follows the clear-sky shape, peaking at
    ``peak_radiance`` when the sun culminates overhead.
    """

    site: SiteConfig
    start: datetime
    end: datetime
    peak_radiance: float
    base_radiance: float = 0.0

    def __post_init__(self):
        if self.start.tzinfo is None or self.end.tzinfo is None:
            raise ValueError("profile bounds must be timezone-aware")
        if self.end < self.start:
            raise ValueError("profile end precedes start")
        if self.peak_radiance <= 0:
            raise ValueError("peak radiance must be positive")

    def at(self, ts: datetime) -> tuple[float, SolarGeometry, float]:
        """(radiance_scale, solar geometry, azimuth_deg) at an instant."""
        geom = solar_position(ts, self.site.latitude_deg, self.site.longitude_deg)
        azimuth = solar_azimuth(ts, self.site.latitude_deg, self.site.longitude_deg)
        if geom.zenith_deg >= 90.0:
            return self.base_radiance, geom, azimuth
        shape = clear_sky_ghi(geom.zenith_deg, geom.eccentricity) / clear_sky_ghi(
            0.0, geom.eccentricity
        )
        return self.base_radiance + (self.peak_radiance - self.base_radiance) * shape, geom, azimuth


def profile_timestamps(profile: DayProfile, n_images: int) -> list[datetime]:
    if n_images < 1:
        raise ValueError("need at least one image")
    if n_images == 1:
        return [profile.start]
    span = (profile.end - profile.start) / (n_images - 1)
    return [profile.start + i * span for i in range(n_images)]


def render_dataset(
    day_profile: DayProfile,
    n_images: int,
    seed: int,
    *,
    width: int | None = None,
    height: int | None = None,
    sun_disk_radius_deg: float = 3.0,
    exposure_time: float = 1.0 / 2000.0,
    iso: float = 100.0,
    f_number: float = 4.0,
    ghi_noise_sigma: float = 0.0,
    image_noise_sigma: float = 0.0,
) -> tuple[list[SkyImage], IrradianceSeries]:
    """Render an image sequence plus its exact ground-truth GHI series.

    The true weighted luminance at each instant is radiance * cos(zenith);
    the series applies the packaged reference cubic to it, adds optional
    Gaussian noise, and clamps at zero. Per-image RNG streams are derived
    from (seed, 1, index); the GHI noise stream from (seed, 2).
    """
    lens = day_profile.site.lens()
    width = width if width is not None else int(round(2 * lens.center_x))
    height = height if height is not None else int(round(2 * lens.center_y))
    timestamps = profile_timestamps(day_profile, n_images)
    images = []
    truth_lum = []
    for i, ts in enumerate(timestamps):
        radiance, geom, azimuth = day_profile.at(ts)
        if geom.zenith_deg >= 90.0:
            raise SunBelowHorizon(
                f"profile instant {ts.isoformat()} has zenith {geom.zenith_deg:.1f} deg"
            )
        sun_dir = sun_direction_from_geometry(geom, azimuth)
        meta = CaptureMeta(
            timestamp=ts, exposure_time=exposure_time, iso=iso, f_number=f_number
        )
        spec = SceneSpec(
            sky_radiance=uniform_sky(radiance),
            sun_direction=sun_dir,
            sun_disk_radius_deg=sun_disk_radius_deg,
            meta=meta,
            lens=lens,
            width=width,
            height=height,
            noise_sigma=image_noise_sigma,
        )
        images.append(render_scene(spec, rng=np.random.default_rng([seed, 1, i])))
        truth_lum.append(radiance * np.cos(np.radians(geom.zenith_deg)))
    ghi = predict(REFERENCE_CUBIC, np.asarray(truth_lum))
    if ghi_noise_sigma > 0.0:
        ghi = ghi + np.random.default_rng([seed, 2]).normal(0.0, ghi_noise_sigma, len(ghi))
    ghi = np.clip(ghi, 0.0, None)
    return images, IrradianceSeries(timestamps, ghi)


def write_dataset(
    images: list[SkyImage], series: IrradianceSeries, out_dir, *, name_format="img_{:04d}.png"
) -> None:
    """Write PNG frames plus the sidecar and weather CSVs ingest consumes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sidecar.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SIDECAR_HEADER)
        for i, img in enumerate(images):
            name = name_format.format(i)
            Image.fromarray(np.asarray(img.pixels)).save(out / name)
            writer.writerow(
                [
                    name,
                    img.meta.timestamp.isoformat(),
                    repr(img.meta.exposure_time),
                    repr(img.meta.iso),
                    repr(img.meta.f_number),
                ]
            )
    save_irradiance_series(series, out / "weather.csv")
