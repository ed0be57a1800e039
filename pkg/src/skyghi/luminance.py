"""Per-image luminance: from sampled pixels to one cosine-weighted value.

The per-image quantity chain is: mean sampled pixel luminance N (0-255,
gamma removed), relative luminance Lr = N * f^2 / (e_t * ISO), and the
zenith-weighted luminance L = Lr * cos(alpha). The sensor calibration
constant relating pixel brightness to absolute scene luminance is fixed
at 1; any constant factor is absorbed by the downstream regression.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .config import SiteConfig
from .errors import EmptySampleSet, InvalidZenith, ParseError
from .geometry import LensModel, SolarGeometry, sample_sun_pixels
from .ingest import CaptureMeta, SkyImage, parse_rfc3339
from .sundetect import DEFAULT_SUN_THRESHOLD, SunSource, detect_sun, sun_with_fallback

#: SMPTE RP 177 luminance weights for R, G, B.
LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)

#: Display gamma assumed for the stored 8-bit images.
GAMMA = 2.2

LUMINANCE_HEADER = ["timestamp", "N", "Lr", "L", "zenith_deg", "sun_source", "sample_count"]


@dataclass(frozen=True)
class LuminanceRecord:
    timestamp: datetime
    mean_pixel_luminance: float  # N, 0-255 scale
    relative_luminance: float  # Lr
    weighted_luminance: float  # L = Lr * cos(zenith)
    zenith_deg: float
    sun_source: SunSource
    sample_count: int

    def __post_init__(self):
        if not 0.0 <= self.mean_pixel_luminance <= 255.0:
            raise ValueError(f"mean pixel luminance out of [0, 255]: {self.mean_pixel_luminance}")
        if self.relative_luminance < 0.0:
            raise ValueError("relative luminance must be non-negative")
        if self.weighted_luminance > self.relative_luminance:
            raise ValueError("weighted luminance cannot exceed relative luminance")
        if self.sample_count < 1:
            raise ValueError("sample count must be positive")


def pixel_luminance(r, g, b):
    """SMPTE weighted luminance of 8-bit RGB values (scalars or arrays)."""
    wr, wg, wb = LUMA_WEIGHTS
    return wr * r + wg * g + wb * b


def degamma(y):
    """Undo display gamma: y' = 255 * (y / 255) ** 2.2."""
    return 255.0 * (np.asarray(y, dtype=float) / 255.0) ** GAMMA


def gamma_encode(y_linear):
    """Inverse of :func:`degamma`; encodes linear values for 8-bit storage."""
    return 255.0 * (np.asarray(y_linear, dtype=float) / 255.0) ** (1.0 / GAMMA)


def _bilinear_rgb(pixels: np.ndarray, uv: np.ndarray) -> np.ndarray:
    """Bilinearly interpolate RGB values at fractional (u, v) coordinates."""
    height, width = pixels.shape[:2]
    u = uv[:, 0]
    v = uv[:, 1]
    if np.any((u < 0) | (u > width - 1) | (v < 0) | (v > height - 1)):
        raise ValueError("sample coordinates outside the image")
    u0 = np.clip(np.floor(u).astype(int), 0, width - 2) if width > 1 else np.zeros(len(u), int)
    v0 = np.clip(np.floor(v).astype(int), 0, height - 2) if height > 1 else np.zeros(len(v), int)
    u1 = np.minimum(u0 + 1, width - 1)
    v1 = np.minimum(v0 + 1, height - 1)
    fu = (u - u0)[:, None]
    fv = (v - v0)[:, None]
    p00 = pixels[v0, u0].astype(float)
    p01 = pixels[v0, u1].astype(float)
    p10 = pixels[v1, u0].astype(float)
    p11 = pixels[v1, u1].astype(float)
    top = p00 * (1.0 - fu) + p01 * fu
    bottom = p10 * (1.0 - fu) + p11 * fu
    return top * (1.0 - fv) + bottom * fv


def mean_sampled_luminance(image: SkyImage, sample_pixels: np.ndarray) -> float:
    """Mean gamma-removed luminance N over the sampled pixel locations."""
    uv = np.asarray(sample_pixels, dtype=float).reshape(-1, 2)
    if len(uv) == 0:
        raise EmptySampleSet("no sample pixels supplied")
    rgb = _bilinear_rgb(image.pixels, uv)
    y = pixel_luminance(rgb[:, 0], rgb[:, 1], rgb[:, 2])
    return float(np.mean(degamma(y)))


def relative_luminance(mean_pixel_luminance: float, meta: CaptureMeta) -> float:
    """Exposure-normalized scene luminance Lr = N * f^2 / (e_t * ISO)."""
    return mean_pixel_luminance * meta.f_number**2 / (meta.exposure_time * meta.iso)


def weighted_luminance(relative_lum: float, zenith_deg: float) -> float:
    """Weight the relative luminance by the cosine of the solar zenith."""
    if not 0.0 <= zenith_deg <= 90.0:
        raise InvalidZenith(f"zenith must be in [0, 90] degrees, got {zenith_deg}")
    return relative_lum * math.cos(math.radians(zenith_deg))


def image_luminance_pipeline(
    image: SkyImage,
    lens: LensModel,
    geom: SolarGeometry,
    config: SiteConfig,
    *,
    azimuth_deg: float | None = None,
    image_index: int = 0,
    sun_threshold: int = DEFAULT_SUN_THRESHOLD,
) -> LuminanceRecord:
    """Full per-image chain: sun, sampling, N, Lr, L.

    Sampling uses an RNG stream derived from (config.rng_seed, image_index)
    so a corpus processed in parallel is bitwise reproducible. When
    ``azimuth_deg`` is None the geometric fallback is unavailable and
    failed detection propagates NoSunPixels.
    """
    if azimuth_deg is None:
        sun = detect_sun(image, lens, sun_threshold)
    else:
        sun = sun_with_fallback(image, lens, geom, azimuth_deg, sun_threshold)
    rng = np.random.default_rng([config.rng_seed, image_index])
    uv = sample_sun_pixels(
        lens, sun.direction, config.samples_n, rng, image.width, image.height
    )
    n_mean = mean_sampled_luminance(image, uv)
    rel = relative_luminance(n_mean, image.meta)
    weighted = weighted_luminance(rel, geom.zenith_deg)
    return LuminanceRecord(
        timestamp=image.meta.timestamp,
        mean_pixel_luminance=n_mean,
        relative_luminance=rel,
        weighted_luminance=weighted,
        zenith_deg=geom.zenith_deg,
        sun_source=sun.source,
        sample_count=config.samples_n,
    )


def save_luminance_records(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LUMINANCE_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.timestamp.isoformat(),
                    repr(r.mean_pixel_luminance),
                    repr(r.relative_luminance),
                    repr(r.weighted_luminance),
                    repr(r.zenith_deg),
                    r.sun_source.value,
                    r.sample_count,
                ]
            )


def load_luminance_records(path) -> list[LuminanceRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LUMINANCE_HEADER:
            raise ParseError(f"luminance header must be {','.join(LUMINANCE_HEADER)}", line=1)
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(
                    LuminanceRecord(
                        timestamp=parse_rfc3339(row[0]),
                        mean_pixel_luminance=float(row[1]),
                        relative_luminance=float(row[2]),
                        weighted_luminance=float(row[3]),
                        zenith_deg=float(row[4]),
                        sun_source=SunSource(row[5]),
                        sample_count=int(row[6]),
                    )
                )
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return out
