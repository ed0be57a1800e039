"""Locate the sun in a fisheye image by red-channel thresholding.

The detector binarizes the red channel inside the image circle, labels
8-connected components, and returns the centroid of the largest one.
A geometric fallback covers fully overcast frames.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import NoSunPixels
from .geometry import (
    LensModel,
    SolarGeometry,
    pixel_to_ray,
    ray_to_pixel,
    sun_direction_from_geometry,
)
from .ingest import SkyImage

DEFAULT_SUN_THRESHOLD = 240

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


class SunSource(enum.Enum):
    DETECTED = "detected"
    GEOMETRIC_FALLBACK = "geometric_fallback"


@dataclass(frozen=True)
class SunLocation:
    pixel_u: float
    pixel_v: float
    direction: np.ndarray
    source: SunSource


def _circle_mask(height: int, width: int, lens: LensModel) -> np.ndarray:
    v, u = np.ogrid[0:height, 0:width]
    return (u - lens.center_x) ** 2 + (v - lens.center_y) ** 2 <= (
        lens.image_circle_radius**2
    )


def detect_sun(
    image: SkyImage, lens: LensModel, threshold: int = DEFAULT_SUN_THRESHOLD
) -> SunLocation:
    """Centroid of the largest red-channel blob at or above ``threshold``.

    Pixels outside the image circle are masked out before thresholding so
    reflections in the enclosure corners can never win the largest-area
    contest. Equal-area ties resolve to the component nearest the zenith.
    """
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    red = image.pixels[:, :, 0]
    mask = (red >= threshold) & _circle_mask(image.height, image.width, lens)
    if not mask.any():
        raise NoSunPixels(f"no pixel reaches red threshold {threshold}")
    labels, count = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    largest = sizes.max()
    best = None
    for lab in np.flatnonzero(sizes == largest):
        ys, xs = np.nonzero(labels == lab)
        u, v = float(xs.mean()), float(ys.mean())
        zen_proxy = math.hypot(u - lens.center_x, v - lens.center_y)
        if best is None or zen_proxy < best[0]:
            best = (zen_proxy, u, v)
    _, u, v = best
    return SunLocation(
        pixel_u=u, pixel_v=v, direction=pixel_to_ray((u, v), lens), source=SunSource.DETECTED
    )


def sun_with_fallback(
    image: SkyImage,
    lens: LensModel,
    geom: SolarGeometry,
    azimuth_deg: float,
    threshold: int = DEFAULT_SUN_THRESHOLD,
) -> SunLocation:
    """Detect the sun, falling back to its astronomical position.

    Raises SunBelowHorizon when detection fails and the geometric sun sits
    below the horizon (a night image reached the pipeline).
    """
    try:
        return detect_sun(image, lens, threshold)
    except NoSunPixels:
        direction = sun_direction_from_geometry(geom, azimuth_deg)
        u, v = ray_to_pixel(direction, lens)
        return SunLocation(
            pixel_u=u, pixel_v=v, direction=direction, source=SunSource.GEOMETRIC_FALLBACK
        )
