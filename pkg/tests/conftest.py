import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skyghi.config import SiteConfig
from skyghi.geometry import LensModel
from skyghi.ingest import CaptureMeta, SkyImage

UTC8 = timezone(timedelta(hours=8))


@pytest.fixture
def lens() -> LensModel:
    return LensModel(focal_scale=150.0, center_x=120.0, center_y=120.0, image_circle_radius=110.0)


@pytest.fixture
def meta() -> CaptureMeta:
    return CaptureMeta(
        timestamp=datetime(2016, 9, 1, 13, 0, tzinfo=UTC8),
        exposure_time=1.0 / 250.0,
        iso=200.0,
        f_number=2.8,
    )


@pytest.fixture
def site() -> SiteConfig:
    return SiteConfig(
        latitude_deg=0.0,
        longitude_deg=0.0,
        utc_offset_minutes=0,
        focal_scale_px=150.0,
        center_x_px=120.0,
        center_y_px=120.0,
        image_circle_radius_px=110.0,
        samples_n=1000,
        rng_seed=42,
    )


def make_image(value: int, meta: CaptureMeta, size: int = 240, disk=None) -> SkyImage:
    """Uniform gray frame, optionally with a saturated disk at (u, v, radius)."""
    px = np.full((size, size, 3), value, dtype=np.uint8)
    if disk is not None:
        u0, v0, radius = disk
        v, u = np.ogrid[0:size, 0:size]
        px[(u - u0) ** 2 + (v - v0) ** 2 <= radius**2] = 255
    return SkyImage(pixels=px, meta=meta)


@pytest.fixture
def gray_image(meta) -> SkyImage:
    return make_image(128, meta)
