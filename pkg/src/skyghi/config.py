"""Site configuration: observer location, lens intrinsics, sampling defaults."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from datetime import timedelta, timezone
from pathlib import Path

import yaml

from .geometry import LensModel

#: Seed used when neither the CLI nor the site file provides one.
DEFAULT_SEED = 7

#: Sample count matching the sampling density the method was derived with.
DEFAULT_SAMPLES = 5000


@dataclass(frozen=True)
class SiteConfig:
    latitude_deg: float
    longitude_deg: float
    utc_offset_minutes: int
    focal_scale_px: float
    center_x_px: float
    center_y_px: float
    image_circle_radius_px: float
    samples_n: int = DEFAULT_SAMPLES
    rng_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude_deg out of [-90, 90]: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"longitude_deg out of [-180, 180]: {self.longitude_deg}")
        if self.samples_n < 1:
            raise ValueError(f"samples_n must be >= 1: {self.samples_n}")
        # Lens invariants are enforced by LensModel; build one eagerly so a
        # bad site file fails at load time, not mid-pipeline.
        self.lens()

    def lens(self) -> LensModel:
        return LensModel(
            focal_scale=self.focal_scale_px,
            center_x=self.center_x_px,
            center_y=self.center_y_px,
            image_circle_radius=self.image_circle_radius_px,
        )

    def tzinfo(self) -> timezone:
        return timezone(timedelta(minutes=self.utc_offset_minutes))


def load_site_config(path) -> SiteConfig:
    """Load a key-value site file (YAML mapping; JSON is a YAML subset)."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"site config {path} is not a key-value mapping")
    known = {f.name for f in fields(SiteConfig)}
    kwargs = {k: v for k, v in data.items() if k in known}
    try:
        return SiteConfig(**kwargs)
    except TypeError as exc:
        raise ValueError(f"site config {path}: {exc}") from exc


def save_site_config(cfg: SiteConfig, path) -> None:
    Path(path).write_text(
        yaml.safe_dump(asdict(cfg), sort_keys=True), encoding="utf-8"
    )
