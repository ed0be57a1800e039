"""Load sky images and weather series, pair them in time, filter to daylight.

External formats handled here:

* weather CSV, header ``timestamp,ghi_wm2`` or
  ``timestamp,ghi_wm2,tmax_c,tmin_c,rain_mm`` with RFC-3339 timestamps;
* sidecar metadata CSV, header ``filename,timestamp,exposure_s,iso,f_number``;
* pair CSV, header ``timestamp,luminance,ghi_wm2,gap_s``.
"""

from __future__ import annotations

import csv
import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from datetime import datetime, time, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    EmptyInput,
    InvalidWindow,
    MissingMetadata,
    NonMonotonicTimestamps,
    ParseError,
    UnreadableImage,
)

WEATHER_HEADER_SHORT = ["timestamp", "ghi_wm2"]
WEATHER_HEADER_FULL = ["timestamp", "ghi_wm2", "tmax_c", "tmin_c", "rain_mm"]
SIDECAR_HEADER = ["filename", "timestamp", "exposure_s", "iso", "f_number"]
PAIRS_HEADER = ["timestamp", "luminance", "ghi_wm2", "gap_s"]

# EXIF tag ids used for embedded capture metadata.
_EXIF_EXPOSURE = 0x829A
_EXIF_F_NUMBER = 0x829D
_EXIF_ISO = 0x8827
_EXIF_DATETIME = 0x9003
_EXIF_TZ_OFFSET = 0x9011


@dataclass(frozen=True)
class CaptureMeta:
    """Camera capture parameters for one exposure."""

    timestamp: datetime
    exposure_time: float  # seconds
    iso: float
    f_number: float

    def __post_init__(self):
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must carry a UTC offset")
        for name in ("exposure_time", "iso", "f_number"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class SkyImage:
    """8-bit RGB fisheye raster plus its capture metadata."""

    pixels: np.ndarray  # (height, width, 3) uint8, row-major
    meta: CaptureMeta

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise ValueError(f"pixels must be (h, w, 3) uint8, got {px.shape} {px.dtype}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        px.flags.writeable = False

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass
class IrradianceSeries:
    """Timestamped pyranometer GHI with optional temperature/rain channels."""

    timestamps: list[datetime]
    ghi: np.ndarray  # W/m2
    tmax: np.ndarray | None = None  # degrees C
    tmin: np.ndarray | None = None
    rain: np.ndarray | None = None  # mm

    def __post_init__(self):
        self.ghi = np.asarray(self.ghi, dtype=float)
        if len(self.timestamps) != len(self.ghi):
            raise ValueError("timestamps and ghi lengths differ")
        for t in self.timestamps:
            if t.tzinfo is None:
                raise ValueError("series timestamps must carry a UTC offset")
        for prev, cur in zip(self.timestamps, self.timestamps[1:]):
            if cur <= prev:
                raise NonMonotonicTimestamps(f"{cur.isoformat()} follows {prev.isoformat()}")
        if np.any(self.ghi < 0):
            raise ValueError("ghi must be non-negative")
        for name in ("tmax", "tmin", "rain"):
            chan = getattr(self, name)
            if chan is not None:
                chan = np.asarray(chan, dtype=float)
                if len(chan) != len(self.ghi):
                    raise ValueError(f"{name} length differs from ghi")
                setattr(self, name, chan)
        if self.rain is not None and np.any(self.rain[~np.isnan(self.rain)] < 0):
            raise ValueError("rain must be non-negative")

    def __len__(self) -> int:
        return len(self.timestamps)


@dataclass(frozen=True)
class PairedSample:
    """One image luminance matched to the nearest weather-station reading."""

    timestamp: datetime
    luminance: float
    irradiance: float  # W/m2
    gap_seconds: float

    def __post_init__(self):
        if self.irradiance < 0:
            raise ValueError("irradiance must be non-negative")
        if self.gap_seconds < 0:
            raise ValueError("gap must be non-negative")


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC-3339 timestamp; the offset is mandatory."""
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(cleaned)
    except ValueError as exc:
        raise ValueError(f"bad timestamp {text!r}: {exc}") from exc
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} lacks a UTC offset")
    return ts


def _parse_exposure(text: str) -> float:
    """Exposure may be a plain float ('0.004') or a fraction ('1/250')."""
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def load_sidecar(path) -> dict[str, CaptureMeta]:
    """Load a sidecar metadata table (CSV or JSON) keyed by image filename."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        records = json.loads(path.read_text(encoding="utf-8"))
        out = {}
        for name, rec in records.items():
            out[name] = CaptureMeta(
                timestamp=parse_rfc3339(rec["timestamp"]),
                exposure_time=_parse_exposure(str(rec["exposure_s"])),
                iso=float(rec["iso"]),
                f_number=float(rec["f_number"]),
            )
        return out
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SIDECAR_HEADER:
            raise ParseError(f"sidecar header must be {','.join(SIDECAR_HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SIDECAR_HEADER):
                raise ParseError(f"expected {len(SIDECAR_HEADER)} fields", line=lineno)
            try:
                out[row[0]] = CaptureMeta(
                    timestamp=parse_rfc3339(row[1]),
                    exposure_time=_parse_exposure(row[2]),
                    iso=float(row[3]),
                    f_number=float(row[4]),
                )
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return out


def _exif_datetime(raw: str, offset: str | None, default_offset_minutes: int | None):
    try:
        naive = datetime.strptime(raw, "%Y:%m:%d %H:%M:%S")
    except ValueError as exc:
        raise MissingMetadata(f"unparseable EXIF timestamp {raw!r}") from exc
    if offset:
        sign = -1 if offset.startswith("-") else 1
        hh, mm = offset.lstrip("+-").split(":")
        tz = timezone(sign * timedelta(hours=int(hh), minutes=int(mm)))
    elif default_offset_minutes is not None:
        tz = timezone(timedelta(minutes=default_offset_minutes))
    else:
        tz = timezone.utc
    return naive.replace(tzinfo=tz)


def _meta_from_exif(img: Image.Image, default_offset_minutes: int | None) -> CaptureMeta:
    exif = img.getexif()
    merged = dict(exif)
    # Camera parameters commonly live in the Exif sub-IFD.
    try:
        merged.update(exif.get_ifd(0x8769))
    except Exception:
        pass
    missing = [
        name
        for name, tag in (
            ("exposure", _EXIF_EXPOSURE),
            ("iso", _EXIF_ISO),
            ("f_number", _EXIF_F_NUMBER),
            ("timestamp", _EXIF_DATETIME),
        )
        if tag not in merged
    ]
    if missing:
        raise MissingMetadata(f"embedded metadata lacks: {', '.join(missing)}")
    iso = merged[_EXIF_ISO]
    if isinstance(iso, (tuple, list)):
        iso = iso[0]
    return CaptureMeta(
        timestamp=_exif_datetime(
            str(merged[_EXIF_DATETIME]), merged.get(_EXIF_TZ_OFFSET), default_offset_minutes
        ),
        exposure_time=float(merged[_EXIF_EXPOSURE]),
        iso=float(iso),
        f_number=float(merged[_EXIF_F_NUMBER]),
    )


def load_sky_image(
    path,
    metadata_source: dict[str, CaptureMeta] | None = None,
    *,
    utc_offset_minutes: int | None = None,
) -> SkyImage:
    """Load an 8-bit RGB raster together with its capture metadata.

    ``metadata_source`` is a sidecar table from :func:`load_sidecar`; when
    it contains the file's name, the sidecar record wins over any embedded
    EXIF fields. With no sidecar entry the metadata must be embedded.
    ``utc_offset_minutes`` localizes EXIF timestamps that lack an offset.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            rgb = img.convert("RGB")
            sidecar_meta = (metadata_source or {}).get(path.name)
            meta = sidecar_meta if sidecar_meta is not None else _meta_from_exif(
                img, utc_offset_minutes
            )
    except (UnidentifiedImageError, OSError) as exc:
        raise UnreadableImage(f"{path}: {exc}") from exc
    pixels = np.asarray(rgb, dtype=np.uint8)
    return SkyImage(pixels=pixels, meta=meta)


def _float_or_nan(text: str) -> float:
    return float(text) if text.strip() else math.nan


def load_irradiance_series(path) -> IrradianceSeries:
    """Parse a weather CSV into an IrradianceSeries.

    Timestamps must be strictly increasing; violations raise
    NonMonotonicTimestamps, all other malformed content raises ParseError
    with the line number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header not in (WEATHER_HEADER_SHORT, WEATHER_HEADER_FULL):
            raise ParseError(
                "weather header must be 'timestamp,ghi_wm2[,tmax_c,tmin_c,rain_mm]'",
                line=1,
            )
        has_extra = header == WEATHER_HEADER_FULL
        timestamps: list[datetime] = []
        ghi: list[float] = []
        tmax: list[float] = []
        tmin: list[float] = []
        rain: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            try:
                ts = parse_rfc3339(row[0])
                g = float(row[1])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            if g < 0:
                raise ParseError(f"ghi must be non-negative, got {g}", line=lineno)
            if timestamps and ts <= timestamps[-1]:
                raise NonMonotonicTimestamps(
                    f"line {lineno}: {ts.isoformat()} does not follow {timestamps[-1].isoformat()}"
                )
            timestamps.append(ts)
            ghi.append(g)
            if has_extra:
                try:
                    tmax.append(_float_or_nan(row[2]))
                    tmin.append(_float_or_nan(row[3]))
                    r = _float_or_nan(row[4])
                except ValueError as exc:
                    raise ParseError(str(exc), line=lineno) from exc
                if not math.isnan(r) and r < 0:
                    raise ParseError(f"rain must be non-negative, got {r}", line=lineno)
                rain.append(r)
    if has_extra:
        return IrradianceSeries(
            timestamps, np.array(ghi), np.array(tmax), np.array(tmin), np.array(rain)
        )
    return IrradianceSeries(timestamps, np.array(ghi))


def _format_float(value: float) -> str:
    return "" if math.isnan(value) else repr(float(value))


def save_irradiance_series(series: IrradianceSeries, path) -> None:
    """Write a weather CSV that reparses to an identical series."""
    full = series.tmax is not None or series.tmin is not None or series.rain is not None
    header = WEATHER_HEADER_FULL if full else WEATHER_HEADER_SHORT
    nan = np.full(len(series), math.nan)
    tmax = series.tmax if series.tmax is not None else nan
    tmin = series.tmin if series.tmin is not None else nan
    rain = series.rain if series.rain is not None else nan
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, ts in enumerate(series.timestamps):
            row = [ts.isoformat(), repr(float(series.ghi[i]))]
            if full:
                row += [_format_float(tmax[i]), _format_float(tmin[i]), _format_float(rain[i])]
            writer.writerow(row)


def align_nearest(
    image_timestamps: Sequence[datetime],
    series: IrradianceSeries,
    max_gap_seconds: float,
) -> list[tuple[int, int, float]]:
    """Match each image timestamp to the nearest series sample.

    Returns (image_index, series_index, gap_seconds) triples; images whose
    nearest sample is further than ``max_gap_seconds`` away are dropped.
    Ties break toward the earlier sample. Several images may map to the
    same series sample when images are denser than the sensor log.
    """
    if not image_timestamps or not len(series):
        raise EmptyInput("align_nearest requires non-empty inputs")
    times = [t.timestamp() for t in series.timestamps]
    out = []
    for img_idx, ts in enumerate(image_timestamps):
        t = ts.timestamp()
        pos = bisect_left(times, t)
        best_idx = None
        best_gap = math.inf
        for cand in (pos - 1, pos):
            if 0 <= cand < len(times):
                gap = abs(times[cand] - t)
                if gap < best_gap:  # strict: ties keep the earlier candidate
                    best_gap = gap
                    best_idx = cand
        if best_idx is not None and best_gap <= max_gap_seconds:
            out.append((img_idx, best_idx, best_gap))
    return out


def filter_daylight(
    pairs: Iterable[PairedSample],
    window_start: time = time(7, 0),
    window_end: time = time(19, 0),
    utc_offset_minutes: int = 0,
) -> list[PairedSample]:
    """Keep pairs whose local wall-clock time lies within [start, end]."""
    if window_start >= window_end:
        raise InvalidWindow(f"window start {window_start} must precede end {window_end}")
    tz = timezone(timedelta(minutes=utc_offset_minutes))
    kept = []
    for pair in pairs:
        local = pair.timestamp.astimezone(tz).time()
        if window_start <= local <= window_end:
            kept.append(pair)
    return kept


def build_pairs(records, series: IrradianceSeries, max_gap_seconds: float) -> list[PairedSample]:
    """Pair luminance records with the nearest weather reading.

    ``records`` is a sequence of objects with ``timestamp`` and
    ``weighted_luminance`` attributes (see luminance.LuminanceRecord).
    """
    matches = align_nearest([r.timestamp for r in records], series, max_gap_seconds)
    return [
        PairedSample(
            timestamp=records[i].timestamp,
            luminance=records[i].weighted_luminance,
            irradiance=float(series.ghi[j]),
            gap_seconds=gap,
        )
        for i, j, gap in matches
    ]


def save_pairs(pairs: Sequence[PairedSample], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PAIRS_HEADER)
        for p in pairs:
            writer.writerow(
                [p.timestamp.isoformat(), repr(p.luminance), repr(p.irradiance), repr(p.gap_seconds)]
            )


def load_pairs(path) -> list[PairedSample]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PAIRS_HEADER:
            raise ParseError(f"pairs header must be {','.join(PAIRS_HEADER)}", line=1)
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(
                    PairedSample(
                        timestamp=parse_rfc3339(row[0]),
                        luminance=float(row[1]),
                        irradiance=float(row[2]),
                        gap_seconds=float(row[3]),
                    )
                )
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return out
