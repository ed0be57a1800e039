"""Command-line pipeline orchestration.

Subcommands: render, luminance, fit, predict, evaluate, study, clearsky,
benchmark. Every run writes a ``manifest.json`` (command, argument vector,
resolved seed, input digests, package version, run timestamp) next to its
outputs; ``skyghi --manifest <path>`` replays a recorded run and
reproduces its outputs byte for byte.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import date as date_type
from datetime import datetime, time, timedelta, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .clearsky import clear_sky_curve, clear_sky_ghi, percentage_deviation
from .config import DEFAULT_SEED, SiteConfig, load_site_config, save_site_config
from .errors import MissingInput, SkyGhiError
from .evaluate import make_report, rmse, spearman, split_study
from .geometry import solar_azimuth, solar_position
from .ingest import (
    align_nearest,
    build_pairs,
    filter_daylight,
    load_irradiance_series,
    load_pairs,
    load_sidecar,
    load_sky_image,
    save_irradiance_series,
    save_pairs,
)
from .luminance import (
    image_luminance_pipeline,
    load_luminance_records,
    save_luminance_records,
)
from .regress import (
    BenchmarkInputs,
    BenchmarkKind,
    BristowCampbellParams,
    DonatelliCampbellParams,
    HargreavesSamaniParams,
    HuntParams,
    benchmark_estimate,
    extraterrestrial_daily_mean,
    fit_polynomial,
    load_model,
    model_selection_table,
    normalization_factor,
    predict,
    predict_flagged,
    save_model,
    scale_to_profile,
)
from .render import DayProfile, render_dataset, write_dataset
from .sundetect import DEFAULT_SUN_THRESHOLD
from . import svgplot

MANIFEST_NAME = "manifest.json"
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}

#: Site used by ``render`` when no --site file is given: an equatorial
#: observer with a small synthetic lens, written out as site.yaml so the
#: rest of the pipeline can consume the rendered dataset.
SYNTHETIC_SITE = SiteConfig(
    latitude_deg=0.0,
    longitude_deg=0.0,
    utc_offset_minutes=0,
    focal_scale_px=150.0,
    center_x_px=120.0,
    center_y_px=120.0,
    image_circle_radius_px=110.0,
    samples_n=2000,
    rng_seed=DEFAULT_SEED,
)


class UsageError(Exception):
    """Bad flag combinations or unparseable flag values."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass
class RunContext:
    site: SiteConfig | None
    seed: int
    jobs: int
    out: Path
    created_utc: str
    argv: list[str]

    def require_site(self) -> SiteConfig:
        if self.site is None:
            raise UsageError("this command requires --site")
        return self.site


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def _run_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    return datetime.now(timezone.utc).isoformat()


def _parse_date(text: str) -> date_type:
    try:
        return date_type.fromisoformat(text)
    except ValueError as exc:
        raise UsageError(f"bad date {text!r}: expected YYYY-MM-DD") from exc


def _parse_time(text: str) -> time:
    try:
        return time.fromisoformat(text)
    except ValueError as exc:
        raise UsageError(f"bad time {text!r}: expected HH:MM") from exc


def _parse_fractions(text: str) -> list[float]:
    """Either 'start:stop:step' (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("need start <= stop and step > 0")
            out = []
            f = start
            while f <= stop + 1e-9:
                out.append(round(f, 10))
                f += step
            return out
        return [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise UsageError(f"bad fractions {text!r}: {exc}") from exc


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _digest_input(path: Path) -> str:
    if path.is_dir():
        h = hashlib.sha256()
        for child in sorted(p for p in path.iterdir() if p.is_file()):
            h.update(f"{child.name}:{_sha256_file(child)}\n".encode())
        return "dir:" + h.hexdigest()
    return _sha256_file(path)


_INPUT_ARG_NAMES = (
    "site",
    "images",
    "sidecar",
    "weather",
    "pairs",
    "luminance_csv",
    "model",
    "params",
)


def _collect_inputs(ns: argparse.Namespace) -> dict[str, str]:
    digests = {}
    for name in _INPUT_ARG_NAMES:
        value = getattr(ns, name, None)
        if value:
            p = Path(value)
            if p.exists():
                digests[str(value)] = _digest_input(p)
    return digests


def write_manifest(ctx: RunContext, command: str, ns: argparse.Namespace) -> Path:
    doc = {
        "schema_version": 1,
        "command": command,
        "argv": ctx.argv,
        "seed": ctx.seed,
        "jobs": ctx.jobs,
        "out": str(ctx.out),
        "package_version": __version__,
        "created_utc": ctx.created_utc,
        "inputs": _collect_inputs(ns),
    }
    path = ctx.out / MANIFEST_NAME
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _local_hours(ts: datetime, tz) -> float:
    local = ts.astimezone(tz)
    return local.hour + local.minute / 60.0 + local.second / 3600.0


def _emit(path: Path) -> None:
    print(f"wrote {path}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_render(ns, ctx: RunContext) -> int:
    site = ctx.site if ctx.site is not None else SYNTHETIC_SITE
    day = _parse_date(ns.date)
    tz = site.tzinfo()
    start = datetime.combine(day, _parse_time(ns.start), tzinfo=tz)
    end = datetime.combine(day, _parse_time(ns.end), tzinfo=tz)
    if end <= start:
        raise UsageError("--end must be after --start")
    profile = DayProfile(
        site=site, start=start, end=end, peak_radiance=ns.peak_radiance
    )
    images, series = render_dataset(
        profile,
        ns.n_images,
        ctx.seed,
        sun_disk_radius_deg=ns.sun_disk_deg,
        ghi_noise_sigma=ns.ghi_noise_sigma,
        image_noise_sigma=ns.image_noise_sigma,
    )
    write_dataset(images, series, ctx.out)
    save_site_config(site, ctx.out / "site.yaml")
    for name in ("sidecar.csv", "weather.csv", "site.yaml"):
        _emit(ctx.out / name)
    print(f"rendered {len(images)} frames into {ctx.out}")
    return 0


def cmd_luminance(ns, ctx: RunContext) -> int:
    site = ctx.require_site()
    site = replace(site, rng_seed=ctx.seed, samples_n=ns.samples or site.samples_n)
    images_dir = Path(ns.images)
    if not images_dir.is_dir():
        raise SkyGhiError(f"not a directory: {images_dir}")
    files = sorted(p for p in images_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise SkyGhiError(f"no images found in {images_dir}")
    sidecar_path = Path(ns.sidecar) if ns.sidecar else images_dir / "sidecar.csv"
    sidecar = load_sidecar(sidecar_path) if sidecar_path.exists() else None
    lens = site.lens()

    def work(index: int, path: Path):
        img = load_sky_image(
            path, sidecar, utc_offset_minutes=site.utc_offset_minutes
        )
        geom = solar_position(img.meta.timestamp, site.latitude_deg, site.longitude_deg)
        azimuth = solar_azimuth(img.meta.timestamp, site.latitude_deg, site.longitude_deg)
        return image_luminance_pipeline(
            img,
            lens,
            geom,
            site,
            azimuth_deg=azimuth,
            image_index=index,
            sun_threshold=ns.sun_threshold,
        )

    def safe(item):
        index, path = item
        try:
            return work(index, path), None
        except (SkyGhiError, OSError) as exc:
            return None, f"{path.name}: {exc}"

    items = list(enumerate(files))
    if ctx.jobs > 1:
        with ThreadPoolExecutor(max_workers=ctx.jobs) as pool:
            outcomes = list(pool.map(safe, items))
    else:
        outcomes = [safe(item) for item in items]
    records = [rec for rec, _ in outcomes if rec is not None]
    for _, err in outcomes:
        if err:
            print(f"warning: {err}", file=sys.stderr)
    if not records:
        raise SkyGhiError("no image produced a luminance record")
    path = ctx.out / "luminance.csv"
    save_luminance_records(records, path)
    _emit(path)
    print(f"{len(records)} of {len(files)} images succeeded")
    return 0


def _pairs_from_args(ns, ctx: RunContext):
    if ns.pairs:
        return load_pairs(ns.pairs)
    if not (ns.luminance_csv and ns.weather):
        raise UsageError("need --pairs, or both --luminance-csv and --weather")
    records = load_luminance_records(ns.luminance_csv)
    series = load_irradiance_series(ns.weather)
    pairs = build_pairs(records, series, ns.max_gap)
    offset = ctx.site.utc_offset_minutes if ctx.site else 0
    return filter_daylight(
        pairs,
        _parse_time(ns.window_start),
        _parse_time(ns.window_end),
        utc_offset_minutes=offset,
    )


def cmd_fit(ns, ctx: RunContext) -> int:
    pairs = _pairs_from_args(ns, ctx)
    model = fit_polynomial(pairs, ns.degree)
    model_path = Path(ns.model_out) if ns.model_out else ctx.out / "model.json"
    save_model(
        model, model_path, created_utc=datetime.fromisoformat(ctx.created_utc)
    )
    _emit(model_path)
    pairs_path = ctx.out / "pairs.csv"
    save_pairs(pairs, pairs_path)
    _emit(pairs_path)
    lum = np.array([p.luminance for p in pairs])
    fitted = predict(model, lum)
    scatter_path = ctx.out / "fit_scatter.csv"
    _write_csv(
        scatter_path,
        ["luminance", "ghi_wm2", "fit_wm2"],
        (
            [_fmt(p.luminance), _fmt(p.irradiance), _fmt(float(f))]
            for p, f in zip(pairs, fitted)
        ),
    )
    _emit(scatter_path)
    grid = np.linspace(float(lum.min()), float(lum.max()), 200)
    svg_path = ctx.out / "fit_scatter.svg"
    svgplot.scatter_chart(
        svg_path,
        lum,
        [p.irradiance for p in pairs],
        line=(grid, predict(model, grid)),
        title=f"degree {ns.degree} fit (n={len(pairs)}, rmse={model.fit_rmse:.1f})",
        x_label="weighted luminance",
        y_label="GHI (W/m2)",
    )
    _emit(svg_path)
    if len(pairs) >= 6:
        table = model_selection_table(pairs)
        table_path = ctx.out / "model_table.csv"
        _write_csv(table_path, ["degree", "train_rmse_wm2"], ([d, _fmt(r)] for d, r in table))
        _emit(table_path)
    print(f"fit degree {model.degree}: rmse {model.fit_rmse:.3f} W/m2 on {model.n_train} pairs")
    return 0


def cmd_predict(ns, ctx: RunContext) -> int:
    model = load_model(ns.model)
    records = load_luminance_records(ns.luminance_csv)
    lum = np.array([r.weighted_luminance for r in records])
    estimates, clamped = predict_flagged(model, lum)
    pred_path = ctx.out / "predictions.csv"
    _write_csv(
        pred_path,
        ["timestamp", "luminance", "ghi_est_wm2", "clamped"],
        (
            [r.timestamp.isoformat(), _fmt(r.weighted_luminance), _fmt(float(e)), int(c)]
            for r, e, c in zip(records, estimates, clamped)
        ),
    )
    _emit(pred_path)
    if ns.weather:
        series = load_irradiance_series(ns.weather)
        matches = {
            i: j
            for i, j, _ in align_nearest(
                [r.timestamp for r in records], series, ns.max_gap
            )
        }
        overlay_rows = []
        measured = np.array([series.ghi[matches[i]] for i in matches])
        lum_matched = np.array([records[i].weighted_luminance for i in matches])
        if ns.normalize == "per-day" and matches:
            factors = {}
            days = {}
            for i in matches:
                days.setdefault(records[i].timestamp.astimezone(timezone.utc).date(), []).append(i)
            for day, idxs in days.items():
                a = [float(series.ghi[matches[i]]) for i in idxs]
                b = [records[i].weighted_luminance for i in idxs]
                factors[day] = normalization_factor(a, b).factor
            norm_lum = [
                records[i].weighted_luminance
                * factors[records[i].timestamp.astimezone(timezone.utc).date()]
                for i in matches
            ]
        else:
            factor = normalization_factor(measured, lum_matched).factor
            norm_lum = (lum_matched * factor).tolist()
        hours0 = records[0].timestamp
        for pos, i in enumerate(matches):
            overlay_rows.append(
                [
                    records[i].timestamp.isoformat(),
                    _fmt(float(measured[pos])),
                    _fmt(float(estimates[i])),
                    _fmt(float(norm_lum[pos])),
                ]
            )
        overlay_path = ctx.out / "overlay.csv"
        _write_csv(
            overlay_path,
            ["timestamp", "measured_wm2", "estimated_wm2", "normalized_luminance"],
            overlay_rows,
        )
        _emit(overlay_path)
        xs = [
            (records[i].timestamp - hours0).total_seconds() / 3600.0 for i in matches
        ]
        svg_path = ctx.out / "overlay.svg"
        svgplot.line_chart(
            svg_path,
            [
                ("measured", xs, measured.tolist()),
                ("estimated", xs, [float(estimates[i]) for i in matches]),
                ("normalized luminance", xs, [float(v) for v in norm_lum]),
            ],
            title="estimated vs measured GHI",
            x_label="hours since first image",
            y_label="W/m2",
        )
        _emit(svg_path)
    clamp_count = int(np.sum(clamped))
    print(f"predicted {len(records)} values ({clamp_count} clamped to zero)")
    return 0


def cmd_evaluate(ns, ctx: RunContext) -> int:
    pairs = load_pairs(ns.pairs)
    actual = np.array([p.irradiance for p in pairs])
    lum = np.array([p.luminance for p in pairs])
    if ns.holdout:
        degree = ns.degree if ns.degree else (load_model(ns.model).degree if ns.model else 3)
        rng = np.random.default_rng([ctx.seed, 0])
        perm = rng.permutation(len(pairs))
        k = int(round(ns.train_fraction * len(pairs)))
        if k < degree + 1 or k >= len(pairs):
            raise UsageError(
                f"train fraction {ns.train_fraction} leaves no usable train/test split"
            )
        train = [pairs[i] for i in perm[:k]]
        model = fit_polynomial(train, degree)
        test_idx = perm[k:]
        actual = actual[test_idx]
        estimated = predict(model, lum[test_idx])
        protocol = f"holdout(train_fraction={ns.train_fraction})"
    else:
        if not ns.model:
            raise UsageError("--model is required unless --holdout is given")
        model = load_model(ns.model)
        estimated = predict(model, lum)
        protocol = "in_sample"
    report = make_report(actual, estimated, ns.bin_width)
    metrics_path = ctx.out / "metrics.csv"
    _write_csv(
        metrics_path,
        ["protocol", "n", "rmse_wm2", "spearman", "within_100_fraction"],
        [[protocol, report.n, _fmt(report.rmse), _fmt(report.spearman), _fmt(report.within_100_fraction)]],
    )
    _emit(metrics_path)
    hist_path = ctx.out / "histogram.csv"
    _write_csv(
        hist_path,
        ["bin_lo_wm2", "bin_hi_wm2", "count"],
        ([_fmt(lo), _fmt(hi), c] for lo, hi, c in report.histogram),
    )
    _emit(hist_path)
    svg_path = ctx.out / "histogram.svg"
    svgplot.histogram_chart(
        svg_path,
        report.histogram,
        title=f"estimated - actual ({protocol})",
        x_label="difference (W/m2)",
    )
    _emit(svg_path)
    print(
        f"{protocol}: n={report.n} rmse={report.rmse:.2f} W/m2 "
        f"spearman={report.spearman:.3f} within+-100={report.within_100_fraction:.1%}"
    )
    return 0


def cmd_study(ns, ctx: RunContext) -> int:
    pairs = load_pairs(ns.pairs)
    fractions = _parse_fractions(ns.fractions)
    results = split_study(pairs, fractions, ns.degree, ctx.seed, ns.repeats)
    rows = []
    for res in results:
        for split, scores, quartiles in (
            ("train", res.train_rmse, res.train_quartiles),
            ("test", res.test_rmse, res.test_quartiles),
        ):
            if scores is None:
                continue
            rows.append(
                [
                    _fmt(res.train_fraction),
                    split,
                    _fmt(quartiles[0]),
                    _fmt(quartiles[1]),
                    _fmt(quartiles[2]),
                    _fmt(float(min(scores))),
                    _fmt(float(max(scores))),
                ]
            )
    study_path = ctx.out / "study.csv"
    _write_csv(
        study_path,
        ["train_fraction", "split", "q25_wm2", "median_wm2", "q75_wm2", "min_wm2", "max_wm2"],
        rows,
    )
    _emit(study_path)
    for split_name, pick in (("train", lambda r: (r.train_quartiles, r.train_rmse)),
                             ("test", lambda r: (r.test_quartiles, r.test_rmse))):
        boxes = []
        for res in results:
            quartiles, scores = pick(res)
            if quartiles is None:
                continue
            boxes.append(
                (
                    res.train_fraction,
                    quartiles[0],
                    quartiles[1],
                    quartiles[2],
                    float(min(scores)),
                    float(max(scores)),
                )
            )
        if boxes:
            svg_path = ctx.out / f"study_{split_name}.svg"
            svgplot.box_chart(
                svg_path,
                boxes,
                title=f"RMSE on {split_name} set vs training fraction "
                f"({ns.repeats} repeats, degree {ns.degree})",
                x_label="training fraction",
                y_label="RMSE (W/m2)",
            )
            _emit(svg_path)
    print(f"studied fractions {fractions} with {ns.repeats} repeats")
    return 0


def cmd_clearsky(ns, ctx: RunContext) -> int:
    site = ctx.require_site()
    day = _parse_date(ns.date)
    curve = clear_sky_curve(day, site, ns.step)
    curve_path = ctx.out / "clearsky.csv"
    save_irradiance_series(curve, curve_path)
    _emit(curve_path)
    tz = site.tzinfo()
    xs = [_local_hours(t, tz) for t in curve.timestamps]
    series_list = [("clear sky", xs, curve.ghi.tolist())]
    if ns.weather:
        measured = load_irradiance_series(ns.weather)
        times, deviation = percentage_deviation(measured, site)
        dev_path = ctx.out / "deviation.csv"
        _write_csv(
            dev_path,
            ["timestamp", "deviation_percent"],
            ([t.isoformat(), _fmt(float(d))] for t, d in zip(times, deviation)),
        )
        _emit(dev_path)
        if len(times):
            dev_svg = ctx.out / "deviation.svg"
            svgplot.line_chart(
                dev_svg,
                [("deviation", [_local_hours(t, tz) for t in times], deviation.tolist())],
                title="deviation from clear sky",
                x_label="local hour",
                y_label="percent",
            )
            _emit(dev_svg)
        series_list.append(
            ("measured", [_local_hours(t, tz) for t in measured.timestamps], measured.ghi.tolist())
        )
    svg_path = ctx.out / "clearsky.svg"
    svgplot.line_chart(
        svg_path,
        series_list,
        title=f"clear-sky GHI for {day.isoformat()}",
        x_label="local hour",
        y_label="W/m2",
    )
    _emit(svg_path)
    peak = float(curve.ghi.max())
    print(f"clear-sky curve for {day.isoformat()}: peak {peak:.1f} W/m2")
    return 0


_BENCHMARK_ALIASES = {
    "hs": BenchmarkKind.HARGREAVES_SAMANI,
    "dc": BenchmarkKind.DONATELLI_CAMPBELL,
    "bc": BenchmarkKind.BRISTOW_CAMPBELL,
    "hunt": BenchmarkKind.HUNT,
}

_PARAM_TYPES = {
    BenchmarkKind.HARGREAVES_SAMANI: HargreavesSamaniParams,
    BenchmarkKind.DONATELLI_CAMPBELL: DonatelliCampbellParams,
    BenchmarkKind.BRISTOW_CAMPBELL: BristowCampbellParams,
    BenchmarkKind.HUNT: HuntParams,
}


def _load_benchmark_params(path) -> dict:
    if not path:
        return {}
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for key, fields in doc.items():
        kind = _BENCHMARK_ALIASES.get(key) or BenchmarkKind(key)
        out[kind] = _PARAM_TYPES[kind](**fields)
    return out


def cmd_benchmark(ns, ctx: RunContext) -> int:
    site = ctx.require_site()
    series = load_irradiance_series(ns.weather)
    if series.tmax is None or series.tmin is None:
        raise MissingInput("benchmark weather CSV needs tmax_c and tmin_c columns")
    kinds = []
    for token in ns.models.split(","):
        token = token.strip().lower()
        if token not in _BENCHMARK_ALIASES:
            raise UsageError(f"unknown benchmark model {token!r} (use hs,dc,bc,hunt)")
        kinds.append(_BENCHMARK_ALIASES[token])
    params = _load_benchmark_params(ns.params)
    tz = site.tzinfo()
    days: dict[date_type, list[int]] = {}
    for i, ts in enumerate(series.timestamps):
        days.setdefault(ts.astimezone(tz).date(), []).append(i)

    daily_rows = []
    curve_rows = {}
    pooled: dict[BenchmarkKind, tuple[list, list]] = {k: ([], []) for k in kinds}
    for day in sorted(days):
        idxs = days[day]
        tmax = float(np.nanmax(series.tmax[idxs]))
        tmin = float(np.nanmin(series.tmin[idxs]))
        rain_vals = series.rain[idxs] if series.rain is not None else None
        rain = (
            float(np.nansum(rain_vals))
            if rain_vals is not None and not np.all(np.isnan(rain_vals))
            else None
        )
        if math.isnan(tmax) or math.isnan(tmin):
            print(f"warning: {day}: missing temperature data, skipped", file=sys.stderr)
            continue
        ra = extraterrestrial_daily_mean(day, site)
        inputs = BenchmarkInputs(
            extraterrestrial_wm2=ra, tmax_c=tmax, tmin_c=tmin, rain_mm=rain
        )
        base_curve = clear_sky_curve(day, site, ns.step)
        base_mean = float(np.mean(base_curve.ghi))
        for i in idxs:
            key = series.timestamps[i].isoformat()
            row = curve_rows.setdefault(
                key, {"measured": float(series.ghi[i])}
            )
            geom = solar_position(series.timestamps[i], site.latitude_deg, site.longitude_deg)
            row["clearsky"] = (
                clear_sky_ghi(geom.zenith_deg, geom.eccentricity)
                if geom.zenith_deg < 90.0
                else 0.0
            )
        for kind in kinds:
            try:
                daily = benchmark_estimate(kind, inputs, params.get(kind))
            except MissingInput as exc:
                raise MissingInput(f"{day}: {exc}") from exc
            daily_rows.append([day.isoformat(), kind.value, _fmt(daily)])
            factor = daily / base_mean if base_mean > 0 else 0.0
            for i in idxs:
                ts = series.timestamps[i]
                key = ts.isoformat()
                est = curve_rows[key]["clearsky"] * factor
                curve_rows[key][kind.value] = est
                pooled[kind][0].append(float(series.ghi[i]))
                pooled[kind][1].append(est)

    daily_path = ctx.out / "benchmark_daily.csv"
    _write_csv(daily_path, ["date", "model", "daily_mean_wm2"], daily_rows)
    _emit(daily_path)

    curve_path = ctx.out / "benchmark_curves.csv"
    kind_cols = [k.value for k in kinds]
    _write_csv(
        curve_path,
        ["timestamp", "measured_wm2", "clearsky_wm2"] + [f"{c}_wm2" for c in kind_cols],
        (
            [key, _fmt(row["measured"]), _fmt(row.get("clearsky", 0.0))]
            + [_fmt(row[c]) if c in row else "" for c in kind_cols]
            for key, row in sorted(curve_rows.items())
        ),
    )
    _emit(curve_path)

    metric_rows = []
    for kind in kinds:
        actual, est = pooled[kind]
        if actual:
            metric_rows.append(
                [
                    kind.value,
                    len(actual),
                    _fmt(rmse(actual, est)),
                    _fmt(spearman(actual, est)),
                ]
            )
    metrics_path = ctx.out / "benchmark.csv"
    _write_csv(metrics_path, ["model", "n", "rmse_wm2", "spearman"], metric_rows)
    _emit(metrics_path)

    sorted_keys = sorted(curve_rows)
    if sorted_keys:
        t0 = datetime.fromisoformat(sorted_keys[0])
        xs = [
            (datetime.fromisoformat(k) - t0).total_seconds() / 3600.0 for k in sorted_keys
        ]
        series_list = [
            ("measured", xs, [curve_rows[k]["measured"] for k in sorted_keys]),
            ("clear sky", xs, [curve_rows[k].get("clearsky", 0.0) for k in sorted_keys]),
        ]
        for c in kind_cols:
            series_list.append(
                (c, xs, [curve_rows[k].get(c, 0.0) for k in sorted_keys])
            )
        svg_path = ctx.out / "benchmark.svg"
        svgplot.line_chart(
            svg_path,
            series_list,
            title="benchmark estimators vs measured GHI",
            x_label="hours since first sample",
            y_label="W/m2",
        )
        _emit(svg_path)
    print(f"benchmarked {len(kinds)} models over {len(days)} day(s)")
    return 0


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="skyghi", description=__doc__)
    parser.add_argument("--site", help="site config YAML")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides site file)")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads")
    parser.add_argument("--out", help="output directory (default skyghi_out)")
    parser.add_argument("--manifest", help="replay a recorded run from its manifest")
    parser.add_argument("--version", action="version", version=f"skyghi {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("render", help="render a synthetic dataset with ground truth")
    p.add_argument("--n-images", type=int, default=60)
    p.add_argument("--date", default="2021-03-01")
    p.add_argument("--start", default="08:00")
    p.add_argument("--end", default="16:00")
    p.add_argument("--peak-radiance", type=float, default=60000.0)
    p.add_argument("--sun-disk-deg", type=float, default=3.0)
    p.add_argument("--ghi-noise-sigma", type=float, default=0.0)
    p.add_argument("--image-noise-sigma", type=float, default=0.0)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("luminance", help="per-image weighted luminance CSV")
    p.add_argument("--images", required=True, help="directory of sky images")
    p.add_argument("--sidecar", help="sidecar metadata CSV (default <images>/sidecar.csv)")
    p.add_argument("--sun-threshold", type=int, default=DEFAULT_SUN_THRESHOLD)
    p.add_argument("--samples", type=int, help="override site samples_n")
    p.set_defaults(func=cmd_luminance)

    p = sub.add_parser("fit", help="fit a luminance-to-GHI polynomial")
    p.add_argument("--pairs", help="pairs CSV from a previous fit run")
    p.add_argument("--luminance-csv", help="luminance CSV from the luminance command")
    p.add_argument("--weather", help="weather CSV with measured GHI")
    p.add_argument("--max-gap", type=float, default=120.0, help="pairing tolerance, seconds")
    p.add_argument("--window-start", default="07:00")
    p.add_argument("--window-end", default="19:00")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--out", dest="model_out", help="model JSON path (default <out>/model.json)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a model to luminance records")
    p.add_argument("--model", required=True)
    p.add_argument("--luminance-csv", required=True)
    p.add_argument("--weather", help="measured GHI for the overlay figure")
    p.add_argument("--max-gap", type=float, default=120.0)
    p.add_argument(
        "--normalize",
        choices=["global", "per-day"],
        default="global",
        help="conversion-factor normalization for the overlay",
    )
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics for a model on paired data")
    p.add_argument("--model")
    p.add_argument("--pairs", required=True)
    p.add_argument("--holdout", action="store_true", help="fit on a split, test on the rest")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--degree", type=int)
    p.add_argument("--bin-width", type=float, default=50.0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("study", help="randomized train/test split study")
    p.add_argument("--pairs", required=True)
    p.add_argument("--fractions", default="0.1:0.9:0.1")
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--degree", type=int, default=1)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("clearsky", help="clear-sky curve for one day")
    p.add_argument("--date", required=True)
    p.add_argument("--step", type=float, default=120.0, help="seconds between samples")
    p.add_argument("--weather", help="measured series for the deviation figure")
    p.set_defaults(func=cmd_clearsky)

    p = sub.add_parser("benchmark", help="temperature-based daily estimators")
    p.add_argument("--weather", required=True)
    p.add_argument("--models", default="hs,dc,bc,hunt")
    p.add_argument("--params", help="JSON file overriding model parameters")
    p.add_argument("--step", type=float, default=600.0, help="clear-sky profile step, seconds")
    p.set_defaults(func=cmd_benchmark)

    return parser


def _execute(ns, argv: list[str], created_utc: str) -> int:
    site = load_site_config(ns.site) if ns.site else None
    if ns.seed is not None:
        seed = ns.seed
    elif site is not None:
        seed = site.rng_seed
    else:
        seed = DEFAULT_SEED
    out = Path(ns.out) if ns.out else Path("skyghi_out")
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(
        site=site,
        seed=seed,
        jobs=max(1, ns.jobs),
        out=out,
        created_utc=created_utc,
        argv=argv,
    )
    code = ns.func(ns, ctx)
    if code == 0:
        manifest = write_manifest(ctx, ns.command, ns)
        _emit(manifest)
    return code


def _replay(ns) -> int:
    doc = json.loads(Path(ns.manifest).read_text(encoding="utf-8"))
    argv = list(doc["argv"])
    parser = build_parser()
    stored = parser.parse_args(argv)
    if stored.command is None:
        raise UsageError("manifest stores no command")
    stored.seed = doc["seed"]
    if ns.out:
        stored.out = ns.out
    elif "out" in doc:
        stored.out = doc["out"]
    if ns.jobs != 1:
        stored.jobs = ns.jobs
    return _execute(stored, argv, doc["created_utc"])


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.manifest:
            return _replay(ns)
        if ns.command is None:
            parser.print_usage(sys.stderr)
            print("skyghi: error: a command is required", file=sys.stderr)
            return 1
        return _execute(ns, argv, _run_timestamp())
    except UsageError as exc:
        print(f"skyghi: error: {exc}", file=sys.stderr)
        return 1
    except (SkyGhiError, OSError, ValueError) as exc:
        print(f"skyghi: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
