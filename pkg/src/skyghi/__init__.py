"""Estimate global horizontal irradiance from whole-sky camera images.

The pipeline samples a fisheye frame with a cosine-weighted hemispheric
distribution centred on the detected sun, normalizes the sampled pixel
luminance by the capture parameters, and maps the result to irradiance
through a fitted polynomial. A clear-sky model, classic temperature-based
estimators, an evaluation suite, and a synthetic renderer round out the
toolkit.
"""

__version__ = "0.1.0"

from .clearsky import ClearSkyConstants, clear_sky_curve, clear_sky_ghi, eccentricity
from .config import SiteConfig, load_site_config, save_site_config
from .errors import SkyGhiError
from .evaluate import EvalReport, SplitStudy, difference_histogram, make_report, rmse, spearman, split_study
from .geometry import (
    LensModel,
    SolarGeometry,
    cosine_hemisphere_sample,
    day_angle,
    pixel_to_ray,
    ray_to_pixel,
    rotate_samples,
    rotation_to_sun,
    solar_azimuth,
    solar_position,
    sun_direction_from_geometry,
)
from .ingest import (
    CaptureMeta,
    IrradianceSeries,
    PairedSample,
    SkyImage,
    align_nearest,
    build_pairs,
    filter_daylight,
    load_irradiance_series,
    load_sky_image,
)
from .luminance import (
    LuminanceRecord,
    degamma,
    image_luminance_pipeline,
    mean_sampled_luminance,
    pixel_luminance,
    relative_luminance,
    weighted_luminance,
)
from .regress import (
    BenchmarkInputs,
    BenchmarkKind,
    NormalizationResult,
    PolyModel,
    REFERENCE_CUBIC,
    benchmark_estimate,
    fit_polynomial,
    load_model,
    model_selection_table,
    normalization_factor,
    predict,
    save_model,
)
from .render import DayProfile, SceneSpec, render_dataset, render_scene, uniform_sky
from .sundetect import SunLocation, SunSource, detect_sun, sun_with_fallback
