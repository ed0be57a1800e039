"""Luminance-to-irradiance regression, plus temperature-based benchmarks.

Polynomial fits map the cosine-weighted luminance L to measured GHI.
Fitting goes through an orthogonal factorization of a column-equilibrated
design matrix; high-order fits over wide luminance ranges are severely
ill-conditioned without the equilibration step.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from datetime import date as date_type
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import SiteConfig
from .errors import (
    DegenerateDesign,
    EmptyInput,
    InsufficientData,
    LengthMismatch,
    MissingInput,
    SchemaMismatch,
    ZeroDenominator,
)
from .geometry import day_angle, eccentricity, solar_declination
from .ingest import IrradianceSeries, PairedSample

MODEL_SCHEMA_VERSION = 1

MIN_DEGREE, MAX_DEGREE = 1, 5


@dataclass(frozen=True)
class PolyModel:
    """Polynomial mapping luminance L to irradiance in W/m2, a0 first."""

    degree: int
    coefficients: tuple[float, ...]
    fit_rmse: float
    n_train: int

    def __post_init__(self):
        if not MIN_DEGREE <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in [{MIN_DEGREE}, {MAX_DEGREE}]: {self.degree}")
        if len(self.coefficients) != self.degree + 1:
            raise ValueError(
                f"degree {self.degree} needs {self.degree + 1} coefficients, "
                f"got {len(self.coefficients)}"
            )


#: Cubic shipped as the packaged default, fitted on an equatorial
#: whole-sky deployment. Regression constants are camera and site
#: specific; refit for any other rig.
REFERENCE_CUBIC = PolyModel(
    degree=3,
    coefficients=(7.954, 0.00397, 3.96e-07, -4.25e-12),
    fit_rmse=176.57,
    n_train=0,
)


def _horner(coefficients: Sequence[float], x):
    """Evaluate a polynomial given a0-first coefficients."""
    acc = np.zeros_like(np.asarray(x, dtype=float))
    for c in reversed(coefficients):
        acc = acc * x + c
    return acc


def fit_polynomial(pairs: Sequence[PairedSample], degree: int) -> PolyModel:
    """Ordinary least-squares polynomial fit of irradiance on luminance.

    Solves the column-equilibrated Vandermonde system with an orthogonal
    factorization (SVD); normal equations are avoided deliberately.
    """
    if not MIN_DEGREE <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must be in [{MIN_DEGREE}, {MAX_DEGREE}]: {degree}")
    n = len(pairs)
    if n < degree + 1:
        raise InsufficientData(f"degree {degree} needs at least {degree + 1} pairs, got {n}")
    x = np.array([p.luminance for p in pairs], dtype=float)
    y = np.array([p.irradiance for p in pairs], dtype=float)
    design = np.vander(x, degree + 1, increasing=True)
    norms = np.linalg.norm(design, axis=0)
    scale = np.where(norms > 0.0, norms, 1.0)
    coef, _, rank, _ = np.linalg.lstsq(design / scale, y, rcond=None)
    if rank < degree + 1:
        raise DegenerateDesign(
            f"design matrix rank {rank} < {degree + 1}; luminance values degenerate"
        )
    coef = coef / scale
    residuals = design @ coef - y
    rmse = math.sqrt(math.fsum((residuals * residuals).tolist()) / n)
    return PolyModel(degree=degree, coefficients=tuple(coef.tolist()), fit_rmse=rmse, n_train=n)


def predict(model: PolyModel, luminance):
    """Irradiance estimate in W/m2; negative outputs are clamped to zero.

    Accepts a scalar or an array. Use :func:`predict_flagged` to learn
    which evaluations were clamped.
    """
    value, _ = predict_flagged(model, luminance)
    return value


def predict_flagged(model: PolyModel, luminance):
    """Like :func:`predict` but also returns the clamp flag(s)."""
    lum = np.asarray(luminance, dtype=float)
    if np.any(lum < 0.0):
        raise ValueError("luminance must be non-negative")
    raw = _horner(model.coefficients, lum)
    clamped = raw < 0.0
    value = np.where(clamped, 0.0, raw)
    if np.isscalar(luminance) or np.ndim(luminance) == 0:
        return float(value), bool(clamped)
    return value, clamped


def model_selection_table(
    pairs: Sequence[PairedSample], degrees: Sequence[int] = range(MIN_DEGREE, MAX_DEGREE + 1)
) -> list[tuple[int, float]]:
    """Training RMSE for each polynomial degree (rows of the model table)."""
    return [(d, fit_polynomial(pairs, d).fit_rmse) for d in degrees]


@dataclass(frozen=True)
class NormalizationResult:
    """Least-squares factor x minimizing sum((x*b_i - a_i)^2)."""

    factor: float
    objective_value: float


def normalization_factor(a: Sequence[float], b: Sequence[float]) -> NormalizationResult:
    """Closed-form conversion factor x = sum(a_i b_i) / sum(b_i^2)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"series shapes differ: {a.shape} vs {b.shape}")
    if len(a) == 0:
        raise EmptyInput("normalization requires at least one sample")
    denom = math.fsum((b * b).tolist())
    if denom == 0.0:
        raise ZeroDenominator("all b values are zero")
    x = math.fsum((a * b).tolist()) / denom
    resid = x * b - a
    return NormalizationResult(factor=x, objective_value=math.fsum((resid * resid).tolist()))


# ---------------------------------------------------------------------------
# Temperature-based daily benchmark estimators
# ---------------------------------------------------------------------------

class BenchmarkKind(enum.Enum):
    HARGREAVES_SAMANI = "hargreaves_samani"
    DONATELLI_CAMPBELL = "donatelli_campbell"
    BRISTOW_CAMPBELL = "bristow_campbell"
    HUNT = "hunt"


@dataclass(frozen=True)
class BenchmarkInputs:
    """Per-day inputs: daily-mean extraterrestrial radiation and weather."""

    extraterrestrial_wm2: float  # R_a, daily mean
    tmax_c: float | None = None
    tmin_c: float | None = None
    rain_mm: float | None = None

    def __post_init__(self):
        if self.extraterrestrial_wm2 < 0:
            raise ValueError("extraterrestrial radiation must be non-negative")
        if self.tmax_c is not None and self.tmin_c is not None and self.tmax_c < self.tmin_c:
            raise ValueError(f"tmax {self.tmax_c} below tmin {self.tmin_c}")
        if self.rain_mm is not None and self.rain_mm < 0:
            raise ValueError("rain must be non-negative")


@dataclass(frozen=True)
class HargreavesSamaniParams:
    """S = krs * sqrt(tmax - tmin) * Ra; krs ~0.16 inland, ~0.19 coastal."""

    krs: float = 0.16


@dataclass(frozen=True)
class BristowCampbellParams:
    """S = Ra * a * (1 - exp(-b * dT**c)); a is the clear-sky transmittance cap."""

    a: float = 0.7
    b: float = 0.004
    c: float = 2.4


@dataclass(frozen=True)
class DonatelliCampbellParams:
    """S = Ra * tau * (1 - exp(-b * f(tavg) * dT^2 * exp(tmin/tnc)))
    with f(tavg) = 0.017 * exp(exp(-0.053 * tavg)).
    """

    tau: float = 0.75
    b: float = 0.2
    tnc: float = 50.0


@dataclass(frozen=True)
class HuntParams:
    """S = a1*Ra*sqrt(dT) + a2*tmax + a3*rain + a4*rain^2 + a5.

    Defaults are literature coefficients converted from MJ/m2/day to a
    W/m2 daily-mean basis (1 MJ/m2/day = 11.574 W/m2).
    """

    a1: float = 0.1094
    a2: float = 2.854
    a3: float = -2.164
    a4: float = 0.0301
    a5: float = -34.60


_DEFAULT_PARAMS = {
    BenchmarkKind.HARGREAVES_SAMANI: HargreavesSamaniParams(),
    BenchmarkKind.BRISTOW_CAMPBELL: BristowCampbellParams(),
    BenchmarkKind.DONATELLI_CAMPBELL: DonatelliCampbellParams(),
    BenchmarkKind.HUNT: HuntParams(),
}


def _require(inputs: BenchmarkInputs, kind: BenchmarkKind, *names: str) -> None:
    missing = [n for n in names if getattr(inputs, n) is None]
    if missing:
        raise MissingInput(f"{kind.value} needs {', '.join(missing)}")


def benchmark_estimate(kind: BenchmarkKind, inputs: BenchmarkInputs, params=None) -> float:
    """Daily-mean GHI estimate in W/m2 from one of the classic models.

    All models need tmax/tmin; Hunt additionally needs rain. Estimates are
    clamped at zero (the Hunt affine form can go negative on cold wet days).
    """
    params = params if params is not None else _DEFAULT_PARAMS[kind]
    _require(inputs, kind, "tmax_c", "tmin_c")
    dt = inputs.tmax_c - inputs.tmin_c
    ra = inputs.extraterrestrial_wm2
    if kind is BenchmarkKind.HARGREAVES_SAMANI:
        value = params.krs * math.sqrt(dt) * ra
    elif kind is BenchmarkKind.BRISTOW_CAMPBELL:
        value = ra * params.a * (1.0 - math.exp(-params.b * dt**params.c))
    elif kind is BenchmarkKind.DONATELLI_CAMPBELL:
        tavg = 0.5 * (inputs.tmax_c + inputs.tmin_c)
        f_tavg = 0.017 * math.exp(math.exp(-0.053 * tavg))
        value = ra * params.tau * (
            1.0 - math.exp(-params.b * f_tavg * dt**2 * math.exp(inputs.tmin_c / params.tnc))
        )
    elif kind is BenchmarkKind.HUNT:
        _require(inputs, kind, "rain_mm")
        value = (
            params.a1 * ra * math.sqrt(dt)
            + params.a2 * inputs.tmax_c
            + params.a3 * inputs.rain_mm
            + params.a4 * inputs.rain_mm**2
            + params.a5
        )
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown benchmark kind {kind}")
    return max(value, 0.0)


def extraterrestrial_daily_mean(date: date_type, site: SiteConfig) -> float:
    """Daily-mean extraterrestrial horizontal radiation R_a in W/m2."""
    doy = date.timetuple().tm_yday
    gamma = day_angle(doy)
    e0 = eccentricity(gamma)
    decl = solar_declination(gamma)
    phi = math.radians(site.latitude_deg)
    cos_ws = -math.tan(phi) * math.tan(decl)
    ws = math.acos(max(-1.0, min(1.0, cos_ws)))
    # Solar constant matches the clear-sky model's value.
    isc = 1366.1
    return (isc * e0 / math.pi) * (
        ws * math.sin(phi) * math.sin(decl) + math.cos(phi) * math.cos(decl) * math.sin(ws)
    )


def scale_to_profile(daily_mean_wm2: float, profile: IrradianceSeries) -> IrradianceSeries:
    """Spread a daily-mean estimate over a day following a diurnal profile.

    The profile (typically the clear-sky curve) is rescaled so the output
    series has the requested daily mean; a zero profile yields zeros.
    """
    mean = float(np.mean(profile.ghi))
    if mean <= 0.0:
        values = np.zeros(len(profile))
    else:
        values = profile.ghi * (daily_mean_wm2 / mean)
    return IrradianceSeries(list(profile.timestamps), values)


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------

def save_model(model: PolyModel, path, created_utc: datetime | None = None) -> None:
    """Write a model as versioned JSON; floats keep full precision."""
    created = created_utc if created_utc is not None else datetime.now(timezone.utc)
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "degree": model.degree,
        "coefficients": list(model.coefficients),
        "fit_rmse": model.fit_rmse,
        "n_train": model.n_train,
        "created_utc": created.isoformat(),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path) -> PolyModel:
    """Load a model JSON; unknown extra fields are ignored."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaMismatch(f"{path}: model file must be a JSON object")
    missing = {"schema_version", "degree", "coefficients"} - doc.keys()
    if missing:
        raise SchemaMismatch(f"{path}: missing fields {sorted(missing)}")
    if int(doc["schema_version"]) != MODEL_SCHEMA_VERSION:
        raise SchemaMismatch(
            f"{path}: schema version {doc['schema_version']} != {MODEL_SCHEMA_VERSION}"
        )
    degree = int(doc["degree"])
    coefficients = tuple(float(c) for c in doc["coefficients"])
    if not MIN_DEGREE <= degree <= MAX_DEGREE or len(coefficients) != degree + 1:
        raise SchemaMismatch(
            f"{path}: degree {degree} inconsistent with {len(coefficients)} coefficients"
        )
    return PolyModel(
        degree=degree,
        coefficients=coefficients,
        fit_rmse=float(doc.get("fit_rmse", math.nan)),
        n_train=int(doc.get("n_train", 0)),
    )
