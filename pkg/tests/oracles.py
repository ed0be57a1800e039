"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from first principles with
different algorithms than the library: exact rational arithmetic for
sums, brute-force counting for ranks, a Julian-centuries ephemeris for
the solar zenith. None of it imports skyghi.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone
from fractions import Fraction


def rmse_exact(actual, estimated) -> float:
    """RMSE with the sum of squared differences carried exactly."""
    sq = [Fraction((float(a) - float(b)) ** 2) for a, b in zip(actual, estimated)]
    total = sum(sq, Fraction(0))
    return math.sqrt(float(total) / len(sq))


def ranks_by_counting(values) -> list[float]:
    """Fractional ranks via pairwise counting (ties share average rank)."""
    out = []
    for vi in values:
        smaller = sum(1 for vj in values if vj < vi)
        equal = sum(1 for vj in values if vj == vi)
        out.append(1.0 + smaller + (equal - 1) / 2.0)
    return out


def spearman_exact(x, y) -> float:
    """Rank correlation with exact-rational sums over the rank deviations."""
    rx = ranks_by_counting([float(v) for v in x])
    ry = ranks_by_counting([float(v) for v in y])
    n = len(rx)
    mean = (n + 1) / 2.0
    dx = [r - mean for r in rx]
    dy = [r - mean for r in ry]
    num = float(sum((Fraction(a * b) for a, b in zip(dx, dy)), Fraction(0)))
    sx = float(sum((Fraction(a * a) for a in dx), Fraction(0)))
    sy = float(sum((Fraction(b * b) for b in dy), Fraction(0)))
    return num / math.sqrt(sx * sy)


def grid_minimize_1d(objective, center: float, half_width: float, step: float) -> float:
    """Argmin of a 1-D objective over a regular grid around ``center``."""
    best_x = None
    best_val = math.inf
    k = -int(round(half_width / step))
    k_end = int(round(half_width / step))
    while k <= k_end:
        x = center + k * step
        val = objective(x)
        if val < best_val:
            best_val = val
            best_x = x
        k += 1
    return best_x


def meeus_zenith_deg(ts: datetime, latitude_deg: float, longitude_deg: float) -> float:
    """Solar zenith via Julian centuries (Meeus-style low-precision ephemeris)."""
    ts = ts.astimezone(timezone.utc)
    year, month = ts.year, ts.month
    day = ts.day + ts.hour / 24.0 + ts.minute / 1440.0 + ts.second / 86400.0
    if month <= 2:
        year -= 1
        month += 12
    a = year // 100
    b = 2 - a + a // 4
    jd = int(365.25 * (year + 4716)) + int(30.6001 * (month + 1)) + day + b - 1524.5
    t = (jd - 2451545.0) / 36525.0
    mean_long = (280.46646 + 36000.76983 * t + 0.0003032 * t * t) % 360.0
    mean_anom = math.radians(357.52911 + 35999.05029 * t - 0.0001537 * t * t)
    centre = (
        (1.914602 - 0.004817 * t - 0.000014 * t * t) * math.sin(mean_anom)
        + (0.019993 - 0.000101 * t) * math.sin(2 * mean_anom)
        + 0.000289 * math.sin(3 * mean_anom)
    )
    true_long = mean_long + centre
    omega = math.radians(125.04 - 1934.136 * t)
    app_long = math.radians(true_long - 0.00569 - 0.00478 * math.sin(omega))
    eps0 = 23.0 + (26.0 + (21.448 - t * (46.815 + t * (0.00059 - t * 0.001813))) / 60.0) / 60.0
    eps = math.radians(eps0 + 0.00256 * math.cos(omega))
    decl = math.asin(math.sin(eps) * math.sin(app_long))
    ecc = 0.016708634 - t * (0.000042037 + 0.0000001267 * t)
    y = math.tan(eps / 2.0) ** 2
    l0 = math.radians(mean_long)
    eot_min = 4.0 * math.degrees(
        y * math.sin(2 * l0)
        - 2.0 * ecc * math.sin(mean_anom)
        + 4.0 * ecc * y * math.sin(mean_anom) * math.cos(2 * l0)
        - 0.5 * y * y * math.sin(4 * l0)
        - 1.25 * ecc * ecc * math.sin(2 * mean_anom)
    )
    minutes = ts.hour * 60.0 + ts.minute + ts.second / 60.0
    tst = (minutes + eot_min + 4.0 * longitude_deg) % 1440.0
    hour_angle = math.radians(tst / 4.0 - 180.0 if tst / 4.0 >= 0 else tst / 4.0 + 180.0)
    phi = math.radians(latitude_deg)
    cos_z = math.sin(phi) * math.sin(decl) + math.cos(phi) * math.cos(decl) * math.cos(hour_angle)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos_z))))
