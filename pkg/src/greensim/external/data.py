"""Exogenous data handling: hourly weather and grid carbon-intensity
samples, self-describing CSV fixtures, and assembly of the per-step
exogenous series (midpoint-interpolated) a simulation consumes.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from greensim.climate import ExternalConditions
from greensim.params import ValidationError
from greensim.solar import GreenhouseGeometry, sun_position, transpose_all

WEATHER_MAGIC = "greensim weather fixture v1"
CARBON_MAGIC = "greensim carbon fixture v1"

WEATHER_COLUMNS = ("time", "t_ext_k", "t_app_k", "h_rel_pct", "v_wind_ms",
                   "ghi_wm2", "dni_wm2", "dhi_wm2")
CARBON_COLUMNS = ("time", "intensity_g_per_kwh")


class CoverageError(ValueError):
    """The available samples do not cover the requested window."""


def _parse_utc(text: str) -> datetime:
    dt = datetime.fromisoformat(str(text).replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _iso(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class WeatherSample:
    """One hourly reading, SI units (K, %, m/s, W/m²)."""

    time: datetime
    T_ext: float
    T_app: float
    H_rel: float
    v_wind: float
    ghi: float
    dni: float
    dhi: float

    def __post_init__(self):
        if not 0.0 <= self.H_rel <= 100.0:
            raise ValidationError("H_rel", "must lie in [0, 100] percent")
        for f in ("ghi", "dni", "dhi"):
            if getattr(self, f) < 0:
                raise ValidationError(f, "irradiance must be nonnegative")
        if self.v_wind < 0:
            raise ValidationError("v_wind", "must be nonnegative")


@dataclass(frozen=True)
class CarbonIntensitySample:
    time: datetime
    intensity: float  # gCO2eq/kWh

    def __post_init__(self):
        if self.intensity < 0:
            raise ValidationError("intensity", "must be nonnegative")


def check_irradiance_consistency(s: WeatherSample, latitude: float,
                                 longitude: float) -> list[str]:
    """Sanity band: ghi ≈ dni·cos(zenith) + dhi within 30%. Returns
    human-readable flags; never raises (measurement quirks are common)."""
    sun = sun_position(s.time, latitude, longitude)
    if sun.is_night or s.ghi <= 10.0:
        return []
    implied = s.dni * math.cos(math.radians(sun.zenith)) + s.dhi
    if implied <= 0:
        return []
    ratio = s.ghi / implied
    if not 0.7 <= ratio <= 1.3:
        return [f"{_iso(s.time)}: ghi {s.ghi:.0f} vs dni*cos(z)+dhi "
                f"{implied:.0f} W/m2 (ratio {ratio:.2f})"]
    return []


def _check_hourly(times: list[datetime], what: str) -> None:
    if not times:
        raise CoverageError(f"{what}: no samples")
    for a, b in zip(times, times[1:]):
        gap = (b - a).total_seconds()
        if gap <= 0:
            raise ValidationError("time", f"{what}: non-increasing at {_iso(b)}")
        if gap > 3600.0 + 1e-6:
            raise CoverageError(f"{what}: gap of {gap / 3600.0:.2f} h before {_iso(b)}")


# --- fixture files ---------------------------------------------------------


def _write_fixture(path, magic: str, meta: dict[str, str], columns, rows) -> None:
    buf = io.StringIO()
    buf.write(f"# {magic}\n")
    for key, val in meta.items():
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf)
    w.writerow(columns)
    for row in rows:
        w.writerow(row)
    Path(path).write_text(buf.getvalue())


def _read_fixture(path, magic: str, columns) -> tuple[dict[str, str], list[dict]]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].lstrip("# ").strip() != magic:
        raise ValidationError("fixture", f"{path}: missing header '{magic}'")
    meta = {}
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            stripped = line.lstrip("# ").strip()
            if ":" in stripped and i > 0:
                key, _, val = stripped.partition(":")
                meta[key.strip()] = val.strip()
        else:
            body_start = i
            break
    reader = csv.DictReader(io.StringIO("\n".join(lines[body_start:])))
    if tuple(reader.fieldnames or ()) != tuple(columns):
        raise ValidationError("fixture", f"{path}: expected columns {columns}")
    return meta, list(reader)


def save_weather_fixture(path, samples: list[WeatherSample], latitude: float,
                         longitude: float, source: str = "recorded",
                         retrieved: datetime | None = None) -> None:
    retrieved = retrieved or samples[0].time
    meta = {
        "location": f"{latitude},{longitude}",
        "window": f"{_iso(samples[0].time)}/{_iso(samples[-1].time)}",
        "retrieved": _iso(retrieved),
        "source": source,
    }
    rows = [(_iso(s.time), f"{s.T_ext:.4f}", f"{s.T_app:.4f}", f"{s.H_rel:.3f}",
             f"{s.v_wind:.4f}", f"{s.ghi:.3f}", f"{s.dni:.3f}", f"{s.dhi:.3f}")
            for s in samples]
    _write_fixture(path, WEATHER_MAGIC, meta, WEATHER_COLUMNS, rows)


def load_weather_fixture(path) -> list[WeatherSample]:
    _, rows = _read_fixture(path, WEATHER_MAGIC, WEATHER_COLUMNS)
    samples = [WeatherSample(
        time=_parse_utc(r["time"]), T_ext=float(r["t_ext_k"]),
        T_app=float(r["t_app_k"]), H_rel=float(r["h_rel_pct"]),
        v_wind=float(r["v_wind_ms"]), ghi=float(r["ghi_wm2"]),
        dni=float(r["dni_wm2"]), dhi=float(r["dhi_wm2"])) for r in rows]
    _check_hourly([s.time for s in samples], "weather fixture")
    return samples


def save_carbon_fixture(path, samples: list[CarbonIntensitySample], zone: str,
                        retrieved: datetime | None = None) -> None:
    retrieved = retrieved or samples[0].time
    meta = {
        "zone": zone,
        "window": f"{_iso(samples[0].time)}/{_iso(samples[-1].time)}",
        "retrieved": _iso(retrieved),
    }
    rows = [(_iso(s.time), f"{s.intensity:.3f}") for s in samples]
    _write_fixture(path, CARBON_MAGIC, meta, CARBON_COLUMNS, rows)


def load_carbon_fixture(path) -> list[CarbonIntensitySample]:
    _, rows = _read_fixture(path, CARBON_MAGIC, CARBON_COLUMNS)
    samples = [CarbonIntensitySample(time=_parse_utc(r["time"]),
                                     intensity=float(r["intensity_g_per_kwh"]))
               for r in rows]
    _check_hourly([s.time for s in samples], "carbon fixture")
    return samples


# --- assembly --------------------------------------------------------------


def to_external_conditions(w: WeatherSample, geometry: GreenhouseGeometry,
                           when: datetime, latitude: float, longitude: float,
                           albedo: float = 0.2) -> ExternalConditions:
    """ℝ²⁰ assembly: scalars pass through, POA vectors from the sun position
    at `when` (which may differ from the sample's own stamp when the caller
    has already interpolated the scalar fields)."""
    sun = sun_position(when, latitude, longitude)
    i_dir, i_diff = transpose_all(sun, w.dni, w.dhi, w.ghi, geometry, albedo)
    return ExternalConditions(T_ext=w.T_ext, T_app=w.T_app, v_wind=w.v_wind,
                              H_rel=w.H_rel, I_dir=i_dir, I_diff=i_diff)


def _interp_weather(samples: list[WeatherSample], when: datetime) -> WeatherSample:
    ts = np.array([s.time.timestamp() for s in samples])
    t = when.timestamp()
    if t < ts[0] or t > ts[-1]:
        raise CoverageError(f"weather: {_iso(when)} outside fixture coverage "
                            f"[{_iso(samples[0].time)}, {_iso(samples[-1].time)}]")
    vals = {}
    for name in ("T_ext", "T_app", "H_rel", "v_wind", "ghi", "dni", "dhi"):
        series = np.array([getattr(s, name) for s in samples])
        vals[name] = float(np.interp(t, ts, series))
    vals["H_rel"] = min(100.0, max(0.0, vals["H_rel"]))
    for f in ("ghi", "dni", "dhi", "v_wind"):
        vals[f] = max(0.0, vals[f])
    return WeatherSample(time=when, **vals)


def _interp_carbon(samples: list[CarbonIntensitySample], when: datetime) -> float:
    ts = np.array([s.time.timestamp() for s in samples])
    t = when.timestamp()
    if t < ts[0] or t > ts[-1]:
        raise CoverageError(f"carbon: {_iso(when)} outside fixture coverage "
                            f"[{_iso(samples[0].time)}, {_iso(samples[-1].time)}]")
    vals = np.array([s.intensity for s in samples])
    return float(np.interp(t, ts, vals))


def build_step_series(weather: list[WeatherSample],
                      carbon: list[CarbonIntensitySample],
                      start_time: datetime, sample_time: float, n_steps: int,
                      geometry: GreenhouseGeometry, latitude: float,
                      longitude: float, albedo: float = 0.2,
                      horizon_steps: int = 0,
                      flag_inconsistent: bool = True):
    """Hourly samples → per-step ExternalConditions + carbon intensity.

    Scalars are interpolated linearly and evaluated at each sampling-step
    midpoint; POA irradiance uses the sun position at that midpoint. The
    series covers n_steps + horizon_steps so a receding-horizon controller
    never outruns it. Raises CoverageError on any gap.
    """
    from greensim.simulate import StepSeries

    _check_hourly([s.time for s in weather], "weather")
    _check_hourly([s.time for s in carbon], "carbon")
    if flag_inconsistent:
        flagged = []
        for s in weather:
            flagged += check_irradiance_consistency(s, latitude, longitude)
        if flagged:
            warnings.warn("irradiance consistency flags (not fatal): "
                          + "; ".join(flagged[:5]), stacklevel=2)

    total = n_steps + horizon_steps
    conditions = []
    intensities = np.zeros(total)
    for k in range(total):
        mid = start_time + timedelta(seconds=(k + 0.5) * sample_time)
        w = _interp_weather(weather, mid)
        conditions.append(to_external_conditions(
            w, geometry, mid, latitude, longitude, albedo))
        intensities[k] = _interp_carbon(carbon, mid)
    return StepSeries(conditions=tuple(conditions), intensities=intensities)


def series_for_scenario(config, weather, carbon, geometry=None):
    """build_step_series with everything taken from a ScenarioConfig."""
    from greensim.scenario import NO_CONTROL

    geometry = geometry or config.build_geometry()
    horizon = 0 if config.control == NO_CONTROL else config.control.horizon_steps
    return build_step_series(
        weather, carbon, config.start_time, config.sample_time, config.n_steps,
        geometry, config.latitude, config.longitude, albedo=config.albedo,
        horizon_steps=horizon)
