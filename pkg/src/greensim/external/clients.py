"""HTTP clients for hourly weather and grid carbon intensity.

Offline-first: without a base URL (or with GREENSIM_OFFLINE set) the
clients read committed fixture files and never open a socket. Live
responses are normalized to SI units at this boundary and cached as
fixture files, write-once per window.
"""

from __future__ import annotations

import os
import time
from datetime import datetime, timedelta, timezone
from pathlib import Path

from greensim.external.data import (
    CarbonIntensitySample,
    CoverageError,
    WeatherSample,
    _check_hourly,
    _iso,
    _parse_utc,
    load_carbon_fixture,
    load_weather_fixture,
    save_carbon_fixture,
    save_weather_fixture,
)

ENV_OFFLINE = "GREENSIM_OFFLINE"
ENV_WEATHER_URL = "GREENSIM_WEATHER_URL"
ENV_CARBON_URL = "GREENSIM_CARBON_URL"
ENV_CARBON_TOKEN = "GREENSIM_CARBON_TOKEN"

RETRIES = 3
BACKOFF_S = 1.0


class FetchError(RuntimeError):
    """Live fetch failed after retries, or the response didn't validate."""


class UnsupportedZoneError(FetchError):
    """The carbon-intensity provider has no data for the requested zone."""


def _offline(explicit: bool | None) -> bool:
    if explicit is not None:
        return explicit
    return os.environ.get(ENV_OFFLINE, "").lower() in ("1", "true", "yes")


def _window_hours(start: datetime, end: datetime) -> list[datetime]:
    if end < start:
        raise ValueError("window end precedes start")
    start = start.astimezone(timezone.utc).replace(minute=0, second=0, microsecond=0)
    hours = [start]
    while hours[-1] < end:
        hours.append(hours[-1] + timedelta(hours=1))
    return hours


def _get_json(url: str, params: dict, headers: dict | None = None) -> dict:
    import requests

    last: Exception | None = None
    for attempt in range(RETRIES):
        try:
            resp = requests.get(url, params=params, headers=headers or {}, timeout=30)
            if resp.status_code == 404:
                raise UnsupportedZoneError(f"{url}: no data (HTTP 404)")
            resp.raise_for_status()
            return resp.json()
        except UnsupportedZoneError:
            raise
        except Exception as exc:  # noqa: BLE001 - retried, then surfaced
            last = exc
            if attempt < RETRIES - 1:
                time.sleep(BACKOFF_S * 2 ** attempt)
    raise FetchError(f"fetch failed after {RETRIES} attempts: {last}")


def _cache_path(cache_dir, kind: str, key: str) -> Path | None:
    if cache_dir is None:
        return None
    d = Path(cache_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / f"{kind}_{key}.csv"


def _slice_window(samples, start: datetime, end: datetime, what: str):
    # Bracket the window: last sample at/before start .. first at/after end,
    # so interpolation anywhere inside [start, end] has both neighbours.
    lo = [s for s in samples if s.time <= start]
    hi = [s for s in samples if s.time >= end]
    if not lo:
        raise CoverageError(f"{what}: data does not cover {_iso(start)}")
    if not hi:
        raise CoverageError(f"{what}: data does not cover {_iso(end)}")
    out = [s for s in samples if lo[-1].time <= s.time <= hi[0].time]
    _check_hourly([s.time for s in out], what)
    return out


def fetch_weather(latitude: float, longitude: float, start: datetime,
                  end: datetime, *, fixture=None, cache_dir=None,
                  base_url: str | None = None,
                  offline: bool | None = None) -> list[WeatherSample]:
    """Hourly weather covering [start, end] inclusive.

    Offline (default without a base URL): read `fixture` and slice the
    window; a gap is a CoverageError naming the first missing timestamp.
    Live: GET base_url with an hourly-fields query, normalize units
    (°C→K, km/h→m/s), validate coverage, and cache to `cache_dir`.
    """
    base_url = base_url or os.environ.get(ENV_WEATHER_URL)
    if _offline(offline) or base_url is None:
        if fixture is None:
            raise CoverageError("weather: offline and no fixture given")
        return _slice_window(load_weather_fixture(fixture), start, end, "weather")

    hours = _window_hours(start, end)
    key = (f"{latitude:.4f}_{longitude:.4f}_{hours[0]:%Y%m%d%H}"
           f"_{hours[-1]:%Y%m%d%H}")
    cached = _cache_path(cache_dir, "weather", key)
    if cached is not None and cached.exists():
        return load_weather_fixture(cached)

    payload = _get_json(base_url, params={
        "latitude": latitude, "longitude": longitude,
        "start_hour": _iso(hours[0]), "end_hour": _iso(hours[-1]),
        "hourly": ",".join(["temperature_2m", "apparent_temperature",
                            "relative_humidity_2m", "wind_speed_10m",
                            "shortwave_radiation", "direct_normal_irradiance",
                            "diffuse_radiation"]),
        "timezone": "UTC",
    })
    try:
        h = payload["hourly"]
        times = [_parse_utc(t) for t in h["time"]]
        samples = [WeatherSample(
            time=t,
            T_ext=float(h["temperature_2m"][i]) + 273.15,
            T_app=float(h["apparent_temperature"][i]) + 273.15,
            H_rel=float(h["relative_humidity_2m"][i]),
            v_wind=float(h["wind_speed_10m"][i]) / 3.6,
            ghi=max(0.0, float(h["shortwave_radiation"][i])),
            dni=max(0.0, float(h["direct_normal_irradiance"][i])),
            dhi=max(0.0, float(h["diffuse_radiation"][i])),
        ) for i, t in enumerate(times)]
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise FetchError(f"weather response schema mismatch: {exc}")
    samples = _slice_window(samples, hours[0], hours[-1], "weather")
    if cached is not None and not cached.exists():
        save_weather_fixture(cached, samples, latitude, longitude,
                             source=base_url,
                             retrieved=datetime.now(timezone.utc))
    return samples


def fetch_carbon_intensity(zone: str, start: datetime, end: datetime, *,
                           fixture=None, cache_dir=None,
                           base_url: str | None = None,
                           offline: bool | None = None
                           ) -> list[CarbonIntensitySample]:
    """Hourly grid carbon intensity for a zone over [start, end] inclusive."""
    base_url = base_url or os.environ.get(ENV_CARBON_URL)
    if _offline(offline) or base_url is None:
        if fixture is None:
            raise CoverageError("carbon: offline and no fixture given")
        return _slice_window(load_carbon_fixture(fixture), start, end, "carbon")

    hours = _window_hours(start, end)
    key = f"{zone}_{hours[0]:%Y%m%d%H}_{hours[-1]:%Y%m%d%H}"
    cached = _cache_path(cache_dir, "carbon", key)
    if cached is not None and cached.exists():
        return load_carbon_fixture(cached)

    headers = {}
    token = os.environ.get(ENV_CARBON_TOKEN)
    if token:
        headers["auth-token"] = token
    payload = _get_json(base_url, params={
        "zone": zone, "start": _iso(hours[0]), "end": _iso(hours[-1]),
    }, headers=headers)
    try:
        rows = payload.get("history", payload.get("forecast"))
        if rows is None:
            raise KeyError("history/forecast")
        samples = [CarbonIntensitySample(
            time=_parse_utc(r["datetime"]),
            intensity=float(r["carbonIntensity"])) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise FetchError(f"carbon response schema mismatch: {exc}")
    if not samples:
        raise UnsupportedZoneError(f"carbon: zone {zone!r} returned no data")
    samples.sort(key=lambda s: s.time)
    samples = _slice_window(samples, hours[0], hours[-1], "carbon")
    if cached is not None and not cached.exists():
        save_carbon_fixture(cached, samples, zone,
                            retrieved=datetime.now(timezone.utc))
    return samples
