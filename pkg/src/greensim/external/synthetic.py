"""Synthetic hourly weather and carbon-intensity series.

Clear-sky irradiance follows the Haurwitz form for global horizontal,
split into beam and diffuse with a simple clearness heuristic. Good
enough to drive simulations and build deterministic fixtures; not a
radiometric model.
"""

from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone

from greensim.external.data import CarbonIntensitySample, WeatherSample
from greensim.solar import sun_position

# Haurwitz clear-sky GHI coefficients
_HAURWITZ_A = 1098.0
_HAURWITZ_B = 0.057


def clear_sky_irradiance(when: datetime, latitude: float, longitude: float,
                         cloudiness: float = 0.0) -> tuple[float, float, float]:
    """(ghi, dni, dhi) in W/m² for a clear to partly cloudy sky.

    cloudiness 0 = clear, 1 = overcast (all diffuse, 30% of clear GHI).
    """
    if not 0.0 <= cloudiness <= 1.0:
        raise ValueError("cloudiness must be within [0, 1]")
    sun = sun_position(when, latitude, longitude)
    if sun.is_night:
        return 0.0, 0.0, 0.0
    cos_z = math.cos(math.radians(sun.zenith))
    ghi_clear = _HAURWITZ_A * cos_z * math.exp(-_HAURWITZ_B / cos_z)
    ghi = ghi_clear * (1.0 - 0.7 * cloudiness)
    # Diffuse fraction rises from ~0.15 (clear) to 1.0 (overcast).
    diffuse_frac = min(1.0, 0.15 + 0.85 * cloudiness)
    dhi = ghi * diffuse_frac
    dni = (ghi - dhi) / cos_z
    return ghi, dni, dhi


def synthetic_weather(start: datetime, hours: int, latitude: float,
                      longitude: float, *, t_mean: float = 283.15,
                      t_swing: float = 5.0, wind_mean: float = 2.0,
                      rh_mean: float = 70.0,
                      cloudiness: float = 0.0) -> list[WeatherSample]:
    """Hourly samples: sinusoidal temperature/wind/humidity + clear-sky sun.

    Temperature peaks at 15:00 local solar time and bottoms at 03:00;
    humidity moves opposite the temperature.
    """
    if hours < 1:
        raise ValueError("hours must be >= 1")
    start = start.astimezone(timezone.utc).replace(minute=0, second=0,
                                                   microsecond=0)
    out = []
    for k in range(hours):
        t = start + timedelta(hours=k)
        solar_hour = (t.hour + t.minute / 60.0 + longitude / 15.0) % 24.0
        phase = math.cos(2.0 * math.pi * (solar_hour - 15.0) / 24.0)
        t_ext = t_mean + t_swing * phase
        rh = min(98.0, max(20.0, rh_mean - 12.0 * phase))
        wind = max(0.2, wind_mean + 0.8 * phase)
        ghi, dni, dhi = clear_sky_irradiance(t, latitude, longitude,
                                             cloudiness)
        out.append(WeatherSample(
            time=t, T_ext=t_ext, T_app=t_ext - 0.6 * wind, H_rel=rh,
            v_wind=wind, ghi=ghi, dni=dni, dhi=dhi))
    return out


def synthetic_carbon(start: datetime, hours: int, *, base: float = 250.0,
                     swing: float = 150.0) -> list[CarbonIntensitySample]:
    """Diurnal grid carbon intensity in g CO2 / kWh.

    Dirtiest near 19:00 UTC (evening peak), cleanest early afternoon
    when solar is on the grid.
    """
    if hours < 1:
        raise ValueError("hours must be >= 1")
    start = start.astimezone(timezone.utc).replace(minute=0, second=0,
                                                   microsecond=0)
    out = []
    for k in range(hours):
        t = start + timedelta(hours=k)
        h = t.hour + t.minute / 60.0
        intensity = base + swing * math.cos(2.0 * math.pi * (h - 19.0) / 24.0)
        out.append(CarbonIntensitySample(time=t, intensity=max(30.0, intensity)))
    return out
