"""Exogenous data: weather and grid carbon intensity.

Fixture-backed by default (no network); live HTTP clients normalize
units at the boundary and cache what they fetch.
"""

from greensim.external.clients import (
    FetchError,
    UnsupportedZoneError,
    fetch_carbon_intensity,
    fetch_weather,
)
from greensim.external.data import (
    CarbonIntensitySample,
    CoverageError,
    WeatherSample,
    build_step_series,
    check_irradiance_consistency,
    load_carbon_fixture,
    load_weather_fixture,
    save_carbon_fixture,
    save_weather_fixture,
    series_for_scenario,
    to_external_conditions,
)
from greensim.external.synthetic import (
    clear_sky_irradiance,
    synthetic_carbon,
    synthetic_weather,
)

__all__ = [
    "CarbonIntensitySample",
    "CoverageError",
    "FetchError",
    "UnsupportedZoneError",
    "WeatherSample",
    "build_step_series",
    "check_irradiance_consistency",
    "clear_sky_irradiance",
    "fetch_carbon_intensity",
    "fetch_weather",
    "load_carbon_fixture",
    "load_weather_fixture",
    "save_carbon_fixture",
    "save_weather_fixture",
    "series_for_scenario",
    "synthetic_carbon",
    "synthetic_weather",
    "to_external_conditions",
]
