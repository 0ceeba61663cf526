#!/usr/bin/env python3
"""Regenerate the committed weather and carbon-intensity fixtures.

Clear-sky mid-October Bratislava window, wide enough for a 48 h run
plus controller horizon and interpolation margins on both sides.
Deterministic: rerunning produces identical files (modulo the
retrieval timestamp, which is pinned here for that reason).
"""

from datetime import datetime, timezone
from pathlib import Path

from greensim.external import (
    save_carbon_fixture,
    save_weather_fixture,
    synthetic_carbon,
    synthetic_weather,
)

LAT, LON = 48.15, 17.11
ZONE = "SK"
START = datetime(2025, 10, 10, 18, 0, tzinfo=timezone.utc)
HOURS = 67  # through 2025-10-13T12:00Z
PINNED = datetime(2025, 10, 10, 12, 0, tzinfo=timezone.utc)

OUT = Path(__file__).resolve().parents[1] / "src" / "greensim" / "data" / "fixtures"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    weather = synthetic_weather(START, HOURS, LAT, LON,
                                t_mean=278.15, t_swing=4.0,
                                wind_mean=2.0, rh_mean=70.0, cloudiness=0.0)
    carbon = synthetic_carbon(START, HOURS, base=250.0, swing=150.0)
    wpath = OUT / "weather_bratislava_2025-10.csv"
    cpath = OUT / "carbon_sk_2025-10.csv"
    save_weather_fixture(wpath, weather, LAT, LON,
                         source="synthetic-clear-sky", retrieved=PINNED)
    save_carbon_fixture(cpath, carbon, ZONE, retrieved=PINNED)
    print(f"wrote {wpath} ({len(weather)} samples)")
    print(f"wrote {cpath} ({len(carbon)} samples)")


if __name__ == "__main__":
    main()
