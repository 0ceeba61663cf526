"""Sun position and plane-of-array irradiance for the greenhouse envelope.

The envelope is always a list of exactly 8 planes; `gable_geometry` builds
the default decomposition (2 roof slopes, 2 long side walls, 2 gable-end
rectangles, 2 gable-end triangles). POA values here are unattenuated —
cover transmissivity is applied later, inside the climate solar-gain term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from greensim.params import ValidationError

N_PLANES = 8

# Fixed, documented surface order for the 8-element POA vectors.
PLANE_ORDER = (
    "roof-a", "roof-b", "side-a", "side-b",
    "end-rect-a", "end-rect-b", "end-tri-a", "end-tri-b",
)


@dataclass(frozen=True)
class Plane:
    """One flat envelope surface."""

    area: float            # m2
    tilt: float            # deg from horizontal, [0, 180]
    azimuth: float         # deg clockwise from north, [0, 360)
    transmissivity: float  # shortwave, [0, 1]

    def __post_init__(self):
        if self.area <= 0:
            raise ValidationError("area", "must be strictly positive")
        if not 0.0 <= self.tilt <= 180.0:
            raise ValidationError("tilt", "must lie in [0, 180] degrees")
        if not 0.0 <= self.azimuth < 360.0:
            raise ValidationError("azimuth", "must lie in [0, 360) degrees")
        if not 0.0 <= self.transmissivity <= 1.0:
            raise ValidationError("transmissivity", "must lie in [0, 1]")


@dataclass(frozen=True)
class GreenhouseGeometry:
    """Envelope surfaces plus the bulk quantities the climate model needs."""

    surfaces: tuple[Plane, ...]
    volume: float           # m3
    cultivated_area: float  # m2
    footprint: float        # m2

    def __post_init__(self):
        if len(self.surfaces) != N_PLANES:
            raise ValidationError("surfaces", f"need exactly {N_PLANES} planes")
        if self.volume <= 0:
            raise ValidationError("volume", "must be strictly positive")
        if self.cultivated_area <= 0:
            raise ValidationError("cultivated_area", "must be strictly positive")
        if self.footprint <= 0:
            raise ValidationError("footprint", "must be strictly positive")
        if self.cultivated_area > self.footprint + 1e-9:
            raise ValidationError("cultivated_area", "exceeds the footprint")

    @property
    def envelope_area(self) -> float:
        return sum(p.area for p in self.surfaces)


@dataclass(frozen=True)
class SunPosition:
    zenith: float   # deg, [0, 180]
    azimuth: float  # deg clockwise from north
    is_night: bool  # zenith >= 90


def gable_geometry(
    length: float = 20.0,
    width: float = 10.0,
    wall_height: float = 3.0,
    ridge_height: float = 5.0,
    cultivated_fraction: float = 0.9,
    transmissivity: float = 0.85,
    orientation: float = 0.0,
) -> GreenhouseGeometry:
    """Standard gable decomposition; orientation 0 puts the ridge north-south.

    Surface order follows PLANE_ORDER: the "a" faces point toward
    90°+orientation (east for orientation 0), "b" faces toward 270°+orientation,
    and the gable ends toward orientation and orientation+180°.
    """
    if ridge_height <= wall_height:
        raise ValidationError("ridge_height", "must exceed wall_height")
    if not 0.0 < cultivated_fraction <= 1.0:
        raise ValidationError("cultivated_fraction", "must lie in (0, 1]")
    rise = ridge_height - wall_height
    half = width / 2.0
    slope_len = math.hypot(half, rise)
    roof_tilt = math.degrees(math.atan2(rise, half))

    def az(offset: float) -> float:
        return (orientation + offset) % 360.0

    tau = transmissivity
    surfaces = (
        Plane(length * slope_len, roof_tilt, az(90.0), tau),    # roof-a
        Plane(length * slope_len, roof_tilt, az(270.0), tau),   # roof-b
        Plane(length * wall_height, 90.0, az(90.0), tau),       # side-a
        Plane(length * wall_height, 90.0, az(270.0), tau),      # side-b
        Plane(width * wall_height, 90.0, az(0.0), tau),         # end-rect-a
        Plane(width * wall_height, 90.0, az(180.0), tau),       # end-rect-b
        Plane(0.5 * width * rise, 90.0, az(0.0), tau),          # end-tri-a
        Plane(0.5 * width * rise, 90.0, az(180.0), tau),        # end-tri-b
    )
    footprint = length * width
    volume = footprint * wall_height + length * 0.5 * width * rise
    return GreenhouseGeometry(
        surfaces=surfaces,
        volume=volume,
        cultivated_area=cultivated_fraction * footprint,
        footprint=footprint,
    )


def _julian_day(when: datetime) -> float:
    if when.tzinfo is None:
        when = when.replace(tzinfo=timezone.utc)
    unix = when.timestamp()
    return unix / 86400.0 + 2440587.5


def sun_position(when: datetime, latitude: float, longitude: float) -> SunPosition:
    """Geometric (unrefracted) solar zenith and azimuth, NOAA almanac method."""
    jd = _julian_day(when)
    jc = (jd - 2451545.0) / 36525.0

    ml = (280.46646 + jc * (36000.76983 + 0.0003032 * jc)) % 360.0
    ma = 357.52911 + jc * (35999.05029 - 0.0001537 * jc)
    ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc)
    ma_r = math.radians(ma)
    eq_center = (
        math.sin(ma_r) * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + math.sin(2 * ma_r) * (0.019993 - 0.000101 * jc)
        + math.sin(3 * ma_r) * 0.000289
    )
    true_long = ml + eq_center
    omega = math.radians(125.04 - 1934.136 * jc)
    app_long = true_long - 0.00569 - 0.00478 * math.sin(omega)

    mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0
    obliq = mean_obliq + 0.00256 * math.cos(omega)
    obliq_r = math.radians(obliq)
    app_long_r = math.radians(app_long)

    decl = math.asin(math.sin(obliq_r) * math.sin(app_long_r))

    var_y = math.tan(obliq_r / 2.0) ** 2
    ml_r = math.radians(ml)
    eq_time = 4.0 * math.degrees(
        var_y * math.sin(2 * ml_r)
        - 2.0 * ecc * math.sin(ma_r)
        + 4.0 * ecc * var_y * math.sin(ma_r) * math.cos(2 * ml_r)
        - 0.5 * var_y * var_y * math.sin(4 * ml_r)
        - 1.25 * ecc * ecc * math.sin(2 * ma_r)
    )  # minutes

    if when.tzinfo is None:
        when = when.replace(tzinfo=timezone.utc)
    utc = when.astimezone(timezone.utc)
    minutes = utc.hour * 60.0 + utc.minute + utc.second / 60.0 + utc.microsecond / 6e7
    tst = (minutes + eq_time + 4.0 * longitude) % 1440.0
    ha = tst / 4.0 - 180.0 if tst / 4.0 >= 0 else tst / 4.0 + 180.0
    if ha < -180.0:
        ha += 360.0
    ha_r = math.radians(ha)

    lat_r = math.radians(latitude)
    cos_zen = math.sin(lat_r) * math.sin(decl) + math.cos(lat_r) * math.cos(decl) * math.cos(ha_r)
    cos_zen = min(1.0, max(-1.0, cos_zen))
    zenith = math.degrees(math.acos(cos_zen))

    sin_zen = math.sin(math.radians(zenith))
    if sin_zen < 1e-9:
        azimuth = 180.0  # sun at the vertical; azimuth degenerate
    else:
        cos_az = (math.sin(lat_r) * cos_zen - math.sin(decl)) / (math.cos(lat_r) * sin_zen)
        cos_az = min(1.0, max(-1.0, cos_az))
        az = math.degrees(math.acos(cos_az))
        azimuth = (az + 180.0) % 360.0 if ha > 0 else (540.0 - az) % 360.0

    return SunPosition(zenith=zenith, azimuth=azimuth, is_night=zenith >= 90.0)


def transpose(
    sun: SunPosition,
    dni: float,
    dhi: float,
    ghi: float,
    albedo: float,
    plane: Plane,
) -> tuple[float, float]:
    """Isotropic-sky transposition of one plane; returns (direct, diffuse) W/m2."""
    tilt_r = math.radians(plane.tilt)
    if sun.is_night:
        return 0.0, 0.0
    zen_r = math.radians(sun.zenith)
    cos_aoi = (
        math.cos(zen_r) * math.cos(tilt_r)
        + math.sin(zen_r) * math.sin(tilt_r) * math.cos(math.radians(sun.azimuth - plane.azimuth))
    )
    direct = dni * max(0.0, cos_aoi)
    diffuse = dhi * (1.0 + math.cos(tilt_r)) / 2.0 + ghi * albedo * (1.0 - math.cos(tilt_r)) / 2.0
    return direct, diffuse


def poa_vector(
    when: datetime,
    dni: float,
    dhi: float,
    ghi: float,
    geometry: GreenhouseGeometry,
    latitude: float,
    longitude: float,
    albedo: float = 0.2,
) -> tuple[np.ndarray, np.ndarray]:
    """POA direct/diffuse for all 8 planes, in PLANE_ORDER."""
    sun = sun_position(when, latitude, longitude)
    return transpose_all(sun, dni, dhi, ghi, geometry, albedo)


def transpose_all(
    sun: SunPosition,
    dni: float,
    dhi: float,
    ghi: float,
    geometry: GreenhouseGeometry,
    albedo: float = 0.2,
) -> tuple[np.ndarray, np.ndarray]:
    direct = np.empty(N_PLANES)
    diffuse = np.empty(N_PLANES)
    for i, plane in enumerate(geometry.surfaces):
        direct[i], diffuse[i] = transpose(sun, dni, dhi, ghi, albedo, plane)
    return direct, diffuse
