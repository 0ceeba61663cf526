"""Sun position, gable envelope decomposition, and isotropic-sky transposition."""
import math
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from greensim.params import ValidationError
from greensim.solar import (
    N_PLANES,
    PLANE_ORDER,
    GreenhouseGeometry,
    Plane,
    SunPosition,
    gable_geometry,
    sun_position,
    transpose,
    transpose_all,
)

UTC = timezone.utc


# ---------------------------------------------------------------------------
# sun position


class TestSunPosition:
    def test_equinox_noon_at_equator_is_overhead(self):
        # solar noon on the March 2025 equinox at (0, 0)
        sp = sun_position(datetime(2025, 3, 20, 12, 7, tzinfo=UTC), 0.0, 0.0)
        assert sp.zenith < 1.0
        assert not sp.is_night

    def test_bratislava_october_noon(self):
        # frozen third-party reference for 2025-10-11 12:00 UTC: zenith 58.2038
        sp = sun_position(datetime(2025, 10, 11, 12, 0, tzinfo=UTC), 48.15, 17.11)
        assert abs(sp.zenith - 58.2038) < 1.0
        # early afternoon local solar time, sun just past due south
        assert 180.0 < sp.azimuth < 220.0

    def test_midnight_is_night(self):
        sp = sun_position(datetime(2025, 10, 11, 0, 0, tzinfo=UTC), 48.15, 17.11)
        assert sp.is_night
        assert sp.zenith > 90.0

    def test_naive_datetime_treated_as_utc(self):
        naive = sun_position(datetime(2025, 10, 11, 12, 0), 48.15, 17.11)
        aware = sun_position(datetime(2025, 10, 11, 12, 0, tzinfo=UTC), 48.15, 17.11)
        assert naive == aware


# ---------------------------------------------------------------------------
# gable envelope


class TestGableGeometry:
    def test_default_bulk_quantities(self):
        g = gable_geometry()
        assert g.footprint == pytest.approx(200.0)
        assert g.volume == pytest.approx(800.0)
        assert g.cultivated_area == pytest.approx(180.0)

    def test_default_envelope_area(self):
        # 2 roofs 20*sqrt(29), 2 sides 20*3, 2 rect ends 10*3, 2 tri ends 10
        g = gable_geometry()
        want = 2 * 20.0 * math.sqrt(29.0) + 2 * 60.0 + 2 * 30.0 + 2 * 10.0
        assert g.envelope_area == pytest.approx(want, rel=1e-12)

    def test_plane_count_and_order(self):
        g = gable_geometry()
        assert len(g.surfaces) == N_PLANES == len(PLANE_ORDER) == 8

    def test_roof_tilt_from_pitch(self):
        # rise 2 m over 5 m half-span
        g = gable_geometry()
        want = math.degrees(math.atan2(2.0, 5.0))
        assert g.surfaces[0].tilt == pytest.approx(want)
        assert g.surfaces[1].tilt == pytest.approx(want)

    def test_walls_are_vertical(self):
        g = gable_geometry()
        for idx in (2, 3, 4, 5, 6, 7):
            assert g.surfaces[idx].tilt == pytest.approx(90.0)

    def test_orientation_rotates_azimuths(self):
        base = gable_geometry()
        rot = gable_geometry(orientation=30.0)
        for a, b in zip(base.surfaces, rot.surfaces):
            assert b.azimuth == pytest.approx((a.azimuth + 30.0) % 360.0)

    def test_ridge_must_exceed_wall(self):
        with pytest.raises(ValidationError, match="ridge_height"):
            gable_geometry(wall_height=3.0, ridge_height=3.0)

    def test_cultivated_fraction_bounds(self):
        with pytest.raises(ValidationError):
            gable_geometry(cultivated_fraction=1.5)

    def test_volume_scales_with_length(self):
        assert gable_geometry(length=40.0).volume == pytest.approx(1600.0)


class TestGeometryValidation:
    def test_plane_rejects_bad_tilt(self):
        with pytest.raises(ValidationError, match="tilt"):
            Plane(area=1.0, tilt=200.0, azimuth=0.0, transmissivity=0.9)

    def test_plane_rejects_zero_area(self):
        with pytest.raises(ValidationError, match="area"):
            Plane(area=0.0, tilt=0.0, azimuth=0.0, transmissivity=0.9)

    def test_geometry_needs_eight_planes(self):
        p = Plane(area=1.0, tilt=0.0, azimuth=0.0, transmissivity=0.9)
        with pytest.raises(ValidationError, match="surfaces"):
            GreenhouseGeometry(surfaces=(p,), volume=1.0,
                               cultivated_area=1.0, footprint=2.0)

    def test_cultivated_cannot_exceed_footprint(self):
        g = gable_geometry()
        with pytest.raises(ValidationError):
            GreenhouseGeometry(surfaces=g.surfaces, volume=g.volume,
                               cultivated_area=250.0, footprint=200.0)


# ---------------------------------------------------------------------------
# transposition


def plane(tilt, azimuth=180.0):
    return Plane(area=10.0, tilt=tilt, azimuth=azimuth, transmissivity=0.85)


class TestTranspose:
    def test_night_is_dark(self):
        sun = SunPosition(zenith=100.0, azimuth=0.0, is_night=True)
        assert transpose(sun, 800.0, 100.0, 500.0, 0.2, plane(30.0)) == (0.0, 0.0)

    def test_horizontal_plane_sees_full_sky(self):
        sun = SunPosition(zenith=60.0, azimuth=180.0, is_night=False)
        direct, diffuse = transpose(sun, 0.0, 100.0, 200.0, 0.2, plane(0.0))
        assert direct == 0.0
        assert diffuse == pytest.approx(100.0)

    def test_vertical_plane_half_sky_plus_ground(self):
        # dhi/2 + ghi*albedo/2 = 50 + 20
        sun = SunPosition(zenith=60.0, azimuth=180.0, is_night=False)
        _, diffuse = transpose(sun, 0.0, 100.0, 200.0, 0.2, plane(90.0))
        assert diffuse == pytest.approx(70.0)

    def test_horizontal_direct_is_dni_cos_zenith(self):
        sun = SunPosition(zenith=60.0, azimuth=123.0, is_night=False)
        direct, _ = transpose(sun, 800.0, 0.0, 0.0, 0.2, plane(0.0))
        assert direct == pytest.approx(800.0 * math.cos(math.radians(60.0)))

    def test_plane_facing_away_gets_no_beam(self):
        sun = SunPosition(zenith=60.0, azimuth=180.0, is_night=False)
        direct, _ = transpose(sun, 800.0, 0.0, 0.0, 0.2, plane(90.0, azimuth=0.0))
        assert direct == 0.0

    @given(
        st.floats(0.0, 89.0),
        st.floats(0.0, 359.9),
        st.floats(0.0, 180.0),
        st.floats(0.0, 359.9),
        st.floats(0.0, 1000.0),
        st.floats(0.0, 500.0),
        st.floats(0.0, 1000.0),
    )
    def test_components_never_negative(self, zen, sun_az, tilt, plane_az,
                                       dni, dhi, ghi):
        sun = SunPosition(zenith=zen, azimuth=sun_az, is_night=False)
        direct, diffuse = transpose(sun, dni, dhi, ghi, 0.2,
                                    plane(tilt, azimuth=plane_az))
        assert direct >= 0.0
        assert diffuse >= 0.0


class TestTransposeAll:
    def test_night_all_zero(self):
        g = gable_geometry()
        sun = SunPosition(zenith=95.0, azimuth=0.0, is_night=True)
        direct, diffuse = transpose_all(sun, 800.0, 100.0, 500.0, g)
        assert not direct.any()
        assert not diffuse.any()

    def test_southern_sun_hits_symmetric_pairs_equally(self):
        # sun due south, ridge north-south: east and west faces match
        g = gable_geometry()
        sun = SunPosition(zenith=40.0, azimuth=180.0, is_night=False)
        direct, diffuse = transpose_all(sun, 800.0, 100.0, 600.0, g)
        by = dict(zip(PLANE_ORDER, direct))
        assert by["roof-a"] == pytest.approx(by["roof-b"])
        assert by["side-a"] == pytest.approx(by["side-b"])
        # the gable ends share tilt and azimuth with their rectangle
        assert by["end-tri-a"] == pytest.approx(by["end-rect-a"])
        # exactly one end faces the sun
        assert (by["end-rect-a"] > 0.0) != (by["end-rect-b"] > 0.0)
        assert all(v >= 0.0 for v in diffuse)

    def test_shapes(self):
        g = gable_geometry()
        sun = SunPosition(zenith=40.0, azimuth=180.0, is_night=False)
        direct, diffuse = transpose_all(sun, 800.0, 100.0, 600.0, g)
        assert direct.shape == (8,) and diffuse.shape == (8,)
