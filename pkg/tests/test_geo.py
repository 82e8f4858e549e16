import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gstbn.geo import (
    EARTH,
    EarthModel,
    GeoCoord,
    great_circle_distance,
    law_of_cosines_distance,
)
from oracles import reference_distance_km

GULF_A = GeoCoord(-90.07, 29.95)
GULF_B = GeoCoord(-82.46, 27.95)

# frozen from the high-precision reference in oracles.py
GULF_DISTANCE_KM = 772.9404024552701

coords = st.builds(
    GeoCoord,
    st.floats(min_value=-180.0, max_value=180.0),
    st.floats(min_value=-90.0, max_value=90.0),
)


class TestGeoCoord:
    def test_valid_construction(self):
        c = GeoCoord(-90.07, 29.95)
        assert c.lon == -90.07 and c.lat == 29.95

    @pytest.mark.parametrize(
        "lon,lat",
        [(-180.1, 0.0), (180.1, 0.0), (0.0, 90.5), (0.0, -91.0),
         (float("nan"), 0.0), (0.0, float("inf"))],
    )
    def test_rejects_bad_coordinates(self, lon, lat):
        with pytest.raises(ValueError):
            GeoCoord(lon, lat)

    def test_boundary_values_allowed(self):
        GeoCoord(-180.0, -90.0)
        GeoCoord(180.0, 90.0)


class TestEarthModel:
    def test_default_radius(self):
        assert EARTH.radius_km == 6371.0090667

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            EarthModel(radius_km=0.0)
        with pytest.raises(ValueError):
            EarthModel(radius_km=float("nan"))


class TestGreatCircleDistance:
    def test_gulf_pair_matches_reference(self):
        d = great_circle_distance(GULF_A, GULF_B)
        assert d == pytest.approx(GULF_DISTANCE_KM, rel=1e-6)

    def test_identity_is_exactly_zero(self):
        assert great_circle_distance(GULF_A, GULF_A) == 0.0

    def test_antipodal_equator_is_exactly_half_circumference(self):
        d = great_circle_distance(GeoCoord(0.0, 0.0), GeoCoord(180.0, 0.0))
        assert d == math.pi * EARTH.radius_km

    def test_matches_reference_on_random_pairs(self):
        rng = np.random.default_rng(1234)
        for _ in range(300):
            a = GeoCoord(float(rng.uniform(-180, 180)), float(rng.uniform(-90, 90)))
            b = GeoCoord(float(rng.uniform(-180, 180)), float(rng.uniform(-90, 90)))
            got = great_circle_distance(a, b)
            want = reference_distance_km(a.lon, a.lat, b.lon, b.lat)
            assert got == pytest.approx(want, rel=1e-6, abs=1e-9)

    def test_agrees_with_law_of_cosines_beyond_1km(self):
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 200:
            a = GeoCoord(float(rng.uniform(-180, 180)), float(rng.uniform(-85, 85)))
            b = GeoCoord(float(rng.uniform(-180, 180)), float(rng.uniform(-85, 85)))
            hav = great_circle_distance(a, b)
            if hav <= 1.0:
                continue
            assert abs(hav - law_of_cosines_distance(a, b)) < 1e-6
            checked += 1

    def test_scales_with_radius(self):
        small = EarthModel(radius_km=1.0)
        d_unit = great_circle_distance(GULF_A, GULF_B, small)
        d_earth = great_circle_distance(GULF_A, GULF_B)
        assert d_earth == pytest.approx(d_unit * EARTH.radius_km, rel=1e-12)

    @given(a=coords, b=coords)
    @settings(max_examples=200, deadline=None)
    def test_symmetry_exact(self, a, b):
        assert great_circle_distance(a, b) == great_circle_distance(b, a)

    @given(a=coords, b=coords)
    @settings(max_examples=200, deadline=None)
    def test_range(self, a, b):
        d = great_circle_distance(a, b)
        assert 0.0 <= d <= math.pi * EARTH.radius_km

    @given(a=coords, b=coords, c=coords)
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, a, b, c):
        ab = great_circle_distance(a, b)
        bc = great_circle_distance(b, c)
        ac = great_circle_distance(a, c)
        assert ac <= ab + bc + 1e-9

    @given(a=coords)
    @settings(max_examples=100, deadline=None)
    def test_identity_property(self, a):
        assert great_circle_distance(a, a) == 0.0
