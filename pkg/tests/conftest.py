import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gstbn.field import GridSpec, ObservationKind
from gstbn.geo import GeoCoord
from gstbn.network import build_temporal_gstbn
from gstbn.synth import Hotspot, ScenarioSpec, scenario_field_series, scenario_sensor_nodes


def make_grid(n_lat=8, n_lon=8, lat0=24.0, d_lat=0.5, lon0=-92.0, d_lon=0.5):
    return GridSpec(n_lat=n_lat, n_lon=n_lon, lat0=lat0, d_lat=d_lat, lon0=lon0, d_lon=d_lon)


def scenario_network(spec: ScenarioSpec, strict=False):
    """Build the network straight from a scenario, no files involved."""
    return build_temporal_gstbn(
        scenario_field_series(spec),
        scenario_sensor_nodes(spec),
        strict_observations=strict,
    )


def random_scenario(rng: np.random.Generator, max_side=10, max_hotspots=3) -> ScenarioSpec:
    """A small random scenario; hotspots are well inside the grid."""
    n_lat = int(rng.integers(3, max_side + 1))
    n_lon = int(rng.integers(3, max_side + 1))
    grid = GridSpec(
        n_lat=n_lat,
        n_lon=n_lon,
        lat0=float(rng.uniform(-40, 40)),
        d_lat=float(rng.uniform(0.2, 0.6)),
        lon0=float(rng.uniform(-150, 100)),
        d_lon=float(rng.uniform(0.2, 0.6)),
    )
    t0 = int(rng.integers(0, 10_000))
    n_ts = int(rng.integers(2, 5))
    timestamps = tuple(t0 + 3600 * k for k in range(n_ts))
    n_intervals = n_ts - 1
    variables = (ObservationKind.TEMPERATURE, ObservationKind.SALINITY)
    hotspots = []
    for _ in range(int(rng.integers(1, max_hotspots + 1))):
        i = int(rng.integers(0, n_lat))
        j = int(rng.integers(0, n_lon))
        n_active = int(rng.integers(1, n_intervals + 1))
        active = rng.choice(n_intervals, size=n_active, replace=False)
        hotspots.append(
            Hotspot(
                center=GeoCoord(grid.lon_at(j), grid.lat_at(i)),
                amplitude=float(rng.uniform(1.1, 3.0)),
                radius_deg=float(rng.uniform(0.3, 1.0)),
                active_intervals=frozenset(int(k) for k in active),
                variable=variables[int(rng.integers(0, 2))],
            )
        )
    sensors = tuple(
        GeoCoord(
            float(rng.uniform(grid.lon0, grid.lon_at(grid.n_lon - 1))),
            float(rng.uniform(grid.lat0, grid.lat_at(grid.n_lat - 1))),
        )
        for _ in range(int(rng.integers(1, 5)))
    )
    return ScenarioSpec(
        grid=grid,
        timestamps=timestamps,
        hotspots=tuple(hotspots),
        sensors=sensors,
        variables=variables,
        background=20.0,
        background_noise_amplitude=float(rng.uniform(0.0, 0.3)),
        seed=int(rng.integers(0, 2**31)),
    )


@pytest.fixture
def small_scenario():
    """Two hotspots, two variables, three intervals, three sensors."""
    grid = make_grid()
    return ScenarioSpec(
        grid=grid,
        timestamps=(0, 3600, 7200, 10800),
        hotspots=(
            Hotspot(
                center=GeoCoord(grid.lon_at(2), grid.lat_at(2)),
                amplitude=2.0,
                radius_deg=0.6,
                active_intervals=frozenset({0, 2}),
                variable=ObservationKind.TEMPERATURE,
            ),
            Hotspot(
                center=GeoCoord(grid.lon_at(6), grid.lat_at(5)),
                amplitude=1.5,
                radius_deg=0.5,
                active_intervals=frozenset({1}),
                variable=ObservationKind.SALINITY,
            ),
        ),
        sensors=(
            GeoCoord(-91.5, 24.5),
            GeoCoord(-89.0, 26.5),
            GeoCoord(-90.0, 25.0),
        ),
        variables=(ObservationKind.TEMPERATURE, ObservationKind.SALINITY),
        background=20.0,
        background_noise_amplitude=0.25,
        seed=7,
    )


@pytest.fixture
def small_network(small_scenario):
    return scenario_network(small_scenario)
