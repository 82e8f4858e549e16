"""Bipartite observer/observable network construction.

One side of the bipartite graph holds sensor nodes (persistent across
time), the other holds RoI event nodes (one per grid cell that crossed
the residual threshold in an interval). Every RoI links to its nearest
active sensor by great-circle distance, so each snapshot is a star
forest: RoI degree is exactly one, sensor degree counts assigned RoIs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from enum import Enum
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    NoObserversError,
    NotFoundError,
    OrderingError,
    ParameterError,
    StructuralError,
)
from .field import (
    DEFAULT_ROI_THRESHOLD,
    FieldSnapshot,
    ObservationKind,
    RoIThreshold,
    compute_residual_field,
    extract_roi_events,
    kind_sort_key,
)
from .geo import EARTH, EarthModel, GeoCoord, great_circle_distance

__all__ = [
    "Membership",
    "Mobility",
    "OperationalStatus",
    "SensorNode",
    "RoIEventNode",
    "GstbnEdge",
    "GstbnSnapshot",
    "TemporalGstbn",
    "build_edges",
    "build_temporal_gstbn",
    "add_sensor",
    "remove_sensor",
]


class Membership(Enum):
    FEDERAL = "federal"
    LDN = "ldn"


class Mobility(Enum):
    STATIONARY = "stationary"
    MOBILE = "mobile"


class OperationalStatus(Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"


@dataclass(frozen=True)
class SensorNode:
    """An observing platform from the catalog.

    Mobile sensors are stored with their catalog position and treated as
    stationary when linking. Inactive sensors stay in the catalog but
    never receive edges.
    """

    id: int
    membership: Membership
    data_source: str
    platform: str
    mobility: Mobility
    geolocation: GeoCoord
    operational_status: OperationalStatus
    observations: frozenset[ObservationKind]

    def __post_init__(self):
        object.__setattr__(self, "observations", frozenset(self.observations))
        if self.id < 0:
            raise ParameterError(f"sensor id must be non-negative, got {self.id}")
        if self.is_active and not self.observations:
            raise ParameterError(f"active sensor {self.id} observes nothing")

    @property
    def is_active(self) -> bool:
        return self.operational_status is OperationalStatus.ACTIVE


@dataclass
class RoIEventNode:
    """One grid cell's event node, shared by every interval it fires in.

    `snapshots` maps interval-end timestamp -> {variable -> residual} for
    the variables that cleared the threshold in that interval.
    """

    id: int
    geolocation: GeoCoord
    snapshots: dict[int, dict[ObservationKind, float]] = dc_field(default_factory=dict)

    def __post_init__(self):
        for ts, payload in self.snapshots.items():
            for kind, value in payload.items():
                if not (math.isfinite(value) and value >= 0.0):
                    raise ParameterError(
                        f"roi {self.id} at t={ts} has bad residual {value} for {kind.value}"
                    )

    def roi_value_at(self, timestamp: int) -> float:
        payload = self.snapshots[timestamp]
        return sum(payload[k] for k in sorted(payload, key=kind_sort_key))


@dataclass(frozen=True)
class GstbnEdge:
    roi_id: int
    sensor_id: int
    weight_km: float


@dataclass(frozen=True)
class GstbnSnapshot:
    """The bipartite graph for one interval, keyed by the interval end."""

    timestamp: int
    sensor_ids: frozenset[int]
    roi_ids: frozenset[int]
    edges: tuple[GstbnEdge, ...]

    def __post_init__(self):
        seen_rois = []
        for e in self.edges:
            if e.roi_id not in self.roi_ids:
                raise StructuralError(f"edge references unknown roi {e.roi_id}")
            if e.sensor_id not in self.sensor_ids:
                raise StructuralError(f"edge references unknown sensor {e.sensor_id}")
            if not (math.isfinite(e.weight_km) and e.weight_km >= 0.0):
                raise StructuralError(f"edge weight {e.weight_km} is not a distance")
            seen_rois.append(e.roi_id)
        if self.sensor_ids:
            if len(seen_rois) != len(self.roi_ids) or set(seen_rois) != self.roi_ids:
                raise StructuralError("every roi must link to exactly one sensor")
        if seen_rois != sorted(seen_rois):
            raise StructuralError("edges must be sorted by roi id")


@dataclass(frozen=True)
class TemporalGstbn:
    """Ordered snapshot sequence plus the node sets they reference."""

    snapshots: tuple[GstbnSnapshot, ...]
    sensor_catalog: tuple[SensorNode, ...]
    roi_registry: tuple[RoIEventNode, ...]
    strict_observations: bool = False
    earth: EarthModel = EARTH

    def __post_init__(self):
        times = [s.timestamp for s in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise OrderingError(f"snapshot timestamps must strictly increase, got {times}")
        ids = [s.id for s in self.sensor_catalog]
        if len(set(ids)) != len(ids):
            raise StructuralError("duplicate sensor ids in catalog")
        rids = [r.id for r in self.roi_registry]
        if len(set(rids)) != len(rids):
            raise StructuralError("duplicate roi ids in registry")
        active = frozenset(s.id for s in self.sensor_catalog if s.is_active)
        known_rois = set(rids)
        for snap in self.snapshots:
            if snap.sensor_ids != active:
                raise StructuralError(
                    f"snapshot {snap.timestamp} sensor set differs from the active catalog"
                )
            if not snap.roi_ids <= known_rois:
                raise StructuralError(f"snapshot {snap.timestamp} references unregistered rois")

    @cached_property
    def sensors_by_id(self) -> dict[int, SensorNode]:
        return {s.id: s for s in self.sensor_catalog}

    @cached_property
    def rois_by_id(self) -> dict[int, RoIEventNode]:
        return {r.id: r for r in self.roi_registry}

    @property
    def active_sensors(self) -> list[SensorNode]:
        return [s for s in self.sensor_catalog if s.is_active]

    def snapshot_at(self, timestamp: int) -> GstbnSnapshot:
        for snap in self.snapshots:
            if snap.timestamp == timestamp:
                return snap
        raise NotFoundError(f"no snapshot at timestamp {timestamp}")


# Linear scan is faster than a tree below this many sensors.
_BRUTE_FORCE_MAX = 8
# Shortlist widening, in unit-sphere chord length. Float rounding moves an
# arc distance by well under 1e-7 km, i.e. under 1e-10 chord; anything
# outside this ball can never tie with the minimum.
_CHORD_EPS = 1e-9


def _unit_xyz(lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
    lam = np.radians(lons)
    phi = np.radians(lats)
    return np.column_stack(
        (np.cos(phi) * np.cos(lam), np.cos(phi) * np.sin(lam), np.sin(phi))
    )


class _NearestSensorIndex:
    """Nearest-active-sensor lookup with exact, reproducible tie-breaking.

    Above a small sensor count a KD-tree on unit-sphere points shortlists
    candidates by chord distance (which orders identically to arc
    distance); the final choice always comes from the scalar great-circle
    distance with ties going to the lowest sensor id, so the accelerated
    path returns bit-identical results to a plain double loop.
    """

    def __init__(self, sensors: Sequence[SensorNode], earth: EarthModel):
        if not sensors:
            raise NoObserversError("no active sensors to link against")
        self._sensors = sorted(sensors, key=lambda s: s.id)
        self._earth = earth
        if len(self._sensors) > _BRUTE_FORCE_MAX:
            pts = _unit_xyz(
                np.array([s.geolocation.lon for s in self._sensors]),
                np.array([s.geolocation.lat for s in self._sensors]),
            )
            self._tree = cKDTree(pts)
        else:
            self._tree = None

    def nearest(self, coord: GeoCoord) -> tuple[int, float]:
        """(sensor_id, distance_km) of the closest sensor to `coord`."""
        if self._tree is None:
            candidates = self._sensors
        else:
            pt = _unit_xyz(np.array([coord.lon]), np.array([coord.lat]))[0]
            d0, _ = self._tree.query(pt)
            shortlist = self._tree.query_ball_point(pt, d0 + _CHORD_EPS)
            candidates = [self._sensors[i] for i in sorted(shortlist)]
        best_dist = math.inf
        best_id = -1
        for s in candidates:
            d = great_circle_distance(coord, s.geolocation, self._earth)
            if d < best_dist or (d == best_dist and s.id < best_id):
                best_dist = d
                best_id = s.id
        return best_id, best_dist


def build_edges(
    rois: Sequence[RoIEventNode],
    sensors: Sequence[SensorNode],
    earth: EarthModel = EARTH,
    contributing_kinds: Mapping[int, frozenset[ObservationKind]] | None = None,
) -> tuple[GstbnEdge, ...]:
    """Link every RoI to its nearest sensor; ties go to the lower sensor id.

    With `contributing_kinds` (roi id -> the variables that fired there),
    each RoI only considers sensors observing at least one of its
    variables; without it any sensor qualifies. The returned edges are
    sorted by roi id. An empty sensor list raises, even with no RoIs:
    a network without observers is a caller error, not an empty result.
    """
    if not sensors:
        raise NoObserversError("no active sensors to link against")

    if contributing_kinds is None:
        groups: dict[frozenset[ObservationKind] | None, list[RoIEventNode]] = {None: list(rois)}
    else:
        groups = {}
        for roi in rois:
            kinds = frozenset(contributing_kinds[roi.id])
            groups.setdefault(kinds, []).append(roi)

    edges: list[GstbnEdge] = []
    for kinds, members in groups.items():
        if kinds is None:
            eligible: Sequence[SensorNode] = sensors
        else:
            eligible = [s for s in sensors if s.observations & kinds]
            if not eligible:
                names = ",".join(sorted(k.value for k in kinds))
                raise NoObserversError(f"no active sensor observes any of: {names}")
        index = _NearestSensorIndex(eligible, earth)
        for roi in members:
            sensor_id, dist = index.nearest(roi.geolocation)
            edges.append(GstbnEdge(roi_id=roi.id, sensor_id=sensor_id, weight_km=dist))
    edges.sort(key=lambda e: e.roi_id)
    return tuple(edges)


def _series_intervals(
    series: Mapping[ObservationKind, Sequence[FieldSnapshot]],
) -> tuple[list[int], dict[ObservationKind, list[FieldSnapshot]]]:
    if not series:
        raise StructuralError("no field series given")
    ordered: dict[ObservationKind, list[FieldSnapshot]] = {}
    grid = None
    timestamps: list[int] | None = None
    for kind in sorted(series, key=kind_sort_key):
        snaps = sorted(series[kind], key=lambda s: s.timestamp)
        if len(snaps) < 2:
            raise StructuralError(f"{kind.value} series needs at least 2 timestamps")
        for snap in snaps:
            if snap.variable is not kind:
                raise StructuralError(
                    f"snapshot variable {snap.variable.value} filed under {kind.value}"
                )
            if grid is None:
                grid = snap.grid
            elif snap.grid != grid:
                raise StructuralError("all series must share one grid")
        times = [s.timestamp for s in snaps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise OrderingError(f"{kind.value} series has non-increasing timestamps")
        if timestamps is None:
            timestamps = times
        elif times != timestamps:
            raise StructuralError("all variables must cover the same timestamps")
        ordered[kind] = snaps
    assert timestamps is not None
    return timestamps, ordered


def build_temporal_gstbn(
    series: Mapping[ObservationKind, Sequence[FieldSnapshot]],
    catalog: Sequence[SensorNode],
    threshold: RoIThreshold = DEFAULT_ROI_THRESHOLD,
    earth: EarthModel = EARTH,
    strict_observations: bool = False,
) -> TemporalGstbn:
    """Construct the full temporal network from field series and a catalog.

    Each consecutive timestamp pair becomes one snapshot keyed by the
    interval end. RoI nodes are keyed by grid cell, so a cell firing in
    several intervals reuses one node id; ids are assigned in first-firing
    order. With `strict_observations`, RoIs only link to sensors that
    observe at least one variable that fired there.
    """
    catalog = tuple(catalog)
    if not catalog:
        raise NoObserversError("sensor catalog is empty")
    ids = [s.id for s in catalog]
    if len(set(ids)) != len(ids):
        raise StructuralError("duplicate sensor ids in catalog")
    actives = [s for s in catalog if s.is_active]
    if not actives:
        raise NoObserversError("no active sensors in catalog")

    timestamps, ordered = _series_intervals(series)

    by_cell: dict[int, RoIEventNode] = {}
    next_roi_id = 1
    snapshots: list[GstbnSnapshot] = []
    active_ids = frozenset(s.id for s in actives)
    for k in range(len(timestamps) - 1):
        t_end = timestamps[k + 1]
        residual_fields = [
            compute_residual_field(snaps[k], snaps[k + 1]) for snaps in ordered.values()
        ]
        events = extract_roi_events(residual_fields, threshold)
        interval_rois: list[RoIEventNode] = []
        for event in events:
            node = by_cell.get(event.cell_index)
            if node is None:
                node = RoIEventNode(id=next_roi_id, geolocation=event.coord)
                next_roi_id += 1
                by_cell[event.cell_index] = node
            node.snapshots[t_end] = dict(event.residuals)
            interval_rois.append(node)
        contributing = None
        if strict_observations:
            contributing = {
                node.id: frozenset(node.snapshots[t_end]) for node in interval_rois
            }
        edges = build_edges(interval_rois, actives, earth, contributing_kinds=contributing)
        snapshots.append(
            GstbnSnapshot(
                timestamp=t_end,
                sensor_ids=active_ids,
                roi_ids=frozenset(n.id for n in interval_rois),
                edges=edges,
            )
        )

    registry = tuple(sorted(by_cell.values(), key=lambda n: n.id))
    return TemporalGstbn(
        snapshots=tuple(snapshots),
        sensor_catalog=catalog,
        roi_registry=registry,
        strict_observations=strict_observations,
        earth=earth,
    )


def _rebuild_snapshots(
    net: TemporalGstbn, catalog: tuple[SensorNode, ...]
) -> tuple[GstbnSnapshot, ...]:
    actives = [s for s in catalog if s.is_active]
    if not actives:
        raise NoObserversError("removal would leave no active sensors")
    active_ids = frozenset(s.id for s in actives)
    rebuilt = []
    for snap in net.snapshots:
        rois = [net.rois_by_id[rid] for rid in sorted(snap.roi_ids)]
        contributing = None
        if net.strict_observations:
            contributing = {
                r.id: frozenset(r.snapshots[snap.timestamp]) for r in rois
            }
        edges = build_edges(rois, actives, net.earth, contributing_kinds=contributing)
        rebuilt.append(
            GstbnSnapshot(
                timestamp=snap.timestamp,
                sensor_ids=active_ids,
                roi_ids=snap.roi_ids,
                edges=edges,
            )
        )
    return tuple(rebuilt)


def add_sensor(net: TemporalGstbn, coord: GeoCoord) -> TemporalGstbn:
    """New network with a synthetic active sensor at `coord`.

    The sensor gets a fresh id above every catalog id and observes all
    variables, so it is eligible for every RoI even under strict
    matching. Edges are recomputed in every snapshot; no snapshot's
    coverage can increase.
    """
    fresh_id = max((s.id for s in net.sensor_catalog), default=0) + 1
    sensor = SensorNode(
        id=fresh_id,
        membership=Membership.LDN,
        data_source="synthetic",
        platform=f"candidate-{fresh_id}",
        mobility=Mobility.STATIONARY,
        geolocation=coord,
        operational_status=OperationalStatus.ACTIVE,
        observations=frozenset(ObservationKind),
    )
    catalog = net.sensor_catalog + (sensor,)
    return TemporalGstbn(
        snapshots=_rebuild_snapshots(net, catalog),
        sensor_catalog=catalog,
        roi_registry=net.roi_registry,
        strict_observations=net.strict_observations,
        earth=net.earth,
    )


def remove_sensor(net: TemporalGstbn, sensor_id: int) -> TemporalGstbn:
    """New network with the given sensor deactivated and edges recomputed.

    The sensor stays in the catalog for reporting; it just stops
    receiving edges. Removing the last active sensor is refused.
    """
    target = net.sensors_by_id.get(sensor_id)
    if target is None:
        raise NotFoundError(f"no sensor with id {sensor_id}")
    if not target.is_active:
        raise ParameterError(f"sensor {sensor_id} is already inactive")
    catalog = tuple(
        replace(s, operational_status=OperationalStatus.INACTIVE) if s.id == sensor_id else s
        for s in net.sensor_catalog
    )
    return TemporalGstbn(
        snapshots=_rebuild_snapshots(net, catalog),
        sensor_catalog=catalog,
        roi_registry=net.roi_registry,
        strict_observations=net.strict_observations,
        earth=net.earth,
    )
