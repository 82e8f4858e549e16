"""Gridded field snapshots and region-of-interest (RoI) extraction.

A field snapshot is one variable sampled on a regular lat/lon grid at one
timestamp. Consecutive snapshots of the same variable yield a residual
field of per-cell squared differences; summing the residuals that clear a
threshold across variables gives each cell's RoI value. Cells with a
positive RoI value become observable events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import OrderingError, ParameterError, StructuralError
from .geo import GeoCoord

__all__ = [
    "ObservationKind",
    "GridSpec",
    "FieldSnapshot",
    "ResidualField",
    "RoIThreshold",
    "RoIEvent",
    "DEFAULT_ROI_THRESHOLD",
    "compute_residual_field",
    "extract_roi_events",
]


class ObservationKind(Enum):
    """Closed set of observable variables."""

    TEMPERATURE = "temperature"
    SALINITY = "salinity"
    CURRENT_U = "current_u"
    CURRENT_V = "current_v"


# canonical summation / serialization order
_KIND_ORDER = {kind: i for i, kind in enumerate(ObservationKind)}


def kind_sort_key(kind: ObservationKind) -> int:
    return _KIND_ORDER[kind]


@dataclass(frozen=True)
class GridSpec:
    """Regular lat/lon grid; cell (i, j) is centred at
    (lat0 + i*d_lat, lon0 + j*d_lon). Values are stored row-major, so the
    flat cell index is i*n_lon + j.
    """

    n_lat: int
    n_lon: int
    lat0: float
    d_lat: float
    lon0: float
    d_lon: float

    def __post_init__(self):
        if self.n_lat < 1 or self.n_lon < 1:
            raise ValueError(f"grid must have at least one cell, got {self.n_lat}x{self.n_lon}")
        if not (self.d_lat > 0.0 and self.d_lon > 0.0):
            raise ValueError(f"grid spacing must be positive, got d_lat={self.d_lat} d_lon={self.d_lon}")
        # corner centres must be legal coordinates; this bounds every cell
        GeoCoord(self.lon0, self.lat0)
        GeoCoord(self.lon_at(self.n_lon - 1), self.lat_at(self.n_lat - 1))

    @property
    def cell_count(self) -> int:
        return self.n_lat * self.n_lon

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_lat, self.n_lon)

    def lat_at(self, i: int) -> float:
        return self.lat0 + i * self.d_lat

    def lon_at(self, j: int) -> float:
        return self.lon0 + j * self.d_lon

    def cell_index(self, i: int, j: int) -> int:
        return i * self.n_lon + j

    def cell_coord(self, index: int) -> GeoCoord:
        """Centre coordinate of a flat cell index."""
        if not 0 <= index < self.cell_count:
            raise ValueError(f"cell index {index} outside grid of {self.cell_count} cells")
        i, j = divmod(index, self.n_lon)
        return GeoCoord(self.lon_at(j), self.lat_at(i))

    def containing_cell(self, coord: GeoCoord) -> int | None:
        """Flat index of the cell whose box contains the coordinate, or None.

        Each cell's box spans half a spacing either side of its centre.
        """
        i = math.floor((coord.lat - (self.lat0 - self.d_lat / 2.0)) / self.d_lat)
        j = math.floor((coord.lon - (self.lon0 - self.d_lon / 2.0)) / self.d_lon)
        if 0 <= i < self.n_lat and 0 <= j < self.n_lon:
            return self.cell_index(i, j)
        return None


def _as_grid_arrays(grid: GridSpec, values, valid):
    vals = np.asarray(values, dtype=np.float64)
    if vals.shape != grid.shape:
        raise StructuralError(f"values shape {vals.shape} does not match grid {grid.shape}")
    if valid is None:
        mask = np.isfinite(vals)
    else:
        mask = np.asarray(valid, dtype=bool)
        if mask.shape != grid.shape:
            raise StructuralError(f"validity mask shape {mask.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(vals[mask])):
        raise StructuralError("non-finite value in a cell marked valid")
    vals = vals.copy()
    vals[~mask] = np.nan
    return vals, mask


@dataclass(eq=False)
class FieldSnapshot:
    """One variable on one grid at one timestamp.

    `values` is an (n_lat, n_lon) float array; cells where `valid` is False
    carry no data and are stored as NaN. Pass valid=None to infer the mask
    from non-finite values.
    """

    timestamp: int
    variable: ObservationKind
    grid: GridSpec
    values: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self):
        self.timestamp = int(self.timestamp)
        self.values, self.valid = _as_grid_arrays(self.grid, self.values, self.valid)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldSnapshot):
            return NotImplemented
        return (
            self.timestamp == other.timestamp
            and self.variable is other.variable
            and self.grid == other.grid
            and np.array_equal(self.valid, other.valid)
            and np.array_equal(self.values[self.valid], other.values[other.valid])
        )


@dataclass(eq=False)
class ResidualField:
    """Per-cell squared differences between two snapshots of one variable."""

    interval: tuple[int, int]
    variable: ObservationKind
    grid: GridSpec
    residuals: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class RoIThreshold:
    """Minimum per-variable residual that counts toward an RoI value."""

    value: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ParameterError(f"threshold must be finite and non-negative, got {self.value}")


DEFAULT_ROI_THRESHOLD = RoIThreshold()


@dataclass(frozen=True)
class RoIEvent:
    """A grid cell whose thresholded residual sum is positive for one interval."""

    cell_index: int
    coord: GeoCoord
    roi_value: float
    residuals: Mapping[ObservationKind, float] = dc_field(default_factory=dict)


def compute_residual_field(earlier: FieldSnapshot, later: FieldSnapshot) -> ResidualField:
    """Squared per-cell change between two snapshots of the same variable.

    A cell is valid only where both inputs are valid; missing data
    propagates. Raises on mismatched variables or grids and on
    non-increasing timestamps.
    """
    if earlier.variable is not later.variable:
        raise StructuralError(
            f"variable mismatch: {earlier.variable.value} vs {later.variable.value}"
        )
    if earlier.grid != later.grid:
        raise StructuralError("snapshots use different grids")
    if not earlier.timestamp < later.timestamp:
        raise OrderingError(
            f"timestamps must increase, got {earlier.timestamp} then {later.timestamp}"
        )
    valid = earlier.valid & later.valid
    diff = later.values - earlier.values
    residuals = diff * diff
    residuals[~valid] = np.nan
    return ResidualField(
        interval=(earlier.timestamp, later.timestamp),
        variable=earlier.variable,
        grid=earlier.grid,
        residuals=residuals,
        valid=valid,
    )


def extract_roi_events(
    residual_fields: Sequence[ResidualField],
    threshold: RoIThreshold = DEFAULT_ROI_THRESHOLD,
    scales: Mapping[ObservationKind, float] | None = None,
) -> list[RoIEvent]:
    """RoI events for one interval from that interval's residual fields.

    Each variable contributes its (optionally scaled) residual where it
    meets the threshold; contributions below the threshold are dropped,
    not clipped. A cell becomes an event iff the summed contribution is
    positive. Variables are summed in their canonical declaration order.

    All inputs must share one grid and one interval; at most one field per
    variable.
    """
    if not residual_fields:
        raise StructuralError("no residual fields given")
    grid = residual_fields[0].grid
    interval = residual_fields[0].interval
    seen: set[ObservationKind] = set()
    for rf in residual_fields:
        if rf.grid != grid:
            raise StructuralError("residual fields use different grids")
        if rf.interval != interval:
            raise StructuralError(f"mixed intervals {interval} and {rf.interval}")
        if rf.variable in seen:
            raise StructuralError(f"duplicate residual field for {rf.variable.value}")
        seen.add(rf.variable)

    ordered = sorted(residual_fields, key=lambda rf: kind_sort_key(rf.variable))
    thr = threshold.value
    total = np.zeros(grid.shape, dtype=np.float64)
    contributions = []
    for rf in ordered:
        scale = 1.0 if scales is None else float(scales.get(rf.variable, 1.0))
        scaled = rf.residuals * scale if scale != 1.0 else rf.residuals
        keep = rf.valid & (scaled >= thr)
        contrib = np.where(keep, scaled, 0.0)
        total = total + contrib
        contributions.append((rf.variable, contrib, keep))

    events: list[RoIEvent] = []
    for flat in np.flatnonzero(total > 0.0):
        idx = int(flat)
        i, j = divmod(idx, grid.n_lon)
        per_var = {
            var: float(contrib[i, j]) for var, contrib, keep in contributions if keep[i, j]
        }
        events.append(
            RoIEvent(
                cell_index=idx,
                coord=grid.cell_coord(idx),
                roi_value=float(total[i, j]),
                residuals=per_var,
            )
        )
    return events
