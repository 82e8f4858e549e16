"""Coverage, degree centrality and removal robustness.

Coverage is the sum of RoI-to-nearest-sensor distances, so smaller means
the network observes its events from closer by. The temporal variants
aggregate the per-snapshot sums; the average is what placement
optimizes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import ParameterError, StructuralError
from .network import GstbnSnapshot, TemporalGstbn, remove_sensor

__all__ = [
    "CoverageReport",
    "CentralityReport",
    "RobustnessReport",
    "static_coverage",
    "total_temporal_coverage",
    "average_temporal_coverage",
    "coverage_report",
    "degree_centrality",
    "evaluate_robustness",
]


@dataclass(frozen=True)
class CoverageReport:
    per_snapshot: tuple[tuple[int, float], ...]  # (timestamp, static coverage km)
    total_km: float
    average_km: float
    n_timesteps: int


@dataclass(frozen=True)
class CentralityReport:
    static_per_snapshot: dict[int, dict[int, int]]  # timestamp -> sensor id -> degree
    overall: dict[int, int]  # sensor id -> degree summed across snapshots
    distribution: dict[int, int]  # overall degree -> number of sensors


@dataclass(frozen=True)
class RobustnessReport:
    removed_sensor_ids: tuple[int, ...]
    coverage_before_km: float
    coverage_after_km: float
    relative_increase: float


def static_coverage(snapshot: GstbnSnapshot) -> float:
    """Sum of edge weights in one snapshot, in km. Zero when no RoIs fired."""
    return sum(e.weight_km for e in snapshot.edges)


def total_temporal_coverage(net: TemporalGstbn) -> float:
    """Static coverage summed over all snapshots."""
    if not net.snapshots:
        raise StructuralError("network has no snapshots")
    return sum(static_coverage(s) for s in net.snapshots)


def average_temporal_coverage(net: TemporalGstbn) -> float:
    """Total temporal coverage divided by the snapshot count."""
    return total_temporal_coverage(net) / len(net.snapshots)


def coverage_report(net: TemporalGstbn) -> CoverageReport:
    per = tuple((s.timestamp, static_coverage(s)) for s in net.snapshots)
    total = total_temporal_coverage(net)
    return CoverageReport(
        per_snapshot=per,
        total_km=total,
        average_km=total / len(net.snapshots),
        n_timesteps=len(net.snapshots),
    )


def degree_centrality(net: TemporalGstbn) -> CentralityReport:
    """Per-snapshot and overall sensor degrees, plus the degree histogram.

    Every active sensor appears in every snapshot map, degree zero
    included; the histogram counts sensors per overall degree.
    """
    if not net.snapshots:
        raise StructuralError("network has no snapshots")
    static: dict[int, dict[int, int]] = {}
    overall: dict[int, int] = {
        sid: 0 for sid in sorted(net.snapshots[0].sensor_ids)
    }
    for snap in net.snapshots:
        degrees = {sid: 0 for sid in sorted(snap.sensor_ids)}
        for e in snap.edges:
            degrees[e.sensor_id] += 1
        static[snap.timestamp] = degrees
        for sid, d in degrees.items():
            overall[sid] += d
    distribution = dict(sorted(Counter(overall.values()).items()))
    return CentralityReport(
        static_per_snapshot=static, overall=overall, distribution=distribution
    )


def evaluate_robustness(net: TemporalGstbn, k: int = 1) -> RobustnessReport:
    """Coverage impact of losing the k busiest sensors, one at a time.

    Each round deactivates the active sensor with the highest overall
    degree (ties go to the lowest id) and relinks every snapshot before
    picking the next victim. Coverage can only go up when observers
    disappear, so relative_increase is never negative; it is defined as
    zero when there was nothing to cover to begin with.
    """
    n_active = len(net.active_sensors)
    if not 1 <= k < n_active:
        raise ParameterError(
            f"k must be in [1, {n_active - 1}] for {n_active} active sensors, got {k}"
        )
    before = average_temporal_coverage(net)
    current = net
    removed: list[int] = []
    for _ in range(k):
        overall = degree_centrality(current).overall
        victim = min(overall.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        current = remove_sensor(current, victim)
        removed.append(victim)
    after = average_temporal_coverage(current)
    if before == 0.0:
        relative = 0.0 if after == 0.0 else float("inf")
    else:
        relative = after / before - 1.0
    return RobustnessReport(
        removed_sensor_ids=tuple(removed),
        coverage_before_km=before,
        coverage_after_km=after,
        relative_increase=relative,
    )
