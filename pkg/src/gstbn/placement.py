"""Monte Carlo sensor placement.

The objective is average temporal coverage: candidates are drawn
uniformly over a bounding box (optionally masked to admissible grid
cells) and the draw with the lowest resulting coverage wins.

Determinism contract: trial i draws from a generator seeded by
(seed, i), so any prefix of trials is reproducible regardless of how
many trials follow or how many workers evaluate them; the winner is the
lowest (score, trial_index) pair. Trial scores reuse each RoI's current
nearest-sensor distance, so one trial costs one distance per RoI node
instead of a network rebuild, and matches the rebuild bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StructuralError
from .field import GridSpec
from .geo import EarthModel, GeoCoord, great_circle_distance
from .metrics import average_temporal_coverage
from .network import TemporalGstbn, add_sensor

__all__ = [
    "SearchDomain",
    "TrialRecord",
    "PlacedSensor",
    "PlacementResult",
    "derive_seed",
    "candidate_score",
    "monte_carlo_place",
    "place_sequential",
]

# A draw streak this long without hitting an admissible cell means the
# mask and bounding box do not overlap in any practical sense.
_MAX_REJECTS = 100_000


@dataclass(frozen=True, eq=False)
class SearchDomain:
    """Bounding box for candidate draws, with an optional cell mask.

    When a mask is present, a draw only counts if it falls in a cell
    marked True; rejected draws are redrawn and do not consume the trial
    budget.
    """

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float
    mask_grid: GridSpec | None = None
    mask: np.ndarray | None = None

    def __post_init__(self):
        for v in (self.lon_min, self.lon_max, self.lat_min, self.lat_max):
            if not math.isfinite(v):
                raise ParameterError(f"domain bound {v} is not finite")
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise ParameterError("domain bounds must satisfy min < max on both axes")
        try:
            GeoCoord(self.lon_min, self.lat_min)
            GeoCoord(self.lon_max, self.lat_max)
        except ValueError as exc:
            raise ParameterError(str(exc)) from None
        if (self.mask is None) != (self.mask_grid is None):
            raise StructuralError("mask and mask_grid must be given together")
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != self.mask_grid.shape:
                raise StructuralError(
                    f"mask shape {m.shape} does not match grid {self.mask_grid.shape}"
                )
            if not m.any():
                raise StructuralError("mask admits no cells")
            object.__setattr__(self, "mask", m)

    @classmethod
    def from_grid(cls, grid: GridSpec, valid: np.ndarray | None = None) -> "SearchDomain":
        """Domain covering the grid's footprint (cell boxes, not centres).

        `valid` marks admissible cells; omit it, or pass an all-True
        array, for an unmasked domain.
        """
        lat_lo = max(-90.0, grid.lat0 - grid.d_lat / 2.0)
        lat_hi = min(90.0, grid.lat_at(grid.n_lat - 1) + grid.d_lat / 2.0)
        lon_lo = max(-180.0, grid.lon0 - grid.d_lon / 2.0)
        lon_hi = min(180.0, grid.lon_at(grid.n_lon - 1) + grid.d_lon / 2.0)
        if valid is not None:
            valid = np.asarray(valid, dtype=bool)
            if valid.all():
                valid = None
        return cls(
            lon_min=lon_lo,
            lon_max=lon_hi,
            lat_min=lat_lo,
            lat_max=lat_hi,
            mask_grid=grid if valid is not None else None,
            mask=valid,
        )


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    lon: float
    lat: float
    score: float


@dataclass(frozen=True)
class PlacedSensor:
    coord: GeoCoord
    coverage_after_km: float


@dataclass(frozen=True)
class PlacementResult:
    placed: tuple[PlacedSensor, ...]
    trials_per_sensor: int
    seed: int
    baseline_coverage_km: float


def derive_seed(seed: int, index: int) -> int:
    """Stable per-placement seed from a master seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class _TrialEvaluator:
    """Everything a worker needs to draw and score one trial.

    `snaps` holds, per snapshot, (roi index, current edge weight) pairs in
    roi-id order; a trial sums min(current weight, candidate distance)
    in exactly the order a rebuilt network would sum its edge weights.
    """

    roi_coords: tuple[GeoCoord, ...]
    snaps: tuple[tuple[tuple[int, float], ...], ...]
    earth: EarthModel
    domain: SearchDomain | None = None
    seed: int = 0

    @classmethod
    def from_net(
        cls,
        net: TemporalGstbn,
        domain: SearchDomain | None = None,
        seed: int = 0,
    ) -> "_TrialEvaluator":
        if not net.snapshots:
            raise StructuralError("network has no snapshots")
        index_of = {node.id: i for i, node in enumerate(net.roi_registry)}
        snaps = tuple(
            tuple((index_of[e.roi_id], e.weight_km) for e in snap.edges)
            for snap in net.snapshots
        )
        return cls(
            roi_coords=tuple(node.geolocation for node in net.roi_registry),
            snaps=snaps,
            earth=net.earth,
            domain=domain,
            seed=seed,
        )

    def score(self, candidate: GeoCoord) -> float:
        dist = [
            great_circle_distance(candidate, coord, self.earth) for coord in self.roi_coords
        ]
        total = sum(sum(min(w, dist[i]) for i, w in snap) for snap in self.snaps)
        return total / len(self.snaps)

    def draw(self, trial_index: int) -> GeoCoord:
        rng = np.random.default_rng([self.seed, trial_index])
        dom = self.domain
        for _ in range(_MAX_REJECTS):
            lon = float(rng.uniform(dom.lon_min, dom.lon_max))
            lat = float(rng.uniform(dom.lat_min, dom.lat_max))
            if dom.mask is None:
                return GeoCoord(lon, lat)
            cell = dom.mask_grid.containing_cell(GeoCoord(lon, lat))
            if cell is not None and dom.mask.flat[cell]:
                return GeoCoord(lon, lat)
        raise StructuralError(
            f"domain rejected {_MAX_REJECTS} consecutive draws; mask and box do not overlap"
        )

    def run(self, trial_index: int) -> TrialRecord:
        cand = self.draw(trial_index)
        return TrialRecord(
            trial_index=trial_index, lon=cand.lon, lat=cand.lat, score=self.score(cand)
        )


_WORKER_EVALUATOR: _TrialEvaluator | None = None


def _init_worker(evaluator: _TrialEvaluator) -> None:
    global _WORKER_EVALUATOR
    _WORKER_EVALUATOR = evaluator


def _run_span(span: tuple[int, int]) -> list[TrialRecord]:
    start, stop = span
    return [_WORKER_EVALUATOR.run(t) for t in range(start, stop)]


def candidate_score(net: TemporalGstbn, candidate: GeoCoord) -> float:
    """Average temporal coverage the network would have with `candidate`
    added, computed incrementally. Matches the full-rebuild value exactly.
    """
    return _TrialEvaluator.from_net(net).score(candidate)


def _check_common(trials: int, seed: int, workers: int) -> None:
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    if workers < 1:
        raise ParameterError(f"workers must be at least 1, got {workers}")


def monte_carlo_place(
    net: TemporalGstbn,
    domain: SearchDomain,
    trials: int = 1000,
    seed: int = 42,
    *,
    workers: int = 1,
    trace: list[TrialRecord] | None = None,
) -> tuple[GeoCoord, float]:
    """Best single placement over `trials` uniform draws.

    Returns (coordinate, average temporal coverage after adding it); ties
    on score go to the earliest trial. Results are identical for any
    worker count. Pass `trace` to collect every trial's record.
    """
    _check_common(trials, seed, workers)
    evaluator = _TrialEvaluator.from_net(net, domain, seed)
    if workers == 1 or trials < 2 * workers:
        records = [evaluator.run(t) for t in range(trials)]
    else:
        size = -(-trials // (workers * 4))
        spans = [(s, min(s + size, trials)) for s in range(0, trials, size)]
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(evaluator,)
        ) as pool:
            chunks = list(pool.map(_run_span, spans))
        records = [r for chunk in chunks for r in chunk]
        records.sort(key=lambda r: r.trial_index)
    if trace is not None:
        trace.extend(records)
    best = min(records, key=lambda r: (r.score, r.trial_index))
    return GeoCoord(best.lon, best.lat), best.score


def place_sequential(
    net: TemporalGstbn,
    domain: SearchDomain,
    n_sensors: int = 1,
    trials: int = 1000,
    seed: int = 42,
    *,
    workers: int = 1,
    traces: list[list[TrialRecord]] | None = None,
) -> PlacementResult:
    """Place `n_sensors` one at a time, committing each winner.

    Placement k runs its own Monte Carlo search with a seed derived from
    (seed, k), against the network as updated by the previous winners.
    Coverage never increases along the placed list.
    """
    if n_sensors < 1:
        raise ParameterError(f"n_sensors must be at least 1, got {n_sensors}")
    _check_common(trials, seed, workers)
    baseline = average_temporal_coverage(net)
    current = net
    placed: list[PlacedSensor] = []
    last = baseline
    for k in range(n_sensors):
        trace_k: list[TrialRecord] | None = [] if traces is not None else None
        coord, score = monte_carlo_place(
            current, domain, trials, derive_seed(seed, k), workers=workers, trace=trace_k
        )
        if traces is not None:
            traces.append(trace_k)
        if score > last:
            raise StructuralError(
                f"placement {k} raised coverage from {last} to {score}"
            )
        last = score
        current = add_sensor(current, coord)
        placed.append(PlacedSensor(coord=coord, coverage_after_km=score))
    return PlacementResult(
        placed=tuple(placed),
        trials_per_sensor=trials,
        seed=seed,
        baseline_coverage_km=baseline,
    )
