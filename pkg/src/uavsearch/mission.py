"""Mission and flight simulation plus Monte Carlo validation.

A mission is a sequence of flights over one search domain. The field
state (coverage, undetected density) persists across the flights of a
mission, so later flights keep refining what earlier ones achieved.

The loop runs three nested cadences:

* kinematics advance every 0.5 s,
* sensing, accomplishment, the potential solve and the heading update
  run every 1 s (coverage uses the rectangle rule with the pose at the
  start of each one-second interval),
* the speed/incline planner replans every horizon/steps seconds (3 s
  for the built-in vehicles).

Each flight starts either at an explicit start point (spawned at goal
clearance above the ground, heading toward the domain center, at rest)
or, with start = None, continues seamlessly from where the previous
flight ended. Seamless continuation makes mission results invariant to
splitting a flight in two at a replan boundary.

Monte Carlo validation draws synthetic targets from the initial density
(rejection sampling), gives each an independent exponential detection
threshold, and marks a target detected once the accumulated coverage of
its cell crosses the threshold. Detection times interpolate linearly
inside the one-second sensing interval, which is exact because coverage
is piecewise linear in time. All randomness comes from the counter-based
Philox generator keyed by (seed, target index), so runs are reproducible
and independent of target count or evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np

from .control import (ControlInput, MpcConfig, UavLimits, UavState,
                      kinematic_step, mpc_plan, ramp_toward, steer_heading,
                      turn_rate_toward, wrap_angle)
from .domain import DensityGrid, SearchDomain, Zone, build_flight_domain, build_initial_density
from .errors import MissionError
from .hedac import FieldState, HedacParams, PotentialSolver, accomplishment, accumulate_coverage, steering_gradient
from .sensing import CameraModel, CameraPose, RecallTable, SensingParams
from .terrain import TerrainGrid, elevation_at

SENSE_DT = 1.0       # seconds between sensing / field / heading updates
KINEMATIC_DT = 0.5   # seconds between kinematic integration steps
NO_FLY_FLOOR = 35.0  # hard minimum clearance above terrain, meters
_FLAG_EPS = 1e-9


@dataclass(frozen=True)
class FlightConfig:
    """One flight of a mission.

    min_altitude and goal_altitude are heights above ground in meters;
    the effective hard floor is max(35, min_altitude). start is an
    (x, y) launch point or None to continue from the previous flight's
    end state. zone_ids optionally records which zones this flight was
    tasked with; it must be a subset of the mission zones and is kept as
    metadata (the density and domain are mission-level).
    """

    uav: str
    camera: str
    min_altitude: float
    goal_altitude: float
    duration_s: int
    start: tuple[float, float] | None = None
    zone_ids: tuple[str, ...] | None = None


@dataclass(frozen=True)
class MonteCarloConfig:
    targets: int = 2000
    seed: int | None = None


@dataclass(frozen=True)
class MissionConfig:
    """Everything needed to run a mission."""

    mission_id: str
    terrain: TerrainGrid
    zones: tuple[Zone, ...]
    flights: tuple[FlightConfig, ...]
    offset: float = 75.0
    cell_size: float = 10.0
    hedac: HedacParams = HedacParams()
    sensing: SensingParams = SensingParams()
    recall: RecallTable | None = None
    mpc: MpcConfig = MpcConfig()
    uavs: dict[str, UavLimits] | None = None
    cameras: dict[str, CameraModel] | None = None
    seed: int = 0
    monte_carlo: MonteCarloConfig = MonteCarloConfig()


@dataclass
class FlightLog:
    """Per-flight trajectory samples, one row every 0.5 s."""

    flight_index: int
    uav: str
    camera: str
    columns = ("t", "x", "y", "z", "heading", "v_h", "v_z",
               "speed", "incline", "turn_rate", "accomplishment",
               "floor_ok", "velocity_ok", "acceleration_ok")
    rows: list[tuple] = dataclass_field(default_factory=list)

    def as_arrays(self) -> dict[str, np.ndarray]:
        data = np.array(self.rows, dtype=float)
        return {name: data[:, i] for i, name in enumerate(self.columns)}

    def violation_counts(self) -> dict[str, int]:
        arrays = self.as_arrays()
        return {
            "floor": int(np.sum(arrays["floor_ok"] == 0.0)),
            "velocity": int(np.sum(arrays["velocity_ok"] == 0.0)),
            "acceleration": int(np.sum(arrays["acceleration_ok"] == 0.0)),
        }


@dataclass
class MissionReport:
    mission_id: str
    logs: list[FlightLog]
    times: np.ndarray            # 1 s grid over the whole mission
    eta: np.ndarray              # accomplishment at each time
    field: FieldState
    domain: SearchDomain
    density: DensityGrid
    clamp_events: int
    violations: dict[str, int]

    @property
    def final_eta(self) -> float:
        return float(self.eta[-1])


@dataclass(frozen=True)
class SyntheticTarget:
    """A sampled target with its exponential detection threshold."""

    x: float
    y: float
    row: int
    col: int
    threshold: float
    detect_time: float | None = None


@dataclass
class ValidationReport:
    mission: MissionReport
    targets: list[SyntheticTarget]
    predicted: np.ndarray
    empirical: np.ndarray
    band_low: np.ndarray
    band_high: np.ndarray
    within_band: bool
    target_count: int
    seed: int

    @property
    def times(self) -> np.ndarray:
        return self.mission.times


@dataclass
class MissionEnv:
    """Resolved runtime pieces shared by the flights of one mission."""

    config: MissionConfig
    terrain: TerrainGrid
    domain: SearchDomain
    density: DensityGrid
    recall: RecallTable
    uavs: dict[str, UavLimits]
    cameras: dict[str, CameraModel]


def prepare_environment(config: MissionConfig) -> MissionEnv:
    """Build the domain and initial density and resolve the presets."""
    from .control import UAV_PRESETS
    from .sensing import CAMERA_PRESETS, default_recall_table

    domain = build_flight_domain(config.zones, config.offset, config.cell_size)
    xmin, xmax, ymin, ymax = config.terrain.extent
    gx0, gx1, gy0, gy1 = domain.grid.rect
    if gx0 < xmin or gx1 > xmax or gy0 < ymin or gy1 > ymax:
        raise MissionError(
            "terrain does not cover the flight domain: domain rectangle "
            f"({gx0:g}, {gy0:g})..({gx1:g}, {gy1:g}) vs terrain extent "
            f"({xmin:g}, {ymin:g})..({xmax:g}, {ymax:g})"
        )
    total_people = sum(z.person_count for z in config.zones)
    density = build_initial_density(config.zones, domain.grid, total_people)

    uavs = dict(UAV_PRESETS)
    if config.uavs:
        uavs.update(config.uavs)
    cameras = dict(CAMERA_PRESETS)
    if config.cameras:
        cameras.update(config.cameras)
    zone_ids = {z.zone_id for z in config.zones}
    for idx, flight in enumerate(config.flights):
        if flight.uav not in uavs:
            raise MissionError(f"flight {idx}: unknown vehicle preset {flight.uav!r}")
        if flight.camera not in cameras:
            raise MissionError(f"flight {idx}: unknown camera preset {flight.camera!r}")
        if flight.zone_ids is not None:
            unknown = set(flight.zone_ids) - zone_ids
            if unknown:
                raise MissionError(
                    f"flight {idx}: zone subset {sorted(unknown)} not in mission zones")
        if not 35.0 <= flight.min_altitude <= flight.goal_altitude:
            raise MissionError(
                f"flight {idx}: altitudes must satisfy 35 <= min <= goal, got "
                f"min={flight.min_altitude:g}, goal={flight.goal_altitude:g}")
        if flight.duration_s < 0:
            raise MissionError(f"flight {idx}: negative duration")
    recall = config.recall if config.recall is not None else default_recall_table()
    return MissionEnv(config=config, terrain=config.terrain, domain=domain,
                      density=density, recall=recall, uavs=uavs, cameras=cameras)


def _initial_state(env: MissionEnv, flight: FlightConfig,
                   carried: UavState | None, index: int) -> UavState:
    if flight.start is None:
        if carried is None:
            raise MissionError(
                f"flight {index} has start=None but there is no previous flight state")
        return replace(carried, t=0.0)
    x, y = float(flight.start[0]), float(flight.start[1])
    if not bool(env.domain.grid.contains(x, y)):
        raise MissionError(
            f"flight {index}: start ({x:g}, {y:g}) outside the flight domain")
    ground = elevation_at(env.terrain, x, y)
    cx, cy = env.domain.center
    heading = math.atan2(cy - y, cx - x) if (cx, cy) != (x, y) else 0.0
    return UavState(x=x, y=y, z=ground + flight.goal_altitude,
                    heading=wrap_angle(heading), v_h=0.0, v_z=0.0, t=0.0)


def _replan_period(limits: UavLimits) -> int:
    period = limits.mpc_horizon_s / limits.mpc_steps
    rounded = round(period)
    if abs(period - rounded) > 1e-9 or rounded < 1 \
            or abs(rounded / SENSE_DT - round(rounded / SENSE_DT)) > 1e-9:
        raise MissionError(
            f"replan period {period:g} s must be a whole multiple of {SENSE_DT:g} s")
    return int(rounded)


def run_flight(field_state: FieldState, flight: FlightConfig, env: MissionEnv,
               carried: UavState | None = None, flight_index: int = 0,
               base_time: float = 0.0, observer=None,
               solver: PotentialSolver | None = None,
               ) -> tuple[UavState, FlightLog, list[tuple[float, float]], int]:
    """Run one flight, mutating the shared field state.

    Returns (final vehicle state, log, accomplishment samples on the
    mission 1 s grid, boundary clamp count). observer, if given, is
    called as observer(mission_time, field_state) after every sensing
    update. Connected flights must share one solver: its warm-start
    iterate is part of the carried mission state, and re-seeding it
    from zeros would let the tolerance-sized solve difference steer the
    trajectory apart.
    """
    limits = env.uavs[flight.uav]
    camera = env.cameras[flight.camera]
    replan = _replan_period(limits)
    # The planner keeps the flight's own minimum clearance; the logged
    # floor flag tracks the hard no-fly floor.
    mpc_config = replace(env.config.mpc,
                         min_clearance=max(NO_FLY_FLOOR, flight.min_altitude),
                         goal_clearance=flight.goal_altitude)
    if solver is None:
        solver = PotentialSolver(field_state.grid, env.config.hedac)

    grid_rect = env.domain.grid.rect
    half_cell = 0.5 * env.domain.grid.cell_size
    clamp_lo = (grid_rect[0] + half_cell, grid_rect[2] + half_cell)
    clamp_hi = (grid_rect[1] - half_cell, grid_rect[3] - half_cell)

    state = _initial_state(env, flight, carried, flight_index)
    log = FlightLog(flight_index=flight_index, uav=flight.uav, camera=flight.camera)
    eta_now = accomplishment(field_state)
    eta_ticks: list[tuple[float, float]] = []
    clamp_events = 0
    substeps = int(round(SENSE_DT / KINEMATIC_DT))
    target_v_h, target_v_z = state.v_h, state.v_z
    omega = 0.0

    def log_row(s: UavState, prev: UavState | None) -> None:
        ground = elevation_at(env.terrain, s.x, s.y)
        if s.z < ground:
            raise MissionError(
                f"vehicle below ground at t={s.t:g}: z={s.z:.2f}, terrain={ground:.2f}")
        speed = math.hypot(s.v_h, s.v_z)
        incline = math.atan2(s.v_z, s.v_h) if speed > 0 else 0.0
        floor_ok = s.z >= ground + NO_FLY_FLOOR - _FLAG_EPS
        velocity_ok = (limits.v_h_min - _FLAG_EPS <= s.v_h <= limits.v_h_max + _FLAG_EPS
                       and limits.v_z_min - _FLAG_EPS <= s.v_z <= limits.v_z_max + _FLAG_EPS)
        if prev is None:
            acceleration_ok = True
        else:
            ah = (s.v_h - prev.v_h) / KINEMATIC_DT
            av = (s.v_z - prev.v_z) / KINEMATIC_DT
            acceleration_ok = (limits.a_h_min - _FLAG_EPS <= ah <= limits.a_h_max + _FLAG_EPS
                               and limits.a_v_min - _FLAG_EPS <= av <= limits.a_v_max + _FLAG_EPS)
        log.rows.append((s.t, s.x, s.y, s.z, s.heading, s.v_h, s.v_z,
                         speed, incline, omega, eta_now,
                         float(floor_ok), float(velocity_ok), float(acceleration_ok)))

    log_row(state, None)
    for k in range(flight.duration_s):
        pose = CameraPose(x=state.x, y=state.y, z=state.z, yaw=state.heading)
        accumulate_coverage(field_state, pose, camera, env.terrain,
                            env.recall, env.config.sensing, SENSE_DT)
        eta_now = accomplishment(field_state)
        eta_ticks.append((base_time + k + 1, eta_now))
        if observer is not None:
            observer(base_time + k + 1, field_state)
        solver.refresh(field_state)
        direction = steering_gradient(field_state, (state.x, state.y))
        omega = 0.0 if direction is None else turn_rate_toward(
            state.heading, direction, limits.yaw_rate_max, SENSE_DT)
        if k % replan == 0:
            plan = mpc_plan(state, state.heading, env.terrain, limits, mpc_config)
            target_v_h, target_v_z = plan[0].v_h, plan[0].v_z
        for _ in range(substeps):
            prev = state
            v_h = ramp_toward(state.v_h, target_v_h, limits.a_h_min,
                              limits.a_h_max, KINEMATIC_DT)
            v_z = ramp_toward(state.v_z, target_v_z, limits.a_v_min,
                              limits.a_v_max, KINEMATIC_DT)
            control = ControlInput(speed=math.hypot(v_h, v_z),
                                   incline=math.atan2(v_z, v_h) if (v_h, v_z) != (0.0, 0.0) else 0.0,
                                   turn_rate=omega)
            state = kinematic_step(state, control, limits, KINEMATIC_DT)
            clamped_x = min(max(state.x, clamp_lo[0]), clamp_hi[0])
            clamped_y = min(max(state.y, clamp_lo[1]), clamp_hi[1])
            if (clamped_x, clamped_y) != (state.x, state.y):
                clamp_events += 1
                state = replace(state, x=clamped_x, y=clamped_y)
            log_row(state, prev)
    return state, log, eta_ticks, clamp_events


def run_mission(config: MissionConfig, observer=None) -> MissionReport:
    """Run all flights of a mission over one shared field state."""
    env = prepare_environment(config)
    field_state = FieldState.from_density(env.density)
    solver = PotentialSolver(field_state.grid, config.hedac)
    logs: list[FlightLog] = []
    eta_points: list[tuple[float, float]] = [(0.0, accomplishment(field_state))]
    clamp_total = 0
    violations = {"floor": 0, "velocity": 0, "acceleration": 0}
    carried: UavState | None = None
    base_time = 0.0
    for index, flight in enumerate(config.flights):
        carried, log, eta_ticks, clamps = run_flight(
            field_state, flight, env, carried, index, base_time, observer, solver)
        logs.append(log)
        eta_points.extend(eta_ticks)
        clamp_total += clamps
        for key, count in log.violation_counts().items():
            violations[key] += count
        base_time += flight.duration_s
    times = np.array([p[0] for p in eta_points])
    eta = np.array([p[1] for p in eta_points])
    return MissionReport(mission_id=config.mission_id, logs=logs, times=times,
                         eta=eta, field=field_state, domain=env.domain,
                         density=env.density, clamp_events=clamp_total,
                         violations=violations)


class TargetTracker:
    """Synthetic targets with exponential thresholds, fed by the observer hook.

    Each target gets its own Philox substream keyed by (seed, index):
    first the rejection-sampling draws for its position (x, y and the
    acceptance variable, repeated until accepted), then its threshold.
    Detection times interpolate linearly inside the sensing interval in
    which the cell's coverage crosses the threshold.
    """

    MAX_REJECTION_DRAWS = 100_000

    def __init__(self, density: DensityGrid, count: int, seed: int):
        if count < 1:
            raise MissionError("target count must be >= 1")
        if not 0 <= seed < 2 ** 63:
            raise MissionError("seed must be in [0, 2^63)")
        self.seed = int(seed)
        peak = float(density.values.max())
        if peak <= 0:
            raise MissionError("initial density is identically zero")
        xmin, xmax, ymin, ymax = density.grid.rect
        xs = np.empty(count)
        ys = np.empty(count)
        rows = np.empty(count, dtype=int)
        cols = np.empty(count, dtype=int)
        thresholds = np.empty(count)
        for j in range(count):
            gen = np.random.Generator(
                np.random.Philox(key=np.array([self.seed, j], dtype=np.uint64)))
            for _ in range(self.MAX_REJECTION_DRAWS):
                x = gen.uniform(xmin, xmax)
                y = gen.uniform(ymin, ymax)
                row, col = density.grid.cell_index(x, y)
                if gen.uniform(0.0, 1.0) * peak < density.values[row, col]:
                    break
            else:
                raise MissionError("rejection sampling failed to place a target")
            xs[j], ys[j], rows[j], cols[j] = x, y, row, col
            thresholds[j] = gen.standard_exponential()
        self.xs, self.ys = xs, ys
        self.rows, self.cols = rows, cols
        self.thresholds = thresholds
        self.detect_times = np.full(count, np.nan)
        self._prev = np.zeros(count)

    def __call__(self, t: float, field_state: FieldState) -> None:
        coverage = field_state.coverage[self.rows, self.cols]
        pending = np.isnan(self.detect_times)
        crossed = pending & (coverage >= self.thresholds)
        if np.any(crossed):
            gained = coverage[crossed] - self._prev[crossed]
            fraction = (self.thresholds[crossed] - self._prev[crossed]) / gained
            self.detect_times[crossed] = t - SENSE_DT + fraction * SENSE_DT
        self._prev = coverage.copy()

    def targets(self) -> list[SyntheticTarget]:
        out = []
        for j in range(self.xs.size):
            dt = self.detect_times[j]
            out.append(SyntheticTarget(
                x=float(self.xs[j]), y=float(self.ys[j]),
                row=int(self.rows[j]), col=int(self.cols[j]),
                threshold=float(self.thresholds[j]),
                detect_time=None if math.isnan(dt) else float(dt)))
        return out

    def detected_fraction(self, times: np.ndarray) -> np.ndarray:
        detected = self.detect_times[:, None] <= times[None, :]
        detected &= ~np.isnan(self.detect_times)[:, None]
        return detected.mean(axis=0)


def binomial_band(predicted: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Three-sigma binomial band around a predicted fraction."""
    sigma = np.sqrt(np.clip(predicted * (1.0 - predicted), 0.0, None) / count)
    return predicted - 3.0 * sigma, predicted + 3.0 * sigma


def monte_carlo_validate(config: MissionConfig, targets: int | None = None,
                         seed: int | None = None) -> ValidationReport:
    """Run a mission while tracking synthetic targets and compare the
    empirical detected fraction with the predicted accomplishment."""
    env = prepare_environment(config)
    count = targets if targets is not None else config.monte_carlo.targets
    if seed is not None:
        used_seed = seed
    elif config.monte_carlo.seed is not None:
        used_seed = config.monte_carlo.seed
    else:
        used_seed = config.seed
    tracker = TargetTracker(env.density, count, used_seed)
    report = run_mission(config, observer=tracker)
    empirical = tracker.detected_fraction(report.times)
    band_low, band_high = binomial_band(report.eta, count)
    within = bool(np.all((empirical >= band_low - 1e-12)
                         & (empirical <= band_high + 1e-12)))
    return ValidationReport(mission=report, targets=tracker.targets(),
                            predicted=report.eta, empirical=empirical,
                            band_low=band_low, band_high=band_high,
                            within_band=within, target_count=count,
                            seed=used_seed)
