"""Vehicle kinematics, heading steering and the altitude/velocity planner.

The control input is (speed, incline, turn_rate): horizontal speed is
speed * cos(incline), climb rate speed * sin(incline), and the heading
rotates at turn_rate. Position integrates with the post-update heading,
i.e. the heading advances first and the step is flown along the new
heading.

The planner picks a sequence of (speed, incline) pairs over a short
horizon by exhaustive dynamic programming on a discretized control
lattice. Headings are not planner decision variables: the plan assumes
the current heading, frozen for the horizon, and the heading controller
owns the actual turn. Terrain enters twice:

* the altitude reference tracks goal clearance above the ground expected
  under the vehicle, sampled along the frozen heading at the progress of
  the current horizontal speed, and
* the hard floor for each stage uses the maximum ground elevation inside
  the disc the vehicle could reach by that stage at full speed in any
  direction. The disc makes the floor safe against the heading
  controller turning between replans, at the price of climbing early
  near steep ground.

Altitude inside the planner lives on a small lattice (per-step climb
snapped to a bucket), which keeps the dynamic program exact on its own
model; a clearance margin of one pull-up distance plus one bucket
absorbs both the snap error and the dip of a ramped vertical-speed
reversal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import terrain as terrain_mod
from .errors import ControlLimitError, MpcInfeasibleError
from .terrain import TerrainGrid

_EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]; +pi is kept positive so that an exact
    half-turn resolves counter-clockwise."""
    return math.atan2(math.sin(a), math.cos(a))


@dataclass(frozen=True)
class UavLimits:
    """Vehicle performance envelope (angles in degrees, SI otherwise)."""

    name: str
    incline_min_deg: float
    incline_max_deg: float
    v_h_min: float
    v_h_max: float
    v_z_min: float
    v_z_max: float
    a_h_min: float
    a_h_max: float
    a_v_min: float
    a_v_max: float
    yaw_rate_max_deg: float
    mpc_steps: int
    mpc_horizon_s: float

    def __post_init__(self) -> None:
        pairs = [
            ("incline", self.incline_min_deg, self.incline_max_deg),
            ("v_h", self.v_h_min, self.v_h_max),
            ("v_z", self.v_z_min, self.v_z_max),
            ("a_h", self.a_h_min, self.a_h_max),
            ("a_v", self.a_v_min, self.a_v_max),
        ]
        for label, lo, hi in pairs:
            if lo > hi:
                raise ControlLimitError(f"{self.name}: {label} bounds inverted")
        if self.v_h_min < 0:
            raise ControlLimitError(f"{self.name}: v_h_min must be >= 0")
        if not self.yaw_rate_max_deg > 0:
            raise ControlLimitError(f"{self.name}: yaw_rate_max must be positive")
        if self.mpc_steps < 1 or not self.mpc_horizon_s > 0:
            raise ControlLimitError(f"{self.name}: bad planner horizon")

    @property
    def yaw_rate_max(self) -> float:
        return math.radians(self.yaw_rate_max_deg)

    @property
    def incline_min(self) -> float:
        return math.radians(self.incline_min_deg)

    @property
    def incline_max(self) -> float:
        return math.radians(self.incline_max_deg)


UAV_PRESETS: dict[str, UavLimits] = {
    "M210": UavLimits(
        name="M210",
        incline_min_deg=-90.0, incline_max_deg=90.0,
        v_h_min=0.0, v_h_max=10.0,
        v_z_min=-3.0, v_z_max=5.0,
        a_h_min=-3.6, a_h_max=2.0,
        a_v_min=-2.0, a_v_max=2.8,
        yaw_rate_max_deg=120.0,
        mpc_steps=5, mpc_horizon_s=15.0,
    ),
    "Mavic2ED": UavLimits(
        name="Mavic2ED",
        incline_min_deg=-90.0, incline_max_deg=90.0,
        v_h_min=0.0, v_h_max=8.0,
        v_z_min=-2.0, v_z_max=3.0,
        a_h_min=-3.6, a_h_max=2.0,
        a_v_min=-2.0, a_v_max=2.8,
        yaw_rate_max_deg=30.0,
        mpc_steps=5, mpc_horizon_s=15.0,
    ),
}


@dataclass(frozen=True)
class UavState:
    """Vehicle state: position, heading (rad, east = 0, counter-clockwise
    positive) and the current horizontal/vertical speeds."""

    x: float
    y: float
    z: float
    heading: float
    v_h: float = 0.0
    v_z: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class ControlInput:
    """Speed intensity (m/s), incline angle (rad) and turn rate (rad/s)."""

    speed: float
    incline: float
    turn_rate: float = 0.0

    @property
    def v_h(self) -> float:
        return self.speed * math.cos(self.incline)

    @property
    def v_z(self) -> float:
        return self.speed * math.sin(self.incline)


def validate_control(control: ControlInput, limits: UavLimits) -> None:
    """Raise ControlLimitError naming the violated bound, if any."""
    if control.speed < -_EPS:
        raise ControlLimitError("speed must be >= 0")
    checks = [
        ("incline_min", control.incline >= limits.incline_min - _EPS),
        ("incline_max", control.incline <= limits.incline_max + _EPS),
        ("v_h_min", control.v_h >= limits.v_h_min - _EPS),
        ("v_h_max", control.v_h <= limits.v_h_max + _EPS),
        ("v_z_min", control.v_z >= limits.v_z_min - _EPS),
        ("v_z_max", control.v_z <= limits.v_z_max + _EPS),
        ("yaw_rate_max", abs(control.turn_rate) <= limits.yaw_rate_max + _EPS),
    ]
    for bound, ok in checks:
        if not ok:
            raise ControlLimitError(
                f"{limits.name}: control violates {bound} "
                f"(speed={control.speed:g}, incline={math.degrees(control.incline):g} deg, "
                f"turn_rate={math.degrees(control.turn_rate):g} deg/s)"
            )


def steer_heading(heading: float, desired_dir, yaw_rate_max: float,
                  dt: float) -> float:
    """Rotate the heading toward a desired unit direction, capped at
    yaw_rate_max * dt per call. An exact 180-degree disagreement turns
    counter-clockwise."""
    target = math.atan2(float(desired_dir[1]), float(desired_dir[0]))
    delta = wrap_angle(target - heading)
    cap = yaw_rate_max * dt
    if delta > cap:
        delta = cap
    elif delta < -cap:
        delta = -cap
    return wrap_angle(heading + delta)


def turn_rate_toward(heading: float, desired_dir, yaw_rate_max: float,
                     dt: float) -> float:
    """The turn rate that steer_heading would apply over dt."""
    new_heading = steer_heading(heading, desired_dir, yaw_rate_max, dt)
    return wrap_angle(new_heading - heading) / dt


def kinematic_step(state: UavState, control: ControlInput, limits: UavLimits,
                   dt: float) -> UavState:
    """Advance the state by dt under a constant control input.

    The heading advances by turn_rate * dt first and the position then
    moves along the post-update heading.
    """
    validate_control(control, limits)
    heading = wrap_angle(state.heading + control.turn_rate * dt)
    v_h = control.v_h
    v_z = control.v_z
    return replace(
        state,
        x=state.x + v_h * math.cos(heading) * dt,
        y=state.y + v_h * math.sin(heading) * dt,
        z=state.z + v_z * dt,
        heading=heading,
        v_h=v_h,
        v_z=v_z,
        t=state.t + dt,
    )


def ramp_toward(current: float, target: float, rate_min: float, rate_max: float,
                dt: float) -> float:
    """Move a velocity toward a target under asymmetric rate bounds."""
    step = target - current
    return current + min(max(step, rate_min * dt), rate_max * dt)


def ramp_displacement(current: float, target: float, rate_min: float,
                      rate_max: float, dt: float) -> float:
    """Displacement over dt while a velocity ramps toward a target.

    The velocity moves at the applicable rate bound until it reaches the
    target, then holds. Discrete ramp_toward execution brackets this
    continuous value on the safe side for both climbs and descents.
    """
    step = target - current
    rate = rate_max if step > 0 else rate_min
    if step == 0.0 or rate == 0.0:
        return current * dt
    t_reach = step / rate
    if t_reach >= dt:
        return current * dt + 0.5 * rate * dt * dt
    return current * t_reach + 0.5 * step * t_reach + target * (dt - t_reach)


@dataclass(frozen=True)
class MpcConfig:
    """Planner configuration.

    min_clearance is the hard terrain floor (m above ground);
    goal_clearance the tracked height above ground. clearance_margin
    None picks the pull-up distance of the vehicle plus one altitude
    bucket automatically.
    """

    min_clearance: float = 35.0
    goal_clearance: float = 55.0
    speed_weight: float = 1.0
    altitude_weight: float = 0.05
    speed_levels: int = 11
    incline_levels: int = 11
    altitude_bucket: float = 1.0
    clearance_margin: float | None = None

    def __post_init__(self) -> None:
        if self.min_clearance < 0 or self.goal_clearance < self.min_clearance:
            raise MpcInfeasibleError("clearances must satisfy 0 <= min <= goal")
        if self.speed_levels < 2 or self.incline_levels < 2:
            raise MpcInfeasibleError("control lattice needs at least 2 levels per axis")
        if not self.altitude_bucket > 0:
            raise MpcInfeasibleError("altitude_bucket must be positive")
        if self.speed_weight < 0 or self.altitude_weight < 0:
            raise MpcInfeasibleError("planner weights must be >= 0")


def clearance_margin(limits: UavLimits, config: MpcConfig) -> float:
    """Safety margin added to the terrain floor inside the planner."""
    if config.clearance_margin is not None:
        return config.clearance_margin
    pull_up = 0.0
    if limits.a_v_max > 0 and limits.v_z_min < 0:
        pull_up = limits.v_z_min ** 2 / (2.0 * limits.a_v_max)
    return pull_up + config.altitude_bucket


def control_lattice(limits: UavLimits, config: MpcConfig
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Feasible (speed, incline) lattice points and their velocities.

    Speeds span [0, v_h_max] and inclines the vehicle's incline range;
    points whose horizontal or vertical velocity leaves the envelope are
    dropped. Order is deterministic (speed-major)."""
    speeds = np.linspace(0.0, limits.v_h_max, config.speed_levels)
    inclines = np.linspace(limits.incline_min, limits.incline_max,
                           config.incline_levels)
    sp, inc = np.meshgrid(speeds, inclines, indexing="ij")
    sp = sp.ravel()
    inc = inc.ravel()
    v_h = sp * np.cos(inc)
    v_z = sp * np.sin(inc)
    ok = (
        (v_h >= limits.v_h_min - _EPS) & (v_h <= limits.v_h_max + _EPS)
        & (v_z >= limits.v_z_min - _EPS) & (v_z <= limits.v_z_max + _EPS)
    )
    if not np.any(ok):
        raise MpcInfeasibleError("control lattice has no point inside the velocity bounds")
    return sp[ok], inc[ok], v_h[ok], v_z[ok]


def _terrain_lookahead(state: UavState, heading: float, grid: TerrainGrid,
                       limits: UavLimits, config: MpcConfig
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Per-stage floors and altitude references (arrays of length steps).

    floors[i] bounds the ground under any path reachable by stage i+1 at
    full speed (disc lookahead, truncated at the terrain extent) plus
    min clearance and the safety margin. refs[i] is goal clearance above
    the ground expected at the current speed along the frozen heading.
    """
    steps = limits.mpc_steps
    dt = limits.mpc_horizon_s / steps
    xmin, xmax, ymin, ymax = grid.extent

    # Window of terrain cells around the vehicle, as wide as the last disc.
    reach = steps * dt * limits.v_h_max + 0.75 * grid.cell_size
    xs = grid.x_centers
    ys = grid.y_centers
    c0 = int(np.searchsorted(xs, state.x - reach, side="left"))
    c1 = int(np.searchsorted(xs, state.x + reach, side="right"))
    r0 = int(np.searchsorted(ys, state.y - reach, side="left"))
    r1 = int(np.searchsorted(ys, state.y + reach, side="right"))
    block = grid.elevations[r0:r1, c0:c1]
    bx, by = np.meshgrid(xs[c0:c1], ys[r0:r1])
    dist = np.hypot(bx - state.x, by - state.y)

    margin = clearance_margin(limits, config)
    floors = np.empty(steps)
    for i in range(steps):
        radius = (i + 1) * dt * limits.v_h_max + 0.75 * grid.cell_size
        nearby = block[dist <= radius]
        if nearby.size == 0:
            nearby = np.array([terrain_mod.elevation_at(grid, state.x, state.y)])
        floors[i] = float(nearby.max()) + config.min_clearance + margin

    v_nominal = min(max(state.v_h, 0.0), limits.v_h_max)
    cos_h, sin_h = math.cos(heading), math.sin(heading)
    refs = np.empty(steps)
    for i in range(steps):
        px = min(max(state.x + cos_h * (i + 1) * dt * v_nominal, xmin), xmax)
        py = min(max(state.y + sin_h * (i + 1) * dt * v_nominal, ymin), ymax)
        refs[i] = terrain_mod.elevation_at(grid, px, py) + config.goal_clearance
    return floors, refs


def mpc_plan(state: UavState, heading: float, grid: TerrainGrid,
             limits: UavLimits, config: MpcConfig) -> list[ControlInput]:
    """Plan speed/incline controls for the horizon; execute only the first.

    Minimizes sum_i [ -speed_weight * v_h_i
                      + altitude_weight * (z_i - reference_i)^2 ]
    subject to the velocity envelope, per-step acceleration bounds and
    the stage floors, by exact dynamic programming over the control
    lattice and the altitude buckets. Raises MpcInfeasibleError naming
    the binding constraint when no sequence survives.
    """
    steps = limits.mpc_steps
    dt = limits.mpc_horizon_s / steps
    speeds, inclines, v_h, v_z = control_lattice(limits, config)
    n_controls = speeds.size
    floors, refs = _terrain_lookahead(state, heading, grid, limits, config)

    bucket = config.altitude_bucket
    dz_buckets = np.rint(v_z * dt / bucket).astype(int)
    max_shift = int(np.max(np.abs(dz_buckets))) if n_controls else 0
    half = steps * max_shift
    n_buckets = 2 * half + 1
    z_values = state.z + (np.arange(n_buckets) - half) * bucket

    # Acceleration feasibility: first step from the current velocities,
    # later steps between consecutive lattice points.
    dv_h_lo, dv_h_hi = limits.a_h_min * dt - _EPS, limits.a_h_max * dt + _EPS
    dv_z_lo, dv_z_hi = limits.a_v_min * dt - _EPS, limits.a_v_max * dt + _EPS
    first_ok = (
        (v_h - state.v_h >= dv_h_lo) & (v_h - state.v_h <= dv_h_hi)
        & (v_z - state.v_z >= dv_z_lo) & (v_z - state.v_z <= dv_z_hi)
    )
    if not np.any(first_ok):
        raise MpcInfeasibleError(
            "no lattice control satisfies the acceleration bounds from "
            f"(v_h={state.v_h:g}, v_z={state.v_z:g}) within {dt:g} s"
        )
    dh = v_h[:, None] - v_h[None, :]
    dv = v_z[:, None] - v_z[None, :]
    allowed = ((dh.T >= dv_h_lo) & (dh.T <= dv_h_hi)
               & (dv.T >= dv_z_lo) & (dv.T <= dv_z_hi))  # [prev, next]
    accel_never_binds = bool(allowed.all())

    # The executed first step must clear its floor with the velocity
    # still ramping, so gate stage 1 on the exact ramped displacement.
    ramp_dz = np.array([
        ramp_displacement(state.v_z, float(v), limits.a_v_min,
                          limits.a_v_max, dt) for v in v_z])
    # A start below a floor cannot be fixed within one stage; cap each
    # floor at the best altitude reachable by then, which turns the
    # constraint into max-rate climb recovery until compliance returns.
    reachable = (state.z + float(ramp_dz.max())
                 + np.arange(steps) * limits.v_z_max * dt)
    floors = np.minimum(floors, reachable)
    first_floor_ok = state.z + ramp_dz >= floors[0] - _EPS

    def stage_cost(k: int, z: np.ndarray, ref: float) -> np.ndarray:
        return (-config.speed_weight * v_h[k]
                + config.altitude_weight * (z - ref) ** 2)

    inf = np.inf
    value = np.full((n_controls, n_buckets), inf)
    back: list[np.ndarray] = []

    # Stage 1.
    for k in np.nonzero(first_ok & first_floor_ok)[0]:
        b = half + dz_buckets[k]
        if z_values[b] < floors[0] - _EPS:
            continue
        value[k, b] = stage_cost(k, z_values[b], refs[0])
    if not np.isfinite(value).any():
        raise MpcInfeasibleError(
            f"no feasible first step: altitude {state.z:.2f} m against the "
            f"stage-1 terrain floor {floors[0]:.2f} m under the climb and "
            "acceleration limits"
        )

    # Stages 2..N.
    allowed_prev = [np.flatnonzero(allowed[:, k]) for k in range(n_controls)]
    columns = np.arange(n_buckets)
    for i in range(1, steps):
        source = value
        if accel_never_binds:
            best_prev = source.min(axis=0)
            arg_prev = source.argmin(axis=0)
        value_next = np.full((n_controls, n_buckets), inf)
        back_next = np.full((n_controls, n_buckets), -1, dtype=np.int32)
        dest_bad = z_values < floors[i] - _EPS
        penalty = config.altitude_weight * (z_values - refs[i]) ** 2
        for k in range(n_controls):
            if not accel_never_binds:
                idx = allowed_prev[k]
                if idx.size == 0:
                    continue
                sub = source[idx]
                pos = sub.argmin(axis=0)
                best_prev = sub[pos, columns]
                arg_prev = idx[pos]
            shift = dz_buckets[k]
            if shift >= 0:
                src = slice(0, n_buckets - shift)
                dst = slice(shift, n_buckets)
            else:
                src = slice(-shift, n_buckets)
                dst = slice(0, n_buckets + shift)
            cand = (best_prev[src] - config.speed_weight * v_h[k]) + penalty[dst]
            cand[dest_bad[dst]] = inf
            value_next[k, dst] = cand
            back_next[k, dst] = arg_prev[src]
        value = value_next
        back.append(back_next)
        if not np.isfinite(value).any():
            raise MpcInfeasibleError(
                f"no feasible plan at stage {i + 1}: terrain floor "
                f"{floors[i]:.2f} m cannot be reached within the climb limits"
            )

    flat = int(np.argmin(value))
    k_i, b_i = divmod(flat, n_buckets)

    sequence = [k_i]
    for i in range(steps - 1, 0, -1):
        k_prev = int(back[i - 1][k_i, b_i])
        b_i = b_i - dz_buckets[k_i]
        k_i = k_prev
        sequence.append(k_i)
    sequence.reverse()
    return [ControlInput(speed=float(speeds[k]), incline=float(inclines[k]),
                         turn_rate=0.0) for k in sequence]


def evaluate_plan(controls, state: UavState, heading: float, grid: TerrainGrid,
                  limits: UavLimits, config: MpcConfig) -> tuple[float, bool]:
    """(cost, feasible) of a control sequence under the planner's model.

    Uses the same stage floors, references, snapped altitude dynamics
    and acceleration checks as mpc_plan, so exhaustive search over the
    lattice with this evaluator reproduces the planner's optimum.
    """
    steps = limits.mpc_steps
    dt = limits.mpc_horizon_s / steps
    if len(controls) != steps:
        raise MpcInfeasibleError(f"plan must have {steps} controls")
    floors, refs = _terrain_lookahead(state, heading, grid, limits, config)
    bucket = config.altitude_bucket
    dv_h_lo, dv_h_hi = limits.a_h_min * dt - _EPS, limits.a_h_max * dt + _EPS
    dv_z_lo, dv_z_hi = limits.a_v_min * dt - _EPS, limits.a_v_max * dt + _EPS

    _, _, _, lattice_vz = control_lattice(limits, config)
    best_ramp = max(
        ramp_displacement(state.v_z, float(v), limits.a_v_min,
                          limits.a_v_max, dt) for v in lattice_vz)
    reachable = state.z + best_ramp + np.arange(steps) * limits.v_z_max * dt
    floors = np.minimum(floors, reachable)

    z = state.z
    prev_vh, prev_vz = state.v_h, state.v_z
    cost = 0.0
    for i, control in enumerate(controls):
        validate_control(control, limits)
        vh, vz = control.v_h, control.v_z
        if not (dv_h_lo <= vh - prev_vh <= dv_h_hi
                and dv_z_lo <= vz - prev_vz <= dv_z_hi):
            return math.inf, False
        if i == 0:
            ramped = state.z + ramp_displacement(
                state.v_z, vz, limits.a_v_min, limits.a_v_max, dt)
            if ramped < floors[0] - _EPS:
                return math.inf, False
        z = z + round(vz * dt / bucket) * bucket
        if z < floors[i] - _EPS:
            return math.inf, False
        cost += (-config.speed_weight * vh
                 + config.altitude_weight * (z - refs[i]) ** 2)
        prev_vh, prev_vz = vh, vz
    return cost, True
