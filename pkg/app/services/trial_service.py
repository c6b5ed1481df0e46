"""Runs one pivoting trial with one of the six methods."""
import logging
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from app.core.exceptions import PivotSimError
from app.core.geometry import (
    generate_arc_path,
    ideal_pivot_force,
    initial_grip_threshold,
    make_pivot_geometry,
    synthesize_grasp,
    validate_graspable,
)
from app.core.timing import TimedSegment, time_parameterize
from app.schemas.box import BoxSpec, PivotGeometry
from app.schemas.control import (
    ControlParams,
    GripperCtlState,
    MethodId,
    PositionCtlState,
    SlipType,
)
from app.schemas.sensors import SensorFrame
from app.schemas.trial import Scenario, SimulationParams, TraceRow, TrialResult
from app.schemas.world import ContactParams, StepCommand, StepEvents, WorldState
from app.services.controller_service import ControllerService
from app.services.sensor_service import SensorService, VisionSensor
from app.services.world_service import SimWorld, compute_work, judge_trial
from app.utils.seeding import make_rng


logger = logging.getLogger(__name__)


class MotionPhase(NamedTuple):
    """One planned move of a scripted motion."""

    name: str
    kind: str  # "translate" or "rotate"
    segment: TimedSegment


class _TrialStopped(Exception):
    """The box was dropped; nothing more to execute."""


class TrialService:
    """Planning and execution of single trials."""

    @staticmethod
    def plan_pick_place(
        box: BoxSpec,
        geom: PivotGeometry,
        control: ControlParams,
        contact: ContactParams,
        start: Tuple[float, float] = None,
    ) -> List[MotionPhase]:
        """
        Lift the box clear of the surface, turn it a quarter turn, set it down.

        The grasp is at the center of the top edge. The lift height lets the
        farthest corner sweep past the surface.

        Args:
            box: Box being moved.
            geom: Pivot geometry.
            control: Motion limits.
            contact: Used for the lift clearance.
            start: Tool position at the grasp; defaults to the top-edge center.

        Returns:
            List of motion phases in execution order.
        """
        L, W = geom.base_len, geom.height
        if start is None:
            start = (-L / 2.0, W)
        x0, z0 = start
        clearance = math.hypot(L / 2.0, W) + contact.lift_tol
        lifted = (x0, z0 + clearance)
        # after the quarter turn the lowest corner hangs L/2 below the grasp point
        placed = (x0, z0 - W + L / 2.0)

        return [
            MotionPhase("lift", "translate", time_parameterize(start, lifted, control.vmax, control.amax)),
            MotionPhase(
                "rotate",
                "rotate",
                time_parameterize((0.0,), (math.pi / 2,), control.wmax, control.alpha_max),
            ),
            MotionPhase("lower", "translate", time_parameterize(lifted, placed, control.vmax, control.amax)),
        ]

    @staticmethod
    def run_method(method: MethodId, scenario: Scenario, sim: SimulationParams) -> TrialResult:
        """
        Execute one trial and judge it from ground truth.

        Diagnostics raised by the world end the trial as a failure with the
        message recorded in failure_reason.
        """
        runner = _TrialRunner(MethodId(method), scenario, sim)
        return runner.run()


class _TrialRunner:
    """Owns the world, sensors and controllers of one trial."""

    def __init__(self, method: MethodId, scenario: Scenario, sim: SimulationParams):
        self.method = method
        self.scenario = scenario
        self.sim = sim
        self.control = sim.control
        self.contact = sim.contact

        box = scenario.box
        if sim.com_jitter > 0:
            rng = make_rng(scenario.seed, "com")
            jitter = rng.uniform(-sim.com_jitter, sim.com_jitter, size=2)
            box = box.model_copy(update={"com_offset": (float(jitter[0]), float(jitter[1]))})
        self.box = box

        validate_graspable(box, self.contact.max_width)
        self.geom = make_pivot_geometry(box, scenario.pivot_type, scenario.direction)
        self.world = SimWorld(box, self.geom, self.contact, rigid=not method.uses_gripper_control)

        self.wrist_rng = make_rng(scenario.seed, "wrist")
        self.tactile_rng = make_rng(scenario.seed, "tactile")
        self.vision = VisionSensor(self.geom, sim.sensors, make_rng(scenario.seed, "vision"))

        self.state: WorldState = self.world.initial_state(self._grasp_local())
        self.gripper_ctl: Optional[GripperCtlState] = None
        self._rigid_width = self.contact.max_width

        self.events: List[StepEvents] = []
        self.work_samples: List[Tuple[Tuple[float, float, float], Tuple[float, float, float]]] = []
        self.trace: List[TraceRow] = []
        self.waypoint_errors: List[float] = []
        self._steps = 0
        self._pending_flags: set = set()
        self._last_slip = SlipType.NONE
        self._vision_pose = None
        self._tactile = None

    # ------------------------------------------------------------------

    def run(self) -> TrialResult:
        s = self.scenario
        logger.info(
            "trial start: method=%s box=%s pivot=%s noise=%.3f seed=%d",
            self.method.value, s.box.name, s.pivot_type.value, s.base_noise, s.seed,
        )
        failure: Optional[str] = None
        t0 = self.state.sim_time
        t_end = t0
        try:
            self._grasp()
            t0 = self.state.sim_time
            self._vision_pose = self.vision.sample(self.state)
            self._record()
            try:
                if self.method is MethodId.PICK_PLACE:
                    self._run_pick_place()
                elif self.method is MethodId.OPEN_LOOP:
                    self._run_open_loop()
                else:
                    self._run_closed_loop()
                t_end = self.state.sim_time
                self._hold(self.control.settle_time)
            except _TrialStopped:
                t_end = self.state.sim_time
        except PivotSimError as exc:
            failure = f"diagnostic: {exc}"
            t_end = self.state.sim_time
            logger.warning("trial %d ended by diagnostic: %s", s.seed, exc)

        success, lifted, slipped = judge_trial([self.state], self.events, self.contact)
        if failure is None and not success:
            failure = "dropped" if slipped else "path_exhausted"
        if failure is not None:
            success = False

        result = TrialResult(
            box=s.box.name,
            pivot=s.pivot_type.value,
            noise=s.base_noise,
            method=self.method.value,
            seed=s.seed,
            repeat=s.repeat,
            success=success,
            lifted=lifted,
            slipped_off=slipped,
            time=max(0.0, t_end - t0),
            work=compute_work(self.work_samples),
            final_rot=self.state.rot,
            failure_reason=None if success else failure,
            waypoint_errors=self.waypoint_errors,
            trace=self.trace,
        )
        logger.info(
            "trial done: method=%s seed=%d success=%s lifted=%s slipped=%s time=%.2f work=%.3f",
            self.method.value, s.seed, success, lifted, slipped, result.time, result.work,
        )
        return result

    # ------------------------------------------------------------------
    # grasp
    # ------------------------------------------------------------------

    def _grasp_local(self) -> Tuple[float, float]:
        """Synthesized grasp in pivot-frame box coordinates; pick and place holds the top-edge center."""
        grasp = synthesize_grasp(self.box, self.geom, max_width=self.contact.max_width)
        sign = self.geom.pivot_direction
        (gx, gz), (px, pz) = grasp.grasp_point, grasp.pivot_corner
        local = (sign * (gx - px), gz - pz)
        if self.method is MethodId.PICK_PLACE:
            local = (local[0] / 2.0, local[1])
        return local

    def _grasp(self) -> None:
        if self.method.uses_gripper_control:
            threshold = initial_grip_threshold(
                self.geom, self.box.mass, self.box.mu_finger, self.control.safety
            )
            self.state, width = ControllerService.grasp_until_threshold(
                self.world, self.state, threshold, self.sim.sensors, self.tactile_rng, self.control.dt
            )
            self.gripper_ctl = GripperCtlState(commanded_width=width)
            return

        # rubberised fingers squeezed as hard as the rigid grip allows
        width = max(0.0, self.box.dim_c - self.control.rigid_compression)
        while self.state.grip_width > width:
            cmd = StepCommand(
                tool_x=self.state.tool_x,
                tool_z=self.state.tool_z,
                tool_rot=self.state.tool_rot,
                grip_width=width,
                dt=self.control.dt,
            )
            self.state, _ = self.world.step(self.state, cmd)
        self._rigid_width = width

    # ------------------------------------------------------------------
    # inner loop
    # ------------------------------------------------------------------

    def _width_command(self) -> float:
        if self.gripper_ctl is None:
            return self._rigid_width
        frames = SensorService.sample_tactile(
            self.state, self.box, self.contact, self.sim.sensors, self.tactile_rng
        )
        self._tactile = frames
        self._last_slip = ControllerService.classify_slip(frames, self.control.noise_threshold)
        self.gripper_ctl, width = ControllerService.gripper_step(
            self.gripper_ctl,
            frames,
            self.contact.grip_step,
            self.contact.max_width,
            self.control.noise_threshold,
            self.control.deformation_limit,
        )
        return width

    def _advance(self, x: float, z: float, rot: float) -> None:
        """One inner-loop period toward the given tool target."""
        cmd = StepCommand(tool_x=x, tool_z=z, tool_rot=rot, grip_width=self._width_command(), dt=self.control.dt)
        prev = self.state
        self.state, events = self.world.step(self.state, cmd)
        self._vision_pose = self.vision.sample(self.state)
        self._steps += 1

        if events.lift_onset or events.drop:
            self.events.append(events)
        for flag, on in (
            ("lift", events.lift_onset),
            ("tslip", events.translational_slip),
            ("rslip", events.rotational_slip),
            ("drop", events.drop),
            ("done", events.pivot_complete),
        ):
            if on:
                self._pending_flags.add(flag)

        self.work_samples.append(
            ((prev.wrist_fx, prev.wrist_fz, prev.wrist_ty), (prev.grasp_x, prev.grasp_z, prev.rot))
        )
        if self._steps % self.sim.trace_every == 0:
            self._record()
        if events.drop:
            self._record()
            raise _TrialStopped()

    def _record(self) -> None:
        st = self.state
        wrench = SensorService.sample_wrist(st, self.sim.sensors.sigma_wrist, self.wrist_rng)
        sign = self.scenario.direction
        order = ("lift", "tslip", "rslip", "drop", "done")
        self.trace.append(
            TraceRow(
                t_s=st.sim_time,
                phi_rad=st.rot,
                fz_real_N=wrench.fz,
                fz_ideal_N=ideal_pivot_force(self.geom, self.box.mass, st.rot),
                x_m=sign * st.tool_x,
                z_m=st.tool_z,
                grip_width_m=st.grip_width,
                event_flags="|".join(f for f in order if f in self._pending_flags),
                phi_est_rad=self._vision_pose.phi_est if self._vision_pose is not None else None,
                in_hand_angle_rad=st.in_hand_angle,
                surface_normal_N=st.surface_normal,
                slip_class=self._last_slip.value if self.gripper_ctl is not None else "n/a",
            )
        )
        self._pending_flags = set()

    def _hold(self, duration: float) -> None:
        steps = int(round(duration / self.control.dt))
        x, z, r = self.state.tool_x, self.state.tool_z, self.state.tool_rot
        for _ in range(steps):
            self._advance(x, z, r)

    def _follow(self, segment: TimedSegment, to_point) -> None:
        """Step through a timed segment; to_point maps elapsed time to a tool target."""
        steps = int(math.ceil(segment.duration / self.control.dt - 1e-9))
        for i in range(1, steps + 1):
            x, z, r = to_point(min(i * self.control.dt, segment.duration))
            self._advance(x, z, r)

    # ------------------------------------------------------------------
    # methods
    # ------------------------------------------------------------------

    def _waypoints(self) -> np.ndarray:
        """Arc waypoints as tool targets; the world always runs in the positive direction."""
        path = generate_arc_path(self.geom, self.control.waypoints, self.scenario.base_noise)
        x0, z0 = self.state.tool_x, self.state.tool_z
        sign = self.geom.pivot_direction
        # generate_arc_path mirrors dx for negative pivots, undo it here
        return np.array([(x0 + sign * dx, z0 + dz, phi) for dx, dz, phi in path.waypoints])

    def _run_open_loop(self) -> None:
        points = self._waypoints()
        seg_len = np.hypot(np.diff(points[:, 0]), np.diff(points[:, 1]))
        arc_s = np.concatenate([[0.0], np.cumsum(seg_len)])
        # a single plan for the whole path
        segment = time_parameterize((0.0,), (float(arc_s[-1]),), self.control.vmax, self.control.amax)
        self._hold(self.control.planning_pause)

        def along(t: float):
            s = segment.distance_at(t)
            return float(np.interp(s, arc_s, points[:, 0])), float(np.interp(s, arc_s, points[:, 1])), 0.0

        self._follow(segment, along)

    def _run_closed_loop(self) -> None:
        points = self._waypoints()
        ctl = PositionCtlState()
        gains = self.control.gains
        max_offset = self.control.max_offset

        for k in range(1, len(points)):
            reading = SensorFrame(
                wrist=SensorService.sample_wrist(
                    self.state, self.sim.sensors.sigma_wrist, self.wrist_rng, self.sim.sensors.sigma_wrist_torque
                ),
                tactile=self._tactile,
                vision=self._vision_pose,
            )
            self.waypoint_errors.append(
                abs(ideal_pivot_force(self.geom, self.box.mass, self.state.rot) - self.state.wrist_fz)
            )
            vision = reading.vision

            if self.method.uses_force_control:
                phi = vision.phi_est if self.method.uses_vision else float(points[k - 1, 2])
                ctl, _, done = ControllerService.position_step(
                    ctl, phi, reading.wrist.fz, self.geom, self.box.mass, gains, max_offset
                )
                if done:
                    logger.debug("pivot reported complete at waypoint %d", k)
                    break
            if self.method.uses_vision:
                if vision.phi_est >= math.pi / 2 and not self.method.uses_force_control:
                    break
                ctl, _ = ControllerService.vision_position_step(
                    ctl, vision.corner_height, self.control.gain_v, self.control.height_deadband, max_offset
                )
            if reading.tactile is not None:
                logger.debug(
                    "waypoint %d offset %.4f m grip %.2f N",
                    k, ctl.offset, sum(f.normal_force for f in reading.tactile),
                )
            else:
                logger.debug("waypoint %d offset %.4f m", k, ctl.offset)

            # re-plan to the offset waypoint, then move
            self._hold(self.control.planning_pause)
            start = (self.state.tool_x, self.state.tool_z)
            target = (float(points[k, 0]), float(points[k, 1]) + ctl.offset)
            segment = time_parameterize(start, target, self.control.vmax, self.control.amax)
            self._follow(segment, lambda t, seg=segment: (*seg.position_at(t), 0.0))

    def _run_pick_place(self) -> None:
        phases = TrialService.plan_pick_place(
            self.box, self.geom, self.control, self.contact, (self.state.tool_x, self.state.tool_z)
        )
        for phase in phases:
            self._hold(self.control.planning_pause)
            seg = phase.segment
            if phase.kind == "rotate":
                x, z = self.state.tool_x, self.state.tool_z
                self._follow(seg, lambda t, seg=seg: (x, z, seg.position_at(t)[0]))
            else:
                rot = self.state.tool_rot
                self._follow(seg, lambda t, seg=seg: (*seg.position_at(t), rot))
