"""Grasp, path-offset and gripper-width controllers plus the slip classifier."""
import logging
import math
from typing import Sequence, Tuple

import numpy as np

from app.core.exceptions import GraspError
from app.core.geometry import ideal_pivot_force
from app.schemas.box import PivotGeometry
from app.schemas.control import GripperCtlState, PIGains, PositionCtlState, SlipType
from app.schemas.sensors import SensorParams, TactileFrame
from app.schemas.world import StepCommand, WorldState
from app.services.sensor_service import SensorService
from app.services.world_service import SimWorld


logger = logging.getLogger(__name__)


class ControllerService:
    """
    Control laws used by the trial runner.

    All methods are pure apart from grasp_until_threshold, which drives
    the world it is given.
    """

    @staticmethod
    def grasp_until_threshold(
        world: SimWorld,
        state: WorldState,
        threshold: float,
        sensor_params: SensorParams,
        rng: np.random.Generator,
        dt: float = 0.002,
    ) -> Tuple[WorldState, float]:
        """
        Close the gripper one step at a time until the pads press hard enough.

        Args:
            world: World holding the box.
            state: Current state, gripper open at the grasp point.
            threshold: Summed normal force of both pads to reach, in N.
            sensor_params: Tactile settings.
            rng: Tactile noise stream.
            dt: Inner-loop period.

        Returns:
            Tuple of (state after closing, final width).

        Raises:
            GraspError: If the gripper closes fully first.
        """
        step = world.params.grip_step
        width = state.grip_width
        while True:
            frames = SensorService.sample_tactile(state, world.box, world.params, sensor_params, rng)
            total = sum(f.normal_force for f in frames)
            touching = any(f.in_contact.any() for f in frames)
            if touching and total >= threshold:
                logger.debug("grasp closed at width %.4f m, normal %.2f N", width, total)
                return state, width
            if width <= 0.0:
                raise GraspError(f"gripper closed fully at {total:.2f} N, needed {threshold:.2f} N")
            width = max(0.0, width - step)
            cmd = StepCommand(
                tool_x=state.tool_x,
                tool_z=state.tool_z,
                tool_rot=state.tool_rot,
                grip_width=width,
                dt=dt,
            )
            state, _ = world.step(state, cmd)

    @staticmethod
    def position_step(
        ctl: PositionCtlState,
        phi: float,
        f_real: float,
        geom: PivotGeometry,
        mass: float,
        gains: PIGains,
        max_offset: float = math.inf,
    ) -> Tuple[PositionCtlState, float, bool]:
        """
        One waypoint of the force-based path offset controller.

        The signed error f_ideal - f_real moves the remaining path down when
        the wrist carries more than the pivot needs and up when it carries less.

        Returns:
            Tuple of (new state, z offset, done).
        """
        if phi >= math.pi / 2:
            return ctl, ctl.offset, True

        error = ideal_pivot_force(geom, mass, phi) - f_real
        accum = ctl.error_accum + error
        offset = ctl.offset + gains.kp * error + gains.ki * accum
        offset = min(max_offset, max(-max_offset, offset))

        new_ctl = PositionCtlState(
            offset=offset,
            error_accum=accum,
            waypoint_index=ctl.waypoint_index + 1,
        )
        return new_ctl, offset, False

    @staticmethod
    def vision_position_step(
        ctl: PositionCtlState,
        corner_height_est: float,
        gain_v: float,
        deadband: float = 0.0,
        max_offset: float = math.inf,
    ) -> Tuple[PositionCtlState, float]:
        """Lower the remaining path by a fraction of the seen corner height."""
        if corner_height_est <= deadband:
            return ctl, ctl.offset
        offset = max(-max_offset, ctl.offset - gain_v * corner_height_est)
        return ctl.model_copy(update={"offset": offset}), offset

    @staticmethod
    def classify_slip(frames: Sequence[TactileFrame], noise_threshold: float = 0.1) -> SlipType:
        """
        Label the slip type from vertical pillar displacements.

        Uniformly downward pillars mean the box slides out; pillars moving
        in opposite directions mean it turns about the pad center.
        """
        dz = np.concatenate([f.displacement[..., 2][f.in_contact] for f in frames])
        active = dz[np.abs(dz) > noise_threshold]
        if active.size == 0:
            return SlipType.NONE
        if np.all(active < 0):
            return SlipType.TRANSLATIONAL
        if np.any(active < 0):
            return SlipType.ROTATIONAL
        return SlipType.NONE

    @staticmethod
    def gripper_step(
        ctl: GripperCtlState,
        frames: Sequence[TactileFrame],
        grip_step: float,
        max_width: float,
        noise_threshold: float = 0.1,
        deformation_limit: float = 5.0,
    ) -> Tuple[GripperCtlState, float]:
        """
        One tactile gripper update.

        Loosen when any pillar deflects more than deformation_limit in
        magnitude. Tighten while every touching pillar is pushed down.

        Returns:
            Tuple of (new state, width command).
        """
        contact = 0
        downward = 0
        excessive = False
        for frame in frames:
            mask = frame.in_contact
            contact += int(mask.sum())
            downward += int((frame.displacement[..., 2][mask] < -noise_threshold).sum())
            # any pillar, touching or not, on any axis
            if np.any(np.abs(frame.displacement) > deformation_limit):
                excessive = True

        width = ctl.commanded_width
        if excessive:
            new_width = min(max_width, width + grip_step)
            new_ctl = ctl.model_copy(
                update={"commanded_width": new_width, "loosen_count": ctl.loosen_count + 1}
            )
        elif contact > 0 and downward == contact:
            new_width = max(0.0, width - grip_step)
            new_ctl = ctl.model_copy(
                update={"commanded_width": new_width, "tighten_count": ctl.tighten_count + 1}
            )
        else:
            return ctl, width
        return new_ctl, new_width
