"""Synthetic wrist, tactile and vision sensors driven by the world state."""
import bisect
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from app.schemas.box import BoxSpec, PivotGeometry
from app.schemas.sensors import SensorParams, TactileFrame, VisionPose, WristWrench
from app.schemas.world import ContactParams, WorldState


logger = logging.getLogger(__name__)

ELEMENTS_PER_FINGER = 9
PHI_MIN = math.radians(-5.0)
PHI_MAX = math.radians(95.0)

# element centers in units of pitch; columns run along x, rows along z (top row first)
_COL = np.array([-1.0, 0.0, 1.0])
_ROW = np.array([1.0, 0.0, -1.0])


class SensorService:
    """Stateless synthesis of wrist and tactile readings."""

    @staticmethod
    def sample_wrist(state: WorldState, sigma_wrist: float, rng: np.random.Generator,
                     sigma_torque: float = 0.0) -> WristWrench:
        """
        Ground-truth wrist load plus Gaussian noise.

        Args:
            state: Current world state.
            sigma_wrist: Force noise std in N.
            rng: Noise stream owned by the caller.
            sigma_torque: Torque noise std in N*m.
        """
        fx, fz, ty = state.wrist_fx, state.wrist_fz, state.wrist_ty
        if sigma_wrist > 0:
            fx += float(rng.normal(0.0, sigma_wrist))
            fz += float(rng.normal(0.0, sigma_wrist))
        if sigma_torque > 0:
            ty += float(rng.normal(0.0, sigma_torque))
        return WristWrench(fx=fx, fz=fz, ty=ty, timestamp=state.sim_time)

    @staticmethod
    def sample_tactile(
        state: WorldState,
        box: BoxSpec,
        contact: ContactParams,
        params: SensorParams,
        rng: np.random.Generator,
    ) -> Tuple[TactileFrame, TactileFrame]:
        """
        Pillar displacements and forces for both fingertips.

        The normal force is shared evenly by all nine pillars of each pad. A
        sticking pad shears elastically with its friction utilisation, up to
        stick_deflection at the friction limit. A sliding pad drags every
        pillar tip along the slide: the load share over the pillar shear
        stiffness plus slip_deflection. Rotational slip adds a field that
        turns about the pad center.
        """
        frames = []
        share = state.grip_normal / (2 * ELEMENTS_PER_FINGER)
        touching = state.attached and share > params.contact_force_threshold

        disp = np.zeros((3, 3, 3))
        force = np.zeros((3, 3, 3))
        if touching:
            load_share = state.axis_load / (2 * ELEMENTS_PER_FINGER)
            if state.translational_slipping:
                shear = abs(load_share) / contact.pillar_shear_stiffness + params.slip_deflection
            else:
                capacity = box.mu_finger * state.grip_normal
                shear = params.stick_deflection * min(1.0, abs(state.axis_load) / capacity)

            disp[..., 2] = -math.copysign(shear, state.axis_load)
            force[..., 1] = share
            force[..., 2] = -load_share

            if state.rotational_slipping and state.rot_slip_dir != 0.0:
                omega = state.rot_slip_dir * params.rot_slip_gain
                x = _COL[np.newaxis, :] * params.pitch
                z = _ROW[:, np.newaxis] * params.pitch
                rot_z = -omega * x * np.ones((3, 1))
                rot_x = omega * z * np.ones((1, 3))
                disp[..., 2] += rot_z
                disp[..., 0] += rot_x
                force[..., 2] += rot_z * contact.pillar_shear_stiffness
                force[..., 0] += rot_x * contact.pillar_shear_stiffness

        in_contact = np.full((3, 3), touching)
        for finger in (0, 1):
            noisy = disp.copy()
            if params.sigma_tact > 0:
                noisy += rng.normal(0.0, params.sigma_tact, size=(3, 3, 3))
            frames.append(
                TactileFrame(
                    finger=finger,
                    displacement=noisy,
                    force=force.copy(),
                    in_contact=in_contact.copy(),
                    timestamp=state.sim_time,
                )
            )
        return frames[0], frames[1]


class VisionSensor:
    """
    Marker-based pose sensor with a fixed frame rate and latency.

    Every call records the true pose; a new estimate is produced only on the
    frame grid and shows the pose from `latency` seconds earlier.
    """

    def __init__(self, geom: PivotGeometry, params: SensorParams, rng: np.random.Generator):
        self.geom = geom
        self.params = params
        self.rng = rng
        self._period = 1.0 / params.vision_rate
        self._times: List[float] = []
        self._poses: List[Tuple[float, float, float]] = []
        self._last: Optional[VisionPose] = None
        self._last_frame = -1
        L, W = geom.base_len, geom.height
        self._corners = ((0.0, 0.0), (-L, 0.0), (-L, W), (0.0, W))

    def sample(self, state: WorldState) -> VisionPose:
        """Return the latest estimate, refreshing it on the frame grid."""
        t = state.sim_time
        self._times.append(t)
        self._poses.append((state.obj_x, state.obj_z, state.rot))
        self._prune(t - self.params.vision_latency - self._period)

        frame = int(math.floor(t / self._period + 1e-9))
        if self._last is not None and frame <= self._last_frame:
            return self._last.model_copy(update={"fresh": False})

        self._last_frame = frame
        x, z, rot = self._delayed(t - self.params.vision_latency)
        p = self.params
        if p.sigma_pos > 0:
            x += float(self.rng.normal(0.0, p.sigma_pos))
            z += float(self.rng.normal(0.0, p.sigma_pos))
        if p.sigma_ang > 0:
            rot += float(self.rng.normal(0.0, p.sigma_ang))

        self._last = VisionPose(
            x=x,
            z=z,
            rot=rot,
            phi_est=min(PHI_MAX, max(PHI_MIN, rot)),
            corner_height=self._lowest_corner(x, z, rot),
            timestamp=t,
            fresh=True,
        )
        return self._last

    @property
    def buffered(self) -> int:
        """Number of true poses kept for the latency lookup."""
        return len(self._times)

    def _prune(self, cutoff: float) -> None:
        # keep the newest pose at or before the cutoff, it still answers delayed lookups
        idx = bisect.bisect_right(self._times, cutoff) - 1
        if idx > 0:
            del self._times[:idx]
            del self._poses[:idx]

    def _delayed(self, t: float) -> Tuple[float, float, float]:
        idx = bisect.bisect_right(self._times, t + 1e-12) - 1
        return self._poses[max(0, idx)]

    def _lowest_corner(self, x: float, z: float, rot: float) -> float:
        c, s = math.cos(rot), math.sin(rot)
        return min(z - px * s + pz * c for px, pz in self._corners)
