"""
Quasi-static 2D simulation of a box held at one point by a parallel gripper.

The fingers hold the box through an elastic link at the grasp point, so the
grasp point on the box lags the fingers by the link deflection and that
deflection is the force the wrist reads. Two in-hand coordinates change only
through slip: the slide of the box along the gripper axis and its in-hand
angle. The box rotation is the tool rotation minus the in-hand angle.

While a corner rests on the surface it is pinned there and the box turns
about it until the moments balance. Once the surface would have to pull that
corner down, the box leaves the surface and hangs from the grasp.
"""
import logging
import math
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from app.core.exceptions import StaticsError
from app.core.geometry import GRAVITY
from app.schemas.box import BoxSpec, PivotGeometry
from app.schemas.world import ContactParams, StepCommand, StepEvents, WorldState


logger = logging.getLogger(__name__)

FORCE_TOL = 1e-6
TORQUE_TOL = 1e-7
SLIDE_EPS = 1e-9
ROT_EPS = 1e-9
MAX_SLIDE_SEARCH = 0.05
HALF_PI = math.pi / 2

# rotation at which each corner becomes the lowest one, turning clockwise
_LOWEST_FROM = (0.0, -HALF_PI, math.pi, HALF_PI)


class Statics(NamedTuple):
    """Loads on the box for one configuration."""

    grasp_fx: float
    grasp_fz: float
    grasp_torque: float  # counter-clockwise torque the fingers apply to the box
    axis_load: float  # grasp force along the gripper's upward axis
    surface_normal: float
    min_corner_height: float
    obj_x: float
    obj_z: float
    grasp_x: float  # grasp point on the box
    grasp_z: float


class _Placed(NamedTuple):
    moment: float  # unbalanced counter-clockwise moment without the finger torque
    obj_x: float
    obj_z: float
    grasp_x: float
    grasp_z: float
    fx: float
    fz: float
    normal: float  # surface reaction, negative when the surface would have to pull


class _Settled(NamedTuple):
    rot: float
    slide: float
    anchor: Optional[Tuple[int, float]]
    translational: bool
    rotational: bool


class SimWorld:
    """
    One box, one gripper, one flat surface.

    A world is owned by a single trial and stepped sequentially.
    """

    def __init__(self, box: BoxSpec, geom: PivotGeometry, params: ContactParams, rigid: bool = False):
        self.box = box
        self.geom = geom
        self.params = params
        self.rigid = rigid
        if rigid:
            self._pad_stiffness = params.rigid_pad_stiffness
            self._contact_radius = params.rigid_contact_radius
        else:
            self._pad_stiffness = params.pad_stiffness
            self._contact_radius = params.rot_contact_radius
        self._link = params.grasp_stiffness

        L, W = geom.base_len, geom.height
        self._corners = ((0.0, 0.0), (-L, 0.0), (-L, W), (0.0, W))
        cx, cz = box.com_offset
        self._com = (-L / 2.0 + cx * L, W / 2.0 + cz * W)
        self._weight = box.mass * GRAVITY

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    def initial_state(self, grasp_local: Optional[Tuple[float, float]] = None) -> WorldState:
        """
        Box resting on the surface with the open gripper at the grasp point.

        Args:
            grasp_local: Grasp point in box coordinates (pivot corner at the
                origin, box extending to -x). Defaults to the top corner
                opposite the pivot corner.
        """
        if grasp_local is None:
            grasp_local = (-self.geom.base_len, self.geom.height)
        gx, gz = grasp_local
        state = WorldState(
            grasp_local_x=gx,
            grasp_local_z=gz,
            tool_x=gx,
            tool_z=gz,
            grip_width=self.params.max_width,
        )
        return self._finish(state, rot=0.0, slide=0.0, anchor=(0, 0.0), grip_normal=0.0, sim_time=0.0)

    # ------------------------------------------------------------------
    # statics
    # ------------------------------------------------------------------

    def grip_normal_for(self, width: float) -> float:
        """Normal force of the pads squeezed by the width deficit."""
        return self._pad_stiffness * max(0.0, self.box.dim_c - width)

    def capacities(self, grip_normal: float) -> Tuple[float, float]:
        """Translational and torsional friction capacity of the grasp."""
        return self.box.mu_finger * grip_normal, self.params.mu_rot * grip_normal * self._contact_radius

    @staticmethod
    def finger_point(tool_x: float, tool_z: float, tool_rot: float, slide: float) -> Tuple[float, float]:
        """Point of the fingers holding the box; slide runs down the gripper axis."""
        return tool_x - slide * math.sin(tool_rot), tool_z - slide * math.cos(tool_rot)

    def _pinned(
        self,
        finger: Tuple[float, float],
        grasp_local: Tuple[float, float],
        corner: int,
        anchor_x: float,
        rot: float,
    ) -> _Placed:
        """Box turned by rot about a corner pinned at (anchor_x, 0)."""
        c, s = math.cos(rot), math.sin(rot)
        qx, qz = self._corners[corner]
        ox = anchor_x - (qx * c + qz * s)
        oz = qx * s - qz * c
        lx, lz = grasp_local
        gx = ox + lx * c + lz * s
        gz = oz - lx * s + lz * c
        fx = self._link * (finger[0] - gx)
        fz = self._link * (finger[1] - gz)
        mx, mz = self._com
        com_x = ox + mx * c + mz * s
        moment = (gx - anchor_x) * fz - gz * fx - (com_x - anchor_x) * self._weight
        return _Placed(moment, ox, oz, gx, gz, fx, fz, self._weight - fz)

    def _hanging(
        self,
        finger: Tuple[float, float],
        grasp_local: Tuple[float, float],
        rot: float,
        load: float,
    ) -> _Placed:
        """Box hanging from the grasp, the link carrying load upward."""
        c, s = math.cos(rot), math.sin(rot)
        gx, gz = finger[0], finger[1] - load / self._link
        lx, lz = grasp_local
        ox = gx - (lx * c + lz * s)
        oz = gz - (-lx * s + lz * c)
        mx, mz = self._com
        com_x = ox + mx * c + mz * s
        moment = -(com_x - gx) * self._weight
        return _Placed(moment, ox, oz, gx, gz, 0.0, load, 0.0)

    def _lowest_corner(self, obj_x: float, obj_z: float, rot: float) -> Tuple[int, float, float]:
        c, s = math.cos(rot), math.sin(rot)
        best = (0, math.inf, 0.0)
        for i, (qx, qz) in enumerate(self._corners):
            wz = obj_z - qx * s + qz * c
            if wz < best[1]:
                best = (i, wz, obj_x + qx * c + qz * s)
        return best

    def _corner_range(self, corner: int, near: float) -> Tuple[float, float]:
        start = _LOWEST_FROM[corner]
        start += 2.0 * math.pi * round((near - start - math.pi / 4) / (2.0 * math.pi))
        return start, start + HALF_PI

    def _hanging_load(self, tool_rot: float, trans_cap: float) -> float:
        """Upward load the link carries; a grasp that cannot hold passes only its capacity."""
        axial = self._weight * math.cos(tool_rot)
        if abs(axial) > trans_cap + FORCE_TOL:
            return self._weight * trans_cap / abs(axial)
        return self._weight

    def solve_statics(self, state: WorldState) -> Statics:
        """
        Balance the loads for the configuration stored in state.

        Raises:
            StaticsError: If the box sits deeper in the surface than the
                penetration bound allows.
        """
        p = self.params
        finger = self.finger_point(state.tool_x, state.tool_z, state.tool_rot, state.slide)
        grasp_local = (state.grasp_local_x, state.grasp_local_z)
        trans_cap, rot_cap = self.capacities(state.grip_normal)

        if state.anchored:
            placed = self._pinned(finger, grasp_local, state.anchor_corner, state.anchor_x, state.rot)
            normal = max(0.0, placed.normal)
            min_height = -normal / p.surface_stiffness
        else:
            placed = self._hanging(finger, grasp_local, state.rot, self._hanging_load(state.tool_rot, trans_cap))
            normal = 0.0
            min_height = self._lowest_corner(placed.obj_x, placed.obj_z, state.rot)[1]

        if -min_height > p.penetration_bound:
            raise StaticsError(
                f"box penetrates surface by {-min_height * 1e3:.2f} mm "
                f"(bound {p.penetration_bound * 1e3:.2f} mm)"
            )
        # the surface takes any moment beyond what the fingers can hold
        torque = min(rot_cap, max(-rot_cap, -placed.moment))
        axis_load = placed.fx * math.sin(state.tool_rot) + placed.fz * math.cos(state.tool_rot)
        return Statics(
            placed.fx,
            placed.fz,
            torque,
            axis_load,
            normal,
            min_height,
            placed.obj_x,
            placed.obj_z,
            placed.grasp_x,
            placed.grasp_z,
        )

    # ------------------------------------------------------------------
    # slip resolution
    # ------------------------------------------------------------------

    def _turn_pinned(self, finger, grasp_local, corner, anchor_x, rot_held, rot_cap) -> float:
        """
        Rotation about the pinned corner.

        The box keeps its in-hand angle while the finger torque needed stays
        within capacity; otherwise it turns until the torque sits on the
        capacity boundary. A face lying on the surface stops the turn.
        """
        lo, hi = self._corner_range(corner, rot_held)
        rot = min(hi, max(lo, rot_held))
        moment = self._pinned(finger, grasp_local, corner, anchor_x, rot).moment
        if abs(moment) <= rot_cap + TORQUE_TOL or (rot == lo and moment > 0) or (rot == hi and moment < 0):
            return rot

        target = -rot_cap if moment < 0 else rot_cap

        def excess(r: float) -> float:
            return self._pinned(finger, grasp_local, corner, anchor_x, r).moment - target

        if excess(lo) >= 0.0:
            return lo
        if excess(hi) <= 0.0:
            return hi
        return brentq(excess, lo, hi, xtol=1e-12)

    def _slide_pinned(self, tool, grasp_local, corner, anchor_x, slide, rot_held, caps) -> Optional[float]:
        """Slide along the gripper axis until the axial load equals capacity."""
        tx, tz, tr = tool
        trans_cap, rot_cap = caps
        st, ct = math.sin(tr), math.cos(tr)

        def axial(sl: float) -> float:
            finger = self.finger_point(tx, tz, tr, sl)
            rot = self._turn_pinned(finger, grasp_local, corner, anchor_x, rot_held, rot_cap)
            placed = self._pinned(finger, grasp_local, corner, anchor_x, rot)
            return placed.fx * st + placed.fz * ct

        base = axial(slide)
        sigma = 1.0 if base > 0 else -1.0

        def excess(d: float) -> float:
            return sigma * axial(slide + sigma * d) - trans_cap

        lo, hi = 0.0, max(1e-6, 2.0 * (abs(base) - trans_cap) / self._link)
        while excess(hi) > 0.0:
            lo, hi = hi, hi * 2.0
            if hi > MAX_SLIDE_SEARCH:
                return None
        return slide + sigma * brentq(excess, lo, hi, xtol=1e-12)

    def _swing(self, finger, grasp_local, rot_held, rot_cap) -> float:
        """Turn a hanging box about the grasp until its weight torque fits the capacity."""
        moment = self._hanging(finger, grasp_local, rot_held, self._weight).moment
        if abs(moment) <= rot_cap + TORQUE_TOL:
            return rot_held
        # a counter-clockwise moment turns the box counter-clockwise, rot decreasing
        sigma = -1.0 if moment > 0 else 1.0

        def excess(d: float) -> float:
            return -sigma * self._hanging(finger, grasp_local, rot_held + sigma * d, self._weight).moment - rot_cap

        lo, hi = 0.0, 1e-4
        while excess(hi) > 0.0:
            lo, hi = hi, hi * 2.0
            if hi > math.pi:
                logger.warning("hanging box did not settle within half a turn")
                return rot_held + sigma * lo
        return rot_held + sigma * brentq(excess, lo, hi, xtol=1e-12)

    def _touch_down(self, finger, grasp_local, rot_from, rot_to, load) -> float:
        """Rotation between two hanging poses at which the lowest corner meets the surface."""

        def height(r: float) -> float:
            placed = self._hanging(finger, grasp_local, r, load)
            return self._lowest_corner(placed.obj_x, placed.obj_z, r)[1]

        if height(rot_from) <= 0.0:
            return rot_from
        lo, hi = min(rot_from, rot_to), max(rot_from, rot_to)
        return brentq(height, lo, hi, xtol=1e-12)

    def _settle(self, tool, grasp_local, slide, in_hand, anchor, grip_normal, dt) -> _Settled:
        """
        Resolve the in-hand coordinates for a new gripper pose.

        Translational slip is resolved before rotational slip, and a pinned
        box whose surface reaction would turn negative is lifted off.
        """
        p = self.params
        tx, tz, tr = tool
        caps = self.capacities(grip_normal)
        trans_cap, rot_cap = caps
        rot_held = tr - in_hand
        slide0 = slide
        free_sliding = False
        rot_start = rot_held
        left_surface = False

        if anchor is not None:
            corner, anchor_x = anchor
            finger = self.finger_point(tx, tz, tr, slide)
            rot = self._turn_pinned(finger, grasp_local, corner, anchor_x, rot_held, rot_cap)
            placed = self._pinned(finger, grasp_local, corner, anchor_x, rot)
            if placed.normal >= 0.0:
                axial = placed.fx * math.sin(tr) + placed.fz * math.cos(tr)
                if abs(axial) > trans_cap + FORCE_TOL:
                    new_slide = self._slide_pinned(tool, grasp_local, corner, anchor_x, slide, rot_held, caps)
                    if new_slide is None:
                        new_slide = slide + math.copysign(p.free_slide_speed * dt, axial)
                        free_sliding = True
                    slide = new_slide
                    finger = self.finger_point(tx, tz, tr, slide)
                    rot = self._turn_pinned(finger, grasp_local, corner, anchor_x, rot_held, rot_cap)
                return _Settled(
                    rot,
                    slide,
                    anchor,
                    free_sliding or abs(slide - slide0) > SLIDE_EPS,
                    abs(rot - rot_held) > ROT_EPS,
                )
            rot_start = rot
            left_surface = True

        load = self._hanging_load(tr, trans_cap)
        if load < self._weight:
            # nothing below the box: it keeps sliding out of the fingers
            slide += math.copysign(p.free_slide_speed * dt, math.cos(tr))
            free_sliding = True
        finger = self.finger_point(tx, tz, tr, slide)
        rot = self._swing(finger, grasp_local, rot_start, rot_cap)
        placed = self._hanging(finger, grasp_local, rot, load)
        corner, height, corner_x = self._lowest_corner(placed.obj_x, placed.obj_z, rot)
        if height < 0.0:
            if not left_surface:
                # touched down: pin the lowest corner where it landed
                rot = self._turn_pinned(finger, grasp_local, corner, corner_x, rot_held, rot_cap)
                return _Settled(rot, slide, (corner, corner_x), free_sliding, abs(rot - rot_held) > ROT_EPS)
            rot = self._touch_down(finger, grasp_local, rot_start, rot, load)
        return _Settled(rot, slide, None, free_sliding, abs(rot - rot_held) > ROT_EPS)

    # ------------------------------------------------------------------
    # stepping
    # ------------------------------------------------------------------

    def step(self, state: WorldState, cmd: StepCommand) -> Tuple[WorldState, StepEvents]:
        """
        Advance the world by one inner-loop period.

        Tool motion and grip width are rate limited, then the in-hand
        coordinates are resolved against friction and the loads recomputed.
        """
        p = self.params
        dt = cmd.dt
        sim_time = state.sim_time + dt

        if state.dropped:
            return state.model_copy(update={"sim_time": sim_time}), StepEvents()

        tx, tz = _approach_point(state.tool_x, state.tool_z, cmd.tool_x, cmd.tool_z, p.tool_vmax * dt)
        tr = _approach(state.tool_rot, cmd.tool_rot, p.tool_wmax * dt)
        width = _approach(state.grip_width, cmd.grip_width, p.grip_step)

        unchanged = (
            tx == state.tool_x
            and tz == state.tool_z
            and tr == state.tool_rot
            and width == state.grip_width
            and not state.translational_slipping
            and not state.rotational_slipping
        )
        if unchanged:
            events = StepEvents(pivot_complete=self._complete(state.rot))
            return state.model_copy(update={"sim_time": sim_time}), events

        grip_normal = self.grip_normal_for(width)
        anchor = (state.anchor_corner, state.anchor_x) if state.anchored else None
        settled = self._settle(
            (tx, tz, tr),
            (state.grasp_local_x, state.grasp_local_z),
            state.slide,
            state.in_hand_angle,
            anchor,
            grip_normal,
            dt,
        )

        moved = state.model_copy(update={"tool_x": tx, "tool_z": tz, "tool_rot": tr, "grip_width": width})
        new_state = self._finish(
            moved,
            settled.rot,
            settled.slide,
            settled.anchor,
            grip_normal=grip_normal,
            sim_time=sim_time,
            translational=settled.translational,
            rotational=settled.rotational,
        )

        events = StepEvents(
            lift_onset=new_state.lifted and not state.lifted,
            translational_slip=settled.translational,
            rotational_slip=settled.rotational,
            drop=new_state.dropped,
            pivot_complete=self._complete(new_state.rot),
        )
        if events.drop:
            logger.info("box slipped out of the grasp at t=%.3f s", sim_time)
        elif state.anchored and not new_state.anchored:
            logger.debug("box left the surface at t=%.3f s", sim_time)
        return new_state, events

    def _complete(self, rot: float) -> bool:
        return rot >= HALF_PI - self.params.angle_tol

    def _finish(
        self,
        state: WorldState,
        rot: float,
        slide: float,
        anchor: Optional[Tuple[int, float]],
        grip_normal: float,
        sim_time: float,
        translational: bool = False,
        rotational: bool = False,
    ) -> WorldState:
        p = self.params
        corner, anchor_x = anchor if anchor is not None else (state.anchor_corner, state.anchor_x)
        staged = state.model_copy(
            update={
                "rot": rot,
                "slide": slide,
                "grip_normal": grip_normal,
                "anchored": anchor is not None,
                "anchor_corner": corner,
                "anchor_x": anchor_x,
            }
        )
        st = self.solve_statics(staged)
        in_hand = state.tool_rot - rot
        dropped = slide > p.drop_slide
        update = {
            "obj_x": st.obj_x,
            "obj_z": st.obj_z,
            "in_hand_angle": in_hand,
            "grasp_x": st.grasp_x,
            "grasp_z": st.grasp_z,
            "surface_normal": st.surface_normal,
            "wrist_fx": st.grasp_fx,
            "wrist_fz": st.grasp_fz,
            "wrist_ty": st.grasp_torque,
            "axis_load": st.axis_load,
            "min_corner_height": st.min_corner_height,
            "sim_time": sim_time,
            "rot_slip_dir": _sign(in_hand - state.in_hand_angle) if rotational else 0.0,
            "lifted": anchor is None and st.min_corner_height > p.lift_tol,
            "translational_slipping": translational,
            "rotational_slipping": rotational,
            "dropped": dropped,
            "attached": not dropped,
        }
        if dropped:
            update.update(
                {"wrist_fx": 0.0, "wrist_fz": 0.0, "wrist_ty": 0.0, "axis_load": 0.0, "grip_normal": 0.0}
            )
        return staged.model_copy(update=update)


def _sign(value: float) -> float:
    return 1.0 if value > 0 else -1.0 if value < 0 else 0.0


def _approach(current: float, target: float, max_delta: float) -> float:
    delta = target - current
    if abs(delta) <= max_delta:
        return target
    return current + math.copysign(max_delta, delta)


def _approach_point(x: float, z: float, tx: float, tz: float, max_dist: float) -> Tuple[float, float]:
    dx, dz = tx - x, tz - z
    dist = math.hypot(dx, dz)
    if dist <= max_dist:
        return tx, tz
    k = max_dist / dist
    return x + dx * k, z + dz * k


def compute_work(trace: Sequence[Tuple[Sequence[float], Sequence[float]]]) -> float:
    """
    Positive mechanical work the robot delivers to the object.

    Args:
        trace: Time-ordered (wrench, pose) pairs; wrench is (fx, fz, ty) of
            the support the gripper gives the box, pose is (x, z, rot) of the
            grasp point with rot clockwise.

    Returns:
        float: Work in J.
    """
    if len(trace) < 2:
        return 0.0
    wrench = np.array([w for w, _ in trace], dtype=float)
    pose = np.array([q for _, q in trace], dtype=float)
    delta = np.diff(pose, axis=0)

    translational = wrench[:-1, 0] * delta[:, 0] + wrench[:-1, 1] * delta[:, 1]
    # torque is counter-clockwise, rot is clockwise
    rotational = -wrench[:-1, 2] * delta[:, 2]
    return float(np.clip(translational, 0.0, None).sum() + np.clip(rotational, 0.0, None).sum())


def judge_trial(
    trace: Sequence[WorldState],
    events: Sequence[StepEvents],
    params: ContactParams,
) -> Tuple[bool, bool, bool]:
    """
    Outcome flags of a finished trial.

    Returns:
        Tuple of (success, lifted_ever, slipped_off).
    """
    slipped_off = any(e.drop for e in events) or any(s.dropped for s in trace[-1:])
    lifted_ever = any(e.lift_onset for e in events)
    final_rot = trace[-1].rot if trace else 0.0
    success = (not slipped_off) and final_rot >= math.pi / 2 - params.angle_tol
    return success, lifted_ever, slipped_off
