from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ContactParams(BaseModel):
    """Contact, friction and gripper constants of the simulated world."""

    model_config = ConfigDict(extra="forbid")

    pad_stiffness: float = Field(default=5000.0, gt=0)  # N/m
    pillar_shear_stiffness: float = Field(default=2.0, gt=0)  # N/mm
    surface_stiffness: float = Field(default=50000.0, gt=0)  # N/m
    grasp_stiffness: float = Field(default=2000.0, gt=0)  # N/m, arm and finger compliance at the grasp
    mu_rot: float = Field(default=0.5, ge=0)
    rot_contact_radius: float = Field(default=0.006, ge=0)  # m
    rigid_pad_stiffness: float = Field(default=20000.0, gt=0)  # N/m, rubberised fingers
    rigid_contact_radius: float = Field(default=0.03, ge=0)  # m
    max_width: float = Field(default=0.085, gt=0)
    grip_step: Optional[float] = None  # defaults to max_width / 256
    penetration_bound: float = Field(default=0.001, gt=0)
    drop_slide: float = Field(default=0.020, gt=0)
    free_slide_speed: float = Field(default=0.1, gt=0)  # m/s once friction cannot hold
    tool_vmax: float = Field(default=0.25, gt=0)
    tool_wmax: float = Field(default=2.0, gt=0)  # rad/s
    lift_tol: float = Field(default=0.002, ge=0)
    angle_tol: float = Field(default=0.017453292519943295, ge=0)

    @model_validator(mode="after")
    def _default_grip_step(self) -> "ContactParams":
        if self.grip_step is None:
            self.grip_step = self.max_width / 256.0
        return self


class StepCommand(BaseModel):
    """Targets for one inner-loop step."""

    model_config = ConfigDict(frozen=True)

    tool_x: float
    tool_z: float
    tool_rot: float = 0.0
    grip_width: float = Field(ge=0)
    dt: float = Field(default=0.002, gt=0, le=0.002)


class StepEvents(BaseModel):
    """Events raised during one step."""

    lift_onset: bool = False
    translational_slip: bool = False
    rotational_slip: bool = False
    drop: bool = False
    pivot_complete: bool = False


class WorldState(BaseModel):
    """
    Ground-truth state in the pivot frame (positive pivot direction).

    The box pose is the position of its pivot corner plus its clockwise
    rotation, which always equals tool_rot - in_hand_angle. Only slip changes
    in_hand_angle and slide. Wrist wrench is the support the gripper gives the
    box; fz > 0 means the wrist carries weight.
    """

    model_config = ConfigDict(validate_assignment=False)

    obj_x: float = 0.0
    obj_z: float = 0.0
    rot: float = 0.0
    in_hand_angle: float = 0.0
    slide: float = 0.0  # box displacement along the gripper axis, down positive
    grasp_local_x: float = 0.0
    grasp_local_z: float = 0.0
    grasp_x: float = 0.0
    grasp_z: float = 0.0
    tool_x: float = 0.0
    tool_z: float = 0.0
    tool_rot: float = 0.0
    grip_width: float = 0.0
    grip_normal: float = Field(default=0.0, ge=0)
    surface_normal: float = Field(default=0.0, ge=0)
    wrist_fx: float = 0.0
    wrist_fz: float = 0.0
    wrist_ty: float = 0.0
    axis_load: float = 0.0  # grasp load along the gripper axis
    min_corner_height: float = 0.0
    attached: bool = True
    anchored: bool = True  # a corner is pinned to the surface
    anchor_corner: int = 0  # index into the box corners, pivot corner first
    anchor_x: float = 0.0
    sim_time: float = 0.0
    rot_slip_dir: float = 0.0
    lifted: bool = False
    translational_slipping: bool = False
    rotational_slipping: bool = False
    dropped: bool = False
