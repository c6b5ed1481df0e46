from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class MethodId(str, Enum):
    """Pivoting strategies compared in the experiments."""

    PICK_PLACE = "pick_place"
    OPEN_LOOP = "open_loop"
    VISION_ONLY = "vision_only"
    GRIPPER_ONLY = "gripper_only"
    FORCE_ONLY = "force_only"
    COMBINED = "combined"

    @property
    def uses_gripper_control(self) -> bool:
        return self in (MethodId.GRIPPER_ONLY, MethodId.COMBINED)

    @property
    def uses_force_control(self) -> bool:
        return self in (MethodId.FORCE_ONLY, MethodId.COMBINED)

    @property
    def uses_vision(self) -> bool:
        return self in (MethodId.VISION_ONLY, MethodId.COMBINED)

    @property
    def replans_per_waypoint(self) -> bool:
        return self not in (MethodId.OPEN_LOOP, MethodId.PICK_PLACE)


class SlipType(str, Enum):
    NONE = "none"
    ROTATIONAL = "rotational"
    TRANSLATIONAL = "translational"


class PIGains(BaseModel):
    """Gains of the force-based path offset controller, in m/N."""

    model_config = ConfigDict(extra="forbid")

    kp: float = Field(default=5e-4, ge=0)
    ki: float = Field(default=5e-5, ge=0)


class ControlParams(BaseModel):
    """Controller and motion settings."""

    model_config = ConfigDict(extra="forbid")

    gains: PIGains = PIGains()
    gain_v: float = Field(default=0.5, ge=0)
    height_deadband: float = Field(default=0.002, ge=0)  # m, vision heights below are ignored
    max_offset: float = Field(default=0.1, gt=0)  # m, bound on |z offset|
    safety: float = Field(default=1.5, ge=1.0)
    waypoints: int = Field(default=50, ge=2)
    vmax: float = Field(default=0.035, gt=0)  # m/s
    amax: float = Field(default=0.5, gt=0)  # m/s^2
    wmax: float = Field(default=0.35, gt=0)  # rad/s, pick and place rotation
    alpha_max: float = Field(default=1.0, gt=0)  # rad/s^2
    planning_pause: float = Field(default=0.35, ge=0)  # s
    rigid_compression: float = Field(default=0.003, ge=0)  # m, pads squeezed without tactile control
    noise_threshold: float = Field(default=0.1, ge=0)  # mm
    deformation_limit: float = Field(default=5.0, gt=0)  # mm
    dt: float = Field(default=0.002, gt=0, le=0.002)
    settle_time: float = Field(default=0.2, ge=0)  # s held after the last waypoint


class PositionCtlState(BaseModel):
    """Force-based offset controller memory."""

    offset: float = 0.0
    error_accum: float = 0.0
    waypoint_index: int = Field(default=0, ge=0)


class GripperCtlState(BaseModel):
    """Tactile gripper controller memory."""

    commanded_width: float = Field(ge=0)
    tighten_count: int = 0
    loosen_count: int = 0
