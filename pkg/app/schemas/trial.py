from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.box import BoxSpec, PivotType
from app.schemas.control import ControlParams, MethodId
from app.schemas.sensors import SensorParams
from app.schemas.world import ContactParams


class SimulationParams(BaseModel):
    """Everything a trial needs besides the scenario itself."""

    model_config = ConfigDict(extra="forbid")

    contact: ContactParams = ContactParams()
    sensors: SensorParams = SensorParams()
    control: ControlParams = ControlParams()
    com_jitter: float = Field(default=0.0, ge=0, lt=0.5)
    trace_every: int = Field(default=10, ge=1)  # inner steps per trace row


class Scenario(BaseModel):
    """One planned trial."""

    model_config = ConfigDict(frozen=True)

    box: BoxSpec
    pivot_type: PivotType
    base_noise: float = Field(default=0.0, ge=0)
    method: MethodId
    seed: int = Field(ge=0, lt=2**64)
    repeat: int = Field(default=0, ge=0)
    direction: int = 1

    @model_validator(mode="after")
    def _no_noisy_pick_place(self) -> "Scenario":
        if self.method is MethodId.PICK_PLACE and self.base_noise > 0:
            raise ValueError("pick_place does not use box dimensions, so base noise does not apply")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        return self

    @property
    def cell(self) -> tuple:
        return (self.box.name, self.pivot_type.value, self.base_noise, self.method.value)


class TraceRow(BaseModel):
    """One row of a trial trace."""

    t_s: float
    phi_rad: float
    fz_real_N: float
    fz_ideal_N: float
    x_m: float
    z_m: float
    grip_width_m: float
    event_flags: str = ""
    phi_est_rad: Optional[float] = None
    in_hand_angle_rad: float = 0.0
    surface_normal_N: float = 0.0
    slip_class: str = "none"


class TrialResult(BaseModel):
    """Outcome and traces of one trial."""

    box: str
    pivot: str
    noise: float
    method: str
    seed: int
    repeat: int = 0
    success: bool
    lifted: bool
    slipped_off: bool
    time: float = Field(ge=0)
    work: float = Field(ge=0)
    final_rot: float = 0.0
    failure_reason: Optional[str] = None
    waypoint_errors: List[float] = []
    trace: List[TraceRow] = []

    @property
    def cell(self) -> tuple:
        return (self.box, self.pivot, self.noise, self.method)


class AggregateRow(BaseModel):
    """Summary of a group of trials; time and work averaged over successes."""

    box: Optional[str] = None
    pivot: Optional[str] = None
    noise: Optional[float] = None
    method: str
    trials: int
    success_pct: float = Field(ge=0, le=100)
    lift_pct: float = Field(ge=0, le=100)
    slip_pct: float = Field(ge=0, le=100)
    time_s: Optional[float] = None
    work_j: Optional[float] = None
