import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SensorParams(BaseModel):
    """Noise, rate and latency settings of the synthetic sensors."""

    model_config = ConfigDict(extra="forbid")

    sigma_tact: float = Field(default=0.02, ge=0)  # mm
    sigma_wrist: float = Field(default=0.15, ge=0)  # N
    sigma_wrist_torque: float = Field(default=0.002, ge=0)  # N*m
    sigma_pos: float = Field(default=0.001, ge=0)  # m
    sigma_ang: float = Field(default=math.radians(0.5), ge=0)  # rad
    vision_rate: float = Field(default=30.0, gt=0)  # Hz
    vision_latency: float = Field(default=0.05, ge=0)  # s
    contact_force_threshold: float = Field(default=0.1, ge=0)  # N per element
    pitch: float = Field(default=6.0, gt=0)  # mm between element centers
    rot_slip_gain: float = Field(default=0.1, ge=0)  # mm displacement per mm offset
    stick_deflection: float = Field(default=0.08, ge=0)  # mm, sticking pad at the friction limit
    slip_deflection: float = Field(default=0.15, ge=0)  # mm, tip lag of a sliding pad


class TactileFrame(BaseModel):
    """
    One 3x3 reading of a fingertip array.

    Arrays are indexed [row, col, axis] with row 0 at the top and axis order
    (x, y, z); y is the pad normal.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    finger: int
    displacement: np.ndarray  # (3, 3, 3) mm
    force: np.ndarray  # (3, 3, 3) N
    in_contact: np.ndarray  # (3, 3) bool
    timestamp: float

    @property
    def normal_force(self) -> float:
        return float(self.force[..., 1].sum())


class WristWrench(BaseModel):
    """Wrist force/torque in the pivot plane."""

    fx: float
    fz: float
    ty: float
    timestamp: float


class VisionPose(BaseModel):
    """Box pose estimated from the marker."""

    x: float
    z: float
    rot: float
    phi_est: float
    corner_height: float  # lowest box corner above the surface
    timestamp: float
    fresh: bool = True



class SensorFrame(BaseModel):
    """Synchronised reading of all three modalities."""

    wrist: WristWrench
    tactile: Optional[tuple[TactileFrame, TactileFrame]] = None
    vision: Optional[VisionPose] = None
