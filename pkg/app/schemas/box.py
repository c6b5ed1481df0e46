from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class PivotType(str, Enum):
    """Which face the box ends up standing on."""

    SHORT_TO_LONG = "short_to_long"
    LONG_TO_SHORT = "long_to_short"


class BoxSpec(BaseModel):
    """Physical box: dimensions in m, mass in kg, friction coefficients."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "box"
    dim_a: float = Field(gt=0)
    dim_b: float = Field(gt=0)
    dim_c: float = Field(gt=0)  # graspable thickness
    mass: float = Field(gt=0)
    mu_surface: float = Field(default=0.8, gt=0)
    mu_finger: float = Field(default=0.5, gt=0)
    com_offset: Tuple[float, float] = (0.0, 0.0)  # fractions of (L, W)

    @model_validator(mode="after")
    def _check_com(self) -> "BoxSpec":
        if any(abs(c) >= 0.5 for c in self.com_offset):
            raise ValueError("com_offset components must lie in (-0.5, 0.5)")
        return self


class PivotGeometry(BaseModel):
    """Pivot-plane quantities derived from a box and a pivot type."""

    model_config = ConfigDict(frozen=True)

    base_len: float = Field(gt=0)
    height: float = Field(gt=0)
    diagonal: float = Field(gt=0)
    diagonal_angle: float
    pivot_direction: int = 1
    degenerate: bool = False

    @property
    def L(self) -> float:
        return self.base_len

    @property
    def W(self) -> float:
        return self.height

    @property
    def r(self) -> float:
        return self.diagonal

    @property
    def theta(self) -> float:
        return self.diagonal_angle


class ArcPath(BaseModel):
    """
    Waypoints of the pivot arc, relative to the initial grasp point.

    Each waypoint is (dx, dz, phi_nominal) with dx already signed by the
    pivot direction.
    """

    waypoints: List[Tuple[float, float, float]]
    applied_base_noise: float = 0.0

    @property
    def count(self) -> int:
        return len(self.waypoints)


class GraspSpec(BaseModel):
    """Grasp point and pivot corner on the resting box, in surface coordinates."""

    model_config = ConfigDict(frozen=True)

    grasp_point: Tuple[float, float]
    pivot_corner: Tuple[float, float]
    approach: Tuple[float, float] = (0.0, -1.0)  # gripper axis, pointing down
