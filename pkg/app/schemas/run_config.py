from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.box import BoxSpec, PivotType
from app.schemas.control import MethodId
from app.schemas.trial import SimulationParams


def _default_boxes() -> List[BoxSpec]:
    return [
        BoxSpec(name="small", dim_a=0.18, dim_b=0.11, dim_c=0.04, mass=1.27),
        BoxSpec(name="large", dim_a=0.23, dim_b=0.16, dim_c=0.05, mass=0.88),
        BoxSpec(name="long", dim_a=0.28, dim_b=0.12, dim_c=0.05, mass=1.72),
    ]


class RunConfig(BaseModel):
    """Experiment configuration as read from YAML."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=2023, ge=0)
    repeats: int = Field(default=10, ge=1)
    boxes: List[BoxSpec] = Field(default_factory=_default_boxes)
    methods: List[MethodId] = Field(default_factory=lambda: list(MethodId))
    pivots: List[PivotType] = Field(default_factory=lambda: list(PivotType))
    noise: List[float] = Field(default_factory=lambda: [0.0, 0.05])
    direction: int = 1
    parallel: int = Field(default=1, ge=1)
    output_dir: Optional[str] = None
    export_traces: bool = True
    simulation: SimulationParams = SimulationParams()

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        names = [b.name for b in self.boxes]
        if len(set(names)) != len(names):
            raise ValueError("box names must be unique")
        if any(n < 0 for n in self.noise):
            raise ValueError("noise values must be non-negative")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        return self

    def box(self, name: str) -> BoxSpec:
        for b in self.boxes:
            if b.name == name:
                return b
        raise KeyError(name)
