"""Trapezoidal velocity profile for a single straight segment."""
import math
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field


class TimedSegment(BaseModel):
    """
    Straight move from start to end with a trapezoidal (or triangular)
    speed profile. Positions are tuples of any dimension.
    """

    model_config = ConfigDict(frozen=True)

    start: Tuple[float, ...]
    end: Tuple[float, ...]
    vmax: float = Field(gt=0)
    amax: float = Field(gt=0)
    length: float
    duration: float
    t_accel: float  # time spent accelerating (and decelerating)
    v_peak: float

    def distance_at(self, t: float) -> float:
        """Distance travelled along the segment after t seconds."""
        if self.length == 0.0 or t <= 0.0:
            return 0.0
        if t >= self.duration:
            return self.length

        ta, vp, a = self.t_accel, self.v_peak, self.amax
        if t < ta:
            return 0.5 * a * t * t
        cruise_end = self.duration - ta
        d_accel = 0.5 * a * ta * ta
        if t <= cruise_end:
            return d_accel + vp * (t - ta)
        remaining = self.duration - t
        return self.length - 0.5 * a * remaining * remaining

    def position_at(self, t: float) -> Tuple[float, ...]:
        """Interpolated position after t seconds."""
        if self.length == 0.0:
            return self.end
        frac = self.distance_at(t) / self.length
        return tuple(s + (e - s) * frac for s, e in zip(self.start, self.end))


def time_parameterize(
    start: Tuple[float, ...],
    end: Tuple[float, ...],
    vmax: float,
    amax: float,
) -> TimedSegment:
    """
    Time a straight segment under velocity and acceleration limits.

    Args:
        start: Start position.
        end: End position, same dimension as start.
        vmax: Speed limit.
        amax: Acceleration limit.

    Returns:
        TimedSegment: Duration and evaluable profile.
    """
    if vmax <= 0 or amax <= 0:
        raise ValueError("vmax and amax must be positive")
    if len(start) != len(end):
        raise ValueError("start and end must have the same dimension")

    start = tuple(float(s) for s in start)
    end = tuple(float(e) for e in end)
    length = math.sqrt(sum((e - s) ** 2 for s, e in zip(start, end)))

    if length == 0.0:
        duration, t_accel, v_peak = 0.0, 0.0, 0.0
    elif length >= vmax * vmax / amax:
        t_accel = vmax / amax
        v_peak = vmax
        duration = length / vmax + t_accel
    else:
        # triangular: never reaches vmax
        t_accel = math.sqrt(length / amax)
        v_peak = amax * t_accel
        duration = 2.0 * t_accel

    return TimedSegment(
        start=start,
        end=end,
        vmax=vmax,
        amax=amax,
        length=length,
        duration=duration,
        t_accel=t_accel,
        v_peak=v_peak,
    )
