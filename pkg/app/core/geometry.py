"""
Pivot-plane geometry for a box grasped on its top corner.

Coordinates are 2D (x along the surface, z up). A positive pivot direction
means the box rotates clockwise about its bottom-right corner; a negative
direction mirrors every x.
"""
import logging
import math
from typing import Tuple

import numpy as np

from app.core.exceptions import GeometryError
from app.schemas.box import ArcPath, BoxSpec, GraspSpec, PivotGeometry, PivotType


logger = logging.getLogger(__name__)

GRAVITY = 9.81


def validate_graspable(box: BoxSpec, max_width: float) -> None:
    """
    Check that only the thickness fits between the fingers.

    Raises:
        GeometryError: If dim_c does not fit or another dimension also fits.
    """
    if box.dim_c > max_width:
        raise GeometryError(
            f"{box.name}: thickness {box.dim_c:.3f} m exceeds gripper opening {max_width:.3f} m"
        )
    if box.dim_a <= max_width or box.dim_b <= max_width:
        raise GeometryError(
            f"{box.name}: more than one dimension fits within the gripper opening"
        )


def make_pivot_geometry(
    box: BoxSpec,
    pivot_type: PivotType,
    direction: int = 1,
    require_distinct: bool = False,
) -> PivotGeometry:
    """
    Derive L, W, r and theta for the dim_a x dim_b face.

    Args:
        box: Box being pivoted.
        pivot_type: long_to_short stands the box on its long edge first.
        direction: +1 or -1 along the surface.
        require_distinct: Reject square faces, where both pivot types coincide.

    Returns:
        PivotGeometry: Derived quantities.
    """
    if direction not in (1, -1):
        raise GeometryError(f"pivot direction must be +1 or -1, got {direction}")

    long_side, short_side = max(box.dim_a, box.dim_b), min(box.dim_a, box.dim_b)
    degenerate = math.isclose(box.dim_a, box.dim_b, rel_tol=0.0, abs_tol=1e-12)
    if degenerate and require_distinct:
        raise GeometryError(f"{box.name}: square pivot face has no distinct pivot types")

    if PivotType(pivot_type) is PivotType.LONG_TO_SHORT:
        base_len, height = long_side, short_side
    else:
        base_len, height = short_side, long_side

    return PivotGeometry(
        base_len=base_len,
        height=height,
        diagonal=math.hypot(base_len, height),
        diagonal_angle=math.atan2(height, base_len),
        pivot_direction=direction,
        degenerate=degenerate,
    )


def ideal_pivot_force(geom: PivotGeometry, mass: float, phi: float) -> float:
    """
    Vertical force the wrist carries while pivoting at angle phi.

    The free-body balance about the pivot corner gives
    m*g*sin(alpha)*cos(beta)/2 with alpha = pi/2 - phi - theta and
    beta = phi + theta; past top dead center the wrist carries nothing.
    """
    beta = phi + geom.diagonal_angle
    if beta >= math.pi / 2:
        return 0.0
    alpha = math.pi / 2 - beta
    return max(0.0, mass * GRAVITY * math.sin(alpha) * math.cos(beta) / 2.0)


def initial_grip_threshold(
    geom: PivotGeometry,
    mass: float,
    mu_finger: float,
    safety: float = 1.5,
) -> float:
    """
    Total normal grip force needed to hold the box at the start of the pivot.

    Args:
        geom: Pivot geometry.
        mass: Box mass in kg.
        mu_finger: Finger pad friction coefficient.
        safety: Multiplier >= 1 on the bare friction bound.

    Returns:
        float: Summed normal force of both fingers in N.
    """
    if mu_finger <= 0:
        raise GeometryError("mu_finger must be positive")
    if safety < 1.0:
        raise GeometryError("safety factor must be at least 1")
    return safety * ideal_pivot_force(geom, mass, 0.0) / mu_finger


def generate_arc_path(geom: PivotGeometry, n: int = 50, base_noise: float = 0.0) -> ArcPath:
    """
    Grasp-point displacements that swing the box through 90 degrees.

    The base length is perturbed by base_noise before the arc is built, which
    is how a mis-measured box enters the plan.
    """
    if n < 2:
        raise GeometryError(f"arc path needs at least 2 waypoints, got {n}")

    base_len = geom.base_len + base_noise
    radius = math.hypot(base_len, geom.height)
    theta = math.atan2(geom.height, base_len)

    phis = np.linspace(0.0, math.pi / 2, n)
    dx = base_len - radius * np.cos(phis + theta)
    dz = radius * np.sin(phis + theta) - geom.height
    # the first waypoint is the grasp itself
    dx[0], dz[0] = 0.0, 0.0
    dx *= geom.pivot_direction

    waypoints = [(float(x), float(z), float(p)) for x, z, p in zip(dx, dz, phis)]
    logger.debug("arc path: n=%d radius=%.4f noise=%.3f", n, radius, base_noise)
    return ArcPath(waypoints=waypoints, applied_base_noise=base_noise)


def synthesize_grasp(
    box: BoxSpec,
    geom: PivotGeometry,
    object_pose: Tuple[float, float, float] = (0.0, 0.0, 0.0),
    max_width: float = 0.085,
) -> GraspSpec:
    """
    Place the grasp on the top corner opposite the pivot corner.

    Args:
        box: Box to grasp.
        geom: Pivot geometry for the chosen pivot type and direction.
        object_pose: (x, z, rot) of the box's base center on the surface.
        max_width: Maximum gripper opening in m.

    Returns:
        GraspSpec: Grasp point and pivot corner in surface coordinates.
    """
    if box.dim_c > max_width:
        raise GeometryError(
            f"{box.name}: thickness {box.dim_c:.3f} m exceeds gripper opening {max_width:.3f} m"
        )
    x, z, rot = object_pose
    if abs(rot) > 1e-9:
        raise GeometryError("grasp synthesis requires the box resting on the surface")

    half = geom.base_len / 2.0
    sign = geom.pivot_direction
    pivot_corner = (x + sign * half, z)
    grasp_point = (x - sign * half, z + geom.height)
    return GraspSpec(grasp_point=grasp_point, pivot_corner=pivot_corner)
