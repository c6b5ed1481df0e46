import math

import numpy as np
import pytest

from app.core.timing import time_parameterize


def test_zero_length_segment():
    seg = time_parameterize((0.1, 0.2), (0.1, 0.2), 0.035, 0.5)
    assert seg.duration == 0.0
    assert seg.position_at(1.0) == (0.1, 0.2)


def test_trapezoid_duration():
    seg = time_parameterize((0.0, 0.0), (1.0, 0.0), 0.035, 0.5)
    assert seg.duration == pytest.approx(1.0 / 0.035 + 0.035 / 0.5)
    assert seg.v_peak == 0.035


def test_triangular_duration():
    d = 0.001  # below vmax^2/amax = 2.45 mm
    seg = time_parameterize((0.0,), (d,), 0.035, 0.5)
    assert seg.duration == pytest.approx(2 * math.sqrt(d / 0.5))
    assert seg.v_peak < 0.035


@pytest.mark.parametrize("length", [0.0005, 0.0066, 0.3])
def test_profile_respects_limits(length):
    vmax, amax = 0.035, 0.5
    seg = time_parameterize((0.0, 0.0), (0.0, length), vmax, amax)
    assert seg.duration >= length / vmax
    times = np.linspace(0.0, seg.duration, 400)
    dist = np.array([seg.distance_at(t) for t in times])
    assert np.all(np.diff(dist) >= -1e-15)
    speed = np.diff(dist) / np.diff(times)
    assert np.all(speed <= vmax + 1e-9)
    assert seg.position_at(seg.duration) == pytest.approx((0.0, length))


def test_position_interpolates_along_line():
    seg = time_parameterize((0.0, 0.0), (0.3, 0.4), 0.035, 0.5)
    x, z = seg.position_at(seg.duration / 2)
    assert x / z == pytest.approx(0.75)
    assert math.hypot(x, z) == pytest.approx(0.25, abs=1e-9)


def test_rejects_bad_limits():
    with pytest.raises(ValueError):
        time_parameterize((0.0,), (1.0,), 0.0, 1.0)
