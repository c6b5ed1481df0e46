import math

import numpy as np
import pytest

from app.core.geometry import ideal_pivot_force, initial_grip_threshold
from app.schemas.control import SlipType
from app.schemas.sensors import SensorParams
from app.schemas.world import WorldState
from app.services.controller_service import ControllerService
from app.services.sensor_service import SensorService, VisionSensor


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_open_gripper_reads_nothing(small_box, contact, quiet_sensors, rng):
    state = WorldState(grip_normal=0.0)
    frames = SensorService.sample_tactile(state, small_box, contact, quiet_sensors, rng)
    for frame in frames:
        assert not frame.in_contact.any()
        assert np.allclose(frame.displacement, 0.0)


def test_translational_slip_pushes_every_pillar_down(small_box, contact, quiet_sensors, rng):
    state = WorldState(grip_normal=10.0, axis_load=5.0, translational_slipping=True)
    frames = SensorService.sample_tactile(state, small_box, contact, quiet_sensors, rng)
    for frame in frames:
        assert frame.in_contact.all()
        assert np.all(frame.displacement[..., 2] < -0.1)
    assert ControllerService.classify_slip(frames) is SlipType.TRANSLATIONAL


def test_rotational_slip_splits_columns(small_box, contact, quiet_sensors, rng):
    state = WorldState(grip_normal=10.0, axis_load=1.0, rotational_slipping=True, rot_slip_dir=1.0)
    frames = SensorService.sample_tactile(state, small_box, contact, quiet_sensors, rng)
    dz = frames[0].displacement[..., 2]
    assert np.all(dz[:, 0] > 0.1)
    assert np.all(dz[:, 2] < -0.1)
    assert ControllerService.classify_slip(frames) is SlipType.ROTATIONAL


def test_normal_forces_sum_to_grip(small_box, contact, quiet_sensors, rng):
    state = WorldState(grip_normal=13.6, axis_load=2.0)
    frames = SensorService.sample_tactile(state, small_box, contact, quiet_sensors, rng)
    assert sum(f.normal_force for f in frames) == pytest.approx(13.6, abs=1e-6)
    assert frames[1].in_contact[1, 1]
    assert frames[1].force[1, 1, 1] == pytest.approx(13.6 / 18)


def test_held_box_below_capacity_stays_quiet(small_box, contact, quiet_sensors, rng):
    # threshold x 1.5 grip at the start of the pivot
    state = WorldState(grip_normal=13.6, axis_load=4.536)
    frames = SensorService.sample_tactile(state, small_box, contact, quiet_sensors, rng)
    assert ControllerService.classify_slip(frames) is SlipType.NONE


def test_slip_at_reduced_grip_reads_past_noise_gate(small_box, small_geom, contact, quiet_sensors, rng):
    # 0.8 x the bare friction threshold carrying the initial pivot load
    load = ideal_pivot_force(small_geom, small_box.mass, 0.0)
    grip = 0.8 * initial_grip_threshold(small_geom, small_box.mass, small_box.mu_finger, 1.0)
    state = WorldState(grip_normal=grip, axis_load=load, translational_slipping=True)
    frames = SensorService.sample_tactile(state, small_box, contact, quiet_sensors, rng)
    for frame in frames:
        assert np.all(frame.displacement[..., 2] < -0.1)
    assert ControllerService.classify_slip(frames) is SlipType.TRANSLATIONAL

    sticking = state.model_copy(update={"translational_slipping": False, "axis_load": 0.5 * grip})
    frames = SensorService.sample_tactile(sticking, small_box, contact, quiet_sensors, rng)
    assert ControllerService.classify_slip(frames) is SlipType.NONE


def test_wrist_without_noise(rng):
    state = WorldState(wrist_fx=0.3, wrist_fz=12.4587, wrist_ty=0.01, sim_time=1.0)
    wrench = SensorService.sample_wrist(state, 0.0, rng)
    assert (wrench.fx, wrench.fz, wrench.ty) == (0.3, 12.4587, 0.01)
    assert wrench.timestamp == 1.0


def test_wrist_noise_is_seeded():
    state = WorldState(wrist_fz=4.0)
    a = SensorService.sample_wrist(state, 0.15, np.random.default_rng(3))
    b = SensorService.sample_wrist(state, 0.15, np.random.default_rng(3))
    assert a == b
    assert a.fz != 4.0


def test_vision_exact_without_noise_or_latency(small_geom, quiet_sensors, rng):
    params = quiet_sensors.model_copy(update={"vision_latency": 0.0})
    sensor = VisionSensor(small_geom, params, rng)
    pose = sensor.sample(WorldState(rot=0.4, sim_time=0.0))
    assert pose.phi_est == 0.4
    assert pose.fresh


def test_vision_rate_limit(small_geom, quiet_sensors, rng):
    params = quiet_sensors.model_copy(update={"vision_latency": 0.0})
    sensor = VisionSensor(small_geom, params, rng)
    first = sensor.sample(WorldState(rot=0.4, sim_time=0.000))
    second = sensor.sample(WorldState(rot=0.5, sim_time=0.010))
    assert second.phi_est == first.phi_est
    assert not second.fresh
    third = sensor.sample(WorldState(rot=0.5, sim_time=0.034))
    assert third.fresh and third.phi_est == 0.5


def test_vision_latency_lags_rotation(small_geom, quiet_sensors, rng):
    params = quiet_sensors.model_copy(update={"vision_latency": 0.1})
    sensor = VisionSensor(small_geom, params, rng)
    omega = 0.2
    pose = None
    for k in range(501):
        t = k * 0.002
        pose = sensor.sample(WorldState(rot=omega * t, sim_time=t))
        if pose.fresh and t > 0.5:
            assert pose.phi_est == pytest.approx(omega * (t - 0.1), abs=omega * 0.0021)


def test_vision_history_stays_bounded(small_geom, quiet_sensors, rng):
    params = quiet_sensors.model_copy(update={"vision_latency": 0.1})
    sensor = VisionSensor(small_geom, params, rng)
    window = params.vision_latency + 1.0 / params.vision_rate
    for k in range(5000):
        t = k * 0.002
        pose = sensor.sample(WorldState(rot=0.1 * t, sim_time=t))
        assert sensor.buffered <= window / 0.002 + 2
    assert pose.phi_est == pytest.approx(0.1 * (pose.timestamp - 0.1), abs=0.1 * 0.0021)


def test_vision_clamps_phi(small_geom, quiet_sensors, rng):
    params = quiet_sensors.model_copy(update={"vision_latency": 0.0})
    sensor = VisionSensor(small_geom, params, rng)
    assert sensor.sample(WorldState(rot=2.0)).phi_est == pytest.approx(math.radians(95))


def test_vision_corner_height(small_geom, quiet_sensors, rng):
    params = quiet_sensors.model_copy(update={"vision_latency": 0.0})
    sensor = VisionSensor(small_geom, params, rng)
    pose = sensor.sample(WorldState(obj_x=0.0, obj_z=0.01, rot=0.0))
    assert pose.corner_height == pytest.approx(0.01)


def test_vision_angle_noise_statistics(small_geom):
    params = SensorParams(sigma_pos=0.0, sigma_ang=math.radians(1.0), vision_latency=0.0)
    sensor = VisionSensor(small_geom, params, np.random.default_rng(11))
    errors = []
    for k in range(10_000):
        pose = sensor.sample(WorldState(rot=0.5, sim_time=k / 30.0))
        assert pose.fresh
        errors.append(pose.rot - 0.5)
    std = math.degrees(float(np.std(errors)))
    assert 0.8 <= std <= 1.2
