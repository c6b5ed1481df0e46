import pytest

from app.core.geometry import make_pivot_geometry
from app.schemas.box import BoxSpec, PivotType
from app.schemas.control import ControlParams
from app.schemas.sensors import SensorParams
from app.schemas.trial import SimulationParams
from app.schemas.world import ContactParams


BOXES = {
    "small": BoxSpec(name="small", dim_a=0.18, dim_b=0.11, dim_c=0.04, mass=1.27),
    "large": BoxSpec(name="large", dim_a=0.23, dim_b=0.16, dim_c=0.05, mass=0.88),
    "long": BoxSpec(name="long", dim_a=0.28, dim_b=0.12, dim_c=0.05, mass=1.72),
}


@pytest.fixture
def small_box() -> BoxSpec:
    return BOXES["small"]


@pytest.fixture
def small_geom(small_box):
    return make_pivot_geometry(small_box, PivotType.LONG_TO_SHORT)


@pytest.fixture
def contact() -> ContactParams:
    return ContactParams()


@pytest.fixture
def quiet_sensors() -> SensorParams:
    return SensorParams(sigma_tact=0.0, sigma_wrist=0.0, sigma_wrist_torque=0.0, sigma_pos=0.0, sigma_ang=0.0)


@pytest.fixture
def sim() -> SimulationParams:
    return SimulationParams()


@pytest.fixture
def quiet_sim(quiet_sensors) -> SimulationParams:
    return SimulationParams(sensors=quiet_sensors, control=ControlParams())
