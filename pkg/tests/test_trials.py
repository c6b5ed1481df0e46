import math
from statistics import mean

import pytest

from app.schemas.box import PivotType
from app.schemas.control import ControlParams, MethodId
from app.schemas.run_config import RunConfig
from app.schemas.trial import Scenario
from app.schemas.world import ContactParams
from app.services.batch_service import BatchService
from app.services import trial_service
from app.services.trial_service import TrialService
from tests.conftest import BOXES


def scenario(method, box="small", pivot=PivotType.LONG_TO_SHORT, noise=0.0, seed=7):
    return Scenario(box=BOXES[box], pivot_type=pivot, base_noise=noise, method=method, seed=seed)


def test_pick_place_lift_height(small_box, small_geom):
    phases = TrialService.plan_pick_place(small_box, small_geom, ControlParams(), ContactParams())
    assert [p.name for p in phases] == ["lift", "rotate", "lower"]
    lift = phases[0].segment
    assert lift.end[1] - lift.start[1] == pytest.approx(math.hypot(0.09, 0.11) + 0.002)
    assert phases[1].segment.end[0] == pytest.approx(math.pi / 2)
    # lowest corner back on the surface after the quarter turn
    assert phases[2].segment.end[1] == pytest.approx(0.09)


@pytest.mark.parametrize("direction", [1, -1])
def test_trials_take_the_synthesized_grasp(sim, small_geom, direction, monkeypatch):
    calls = []
    real = trial_service.synthesize_grasp

    def spy(*args, **kwargs):
        calls.append(args)
        return real(*args, **kwargs)

    monkeypatch.setattr(trial_service, "synthesize_grasp", spy)
    L, W = small_geom.base_len, small_geom.height
    for method, expected in ((MethodId.OPEN_LOOP, (-L, W)), (MethodId.PICK_PLACE, (-L / 2.0, W))):
        s = scenario(method).model_copy(update={"direction": direction})
        runner = trial_service._TrialRunner(method, s, sim)
        assert (runner.state.grasp_local_x, runner.state.grasp_local_z) == pytest.approx(expected)
        assert (runner.state.tool_x, runner.state.tool_z) == pytest.approx(expected)
    assert len(calls) == 2


def test_pick_place_rejects_noise():
    with pytest.raises(ValueError):
        scenario(MethodId.PICK_PLACE, noise=0.05)


@pytest.mark.slow
def test_pick_place_completes(sim):
    result = TrialService.run_method(MethodId.PICK_PLACE, scenario(MethodId.PICK_PLACE), sim)
    assert result.success
    assert result.final_rot == pytest.approx(math.pi / 2, abs=math.radians(1.0))
    assert result.work > 0


@pytest.mark.slow
def test_open_loop_without_noise_completes(sim):
    result = TrialService.run_method(MethodId.OPEN_LOOP, scenario(MethodId.OPEN_LOOP), sim)
    assert result.success
    assert result.failure_reason is None
    assert result.trace[0].t_s == pytest.approx(0.0, abs=0.01)


@pytest.mark.slow
@pytest.mark.parametrize("box", sorted(BOXES))
def test_open_loop_with_noise_lifts(sim, box):
    result = TrialService.run_method(MethodId.OPEN_LOOP, scenario(MethodId.OPEN_LOOP, box, noise=0.05), sim)
    assert not result.success
    assert result.lifted


@pytest.mark.slow
@pytest.mark.parametrize("pivot", list(PivotType))
@pytest.mark.parametrize("noise", [0.0, 0.05])
@pytest.mark.parametrize("box", sorted(BOXES))
def test_combined_succeeds(sim, box, pivot, noise):
    result = TrialService.run_method(MethodId.COMBINED, scenario(MethodId.COMBINED, box, pivot, noise), sim)
    assert result.success, result.failure_reason
    assert not result.lifted
    assert not result.slipped_off


@pytest.mark.slow
@pytest.mark.parametrize("box", sorted(BOXES))
def test_force_error_shrinks_along_the_path(sim, box):
    result = TrialService.run_method(MethodId.COMBINED, scenario(MethodId.COMBINED, box, noise=0.05), sim)
    errors = result.waypoint_errors
    quarter = max(1, len(errors) // 4)
    assert mean(errors[-quarter:]) < 0.5 * mean(errors[:quarter])


@pytest.mark.slow
def test_work_and_time_ordering(sim):
    config = RunConfig(
        repeats=1,
        noise=[0.0],
        methods=[MethodId.PICK_PLACE, MethodId.OPEN_LOOP, MethodId.COMBINED],
    )
    results, _ = BatchService.run_batch(BatchService.build_grid(config), sim)
    by_cell = {}
    for r in results:
        by_cell.setdefault((r.box, r.pivot), {})[r.method] = r

    for cell in by_cell.values():
        assert cell["combined"].work < cell["pick_place"].work

    def avg(method, field):
        return mean(getattr(c[method], field) for c in by_cell.values())

    assert avg("pick_place", "work") >= 2 * avg("combined", "work")
    assert avg("open_loop", "time") < avg("pick_place", "time") < avg("combined", "time")


@pytest.mark.slow
def test_trials_are_deterministic(sim):
    first = TrialService.run_method(MethodId.COMBINED, scenario(MethodId.COMBINED, noise=0.05), sim)
    second = TrialService.run_method(MethodId.COMBINED, scenario(MethodId.COMBINED, noise=0.05), sim)
    assert first.model_dump() == second.model_dump()
