"""Scenario grids, batch execution and per-cell aggregation."""
import logging
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from tqdm import tqdm

from app.schemas.control import MethodId
from app.schemas.run_config import RunConfig
from app.schemas.trial import AggregateRow, Scenario, SimulationParams, TrialResult
from app.services.trial_service import TrialService
from app.utils.seeding import derive_seed


logger = logging.getLogger(__name__)


class BatchService:
    """Builds and runs experiment grids."""

    @staticmethod
    def build_grid(config: RunConfig) -> List[Scenario]:
        """
        Cross product of boxes, pivots, noise values, methods and repeats.

        Pick and place is only run without noise. Order is fixed by the
        config lists; seeds come from the master seed and the scenario key.
        """
        scenarios: List[Scenario] = []
        for box in config.boxes:
            for pivot in config.pivots:
                for noise in config.noise:
                    for method in config.methods:
                        if method is MethodId.PICK_PLACE and noise > 0:
                            continue
                        for repeat in range(config.repeats):
                            seed = derive_seed(
                                config.seed, box.name, pivot.value, f"{noise:.6f}", method.value, repeat
                            )
                            scenarios.append(
                                Scenario(
                                    box=box,
                                    pivot_type=pivot,
                                    base_noise=noise,
                                    method=method,
                                    seed=seed,
                                    repeat=repeat,
                                    direction=config.direction,
                                )
                            )
        return scenarios

    @staticmethod
    def run_batch(
        scenarios: Sequence[Scenario],
        sim: SimulationParams,
        parallelism: int = 1,
        progress: bool = False,
    ) -> Tuple[List[TrialResult], List[AggregateRow]]:
        """
        Run every scenario and aggregate per cell.

        Results come back in scenario order whatever the parallelism, so the
        output is identical for any worker count.

        Returns:
            Tuple of (results, per-cell aggregate rows).
        """
        logger.info("batch start: %d trials on %d worker(s)", len(scenarios), parallelism)
        jobs = [(s, sim) for s in scenarios]
        if parallelism <= 1 or len(jobs) <= 1:
            results = [run_scenario(job) for job in tqdm(jobs, disable=not progress, desc="trials")]
        else:
            with ProcessPoolExecutor(max_workers=parallelism) as pool:
                results = list(
                    tqdm(pool.map(run_scenario, jobs), total=len(jobs), disable=not progress, desc="trials")
                )

        rows = aggregate(results)
        failed = sum(not r.success for r in results)
        logger.info("batch done: %d trials, %d failed", len(results), failed)
        return results, rows


def run_scenario(job: Tuple[Scenario, SimulationParams]) -> TrialResult:
    """Run one scenario, turning any error into a failed result."""
    scenario, sim = job
    try:
        return TrialService.run_method(scenario.method, scenario, sim)
    except Exception as exc:  # a broken trial must not abort the batch
        logger.warning("trial %d failed: %s", scenario.seed, exc)
        return TrialResult(
            box=scenario.box.name,
            pivot=scenario.pivot_type.value,
            noise=scenario.base_noise,
            method=scenario.method.value,
            seed=scenario.seed,
            repeat=scenario.repeat,
            success=False,
            lifted=False,
            slipped_off=False,
            time=0.0,
            work=0.0,
            failure_reason=f"diagnostic: {type(exc).__name__}: {exc}",
        )


def _summarize(results: Sequence[TrialResult], **key) -> AggregateRow:
    n = len(results)
    successes = [r for r in results if r.success]
    time_s: Optional[float] = None
    work_j: Optional[float] = None
    if successes:
        time_s = sum(r.time for r in successes) / len(successes)
        work_j = sum(r.work for r in successes) / len(successes)
    return AggregateRow(
        trials=n,
        success_pct=100.0 * len(successes) / n,
        lift_pct=100.0 * sum(r.lifted for r in results) / n,
        slip_pct=100.0 * sum(r.slipped_off for r in results) / n,
        time_s=time_s,
        work_j=work_j,
        **key,
    )


def aggregate(results: Iterable[TrialResult]) -> List[AggregateRow]:
    """One row per (box, pivot, noise, method) cell, in first-seen order."""
    cells: Dict[tuple, List[TrialResult]] = OrderedDict()
    for r in results:
        cells.setdefault(r.cell, []).append(r)
    return [
        _summarize(group, box=box, pivot=pivot, noise=noise, method=method)
        for (box, pivot, noise, method), group in cells.items()
    ]


def aggregate_overall(results: Iterable[TrialResult]) -> List[AggregateRow]:
    """One row per method over all boxes, pivots and noise values."""
    groups: Dict[str, List[TrialResult]] = OrderedDict()
    for r in results:
        groups.setdefault(r.method, []).append(r)
    return [_summarize(group, method=method) for method, group in groups.items()]
