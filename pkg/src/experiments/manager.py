"""
Manager for running Monte-Carlo trials across a worker pool
"""

import asyncio
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd
from loguru import logger

from ..config import Config
from ..models import (
    ExperimentSpec,
    ExperimentSummary,
    SummaryRow,
    TrialFailure,
    TrialRecord,
)
from .store import RecordStore
from .trial import TrialOutcome, run_trial


def _sort_key(spec: ExperimentSpec) -> Callable[[TrialOutcome], Tuple[int, int, float]]:
    order = {algorithm: index for index, algorithm in enumerate(spec.algorithms)}

    def key(outcome: TrialOutcome) -> Tuple[int, int, float]:
        snr = outcome.snr_db if outcome.snr_db is not None else float("-inf")
        return outcome.trial, order.get(outcome.algorithm, len(order)), snr

    return key


def summary_from_frame(
    df: pd.DataFrame, failures: Optional[Dict[str, int]] = None
) -> ExperimentSummary:
    """Mean SSR and its standard error per (algorithm, SNR) of an algorithm,snr_db,ssr table"""
    grouped = df.groupby(["algorithm", "snr_db"], sort=True)["ssr"].agg(["mean", "sem", "count"])
    rows = [
        SummaryRow(
            algorithm=str(algorithm),
            snr_db=float(snr_db),
            mean_ssr=float(row["mean"]),
            stderr=0.0 if pd.isna(row["sem"]) else float(row["sem"]),
            count=int(row["count"]),
        )
        for (algorithm, snr_db), row in grouped.iterrows()
    ]
    return ExperimentSummary(rows=rows, failures=failures or {}, record_count=len(df))


def summarize(records: List[TrialRecord], failures: List[TrialFailure]) -> ExperimentSummary:
    counts: Dict[str, int] = {}
    for failure in failures:
        counts[failure.algorithm.value] = counts.get(failure.algorithm.value, 0) + 1
    if not records:
        return ExperimentSummary(rows=[], failures=counts, record_count=0)
    df = pd.DataFrame(
        {
            "algorithm": [record.algorithm.value for record in records],
            "snr_db": [record.snr_db for record in records],
            "ssr": [record.ssr for record in records],
        }
    )
    return summary_from_frame(df, counts)


class ExperimentManager:
    """Runs every trial of an experiment and persists the outcomes as they arrive"""

    def __init__(self, spec: ExperimentSpec, store: Optional[RecordStore] = None):
        self.spec = spec
        self.store = store or RecordStore(spec.output_dir)
        self.outcomes: List[TrialOutcome] = []

    async def run_one(
        self, trial: int, semaphore: asyncio.Semaphore, executor: Optional[Executor]
    ) -> List[TrialOutcome]:
        """Run one trial in the pool (or in-process without one) and store it"""
        async with semaphore:
            if executor is None:
                outcomes = run_trial(self.spec, trial)
            else:
                loop = asyncio.get_running_loop()
                outcomes = await loop.run_in_executor(executor, run_trial, self.spec, trial)
            self.store.append(outcomes)
            return outcomes

    async def run_all(self, workers: Optional[int] = None) -> List[TrialOutcome]:
        """
        Run all pending trials

        Args:
            workers: Maximum number of trials in flight; defaults to
                ExperimentSpec.workers, then to Config.MAX_WORKERS

        Returns:
            Stored and new outcomes sorted by (trial, algorithm, snr_db)
        """
        workers = workers or self.spec.workers or Config.MAX_WORKERS
        done = self.store.prepare(self.spec)
        pending = [trial for trial in range(self.spec.trials) if trial not in done]

        logger.info(
            f"Running {len(pending)} of {self.spec.trials} trials on {self.spec.system.label} "
            f"({', '.join(a.value for a in self.spec.algorithms)}) with {workers} workers"
        )

        semaphore = asyncio.Semaphore(workers)
        if workers == 1:
            for trial in pending:
                await self.run_one(trial, semaphore, None)
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                tasks = [self.run_one(trial, semaphore, executor) for trial in pending]
                await asyncio.gather(*tasks)

        self.outcomes = sorted(self.store.load(), key=_sort_key(self.spec))
        return self.outcomes

    @property
    def records(self) -> List[TrialRecord]:
        return [outcome for outcome in self.outcomes if isinstance(outcome, TrialRecord)]

    @property
    def failures(self) -> List[TrialFailure]:
        return [outcome for outcome in self.outcomes if isinstance(outcome, TrialFailure)]

    def get_summary(self) -> ExperimentSummary:
        summary = summarize(self.records, self.failures)
        for algorithm, count in summary.failures.items():
            logger.warning(f"{algorithm}: {count} failed trials excluded from the averages")
        return summary


def run_experiment(spec: ExperimentSpec) -> Tuple[List[TrialRecord], ExperimentSummary]:
    """
    Run an experiment end to end

    Returns:
        Successful records sorted by (trial, algorithm, snr_db) and the summary
    """
    manager = ExperimentManager(spec)
    asyncio.run(manager.run_all())
    summary = manager.get_summary()
    logger.success(
        f"Experiment finished: {summary.record_count} records, "
        f"{sum(summary.failures.values())} failures"
    )
    return manager.records, summary

