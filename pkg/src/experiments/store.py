"""
Incremental record persistence (JSON Lines) with resume support
"""

from pathlib import Path
from typing import Dict, List, Set

import orjson
from loguru import logger

from ..models import ExperimentSpec, TrialFailure, TrialRecord
from .trial import TrialOutcome


class RecordStore:
    """records.jsonl + metadata.json inside one output directory"""

    RECORDS_FILE = "records.jsonl"
    METADATA_FILE = "metadata.json"

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)
        self.records_path = self.output_dir / self.RECORDS_FILE
        self.metadata_path = self.output_dir / self.METADATA_FILE

    def prepare(self, spec: ExperimentSpec) -> Set[int]:
        """
        Make the directory ready for ``spec``

        Returns:
            Trials already stored by an interrupted run of the same spec
        """
        self.output_dir.mkdir(parents=True, exist_ok=True)
        fingerprint = spec.fingerprint()

        if self.metadata_path.exists():
            previous = orjson.loads(self.metadata_path.read_bytes()).get("fingerprint")
            if previous == fingerprint:
                done = self._complete_trials(spec)
                if done:
                    logger.warning(f"Resuming run in {self.output_dir}: {len(done)} trials stored")
                return done
            if self.records_path.exists():
                stale = self.output_dir / f"records.{str(previous)[:12]}.jsonl"
                self.records_path.replace(stale)
                logger.warning(f"Spec changed; previous records moved to {stale.name}")

        self.metadata_path.write_bytes(
            orjson.dumps(self._metadata(spec), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
        )
        self.records_path.write_bytes(b"")
        return set()

    def _complete_trials(self, spec: ExperimentSpec) -> Set[int]:
        """Trials holding an outcome for every algorithm; partial trials are dropped"""
        outcomes = self.load()
        seen: Dict[int, Set[str]] = {}
        for outcome in outcomes:
            seen.setdefault(outcome.trial, set()).add(outcome.algorithm.value)
        wanted = {algorithm.value for algorithm in spec.algorithms}
        complete = {trial for trial, algorithms in seen.items() if algorithms >= wanted}
        if len(complete) < len(seen):
            kept = [outcome for outcome in outcomes if outcome.trial in complete]
            self.records_path.write_bytes(b"")
            self.append(kept)
            logger.warning(f"Dropped {len(seen) - len(complete)} partially stored trials")
        return complete

    @staticmethod
    def _metadata(spec: ExperimentSpec) -> dict:
        return {
            "fingerprint": spec.fingerprint(),
            "system": spec.system.label,
            "snr_sweep": "per-snr" if spec.reoptimize_per_snr else "rescaled",
            "reference_snr_db": spec.reference_snr_db,
            "spec": spec.model_dump(mode="json"),
        }

    def append(self, outcomes: List[TrialOutcome]) -> None:
        """Append the outcomes of one finished trial"""
        with open(self.records_path, "ab") as f:
            for outcome in outcomes:
                f.write(orjson.dumps(outcome.model_dump(mode="json")) + b"\n")

    def load(self) -> List[TrialOutcome]:
        """All stored outcomes; a truncated last line is ignored"""
        if not self.records_path.exists():
            return []
        outcomes: List[TrialOutcome] = []
        lines = self.records_path.read_bytes().splitlines()
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                data = orjson.loads(line)
            except orjson.JSONDecodeError:
                if number == len(lines):
                    logger.warning(f"Ignoring truncated record at line {number}")
                    continue
                raise
            if data.get("status") == "failed":
                outcomes.append(TrialFailure.model_validate(data))
            else:
                outcomes.append(TrialRecord.model_validate(data))
        return outcomes
