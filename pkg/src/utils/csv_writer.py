"""
CSV writer for trial records
アルゴリズム・SNR・試行ごとに1行のCSVを保存
"""

from pathlib import Path
from typing import Dict, List, Union

import pandas as pd
from loguru import logger

from ..models import TrialRecord

FLOAT_FORMAT = "%.15g"
BASE_COLUMNS = ["algorithm", "trial", "snr_db", "ssr"]
TAIL_COLUMNS = ["interf_power", "wiretap_power", "wall_ms"]


def record_columns(users: int) -> List[str]:
    """Header for a K-user system"""
    rates = [f"rate_user_{k}" for k in range(1, users + 1)]
    leaks = [f"leak_user_{k}" for k in range(1, users + 1)]
    return BASE_COLUMNS + rates + leaks + TAIL_COLUMNS


class CSVWriter:
    """CSV形式でトライアル結果を保存するクラス"""

    def __init__(self, float_format: str = FLOAT_FORMAT):
        self.float_format = float_format

    def records_frame(self, records: List[TrialRecord]) -> pd.DataFrame:
        """One row per record, sorted by (algorithm, snr_db, trial)"""
        users = len(records[0].rates)
        rows: List[Dict[str, Union[str, int, float]]] = []
        for record in records:
            if len(record.rates) != users or len(record.leakages) != users:
                raise ValueError("records disagree on the number of users")
            row: Dict[str, Union[str, int, float]] = {
                "algorithm": record.algorithm.value,
                "trial": record.trial,
                "snr_db": record.snr_db,
                "ssr": record.ssr,
            }
            for k, rate in enumerate(record.rates, start=1):
                row[f"rate_user_{k}"] = rate
            for k, leak in enumerate(record.leakages, start=1):
                row[f"leak_user_{k}"] = leak
            row["interf_power"] = record.interference_power
            row["wiretap_power"] = record.wiretap_power
            row["wall_ms"] = record.wall_ms
            rows.append(row)

        df = pd.DataFrame(rows, columns=record_columns(users))
        return df.sort_values(["algorithm", "snr_db", "trial"], kind="mergesort").reset_index(
            drop=True
        )

    def save_records(self, records: List[TrialRecord], path: Union[str, Path]) -> Path:
        """
        Save trial records to CSV

        Returns:
            Path of the written file
        """
        if not records:
            raise ValueError("no records to write")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        df = self.records_frame(records)
        df.to_csv(
            path,
            index=False,
            encoding="utf-8",
            float_format=self.float_format,
            lineterminator="\n",
        )

        logger.info(f"Saved {len(df)} records to {path}")
        return path


def emit_csv(records: List[TrialRecord], path: Union[str, Path]) -> Path:
    return CSVWriter().save_records(records, path)


def load_records_csv(path: Union[str, Path]) -> pd.DataFrame:
    """
    Read a CSV written by :func:`emit_csv` (or any CSV with at least
    ``algorithm,snr_db,ssr`` columns, e.g. externally produced curves)
    """
    df = pd.read_csv(path, encoding="utf-8")
    missing = {"algorithm", "snr_db", "ssr"} - set(df.columns)
    if missing:
        raise ValueError(f"{path} lacks columns: {', '.join(sorted(missing))}")
    df["algorithm"] = df["algorithm"].astype(str)
    return df
