"""
Configuration for the secure interference-alignment simulator
"""

import os
from pathlib import Path
from typing import Any, Dict, Union

from dotenv import dotenv_values, load_dotenv

from .exceptions import ExperimentSpecError

# Load environment variables
load_dotenv()


class Config:
    """Configuration settings"""

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("LOG_FILE", "secure_ia.log")

    # Worker pool
    MAX_WORKERS = int(os.getenv("MAX_WORKERS", str(os.cpu_count() or 1)))
    TRIAL_RETRIES = int(os.getenv("TRIAL_RETRIES", "3"))

    # Output
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "output")

    # Spectral solver defaults
    SOLVER_TOLERANCE = float(os.getenv("SOLVER_TOLERANCE", "1e-6"))
    SOLVER_MAX_ITERATIONS = int(os.getenv("SOLVER_MAX_ITERATIONS", "2000"))
    SOLVER_PENALTY = float(os.getenv("SOLVER_PENALTY", "1.0"))

    # 実験ファイルで使えるキー
    EXPERIMENT_KEYS = (
        "k",
        "n_t",
        "n_r",
        "n_re",
        "d",
        "sigma2",
        "sigma2_e",
        "snr_db",
        "trials",
        "algorithms",
        "master_seed",
        "output_dir",
        "epsilon",
        "nn_kappa_max",
        "rnn_kappa_max",
        "rnn_m_max",
        "gamma",
        "zeta",
        "baseline_iterations",
        "solver_tolerance",
        "solver_max_iterations",
        "solver_penalty",
        "reoptimize_per_snr",
        "record_wall_time",
        "workers",
    )

    @classmethod
    def solver_defaults(cls) -> Dict[str, Any]:
        """Get default spectral solver options"""
        return {
            "tolerance": cls.SOLVER_TOLERANCE,
            "max_iterations": cls.SOLVER_MAX_ITERATIONS,
            "penalty": cls.SOLVER_PENALTY,
        }

    @classmethod
    def read_experiment_file(cls, path: Union[str, Path]) -> Dict[str, str]:
        """
        Read a flat ``key = value`` experiment file

        Args:
            path: Experiment file (``#`` starts a comment)

        Returns:
            Mapping of lower-cased keys to raw string values
        """
        path = Path(path)
        if not path.is_file():
            raise ExperimentSpecError(f"Experiment file not found: {path}")

        raw = dotenv_values(path)
        values: Dict[str, str] = {}
        for key, value in raw.items():
            name = key.strip().lower()
            if name not in cls.EXPERIMENT_KEYS:
                raise ExperimentSpecError(f"Unknown key '{key}' in {path}")
            if value is None or value.strip() == "":
                raise ExperimentSpecError(f"Key '{key}' has no value in {path}")
            values[name] = value.strip()
        return values
