"""
Exceptions raised by the secure interference-alignment simulator
"""


class SecureIaError(Exception):
    """Base class for all simulator errors"""


class DimensionError(SecureIaError, ValueError):
    """Matrix shapes do not conform"""


class DegenerateIterateError(SecureIaError):
    """An iterate lost column rank and cannot be orthonormalized"""

    def __init__(self, message: str, sigma_min: float = 0.0, sigma_max: float = 0.0):
        super().__init__(message)
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max


class InfeasibleProblemError(SecureIaError):
    """The spectral solver could not reach the floor constraints"""

    def __init__(self, message: str, violation: float, iterations: int):
        super().__init__(message)
        self.violation = violation
        self.iterations = iterations


class RateComputationError(SecureIaError):
    """A covariance in a log-det rate formula is not usable"""

    def __init__(self, message: str, condition_number: float):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class ExperimentSpecError(SecureIaError, ValueError):
    """Invalid experiment file or command-line override"""
