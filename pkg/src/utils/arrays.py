"""
Shared array helpers for pydantic models
"""

from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator


def frozen_complex(value: Any) -> np.ndarray:
    """Copy to a read-only complex128 array"""
    array = np.array(value, dtype=np.complex128)
    array.setflags(write=False)
    return array


ComplexArray = Annotated[np.ndarray, BeforeValidator(frozen_complex)]
