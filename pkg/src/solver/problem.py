"""
Problem description for the spectral solver

A problem is a sum of (optionally weighted) nuclear norms of affine matrix
maps of named complex variable blocks, subject to spectral-floor
constraints λ_min((M + M^H)/2) ≥ ε on square affine maps.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import Config
from ..exceptions import DimensionError
from ..utils.arrays import ComplexArray


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-major vectorisation"""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return np.asarray(vector).reshape((rows, cols), order="F")


class VariableBlock(BaseModel):
    """A named complex decision matrix"""

    model_config = ConfigDict(frozen=True)

    name: str
    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)

    @property
    def size(self) -> int:
        return self.rows * self.cols


class MapTerm(BaseModel):
    """One summand left·X_block·right of an affine map"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    block: str
    left: ComplexArray
    right: ComplexArray


class AffineMatrixMap(BaseModel):
    """X ↦ constant + Σ left·X_block·right"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    constant: ComplexArray
    terms: List[MapTerm] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_conformity(self) -> "AffineMatrixMap":
        if self.constant.ndim != 2:
            raise DimensionError(f"constant must be a matrix, got {self.constant.shape}")
        rows, cols = self.constant.shape
        for term in self.terms:
            if term.left.ndim != 2 or term.right.ndim != 2:
                raise DimensionError(f"factors of block '{term.block}' must be matrices")
            if term.left.shape[0] != rows or term.right.shape[1] != cols:
                raise DimensionError(
                    f"term on block '{term.block}' yields "
                    f"{term.left.shape[0]}x{term.right.shape[1]}, map is {rows}x{cols}"
                )
        return self

    @classmethod
    def linear(
        cls, shape: Tuple[int, int], terms: List[Tuple[str, np.ndarray, np.ndarray]]
    ) -> "AffineMatrixMap":
        """Map with a zero constant"""
        return cls(
            constant=np.zeros(shape, dtype=np.complex128),
            terms=[MapTerm(block=b, left=left, right=right) for b, left, right in terms],
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.constant.shape  # type: ignore[return-value]

    @property
    def is_homogeneous(self) -> bool:
        return not np.any(self.constant)

    def evaluate(self, blocks: Dict[str, np.ndarray]) -> np.ndarray:
        value = np.array(self.constant, dtype=np.complex128)
        for term in self.terms:
            if term.block not in blocks:
                raise DimensionError(f"no value for block '{term.block}'")
            block = blocks[term.block]
            if term.left.shape[1] != block.shape[0] or term.right.shape[0] != block.shape[1]:
                raise DimensionError(
                    f"block '{term.block}' has shape {block.shape}, "
                    f"term expects {term.left.shape[1]}x{term.right.shape[0]}"
                )
            value = value + term.left @ block @ term.right
        return value

    def operator(self, layout: "BlockLayout") -> Tuple[np.ndarray, np.ndarray]:
        """
        Vectorised form vec(map(X)) = G·x + c

        Args:
            layout: Offsets of every block inside the stacked variable x

        Returns:
            (G, c) with G of shape (rows·cols, layout.size)
        """
        rows, cols = self.shape
        matrix = np.zeros((rows * cols, layout.size), dtype=np.complex128)
        for term in self.terms:
            start, block = layout.slot(term.block)
            if term.left.shape[1] != block.rows or term.right.shape[0] != block.cols:
                raise DimensionError(
                    f"term on block '{term.block}' does not conform to {block.rows}x{block.cols}"
                )
            matrix[:, start : start + block.size] += np.kron(term.right.T, term.left)
        return matrix, vec(self.constant)


class ObjectiveTerm(BaseModel):
    """||left_weight · map(X) · right_weight||_*"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    map: AffineMatrixMap
    left_weight: Optional[ComplexArray] = None
    right_weight: Optional[ComplexArray] = None

    @model_validator(mode="after")
    def _check_weights(self) -> "ObjectiveTerm":
        rows, cols = self.map.shape
        if self.left_weight is not None and self.left_weight.shape[1] != rows:
            raise DimensionError(
                f"left weight {self.left_weight.shape} does not conform to {rows}x{cols}"
            )
        if self.right_weight is not None and self.right_weight.shape[0] != cols:
            raise DimensionError(
                f"right weight {self.right_weight.shape} does not conform to {rows}x{cols}"
            )
        return self

    def weighted(self, value: np.ndarray) -> np.ndarray:
        if self.left_weight is not None:
            value = self.left_weight @ value
        if self.right_weight is not None:
            value = value @ self.right_weight
        return value

    def operator(self, layout: "BlockLayout") -> Tuple[np.ndarray, np.ndarray, Tuple[int, int]]:
        matrix, constant = self.map.operator(layout)
        rows, cols = self.map.shape
        left = self.left_weight if self.left_weight is not None else np.eye(rows)
        right = self.right_weight if self.right_weight is not None else np.eye(cols)
        weight = np.kron(right.T, left)
        return weight @ matrix, weight @ constant, (left.shape[0], right.shape[1])


class FloorConstraint(BaseModel):
    """λ_min((M + M^H)/2) ≥ ε for a square map M"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    map: AffineMatrixMap
    epsilon: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _check_square(self) -> "FloorConstraint":
        rows, cols = self.map.shape
        if rows != cols:
            raise DimensionError(f"floor constraint needs a square map, got {rows}x{cols}")
        return self


class BlockLayout:
    """Offsets of the variable blocks inside one stacked vector"""

    def __init__(self, blocks: List[VariableBlock]):
        self.blocks = blocks
        self._slots: Dict[str, Tuple[int, VariableBlock]] = {}
        offset = 0
        for block in blocks:
            if block.name in self._slots:
                raise DimensionError(f"duplicate variable block '{block.name}'")
            self._slots[block.name] = (offset, block)
            offset += block.size
        self.size = offset

    def slot(self, name: str) -> Tuple[int, VariableBlock]:
        if name not in self._slots:
            raise DimensionError(f"unknown variable block '{name}'")
        return self._slots[name]

    def split(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        return {
            name: unvec(x[start : start + block.size], block.rows, block.cols)
            for name, (start, block) in self._slots.items()
        }

    def stack(self, blocks: Dict[str, np.ndarray]) -> np.ndarray:
        x = np.zeros(self.size, dtype=np.complex128)
        for name, (start, block) in self._slots.items():
            if name not in blocks:
                raise DimensionError(f"no value for block '{name}'")
            if blocks[name].shape != (block.rows, block.cols):
                raise DimensionError(
                    f"block '{name}' has shape {blocks[name].shape}, "
                    f"expected {(block.rows, block.cols)}"
                )
            x[start : start + block.size] = vec(blocks[name])
        return x


class NuclearNormProblem(BaseModel):
    """
    min Σ ||L_t·A_t(X)·R_t||_*  s.t.  Herm(B_c(X)) ⪰ ε_c·I
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    objective_terms: List[ObjectiveTerm] = Field(default_factory=list)
    floor_constraints: List[FloorConstraint] = Field(default_factory=list)
    variable_blocks: List[VariableBlock] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_blocks(self) -> "NuclearNormProblem":
        layout = self.layout()
        maps = [term.map for term in self.objective_terms]
        maps += [constraint.map for constraint in self.floor_constraints]
        for affine in maps:
            affine.operator(layout)
        return self

    def layout(self) -> BlockLayout:
        return BlockLayout(self.variable_blocks)

    def zero_blocks(self) -> Dict[str, np.ndarray]:
        return {
            block.name: np.zeros((block.rows, block.cols), dtype=np.complex128)
            for block in self.variable_blocks
        }


class SolverOptions(BaseModel):
    """ADMM 設定"""

    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(
        default_factory=lambda: Config.SOLVER_TOLERANCE, gt=0, description="残差の許容値"
    )
    max_iterations: int = Field(
        default_factory=lambda: Config.SOLVER_MAX_ITERATIONS, ge=1, description="反復上限"
    )
    penalty: float = Field(
        default_factory=lambda: Config.SOLVER_PENALTY, gt=0, description="初期ペナルティ ρ"
    )
    adaptive_penalty: bool = Field(
        False, description="序盤の反復だけ残差バランシングで ρ を調整する"
    )
    penalty_warmup: int = Field(
        100, ge=0, description="ρ の調整を許す反復数（これ以降 ρ は固定）"
    )
    infeasibility_threshold: float = Field(
        1e-3, gt=0, description="打ち切り時にこれを超える制約違反は実行不能と判定"
    )


class SolverResult(BaseModel):
    """Outcome of one spectral solve"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    blocks: Dict[str, ComplexArray]
    objective: float
    constraint_violation: float = Field(..., ge=0)
    iterations: int = Field(..., ge=0)
    converged: bool
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    penalty: float = Field(1.0, gt=0)
