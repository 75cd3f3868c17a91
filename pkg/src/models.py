"""
Data models for secure MIMO interference alignment.
システムモデル・アルゴリズム設定・試行結果のデータ定義
"""

import hashlib
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import orjson
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from .config import Config
from .exceptions import ExperimentSpecError
from .solver.problem import SolverOptions
from .utils.arrays import ComplexArray


class AlgorithmName(str, Enum):
    """Algorithms known to the experiment harness"""

    NN = "nn"
    RNN = "rnn"
    CONVENTIONAL = "conventional"


class WeightSide(str, Enum):
    """Side on which the wiretap weight multiplies S_e"""

    LEFT = "left"
    RIGHT = "right"


class SystemConfig(BaseModel):
    """
    (N_t×N_r, N_re, d)^K システムの次元と電力
    SNR は P_t / sigma2 から導出し、独立には保持しない
    """

    model_config = ConfigDict(frozen=True)

    K: int = Field(..., ge=1, description="Tx-Rxペア数")
    N_t: int = Field(..., ge=1, description="送信アンテナ数")
    N_r: int = Field(..., ge=1, description="正規受信機のアンテナ数")
    N_re: int = Field(..., ge=1, description="盗聴者のアンテナ数")
    d: int = Field(..., ge=1, description="ペアあたりのデータストリーム数")
    P_t: float = Field(1.0, gt=0, description="送信機あたりの総送信電力（線形）")
    sigma2: float = Field(1.0, gt=0, description="受信アンテナあたりの雑音分散")
    sigma2_e: Optional[float] = Field(None, gt=0, description="盗聴者の雑音分散（未指定時はsigma2）")

    @model_validator(mode="after")
    def _check_streams(self) -> "SystemConfig":
        if self.d > min(self.N_t, self.N_r):
            raise ValueError(
                f"d={self.d} exceeds min(N_t, N_r)={min(self.N_t, self.N_r)}"
            )
        return self

    @property
    def snr(self) -> float:
        return self.P_t / self.sigma2

    @property
    def snr_db(self) -> float:
        return float(10.0 * np.log10(self.snr))

    @property
    def eavesdropper_noise(self) -> float:
        return self.sigma2 if self.sigma2_e is None else self.sigma2_e

    @property
    def stream_power(self) -> float:
        """Per-stream power P_t / d used by the Gram convention"""
        return self.P_t / self.d

    @property
    def wiretap_rank_bound(self) -> int:
        """d_e = min(N_re, K·d)"""
        return min(self.N_re, self.K * self.d)

    @property
    def label(self) -> str:
        return f"({self.N_t}x{self.N_r},{self.N_re},{self.d})^{self.K}"

    def at_snr_db(self, snr_db: float) -> "SystemConfig":
        """Same system with P_t set so that P_t / sigma2 hits ``snr_db``"""
        return self.model_copy(update={"P_t": self.sigma2 * 10.0 ** (snr_db / 10.0)})


class ChannelSet(BaseModel):
    """
    全チャネル行列 H[k][l]
    legitimate[k, l] は Tx l → Rx k、eavesdropper[l] は Tx l → 盗聴者 (行 K)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    legitimate: ComplexArray = Field(..., description="(K, K, N_r, N_t)")
    eavesdropper: ComplexArray = Field(..., description="(K, N_re, N_t)")
    seed: Optional[int] = Field(None, description="生成に使ったシード")

    @model_validator(mode="after")
    def _check_shapes(self) -> "ChannelSet":
        if self.legitimate.ndim != 4 or self.legitimate.shape[0] != self.legitimate.shape[1]:
            raise ValueError(f"legitimate must be (K, K, N_r, N_t), got {self.legitimate.shape}")
        if self.eavesdropper.ndim != 3 or self.eavesdropper.shape[0] != self.legitimate.shape[0]:
            raise ValueError(f"eavesdropper must be (K, N_re, N_t), got {self.eavesdropper.shape}")
        if self.eavesdropper.shape[2] != self.legitimate.shape[3]:
            raise ValueError("legitimate and eavesdropper disagree on N_t")
        return self

    @property
    def K(self) -> int:
        return int(self.legitimate.shape[0])

    def link(self, k: int, l: int) -> np.ndarray:
        """H[k][l]; row ``k == K`` is the eavesdropper"""
        if k == self.K:
            return self.eavesdropper[l]
        return self.legitimate[k, l]


class PrecoderSet(BaseModel):
    """送信プリコーダ F_k (K, N_t, d)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    F: ComplexArray = Field(..., description="(K, N_t, d)")

    def gram_error(self, scale: float) -> float:
        """max_k |F_k^H F_k − scale·I|"""
        d = self.F.shape[2]
        grams = np.einsum("kij,kil->kjl", self.F.conj(), self.F)
        return float(np.max(np.abs(grams - scale * np.eye(d))))

    def scaled(self, factor: float) -> "PrecoderSet":
        return PrecoderSet(F=self.F * factor)


class ReceiverSet(BaseModel):
    """受信部分空間行列 W_k (K, N_r, d)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    W: ComplexArray = Field(..., description="(K, N_r, d)")

    def gram_error(self) -> float:
        d = self.W.shape[2]
        grams = np.einsum("kij,kil->kjl", self.W.conj(), self.W)
        return float(np.max(np.abs(grams - np.eye(d))))


class AlignmentState(BaseModel):
    """所望信号行列 S_k、干渉行列 J_k、盗聴信号行列 S_e"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    S: ComplexArray = Field(..., description="(K, d, d)")
    J: ComplexArray = Field(..., description="(K, d, (K-1)d)")
    S_e: ComplexArray = Field(..., description="(N_re, K·d)")


class PropernessReport(BaseModel):
    """完全IAの適正条件と盗聴者アンテナ数の条件"""

    system: str = Field(..., description="システム表記")
    transmit_condition: bool = Field(..., description="N_t − d ≥ N_re")
    receive_condition: bool = Field(..., description="N_r ≥ K·d")
    eavesdropper_condition: bool = Field(
        ..., description="N_re ≤ (K(N_t+N_r) − (K²+1)d)/(K−1)（K=1 では常に真）"
    )

    @property
    def proper(self) -> bool:
        return self.transmit_condition and self.receive_condition

    @property
    def all_conditions(self) -> bool:
        return self.proper and self.eavesdropper_condition


class RnnWeights(BaseModel):
    """再重み付け行列 Ξ_k と Φ_e"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    Xi: ComplexArray = Field(..., description="(K, d, d)")
    Phi: ComplexArray = Field(..., description="(d_e, d_e)")
    side: WeightSide = Field(..., description="Φ_e が S_e に掛かる側")

    @classmethod
    def identity(cls, config: SystemConfig) -> "RnnWeights":
        """Initial weights Ξ_k = I_d, Φ_e = I_{d_e}"""
        side = WeightSide.LEFT if config.N_re < config.K * config.d else WeightSide.RIGHT
        return cls(
            Xi=np.broadcast_to(np.eye(config.d), (config.K, config.d, config.d)),
            Phi=np.eye(config.wiretap_rank_bound),
            side=side,
        )


class NnIaOptions(BaseModel):
    """Secure NN IA の設定"""

    model_config = ConfigDict(frozen=True)

    kappa_max: int = Field(5, ge=1, description="外側反復の上限")
    epsilon: float = Field(0.1, gt=0, description="スペクトル下限 ε")
    seed: int = Field(0, ge=0, description="初期プリコーダのシード")
    tolerance: float = Field(1e-4, gt=0, description="目的関数の相対変化による収束判定")
    solver: SolverOptions = Field(default_factory=SolverOptions)


class RnnIaOptions(BaseModel):
    """Secure RNN IA の設定"""

    model_config = ConfigDict(frozen=True)

    kappa_max: int = Field(3, ge=1, description="MM外側反復の上限")
    m_max: int = Field(3, ge=1, description="内側座標降下の上限")
    epsilon: float = Field(0.1, gt=0, description="スペクトル下限 ε")
    gamma: float = Field(1e-2, gt=0, description="J_k 項の平滑化定数 γ")
    zeta: float = Field(1e-2, gt=0, description="S_e 項の平滑化定数 ζ")
    seed: int = Field(0, ge=0, description="初期プリコーダのシード")
    tolerance: float = Field(1e-4, gt=0, description="相対変化による収束判定")
    solver: SolverOptions = Field(default_factory=SolverOptions)


class BaselineOptions(BaseModel):
    """従来型（最小干渉リーク）IA の設定"""

    model_config = ConfigDict(frozen=True)

    iterations: int = Field(100, ge=1, description="交互最小化の反復回数")
    seed: int = Field(0, ge=0, description="初期プリコーダのシード")


class IaResult(BaseModel):
    """IAアルゴリズムの出力"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    precoders: PrecoderSet
    receivers: ReceiverSet
    history: List[float] = Field(default_factory=list, description="外側反復ごとの目的関数値")
    initial_objective: float = Field(..., description="初期点での目的関数値")
    iterations: int = Field(..., ge=0, description="実行した外側反復数")
    converged: bool = Field(False, description="反復上限前に収束したか")
    subproblem_margins: List[float] = Field(
        default_factory=list, description="各部分問題の λ_min(Herm(S_k)) − ε の最小値"
    )

    @property
    def final_objective(self) -> float:
        return self.history[-1] if self.history else self.initial_objective


class RateReport(BaseModel):
    """ユーザ別レート・漏洩レート・秘匿和レート (bits/s/Hz)"""

    per_user_rate: List[float] = Field(..., description="R_k")
    per_user_leakage: List[float] = Field(..., description="R_k^(e)")
    per_user_secrecy: List[float] = Field(..., description="[R_k − R_k^(e)]^+")
    ssr: float = Field(..., ge=0, description="秘匿和レート R_S")

    @model_validator(mode="after")
    def _check_sum(self) -> "RateReport":
        if any(value < 0 for value in self.per_user_secrecy):
            raise ValueError("per-user secrecy rates must be non-negative")
        if abs(sum(self.per_user_secrecy) - self.ssr) > 1e-9 * max(1.0, self.ssr):
            raise ValueError("ssr must equal the sum of per-user secrecy rates")
        return self


class TrialRecord(BaseModel):
    """1つの (アルゴリズム, チャネル実現, SNR) の結果"""

    algorithm: AlgorithmName
    trial: int = Field(..., ge=0)
    snr_db: float
    ssr: float = Field(..., ge=0)
    rates: List[float] = Field(..., description="ユーザ別レート")
    leakages: List[float] = Field(..., description="ユーザ別漏洩レート")
    interference_power: float = Field(..., ge=0, description="Σ_k ||J_k||_F²")
    wiretap_power: float = Field(..., ge=0, description="||S_e||_F²")
    interference_rank: int = Field(..., ge=0, description="Σ_k rank(J_k)")
    wiretap_rank: int = Field(..., ge=0, description="rank(S_e)")
    min_sigma_desired: float = Field(..., description="min_k σ_min(S_k)")
    initial_objective: float
    final_objective: float
    iterations: int = Field(..., ge=0)
    wall_ms: float = Field(0.0, ge=0)
    status: str = Field("ok")


class TrialFailure(BaseModel):
    """除外された (試行, アルゴリズム) の記録"""

    algorithm: AlgorithmName
    trial: int = Field(..., ge=0)
    snr_db: Optional[float] = None
    error_type: str
    message: str
    status: str = Field("failed")


class SummaryRow(BaseModel):
    algorithm: str
    snr_db: float
    mean_ssr: float
    stderr: float
    count: int


class ExperimentSummary(BaseModel):
    """アルゴリズム・SNRごとの平均SSRと標準誤差"""

    rows: List[SummaryRow] = Field(default_factory=list)
    failures: Dict[str, int] = Field(default_factory=dict, description="アルゴリズム別の失敗数")
    record_count: int = 0

    def mean(self, algorithm: str, snr_db: float) -> float:
        for row in self.rows:
            if row.algorithm == algorithm and abs(row.snr_db - snr_db) < 1e-9:
                return row.mean_ssr
        raise KeyError(f"No summary row for {algorithm} at {snr_db} dB")


class ExperimentSpec(BaseModel):
    """
    モンテカルロ実験の定義
    system.P_t は参照SNR（グリッドの中央値）での電力
    """

    model_config = ConfigDict(frozen=True)

    system: SystemConfig
    snr_db: List[float] = Field(..., min_length=1, description="SNRグリッド (dB)")
    trials: int = Field(..., ge=1, description="チャネル実現数")
    algorithms: List[AlgorithmName] = Field(..., min_length=1)
    nn: NnIaOptions = Field(default_factory=NnIaOptions)
    rnn: RnnIaOptions = Field(default_factory=RnnIaOptions)
    baseline: BaselineOptions = Field(default_factory=BaselineOptions)
    master_seed: int = Field(0, ge=0)
    output_dir: Path = Field(Path("output"))
    reoptimize_per_snr: bool = Field(False, description="SNRごとに再最適化する感度解析モード")
    record_wall_time: bool = Field(
        False, description="True なら試行ごとの実行時間を記録（CSVは非決定的になる）"
    )
    workers: Optional[int] = Field(
        None, ge=1, description="同時に実行する試行数（未指定なら環境変数 MAX_WORKERS）"
    )

    @field_validator("snr_db")
    @classmethod
    def _check_grid(cls, value: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("snr grid must be strictly increasing")
        return value

    @field_validator("algorithms")
    @classmethod
    def _unique_algorithms(cls, value: List[AlgorithmName]) -> List[AlgorithmName]:
        if len(set(value)) != len(value):
            raise ValueError("algorithms must not repeat")
        return value

    @property
    def reference_snr_db(self) -> float:
        return float(np.median(self.snr_db))

    def fingerprint(self) -> str:
        """Hash of everything that determines the records"""
        payload = self.model_dump(mode="json", exclude={"output_dir", "workers"})
        return hashlib.sha256(orjson.dumps(payload, option=orjson.OPT_SORT_KEYS)).hexdigest()

    @classmethod
    def from_flat(cls, values: Dict[str, Any]) -> "ExperimentSpec":
        """
        Build a spec from flat ``key = value`` entries

        Args:
            values: Keys as listed in ``Config.EXPERIMENT_KEYS``; values may be
                raw strings from an experiment file or already typed overrides

        Returns:
            Validated experiment spec
        """

        def listing(raw: Any) -> List[str]:
            if isinstance(raw, str):
                return [item.strip() for item in raw.split(",") if item.strip()]
            return [str(item) for item in raw]

        def flag(raw: Any) -> bool:
            if isinstance(raw, bool):
                return raw
            return str(raw).strip().lower() in ("1", "true", "yes", "on")

        snr_grid = [float(item) for item in listing(values.get("snr_db", "0,10,20,30"))]
        if not snr_grid:
            raise ExperimentSpecError("snr_db needs at least one value")
        sigma2 = float(values.get("sigma2", 1.0))
        system = SystemConfig(
            K=values.get("k", 3),
            N_t=values.get("n_t", 18),
            N_r=values.get("n_r", 12),
            N_re=values.get("n_re", 9),
            d=values.get("d", 3),
            sigma2=sigma2,
            sigma2_e=values.get("sigma2_e"),
            P_t=sigma2 * 10.0 ** (float(np.median(snr_grid)) / 10.0),
        )

        solver: Dict[str, Any] = Config.solver_defaults()
        for key, name in (
            ("solver_tolerance", "tolerance"),
            ("solver_max_iterations", "max_iterations"),
            ("solver_penalty", "penalty"),
        ):
            if key in values:
                solver[name] = values[key]
        solver_options = SolverOptions(**solver)

        epsilon = values.get("epsilon", 0.1)
        nn = NnIaOptions(
            kappa_max=values.get("nn_kappa_max", 5), epsilon=epsilon, solver=solver_options
        )
        rnn = RnnIaOptions(
            kappa_max=values.get("rnn_kappa_max", 3),
            m_max=values.get("rnn_m_max", 3),
            epsilon=epsilon,
            gamma=values.get("gamma", 1e-2),
            zeta=values.get("zeta", 1e-2),
            solver=solver_options,
        )
        baseline = BaselineOptions(iterations=values.get("baseline_iterations", 100))

        return cls(
            system=system,
            snr_db=snr_grid,
            trials=values.get("trials", 200),
            algorithms=listing(values.get("algorithms", "nn,rnn,conventional")),
            nn=nn,
            rnn=rnn,
            baseline=baseline,
            master_seed=values.get("master_seed", 0),
            output_dir=Path(str(values.get("output_dir", Config.OUTPUT_DIR))),
            reoptimize_per_snr=flag(values.get("reoptimize_per_snr", False)),
            record_wall_time=flag(values.get("record_wall_time", False)),
            workers=values.get("workers"),
        )
