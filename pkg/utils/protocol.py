# -*- coding: utf-8 -*-
'''
数据协议定义

求解器输出、界报告、预言量、实验记录等均以 pydantic 模型表示，
向量字段内部为 numpy 数组，序列化为 JSON 列表。
'''

import re
from enum import Enum
from typing import Annotated, Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator


def _as_vector(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=float)


def _as_index_set(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=np.int64).reshape(-1)


Vector = Annotated[
    np.ndarray,
    BeforeValidator(_as_vector),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]

IndexSet = Annotated[
    np.ndarray,
    BeforeValidator(_as_index_set),
    PlainSerializer(lambda a: [int(i) for i in a], return_type=list),
]


class ProgramModel(str, Enum):
    """
    凸规划类型
    """
    BP = "bp"
    QCBP = "qcbp"
    DS = "ds"
    LASSO = "lasso"

    def __str__(self):
        return str(self.value)


class StepRule(str, Enum):
    """
    步长规则
    """
    FIXED_LIPSCHITZ = "fixed_lipschitz"
    BACKTRACKING = "backtracking"

    def __str__(self):
        return str(self.value)


class ScaleMode(str, Enum):
    """
    高斯矩阵的缩放方式
    """
    RAW_OVER_SQRT_M = "raw_over_sqrt_m"
    NORMALIZE_COLUMNS = "normalize_columns"

    def __str__(self):
        return str(self.value)


class BoundId(str, Enum):
    """
    闭式误差界标识
    """
    STABLE_LASSO = "stable_lasso"
    STABLE_DS = "stable_ds"
    STABLE_QCBP = "stable_qcbp"
    GAUSSIAN_DS = "gaussian_ds"
    GAUSSIAN_LASSO = "gaussian_lasso"
    MINIMAX_EXPECTATION = "minimax_expectation"
    MINIMAX_PROBABILITY = "minimax_probability"
    ORACLE_SPARSE_DS = "oracle_sparse_ds"
    ORACLE_SPARSE_LASSO = "oracle_sparse_lasso"
    ORACLE_GENERAL_DS = "oracle_general_ds"
    ORACLE_GENERAL_LASSO = "oracle_general_lasso"
    HIGH_NOISE_DS = "high_noise_ds"
    HIGH_NOISE_LASSO = "high_noise_lasso"
    LOW_NOISE_DS = "low_noise_ds"
    LOW_NOISE_LASSO = "low_noise_lasso"

    def __str__(self):
        return str(self.value)


class NoiseRegime(str, Enum):
    """
    噪声水平分类
    """
    HIGH = "High"
    LOW = "Low"
    MEDIUM = "Medium"

    def __str__(self):
        return str(self.value)


class EnsembleKind(str, Enum):
    GAUSSIAN = "gaussian"
    IDENTITY_HADAMARD = "identity_hadamard"
    FILE = "file"

    def __str__(self):
        return str(self.value)


class SignalKind(str, Enum):
    RADEMACHER_SUPPORT = "rademacher_support"
    GAUSSIAN_SUPPORT = "gaussian_support"
    POWER_DECAY = "power_decay"

    def __str__(self):
        return str(self.value)


class LevelKind(str, Enum):
    """
    正则化/约束水平的选取规则
    """
    FIXED = "fixed"
    LAMBDA_STAR = "lambda_star"
    ETA_STAR = "eta_star"
    LAMBDA_EVENT_TIMES = "lambda_event_times"
    QCBP_FEASIBILITY = "qcbp_feasibility"

    def __str__(self):
        return str(self.value)


class FrozenModel(BaseModel):
    """
    不可变模型基类，允许 numpy 数组字段
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# 求解器相关

class SolverConfig(FrozenModel):
    """求解器配置"""
    tolerance: float = Field(default=1e-8, gt=0, description="KKT/可行性残差目标")
    max_iterations: int = Field(default=50000, ge=1)
    step_rule: StepRule = StepRule.FIXED_LIPSCHITZ
    dual_step_scale: float = Field(default=1.0, gt=0, le=1)
    power_iterations: int = Field(default=30, ge=1)
    power_tolerance: float = Field(default=1e-10, gt=0)
    check_every: int = Field(default=50, ge=1, description="证书检查与精修的周期")
    record_trace: bool = False


class SolveOutcome(FrozenModel):
    """求解结果"""
    model: ProgramModel
    estimate: Vector
    iterations: int
    converged: bool
    primal_residual: float
    optimality_residual: float
    objective: float
    level: Optional[float] = None
    objective_trace: Optional[List[float]] = None

    def raise_if_failed(self) -> "SolveOutcome":
        """
        未收敛时抛出 NotConverged
        """
        if not self.converged:
            from .exceptions import NotConverged
            raise NotConverged(
                f"[{self.model}] {self.iterations} 次迭代后未收敛: "
                f"primal={self.primal_residual:.3e}, optimality={self.optimality_residual:.3e}",
                outcome=self,
            )
        return self

    def to_output(self) -> Dict[str, Any]:
        """CLI 输出字段"""
        return self.model_dump(
            mode="json",
            include={"estimate", "iterations", "converged", "primal_residual", "optimality_residual", "objective"},
        )


# 测量矩阵相关

class SparsityBudget(FrozenModel):
    """稀疏度预算"""
    s_bp_ds: int = Field(ge=0)
    s_lasso: int = Field(ge=0)


class GramBoundsCheck(FrozenModel):
    lower: float
    upper: float
    min_eig: float
    max_eig: float
    holds: bool


# 误差界相关

class BoundReport(FrozenModel):
    """闭式误差界的求值结果"""
    theorem_id: BoundId
    value: Optional[float] = None
    applicable: bool
    condition_text: str
    inputs: Dict[str, float] = Field(default_factory=dict)
    probability: Optional[float] = None


class MinimaxTraceFloor(FrozenModel):
    trace_value: float
    closed_form: float
    max_eig: float
    spectral_upper: float
    holds: bool


# 预言量相关

class OracleQuantities(FrozenModel):
    """预言风险相关量"""
    s0: IndexSet
    k_value: float
    tau: float
    sigma: float = Field(gt=0)
    regime: NoiseRegime
    s_star: int
    s_bar: int


class SignalSplit(FrozenModel):
    x1: Vector
    x2: Vector
    l1_x2: float
    l2_x2: float
    l1_check: bool
    l2_check: bool


# 几何性质相关

class BestSTerm(FrozenModel):
    head: Vector
    tail: Vector


class ConeCheckLasso(FrozenModel):
    ineq1: bool
    ineq2: bool
    slack1: float
    slack2: float


class ConeCheckDs(FrozenModel):
    holds: bool
    slack: float


class RnspConstants(FrozenModel):
    """鲁棒零空间性质常数"""
    iota: float = Field(gt=1)
    s: int = Field(ge=1)
    mu: float
    delta: float
    rho: float
    tau_l2: float
    tau_ds: float
    applicable: bool


class RnspCheck(FrozenModel):
    holds: bool
    lhs: float
    rhs: float


class PolytopeDecomposition(FrozenModel):
    """多面体的稀疏凸组合表示"""
    weights: List[float]
    atoms: List[Vector]
    count: int = Field(ge=1)


# 实验相关

_CALL_PATTERN = re.compile(r"^\s*(\w+)\s*(?:\(\s*([^)]*?)\s*\))?\s*$")


def _parse_call(value: Any, key: str) -> Any:
    """
    解析 "name(arg)" 形式的简写，例如 "lambda_event_times(2)"
    """
    if not isinstance(value, str):
        return value
    matched = _CALL_PATTERN.match(value)
    if not matched:
        raise ValueError(f"无法解析: {value}")
    kind, arg = matched.groups()
    parsed: Dict[str, Any] = {"kind": kind}
    if arg:
        parsed[key] = float(arg)
    return parsed


class LevelRule(FrozenModel):
    kind: LevelKind
    value: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def _shorthand(cls, data: Any) -> Any:
        return _parse_call(data, "value")

    @model_validator(mode="after")
    def _needs_value(self) -> "LevelRule":
        if self.kind in (LevelKind.FIXED, LevelKind.LAMBDA_EVENT_TIMES) and self.value is None:
            raise ValueError(f"{self.kind} 需要给出 value")
        return self


class SignalSpec(FrozenModel):
    kind: SignalKind
    exponent: float = 1.0
    amplitude: float = Field(default=1.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _shorthand(cls, data: Any) -> Any:
        return _parse_call(data, "exponent")


class ExperimentConfig(FrozenModel):
    """Monte-Carlo 实验配置，与 JSON 配置文件逐字段对应"""
    ensemble: EnsembleKind
    m: int = Field(ge=1)
    n: int = Field(ge=2)
    s: int = Field(ge=0)
    signal_model: SignalSpec
    sigma: float = Field(ge=0)
    model: ProgramModel
    level_rule: Optional[LevelRule] = None
    trials: int = Field(ge=1)
    master_seed: int = Field(ge=0)
    checks: List[str] = Field(default_factory=list)
    matrix_file: Optional[str] = None
    scale_mode: ScaleMode = ScaleMode.NORMALIZE_COLUMNS
    redraw_matrix: bool = False
    solver: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.s > self.n:
            raise ValueError(f"s={self.s} 超过 n={self.n}")
        if self.ensemble == EnsembleKind.FILE and not self.matrix_file:
            raise ValueError("ensemble=file 需要 matrix_file")
        if self.model != ProgramModel.BP and self.level_rule is None:
            raise ValueError(f"model={self.model} 需要 level_rule")
        return self


class TrialRecord(FrozenModel):
    """单次 Monte-Carlo 试验记录"""
    trial_index: int
    seed: int
    event_E: bool
    noise_correlation: float
    level: Optional[float]
    error_l2: Optional[float]
    bound_values: Dict[str, Optional[float]]
    checks_passed: Dict[str, bool]
    checks_evaluated: Dict[str, bool]
    solver_converged: bool
    iterations: int


class CheckSummary(FrozenModel):
    kind: str
    evaluated: int
    passed: int
    violations: int
    pass_rate: Optional[float] = None
    frequency_floor: Optional[float] = None
    union_floor: Optional[float] = None
    frequency_floor_3sd: Optional[float] = None
    ok: bool


class ExperimentReport(FrozenModel):
    """实验汇总"""
    config: ExperimentConfig
    trials: int
    event_frequency: float
    event_probability_floor: Optional[float]
    solver_failures: int
    solver_failure_rate: float
    error_quantiles: Dict[str, float]
    bound_ratio_quantiles: Dict[str, Dict[str, float]]
    checks: Dict[str, CheckSummary]
    passed: bool


class PropertyReport(FrozenModel):
    property: str
    samples: int
    failures: int
    worst_slack: float


class AssertionResult(FrozenModel):
    name: str
    passed: bool
    samples: int
    failures: int
    worst_slack: Optional[float] = None
    detail: str = ""


class SuiteReport(FrozenModel):
    suite: str
    passed: bool
    assertions: List[AssertionResult]
