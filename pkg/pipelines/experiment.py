# -*- coding: utf-8 -*-
'''
Monte-Carlo 实验流水线: 生成 (A, x, z)，求解，计算误差界与检查项，汇总并输出 CSV/JSON
'''

import asyncio
import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import ValidationError
from yacs.config import CfgNode as CN

from engine.enginePool import SolverPool, default_pool
from sensing.bounds import event_probability_floor, gaussian_width, qcbp_feasibility_level
from sensing.measurement import (
    MeasurementMatrix,
    coherence,
    gaussian_ensemble,
    identity_hadamard_ensemble,
    normalize_columns,
)
from sensing.signals import draw_signal
from utils.config import SEED_ENV_VAR, load_config
from utils.exceptions import ConfigError, MipRecoverError
from utils.matrix_io import read_array
from utils.protocol import (
    CheckSummary,
    EnsembleKind,
    ExperimentConfig,
    ExperimentReport,
    LevelKind,
    LevelRule,
    ProgramModel,
    ScaleMode,
    SolveOutcome,
    SolverConfig,
    TrialRecord,
)
from utils.rng import derived_seed, make_generator
from .checks import FREQUENCY_CHECKS, Checks, CheckResult, TrialContext, frequency_floor, run_checks

# 配置日志
logger = logging.getLogger(__name__)

# 平方误差界，比值按 ||x_hat - x||_2^2 计算
SQUARED_CHECKS = ("gaussian_sparse", "oracle_sparse", "high_noise")
QUANTILES = {"min": 0.0, "p10": 0.1, "p50": 0.5, "p90": 0.9, "max": 1.0}


# 配置加载

def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_experiment_config(data: Dict[str, Any]) -> ExperimentConfig:
    """
    校验实验配置字典，失败时抛出带字段路径的 ConfigError
    """
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        details = "; ".join(f"{_field_path(err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"实验配置无效: {details}") from e
    validate_experiment(config)
    return config


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    读取 JSON 实验配置，环境变量 MIP_RECOVER_SEED 覆盖 master_seed

    参数:
        path: JSON 文件路径

    返回:
        ExperimentConfig
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"无法读取实验配置 {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: JSON 语法错误: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: 顶层必须是 JSON 对象")

    seed = os.environ.get(SEED_ENV_VAR)
    if seed:
        logger.info(f"[Experiment] {SEED_ENV_VAR}={seed} 覆盖 master_seed")
        data["master_seed"] = int(seed)
    return parse_experiment_config(data)


def validate_experiment(config: ExperimentConfig) -> None:
    """
    模型之外的一致性检查: 检查项已注册、维数与矩阵族相符、水平规则可用
    """
    unknown = [name for name in config.checks if name not in Checks]
    if unknown:
        raise ConfigError(f"checks: 未注册的检查项 {unknown}，可选: {Checks.list()}")
    if config.ensemble == EnsembleKind.IDENTITY_HADAMARD and config.n != 2 * config.m:
        raise ConfigError(f"n: identity_hadamard 要求 n = 2m，当前 m={config.m}, n={config.n}")
    if config.model == ProgramModel.LASSO:
        level = resolve_level(config.level_rule, config.sigma, config.m, config.n)
        if not level > 0:
            raise ConfigError(f"level_rule: Lasso 需要正的 lambda，当前规则给出 {level}")
    try:
        SolverConfig(**config.solver)
    except ValidationError as e:
        details = "; ".join(f"solver.{_field_path(err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"实验配置无效: {details}") from e


def resolve_level(rule: Optional[LevelRule], sigma: float, m: int, n: int) -> Optional[float]:
    """
    由水平规则计算 lambda / eta
    """
    if rule is None:
        return None
    width = gaussian_width(n)
    if rule.kind == LevelKind.FIXED:
        return float(rule.value)
    if rule.kind == LevelKind.LAMBDA_STAR:
        return 2.0 * sigma * (1.25 + width)
    if rule.kind == LevelKind.ETA_STAR:
        return sigma * (1.5 + width)
    if rule.kind == LevelKind.LAMBDA_EVENT_TIMES:
        return float(rule.value) * sigma * width
    return qcbp_feasibility_level(sigma, m)


# 单次试验

class ExperimentRunner:
    """
    实验运行器

    固定的测量矩阵只构造一次；第 i 次试验的随机流为 (master_seed, i)，与调度无关。
    """
    def __init__(self, config: ExperimentConfig, cfg: Optional[CN] = None, workers: Optional[int] = None):
        self.config = config
        self.cfg = cfg if cfg is not None else load_config()
        self.workers = int(workers or self.cfg.HARNESS.WORKERS)
        self.generator = self.cfg.RNG.GENERATOR
        self.pool = SolverPool(self.cfg) if cfg is not None else default_pool()
        self.engine = self.pool.getEngine(config.model)
        self.solver_config = SolverConfig(**{**self.engine.solver_config.model_dump(), **config.solver})
        self.level = resolve_level(config.level_rule, config.sigma, config.m, config.n)
        # 只有频率型检查时不需要求解
        self.needs_solver = not config.checks or any(c not in FREQUENCY_CHECKS for c in config.checks)
        self._fixed_matrix: Optional[MeasurementMatrix] = None
        self._fixed_mu: Optional[float] = None
        if not self._redraw:
            self._fixed_matrix = self._build_matrix(config.master_seed)
            self._fixed_mu = self._coherence(self._fixed_matrix)

    @property
    def _redraw(self) -> bool:
        return self.config.ensemble == EnsembleKind.GAUSSIAN and self.config.redraw_matrix

    def _build_matrix(self, seed: int) -> MeasurementMatrix:
        config = self.config
        if config.ensemble == EnsembleKind.IDENTITY_HADAMARD:
            return identity_hadamard_ensemble(config.m)
        if config.ensemble == EnsembleKind.GAUSSIAN:
            return gaussian_ensemble(config.m, config.n, seed, config.scale_mode, self.generator)
        raw = read_array(config.matrix_file)
        if raw.shape != (config.m, config.n):
            raise ConfigError(f"matrix_file: 矩阵维数 {raw.shape} 与配置 ({config.m}, {config.n}) 不一致")
        if config.scale_mode == ScaleMode.NORMALIZE_COLUMNS:
            return normalize_columns(raw)
        return MeasurementMatrix(raw)

    @staticmethod
    def _coherence(matrix: MeasurementMatrix) -> Optional[float]:
        return coherence(matrix) if matrix.column_normalized else None

    def _matrix_for(self, trial_index: int):
        if self._fixed_matrix is not None:
            return self._fixed_matrix, self._fixed_mu
        matrix = self._build_matrix(derived_seed(self.config.master_seed, trial_index, 1))
        return matrix, self._coherence(matrix)

    def _solve(self, matrix: MeasurementMatrix, b: np.ndarray, trial_index: int) -> Optional[SolveOutcome]:
        try:
            return self.engine.solve(matrix, b, self.level, self.solver_config)
        except MipRecoverError as e:
            logger.warning(f"[ExperimentRunner] 试验 {trial_index} 求解失败: {e}")
            return None

    def run_trial(self, trial_index: int) -> TrialRecord:
        """
        运行第 trial_index 次试验

        参数:
            trial_index: 试验序号

        返回:
            TrialRecord，求解失败时 solver_converged=False，检查项不参与统计
        """
        config = self.config
        matrix, mu = self._matrix_for(trial_index)
        rng = make_generator(config.master_seed, trial_index, name=self.generator)
        x = draw_signal(config.signal_model, config.n, config.s, rng)
        z = config.sigma * rng.standard_normal(config.m)
        b = matrix.entries @ x + z

        noise_correlation = float(np.max(np.abs(matrix.entries.T @ z)))
        event_E = noise_correlation <= config.sigma * gaussian_width(config.n)
        outcome = self._solve(matrix, b, trial_index) if self.needs_solver else None
        ctx = TrialContext(config=config, matrix=matrix, mu=mu, x=x, z=z, b=b, level=self.level,
                           outcome=outcome, event_E=event_E, noise_correlation=noise_correlation)
        results: Dict[str, CheckResult] = run_checks(config.checks, ctx)

        return TrialRecord(
            trial_index=trial_index,
            seed=derived_seed(config.master_seed, trial_index),
            event_E=event_E,
            noise_correlation=noise_correlation,
            level=self.level,
            error_l2=ctx.error_l2,
            bound_values={name: result.bound_value for name, result in results.items()},
            checks_passed={name: result.passed for name, result in results.items()},
            checks_evaluated={name: result.evaluated for name, result in results.items()},
            solver_converged=ctx.solved,
            iterations=outcome.iterations if outcome is not None else 0,
        )

    async def run(self) -> List[TrialRecord]:
        """
        并行运行全部试验，结果按试验序号排列
        """
        loop = asyncio.get_running_loop()
        logger.info(f"[ExperimentRunner] 开始实验: model={self.config.model}, ensemble={self.config.ensemble}, "
                    f"trials={self.config.trials}, workers={self.workers}")
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = [loop.run_in_executor(executor, self.run_trial, i) for i in range(self.config.trials)]
            return list(await asyncio.gather(*futures))

    def summarize(self, records: List[TrialRecord]) -> ExperimentReport:
        """
        汇总: 事件 E 频率、条件通过率、误差分位数与界/误差比值
        """
        config = self.config
        trials = len(records)
        event_frequency = sum(r.event_E for r in records) / trials
        floor = event_probability_floor(config.n) if config.sigma > 0 else None
        failures = sum(not r.solver_converged for r in records) if self.needs_solver else 0
        failure_rate = failures / trials

        errors = [r.error_l2 for r in records if r.error_l2 is not None]
        error_quantiles = _quantiles(errors)

        ratios: Dict[str, Dict[str, float]] = {}
        for name in config.checks:
            values = []
            for r in records:
                bound, error = r.bound_values.get(name), r.error_l2
                if not r.checks_evaluated.get(name) or bound is None or error is None:
                    continue
                measured = error ** 2 if name in SQUARED_CHECKS else error
                if measured > 0:
                    values.append(bound / measured)
            if values:
                ratios[name] = _quantiles(values)

        checks = {name: _summarize_check(name, records, config) for name in config.checks}
        max_failure_rate = float(self.cfg.HARNESS.MAX_FAILURE_RATE)
        passed = all(summary.ok for summary in checks.values()) and failure_rate <= max_failure_rate

        for name, summary in checks.items():
            logger.info(f"[ExperimentRunner] {name}: evaluated={summary.evaluated}, passed={summary.passed}, "
                        f"ok={summary.ok}")
        logger.info(f"[ExperimentRunner] event_E 频率={event_frequency:.5f}, 求解失败率={failure_rate:.4f}, "
                    f"通过={passed}")
        return ExperimentReport(
            config=config,
            trials=trials,
            event_frequency=event_frequency,
            event_probability_floor=floor,
            solver_failures=failures,
            solver_failure_rate=failure_rate,
            error_quantiles=error_quantiles,
            bound_ratio_quantiles=ratios,
            checks=checks,
            passed=passed,
        )


def _quantiles(values: List[float]) -> Dict[str, float]:
    if not values:
        return {}
    data = np.asarray(values, dtype=float)
    return {key: float(np.quantile(data, q)) for key, q in QUANTILES.items()}


def _summarize_check(name: str, records: List[TrialRecord], config: ExperimentConfig) -> CheckSummary:
    evaluated = sum(bool(r.checks_evaluated.get(name)) for r in records)
    passed = sum(bool(r.checks_evaluated.get(name) and r.checks_passed.get(name)) for r in records)
    pass_rate = passed / evaluated if evaluated else None
    summary: Dict[str, Any] = dict(kind=name, evaluated=evaluated, passed=passed,
                                   violations=evaluated - passed, pass_rate=pass_rate)
    if name in FREQUENCY_CHECKS:
        if config.sigma > 0:
            floors = frequency_floor(config.n, len(records))
            summary["frequency_floor"] = floors["floor"]
            summary["union_floor"] = floors["union_floor"]
            summary["frequency_floor_3sd"] = floors["floor_3sd"]
            summary["ok"] = pass_rate is not None and pass_rate >= floors["floor_3sd"]
        else:
            summary["ok"] = pass_rate is None or pass_rate == 1.0
    else:
        summary["ok"] = evaluated == passed
    return CheckSummary(**summary)


# 输出

def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else format(value, ".17g")
    return str(value)


def trial_columns(checks: List[str]) -> List[str]:
    """
    CSV 列: TrialRecord 字段按声明顺序展开，记录型字段按检查项展开
    """
    columns = ["trial_index", "seed", "event_E", "noise_correlation", "level", "error_l2"]
    columns += [f"bound:{name}" for name in checks]
    columns += [f"passed:{name}" for name in checks]
    columns += [f"evaluated:{name}" for name in checks]
    columns += ["solver_converged", "iterations"]
    return columns


def trial_row(record: TrialRecord, checks: List[str]) -> List[str]:
    row = [record.trial_index, record.seed, record.event_E, record.noise_correlation, record.level,
           record.error_l2]
    row += [record.bound_values.get(name) for name in checks]
    row += [record.checks_passed.get(name) for name in checks]
    row += [record.checks_evaluated.get(name) for name in checks]
    row += [record.solver_converged, record.iterations]
    return [_format(value) for value in row]


def write_results(out_dir: Union[str, Path], records: List[TrialRecord], report: ExperimentReport) -> None:
    """
    写出 trials.csv 与 summary.json
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checks = report.config.checks
    with open(out_dir / "trials.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(trial_columns(checks))
        for record in records:
            writer.writerow(trial_row(record, checks))
    with open(out_dir / "summary.json", "w", encoding="utf-8") as f:
        f.write(report.model_dump_json(indent=2))
    logger.info(f"[Experiment] 结果已写入: {out_dir}")


# 函数式入口

def run_trial(config: ExperimentConfig, trial_index: int, cfg: Optional[CN] = None) -> TrialRecord:
    return ExperimentRunner(config, cfg).run_trial(trial_index)


async def run_experiment(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None,
                         workers: Optional[int] = None, cfg: Optional[CN] = None) -> ExperimentReport:
    """
    运行实验并汇总

    参数:
        config: 实验配置
        out_dir: 输出目录，给出时写出 trials.csv 与 summary.json
        workers: 线程数，缺省使用 HARNESS.WORKERS
        cfg: 全局配置

    返回:
        ExperimentReport
    """
    runner = ExperimentRunner(config, cfg, workers)
    records = await runner.run()
    report = runner.summarize(records)
    if out_dir is not None:
        write_results(out_dir, records, report)
    return report
