# -*- coding: utf-8 -*-
'''
稀疏恢复实验室命令行入口

子命令: solve / bound / oracle / verify / experiment / verify-suite
'''

import os
import sys
import json
import logging
import argparse
import asyncio
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from dotenv import load_dotenv
from yacs.config import CfgNode as CN

from engine.enginePool import SolverPool
from pipelines.experiment import load_experiment_config, run_experiment
from pipelines.properties import Properties, verify_property
from pipelines.suites import Suites, verify_bound_suite
from sensing.bounds import Bounds, evaluate_bound
from sensing.measurement import NORMALIZATION_TOL, MeasurementMatrix, normalize_columns
from sensing.oracle import oracle_quantities
from utils.config import load_config
from utils.exceptions import InvalidParameter, MipRecoverError
from utils.matrix_io import read_array, read_vector
from utils.protocol import ProgramModel, SolverConfig

# 配置日志
logger = logging.getLogger("mip_recover")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

# 整数型参数，扫描时取整
INTEGER_PARAMS = ("s", "n", "m", "s_bar")


def setup_logging(config: CN) -> None:
    """
    按 LOGGING 段配置日志: 控制台输出到 stderr，同时写入日志文件
    """
    log_file = Path(config.LOGGING.FILE)
    log_file.parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, str(config.LOGGING.LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr),
            logging.FileHandler(log_file, encoding="utf-8"),
        ],
        force=True,
    )


def _parse_value(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_params(text: Optional[str]) -> Dict[str, Any]:
    """
    解析 "k=v,k=v" 形式的参数
    """
    params: Dict[str, Any] = {}
    if not text:
        return params
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise InvalidParameter(f"参数格式应为 k=v: {item}")
        key, value = item.split("=", 1)
        params[key.strip()] = _parse_value(value.strip())
    return params


def parse_table(text: str) -> tuple:
    """
    解析 PARAM=START:STOP:COUNT，返回 (参数名, 取值列表)
    """
    try:
        name, span = text.split("=", 1)
        start, stop, count = span.split(":")
        values = np.linspace(float(start), float(stop), int(count))
    except ValueError as e:
        raise InvalidParameter(f"--table 格式应为 PARAM=START:STOP:COUNT: {text}") from e
    name = name.strip()
    if name in INTEGER_PARAMS:
        return name, [int(round(v)) for v in values]
    return name, [float(v) for v in values]


def load_matrix(path: str, normalize: bool = False) -> MeasurementMatrix:
    """
    读取矩阵文件；列范数均为 1 时标记为列归一化
    """
    raw = read_array(path)
    if normalize:
        return normalize_columns(raw)
    norms = np.linalg.norm(raw, axis=0)
    unit = bool(np.all(np.abs(norms - 1.0) <= NORMALIZATION_TOL))
    return MeasurementMatrix(raw, column_normalized=unit)


def emit(payload: str, out: Optional[str] = None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(payload + "\n", encoding="utf-8")
        logger.info(f"结果已写入: {out}")
    else:
        print(payload)


# 子命令

def cmd_solve(args, config: CN) -> int:
    model = ProgramModel(args.model)
    matrix = load_matrix(args.matrix)
    rhs = read_vector(args.rhs)
    level = args.lam if model == ProgramModel.LASSO else args.eta
    engine = SolverPool(config).getEngine(model)
    overrides = {}
    if args.tol is not None:
        overrides["tolerance"] = args.tol
    if args.max_iter is not None:
        overrides["max_iterations"] = args.max_iter
    cfg = SolverConfig(**{**engine.solver_config.model_dump(), **overrides})
    outcome = engine.solve(matrix, rhs, level, cfg)
    emit(json.dumps(outcome.to_output()), args.out)
    return EXIT_OK


def cmd_bound(args, config: CN) -> int:
    params = parse_params(args.params)
    if not args.table:
        emit(evaluate_bound(args.theorem, params).model_dump_json(indent=2))
        return EXIT_OK
    name, values = parse_table(args.table)
    lines: List[str] = [f"{name},value,applicable"]
    for value in values:
        report = evaluate_bound(args.theorem, {**params, name: value})
        shown = "" if report.value is None else format(report.value, ".17g")
        lines.append(f"{value},{shown},{str(report.applicable).lower()}")
    emit("\n".join(lines))
    return EXIT_OK


def cmd_oracle(args, config: CN) -> int:
    quantities = oracle_quantities(read_vector(args.signal), args.sigma, args.s_star)
    emit(quantities.model_dump_json(indent=2))
    return EXIT_OK


def cmd_verify(args, config: CN) -> int:
    matrix = load_matrix(args.matrix, args.normalize) if args.matrix else None
    seed = args.seed if args.seed is not None else int(config.RNG.SEED)
    report = verify_property(args.property, matrix, parse_params(args.params), args.samples, seed)
    emit(report.model_dump_json(indent=2))
    return EXIT_OK if report.failures == 0 else EXIT_FAILED


def cmd_experiment(args, config: CN) -> int:
    experiment = load_experiment_config(args.config_file)
    report = asyncio.run(run_experiment(experiment, args.out_dir, args.workers, config))
    emit(report.model_dump_json(indent=2, include={"trials", "event_frequency", "event_probability_floor",
                                                   "solver_failure_rate", "checks", "passed"}))
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_verify_suite(args, config: CN) -> int:
    report = asyncio.run(verify_bound_suite(args.suite, args.seed, cfg=config))
    emit(report.model_dump_json(indent=2))
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "solve": cmd_solve,
    "bound": cmd_bound,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "verify-suite": cmd_verify_suite,
}


# 解析命令行参数
def parse_args(argv: Optional[List[str]] = None):
    parser = argparse.ArgumentParser(description="MIP 稀疏恢复实验室")
    parser.add_argument("--config", type=str, default=os.environ.get("MIP_RECOVER_CONFIG", "configs/default.yaml"),
                        help="全局配置文件路径")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="求解 BP/QCBP/DS/Lasso")
    solve.add_argument("--model", required=True, choices=[str(m) for m in ProgramModel])
    solve.add_argument("--matrix", required=True, help="矩阵文件（CSV 或二进制）")
    solve.add_argument("--rhs", required=True, help="观测向量文件")
    solve.add_argument("--eta", type=float, default=None, help="QCBP/DS 的约束半径")
    solve.add_argument("--lambda", dest="lam", type=float, default=None, help="Lasso 的正则化参数")
    solve.add_argument("--tol", type=float, default=None, help="收敛阈值")
    solve.add_argument("--max-iter", dest="max_iter", type=int, default=None, help="最大迭代次数")
    solve.add_argument("--out", default=None, help="输出 JSON 文件，缺省打印到标准输出")

    bound = sub.add_parser("bound", help="计算闭式误差界")
    bound.add_argument("--theorem", required=True, choices=Bounds.list())
    bound.add_argument("--params", default="", help="k=v,k=v")
    bound.add_argument("--table", default=None, help="PARAM=START:STOP:COUNT，输出 CSV")

    oracle = sub.add_parser("oracle", help="计算预言量")
    oracle.add_argument("--signal", required=True, help="信号向量文件")
    oracle.add_argument("--sigma", type=float, required=True)
    oracle.add_argument("--s-star", dest="s_star", type=int, default=None)

    verify = sub.add_parser("verify", help="抽样验证确定性性质")
    verify.add_argument("--property", required=True, choices=Properties.list())
    verify.add_argument("--matrix", default=None, help="矩阵文件，polytope 可省略")
    verify.add_argument("--normalize", action="store_true", help="先对矩阵列归一化")
    verify.add_argument("--params", default="", help="k=v,k=v")
    verify.add_argument("--samples", type=int, default=100)
    verify.add_argument("--seed", type=int, default=None)

    experiment = sub.add_parser("experiment", help="运行 Monte-Carlo 实验")
    experiment.add_argument("--config", dest="config_file", required=True, help="JSON 实验配置")
    experiment.add_argument("--out-dir", dest="out_dir", required=True)
    experiment.add_argument("--workers", type=int, default=None)

    suite = sub.add_parser("verify-suite", help="运行验证套件")
    suite.add_argument("suite", choices=Suites.list())
    suite.add_argument("--seed", type=int, default=None)
    return parser.parse_args(argv)


# 主函数
def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = parse_args(argv)
    config = load_config(args.config)
    setup_logging(config)
    try:
        return COMMANDS[args.command](args, config)
    except MipRecoverError as e:
        logger.error(f"[{args.command}] {e.__class__.__name__}: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
