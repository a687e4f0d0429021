# -*- coding: utf-8 -*-
'''
测试 YAML 配置加载与引擎配置合并
'''

import logging
import os
import sys

import pytest

# 添加项目根目录到路径
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from utils.config import SEED_ENV_VAR, create_engine_config, load_config, merge_configs
from utils.configParser import ConfigParser

# 配置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def test_load_default_config(monkeypatch):
    """测试默认配置文件"""
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    cfg = load_config()
    assert cfg.NAME == "MipRecover"
    assert cfg.RNG.GENERATOR == "philox"
    assert cfg.RNG.SEED == 20240501
    assert cfg.SOLVER.TOLERANCE == pytest.approx(1e-8)
    assert cfg.HARNESS.WORKERS == 1
    assert cfg.is_frozen()


def test_missing_config_file_uses_defaults(tmp_path, monkeypatch):
    """测试配置文件缺失时回退到内置默认值"""
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    cfg = load_config(str(tmp_path / "missing.yaml"))
    assert cfg.SOLVER.MAX_ITERATIONS == 50000
    assert cfg.LOGGING.FILE == "logs/mip_recover.log"


def test_seed_env_override(monkeypatch):
    """测试环境变量覆盖 RNG.SEED"""
    monkeypatch.setenv(SEED_ENV_VAR, "7")
    assert load_config().RNG.SEED == 7


def test_yaml_env_substitution(tmp_path, monkeypatch):
    """测试 YAML 中的 ${VAR} 引用"""
    path = tmp_path / "custom.yaml"
    path.write_text('LOGGING:\n  FILE: "${MIP_TEST_LOG_DIR}/run.log"\n', encoding="utf-8")
    monkeypatch.setenv("MIP_TEST_LOG_DIR", "/tmp/mip")
    cfg = ConfigParser.load_yaml(str(path))
    assert cfg.LOGGING.FILE == "/tmp/mip/run.log"
    with pytest.raises(FileNotFoundError):
        ConfigParser.load_yaml(str(tmp_path / "absent.yaml"))


def test_engine_config_merge(monkeypatch):
    """测试引擎配置继承全局 SOLVER 段"""
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    cfg = load_config()
    lasso = create_engine_config(cfg, "solver", "lasso")
    assert lasso.MODEL == "lasso"
    assert lasso.SOLVER.STEP_RULE == "fixed_lipschitz"
    assert lasso.SOLVER.TOLERANCE == pytest.approx(cfg.SOLVER.TOLERANCE)
    assert create_engine_config(cfg, "solver", "ds").NAME == "DantzigSolver"
    with pytest.raises(FileNotFoundError):
        create_engine_config(cfg, "solver", "omp")


def test_merge_and_convert():
    """测试配置合并与字典互转"""
    cfg = load_config()
    override = ConfigParser.dict_to_cn({"HARNESS": {"WORKERS": 4}})
    merged = merge_configs(cfg, override)
    assert merged.HARNESS.WORKERS == 4
    assert merged.HARNESS.MAX_FAILURE_RATE == pytest.approx(0.01)
    assert cfg.HARNESS.WORKERS == 1
    as_dict = ConfigParser.cn_to_dict(merged)
    assert as_dict["HARNESS"] == {"WORKERS": 4, "MAX_FAILURE_RATE": 0.01}


if __name__ == "__main__":
    test_merge_and_convert()
