# -*- coding: utf-8 -*-
'''
实验流水线模块
'''

from .checks import Checks, TrialContext, CheckResult
from .experiment import ExperimentRunner, load_experiment_config, parse_experiment_config, run_trial, run_experiment
from .properties import Properties, verify_property
from .suites import Suites, verify_bound_suite

__all__ = ['Checks', 'TrialContext', 'CheckResult', 'ExperimentRunner', 'load_experiment_config',
           'parse_experiment_config', 'run_trial', 'run_experiment', 'Properties', 'verify_property',
           'Suites', 'verify_bound_suite']
