"""
GaugeForge - Core Library

Asymptotic gauges, generalized-function algebras and their morphisms.
The modules import each other by bare name, so this directory goes on
sys.path before anything is re-exported.
"""

import os
import sys

_here = os.path.dirname(os.path.abspath(__file__))
if _here not in sys.path:
    sys.path.insert(0, _here)

from config import TOOL_VERSION, Config, get_config
from errors import ConfigError, GaugeForgeError
from gauge import Gauge, GaugeMorphism, check_ag_morphism, verify_gauge_axioms
from index import IS_S, NBAR, IndexMorphism, Verdict, big_o, limit, order_gt
from logger import Logger, get_logger
from netlang import SamplingSchedule, parse, print_expr
from report import Report, RunConfig

__version__ = TOOL_VERSION
__author__ = "GaugeForge Team"

__all__ = [
    "Config",
    "ConfigError",
    "Gauge",
    "GaugeForgeError",
    "GaugeMorphism",
    "IS_S",
    "IndexMorphism",
    "Logger",
    "NBAR",
    "Report",
    "RunConfig",
    "SamplingSchedule",
    "Verdict",
    "big_o",
    "check_ag_morphism",
    "get_config",
    "get_logger",
    "limit",
    "order_gt",
    "parse",
    "print_expr",
    "verify_gauge_axioms",
]
