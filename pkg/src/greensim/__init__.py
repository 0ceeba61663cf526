"""Greenhouse climate + lettuce growth simulation with economic
nonlinear model-predictive control."""

__version__ = "0.1.0"

from greensim.climate import ClimateModel, ClimateState, ExternalConditions
from greensim.empc import NempcConfig, NempcController
from greensim.scenario import (
    NO_CONTROL,
    ScenarioConfig,
    default_parameters,
    load_scenario,
    scenario_from_dict,
)
from greensim.simulate import Trajectory, result_document, run_scenario

__all__ = [
    "ClimateModel",
    "ClimateState",
    "ExternalConditions",
    "NO_CONTROL",
    "NempcConfig",
    "NempcController",
    "ScenarioConfig",
    "Trajectory",
    "default_parameters",
    "load_scenario",
    "result_document",
    "run_scenario",
    "scenario_from_dict",
    "__version__",
]
