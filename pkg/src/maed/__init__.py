"""Multi-area economic dispatch with Electro Search optimization and a GA baseline."""

from .model import (Area, DecisionVector, EvaluationReport, FuelOption, Generator, LossModel,
                    ProblemInstance, ProhibitedZone, TieLine, Tolerances, evaluate,
                    validate_instance)
from .constraints import DispatchObjective, PenaltyWeights
from .esoa import EngineConfig, solve
from .ga import GaConfig, ga_solve
from .io import bundled, load_instance

__version__ = "0.1.0"
