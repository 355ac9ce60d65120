"""Exploration of alternative solutions to linear inverse problems in the
latent space of a generative signal model."""

from .config import ExperimentConfig, load_config, preset
from .explore import (
    ExplorationDirection,
    ExplorationParams,
    ExplorationResult,
    SolutionRecord,
    build_direction,
    explore,
)
from .generator import GeneratorSpec, SignalTensor, generate, instantiate
from .inversion import InversionConfig, invert, multi_restart_invert
from .linalg import CollapseError, EigenBasis, project_out, sym_eig
from .metrics import coupling, fd_hessian_oracle, latent_metrics
from .operators import MeasurementVector, OperatorSpec, apply, measure
from .perceptual import FeatureExtractorSpec, features, perceptual_distance

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "load_config",
    "preset",
    "ExplorationDirection",
    "ExplorationParams",
    "ExplorationResult",
    "SolutionRecord",
    "build_direction",
    "explore",
    "GeneratorSpec",
    "SignalTensor",
    "generate",
    "instantiate",
    "InversionConfig",
    "invert",
    "multi_restart_invert",
    "CollapseError",
    "EigenBasis",
    "project_out",
    "sym_eig",
    "coupling",
    "fd_hessian_oracle",
    "latent_metrics",
    "MeasurementVector",
    "OperatorSpec",
    "apply",
    "measure",
    "FeatureExtractorSpec",
    "features",
    "perceptual_distance",
    "__version__",
]
