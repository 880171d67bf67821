"""Surrogate-based multiobjective optimization with a sampled robustness certificate."""

__version__ = "0.1.0"

from .problems import Problem, available_problems, registry_lookup  # noqa: E402
from .robustness import RobustnessConfig, certify, sample_size  # noqa: E402
from .surrogate import MlpModel, TrainConfig, fit  # noqa: E402

__all__ = [
    "__version__", "Problem", "available_problems", "registry_lookup",
    "RobustnessConfig", "certify", "sample_size", "MlpModel", "TrainConfig", "fit",
]
