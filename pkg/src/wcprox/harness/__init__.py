"""Configuration, CLI, benchmarks and the acceptance suite."""
from .acceptance import CRITERIA, run_acceptance_suite
from .bench import bench
from .config import ExperimentConfig, config_from_mapping, load_config

__all__ = ["CRITERIA", "ExperimentConfig", "bench", "config_from_mapping", "load_config", "run_acceptance_suite"]
