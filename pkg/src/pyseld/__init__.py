"""init main module"""
from .model import SeldModel
from .config import ExperimentConfig, load_config

__all__ = ["SeldModel", "ExperimentConfig", "load_config"]
