"""Experiment orchestration, metrics, field dumps and verification suites."""

from .config import RunConfig, load_config
from .experiment import run_experiment
from .field import dump_field_grid
from .metrics import average_timesteps
from .verify import verify

__all__ = ["RunConfig", "load_config", "run_experiment", "dump_field_grid",
           "average_timesteps", "verify"]
