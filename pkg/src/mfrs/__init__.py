"""Magnetic field-based reward shaping for goal-conditioned RL, in plain numpy."""

__version__ = "0.1.0"
