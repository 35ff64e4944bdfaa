"""
This module contains the fixtures for the tests.
"""
from pathlib import Path

import pytest
from dotenv import load_dotenv

from adapters.cli.presets import PRESETS
from engine.firing import FiringModel, SolveConfig


@pytest.fixture(scope="session", autouse=True)
def load_env():
    """Load the environment variables."""
    env_path = Path(__file__).resolve().parents[1] / ".env"
    if env_path.exists():
        load_dotenv(env_path)


@pytest.fixture
def cfg():
    """Solver settings with the default tolerances."""
    return SolveConfig()


def preset_model(name: str, sigma: float | None = None) -> FiringModel:
    """Build the LIF model of a built-in preset."""
    preset = PRESETS[name]
    return FiringModel(preset.sigma if sigma is None else sigma, preset.build())


@pytest.fixture
def step_model():
    """2-periodic input (2 then 1) with leak rate 1."""
    return preset_model("ex4_3")


@pytest.fixture
def quasi_periodic_model():
    """Perfect integrator driven by 2 + cos t + cos(sqrt(2) t)."""
    return preset_model("ex6_4")


@pytest.fixture
def make_model():
    """Factory for preset models, with an optional leak-rate override."""
    return preset_model
