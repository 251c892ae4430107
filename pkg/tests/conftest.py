"""Shared fixtures: the reference tabletop experiment and its scenes."""

from __future__ import annotations

import pytest

from placeplan.harness import GridExperimentConfig, build_cell_scene
from placeplan.planner import RobotParams
from placeplan.scene import snapshot_scene


@pytest.fixture(scope="session")
def default_params() -> RobotParams:
    return RobotParams()


@pytest.fixture(scope="session")
def default_config() -> GridExperimentConfig:
    return GridExperimentConfig()


@pytest.fixture(scope="session")
def tabletop_scene(default_config):
    """Benchmark scene with the target on cell (1, 1)."""
    return build_cell_scene((1, 1), default_config)


@pytest.fixture(scope="session")
def tabletop_snapshot(tabletop_scene):
    return snapshot_scene(tabletop_scene, seed=12345)
