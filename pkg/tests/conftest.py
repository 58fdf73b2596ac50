import numpy as np
import pytest

from patchdyn import (CoarseField, MacroConfig, benchmark_initial,
                      macro_nodes, validate_config)


@pytest.fixture(scope="session")
def desk_cfg():
    """Benchmark parameters on the coarse (fast) micro grid."""
    return validate_config(MacroConfig())


@pytest.fixture(scope="session")
def desk_x(desk_cfg):
    return macro_nodes(desk_cfg)


@pytest.fixture()
def sin_field(desk_x):
    return CoarseField(time=0.0, values=benchmark_initial(desk_x))


def config_with(**overrides):
    return validate_config(MacroConfig(**overrides))


@pytest.fixture(scope="session")
def config_factory():
    return config_with


def max_rel_dev(a: np.ndarray, b: np.ndarray) -> float:
    """Max |a-b| scaled by the overall magnitude of b."""
    scale = max(np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)
