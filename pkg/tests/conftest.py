"""検証エンジンのテストで共有するフィクスチャ"""

import math

import numpy as np
import pytest

from geometry import MassFunction, parse_mass_spec
from jet import Point4
from lsq_fit import SampleGrid
from soliton import random_vector_field

MASS_SPECS = ("zero", "const:1", "linear:1,0", "sinoff:1,2", "poly:0.5,0.2,-0.1")


@pytest.fixture
def rng():
    """固定シードの乱数生成器"""
    return np.random.default_rng(12345)


@pytest.fixture
def point():
    """赤道から離れた定義域内の一般の点"""
    return Point4(1.0, 2.0, math.pi / 3, 1.0)


@pytest.fixture(params=MASS_SPECS)
def mass(request) -> MassFunction:
    return parse_mass_spec(request.param)


@pytest.fixture
def masses() -> list[MassFunction]:
    return [parse_mass_spec(spec) for spec in MASS_SPECS]


@pytest.fixture
def small_grid() -> SampleGrid:
    """2·3·2·2 点（r に依存する比が見えるよう r を変える）"""
    return SampleGrid.from_ranges({
        "u": (0.0, 2.0, 2),
        "r": (1.0, 4.0, 3),
        "theta": (math.pi / 4, 3 * math.pi / 4, 2),
        "phi": (0.0, 3 * math.pi / 2, 2),
    })


@pytest.fixture
def random_fields(rng):
    return [random_vector_field(rng) for _ in range(5)]
