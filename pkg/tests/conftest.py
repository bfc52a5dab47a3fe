"""
Shared fixtures: hand-built programs with known laws and seeded random ones.
"""

from pathlib import Path

import pytest

from app.commands.common import state
from app.config import settings
from app.models.program import AccessDiscipline, RandomizedBranchingProgram, RandomProgramSpec, Vertex
from app.models.simulation import SimulationConfig
from app.services.branching_program import random_program
from app.utils.bp_format import parse_bp

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name: str) -> RandomizedBranchingProgram:
    return parse_bp((FIXTURES / name).read_text(encoding="utf-8"))


@pytest.fixture(autouse=True)
def clean_settings():
    settings.reset_overrides()
    state.seed = None
    state.format = None
    yield
    settings.reset_overrides()


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def coin_program() -> RandomizedBranchingProgram:
    """Outputs y_1; terminal 1 is labeled 0, terminal 2 is labeled 1."""
    return load_fixture("coin.bp")


@pytest.fixture
def reversed_program() -> RandomizedBranchingProgram:
    return load_fixture("reversed.bp")


@pytest.fixture
def xor_program() -> RandomizedBranchingProgram:
    """x_1 XOR y_1 on six input bits."""
    return load_fixture("xor6.bp")


@pytest.fixture
def amplify_program() -> RandomizedBranchingProgram:
    """S_OW program computing x_1 with failure exactly 1/4 on every input."""
    return load_fixture("amplify.bp")


@pytest.fixture
def wide_program() -> RandomizedBranchingProgram:
    return load_fixture("wide64.bp")


@pytest.fixture
def wide_config() -> SimulationConfig:
    """Eight blocks of eight bits, six phases; Nisan is the identity on 4-bit seeds."""
    return SimulationConfig(T=4, r_override=6, block_size_override=8, threshold_override=64)


@pytest.fixture
def scan_program() -> RandomizedBranchingProgram:
    return load_fixture("scan32.bp")


@pytest.fixture
def scan_config() -> SimulationConfig:
    """h = 4, so B = 8 and every extraction set has 20 positions; Nisan seed is 9 bits."""
    return SimulationConfig(T=16, h_override=4, threshold_override=100, nisan_block_override=1)


@pytest.fixture
def stuck_program() -> RandomizedBranchingProgram:
    """One vertex reading x_1; with a single 8-bit block every phase halts where it starts."""
    return RandomizedBranchingProgram(
        n=8, m=1,
        vertices=(Vertex.nonterminal(0, 1, 1, (1, 2, 1, 2)), Vertex.terminal(1), Vertex.terminal(2)),
        start=0, accept=2, output_bits={1: 0, 2: 1},
    )


def layered(seed: int, n: int = 6, m: int = 4, width: int = 3, depth: int = 4,
            discipline: AccessDiscipline = AccessDiscipline.R_OW) -> RandomizedBranchingProgram:
    return random_program(RandomProgramSpec(n=n, m=m, width=width, depth=depth, discipline=discipline), seed)


@pytest.fixture
def bp_file(tmp_path):
    """Write program text into a temporary .bp file and return its path."""
    def write(text: str, name: str = "program.bp") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write
