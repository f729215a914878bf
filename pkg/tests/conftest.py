import pathlib

import pytest

from fracseries.dsl import parse_problem_file

ROOT = pathlib.Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"
MALFORMED = ROOT / "tests" / "data" / "malformed"


@pytest.fixture(scope="session")
def problems_dir():
    return PROBLEMS


@pytest.fixture(scope="session")
def malformed_dir():
    return MALFORMED


@pytest.fixture(scope="session")
def diffusion_problem():
    return parse_problem_file(PROBLEMS / "kolmogorov.frac")


@pytest.fixture(scope="session")
def wave_problem():
    return parse_problem_file(PROBLEMS / "klein_gordon.frac")


@pytest.fixture(scope="session")
def delay_problem():
    return parse_problem_file(PROBLEMS / "burgers_delay.frac")
