import pathlib
import random

import pytest

from troplog.fixtures import FixtureFile, load_fixture

FIXTURE_DIR = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

FIXTURE_FILES = sorted(p.name for p in FIXTURE_DIR.glob("*.json")
                       if "stratum" not in p.name and "gamma" not in p.name)


def fixture(name: str) -> FixtureFile:
    return load_fixture(str(FIXTURE_DIR / name))


@pytest.fixture
def fig1() -> FixtureFile:
    return fixture("fig1_alignment.json")


@pytest.fixture
def fig3() -> FixtureFile:
    return fixture("fig3_bidegree.json")


@pytest.fixture
def ex42() -> FixtureFile:
    return fixture("ex42_p2_d3.json")


@pytest.fixture
def fig6() -> FixtureFile:
    return fixture("fig6_tacnode.json")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260810)
