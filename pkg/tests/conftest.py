from __future__ import annotations

import importlib.resources as resources

import pytest

from support import BERKELEY, HOSPITAL


def fixture_text(name: str) -> str:
    return (resources.files("confound") / "data" / name).read_text(encoding="utf-8")


@pytest.fixture
def hospital():
    return HOSPITAL


@pytest.fixture
def berkeley():
    return BERKELEY


@pytest.fixture
def hospital_csv() -> str:
    return fixture_text("hospital.csv")


@pytest.fixture
def berkeley_csv() -> str:
    return fixture_text("berkeley.csv")


@pytest.fixture
def robinson_csv() -> str:
    return fixture_text("robinson_synthetic.csv")
