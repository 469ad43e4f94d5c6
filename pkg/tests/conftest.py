from pathlib import Path

import pytest

from pmetric.model import load_model

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def fig1():
    return load_model(MODELS / "fig1.json")


@pytest.fixture(scope="session")
def fig2():
    return load_model(MODELS / "fig2.json")


@pytest.fixture(scope="session")
def fig1_path():
    return str(MODELS / "fig1.json")


@pytest.fixture(scope="session")
def fig2_path():
    return str(MODELS / "fig2.json")
