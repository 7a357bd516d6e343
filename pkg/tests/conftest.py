from __future__ import annotations

import pathlib

import pytest

from prange import model

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"


@pytest.fixture
def triangle():
    return model.load(MODELS / "triangle.json")


@pytest.fixture
def quadrangle():
    return model.load(MODELS / "quadrangle.json")


@pytest.fixture
def hexagon():
    return model.load(MODELS / "hexagon.json")


@pytest.fixture
def slider():
    return model.load(MODELS / "slider.json")


@pytest.fixture
def slider_conflict():
    return model.load(MODELS / "slider_conflict.json")


@pytest.fixture
def models_dir():
    return MODELS
