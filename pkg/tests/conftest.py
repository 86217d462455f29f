import numpy as np
import pytest

from tensor_invariants.expr import Chart
from tensor_invariants.geometry import christoffel
from tensor_invariants.mappings import sample_points
from tensor_invariants.tensor import TensorField


@pytest.fixture(scope="session")
def chart():
    return Chart(("u", "v", "w"))


@pytest.fixture(scope="session")
def example_metric(chart):
    return TensorField(chart, "ll", [["u^2", "0", "0"], ["0", "v^2", "0"], ["0", "0", "w^2"]])


@pytest.fixture(scope="session")
def example_space(example_metric):
    return christoffel(example_metric)


@pytest.fixture(scope="session")
def affinor(chart):
    return TensorField(chart, "ul", [["sin(u)", "0", "0"], ["0", "cos(v)", "0"], ["0", "0", "w"]])


@pytest.fixture(scope="session")
def sigma_form(chart):
    return TensorField(chart, "l", ["0", "0", "ln(1+u^2+v^2+w^2)"])


@pytest.fixture(scope="session")
def box_points():
    return sample_points([[1.0, 2.0]] * 3, 20, seed=7)


@pytest.fixture(scope="session")
def sphere_space():
    chart2 = Chart(("u", "v"))
    metric = TensorField(chart2, "ll", [["1", "0"], ["0", "sin(u)^2"]])
    return christoffel(metric)


def max_abs(a):
    return float(np.max(np.abs(a)))
