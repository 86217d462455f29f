"""Seeded random fields, spaces and omega bundles for audits and tests.

Everything is expression-backed so jets stay exact; coefficients are kept
small so connections remain tame over the default [1, 2]^N sampling box.
"""

from __future__ import annotations

import numpy as np

from .expr import Chart
from .geometry import Space
from .invariants import OmegaSpec, SValues
from .mappings import MappingSpec
from .tensor import TensorField

__all__ = [
    "random_expr",
    "random_field",
    "random_symmetric_field",
    "random_omega_spec",
    "random_connection_space",
    "random_metric_space",
    "random_mapping",
]


def random_expr(chart: Chart, rng: np.random.Generator, scale: float = 0.3) -> str:
    names = chart.names
    forms = (
        lambda: f"{rng.uniform(-scale, scale):.4f}",
        lambda: f"{rng.uniform(-scale, scale):.4f}*{names[rng.integers(chart.dim)]}",
        lambda: "{:.4f}*{}*{}".format(
            rng.uniform(-scale, scale),
            names[rng.integers(chart.dim)],
            names[rng.integers(chart.dim)],
        ),
        lambda: f"{rng.uniform(-scale, scale):.4f}*sin({names[rng.integers(chart.dim)]})",
        lambda: f"{rng.uniform(-scale, scale):.4f}*cos({names[rng.integers(chart.dim)]})",
        lambda: "{:.4f}*ln(1+{}^2)".format(
            rng.uniform(-scale, scale), names[rng.integers(chart.dim)]
        ),
    )
    return forms[rng.integers(len(forms))]()


def _nested(chart: Chart, rng, depth: int, scale: float):
    if depth == 0:
        return random_expr(chart, rng, scale)
    return [_nested(chart, rng, depth - 1, scale) for _ in range(chart.dim)]


def random_field(chart: Chart, variance: str, rng, scale: float = 0.3) -> TensorField:
    return TensorField(chart, variance, _nested(chart, rng, len(variance), scale))


def random_symmetric_field(chart: Chart, rng, scale: float = 0.3) -> TensorField:
    n = chart.dim
    entries = [[None] * n for _ in range(n)]
    for j in range(n):
        for k in range(j, n):
            text = random_expr(chart, rng, scale)
            entries[j][k] = text
            entries[k][j] = text
    return TensorField(chart, "ll", entries)


def random_omega_spec(
    chart: Chart, rng, s: SValues | None = None, scale: float = 0.3
) -> OmegaSpec:
    if s is None:
        s = SValues(*(float(x) for x in rng.uniform(-1.0, 1.0, 3)))
    return OmegaSpec(
        chart,
        s,
        rho=random_field(chart, "l", rng, scale),
        sigma=random_field(chart, "l", rng, scale),
        F=random_field(chart, "ul", rng, scale),
        phi=random_field(chart, "u", rng, scale),
        sigma2=random_symmetric_field(chart, rng, scale),
    )


def random_connection_space(chart: Chart, rng, scale: float = 0.3) -> Space:
    return Space.from_connection(random_field(chart, "ull", rng, scale))


def random_metric_space(chart: Chart, rng, scale: float = 0.2) -> Space:
    """Diagonally dominant metric, invertible over positive boxes."""
    n = chart.dim
    entries = [[None] * n for _ in range(n)]
    for j in range(n):
        for k in range(n):
            entries[j][k] = "0"
    for j, name in enumerate(chart.names):
        entries[j][j] = f"{1.0 + j}+{rng.uniform(0.1, scale + 0.1):.4f}*{name}^2"
    for j in range(n):
        for k in range(j + 1, n):
            text = f"{rng.uniform(-0.05, 0.05):.4f}*{chart.names[j]}*{chart.names[k]}"
            entries[j][k] = text
            entries[k][j] = text
    return Space.from_metric(TensorField(chart, "ll", entries))


def random_mapping(chart: Chart, rng, s: SValues | None = None) -> MappingSpec:
    if s is None:
        s = SValues(*(float(x) for x in rng.uniform(-1.0, 1.0, 3)))
    return MappingSpec(random_omega_spec(chart, rng, s), random_omega_spec(chart, rng, s))
