"""Shared fixtures and generators for the test suite.

Randomized tests draw from seeded ``numpy.random.Generator`` instances so
every run sees the same cases; the generators below reject-sample until the
structural preconditions (interior equilibrium, largeness condition, Hopf
crossing) hold.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from lgbd.linear_analysis import CharCoefficients, hopf_point
from lgbd.model import ModelParameters, interior_equilibrium
from lgbd.presets import BASELINE, PATTERN, PATTERN_DIFF


@pytest.fixture
def baseline() -> ModelParameters:
    return BASELINE


@pytest.fixture
def pattern() -> ModelParameters:
    return PATTERN


@pytest.fixture
def pattern_diff():
    return PATTERN_DIFF


def random_interior_params(rng: np.random.Generator) -> ModelParameters:
    """One random parameter set guaranteed to have an interior equilibrium."""
    while True:
        p = ModelParameters(
            r=float(rng.uniform(0.5, 2.0)),
            K=float(rng.uniform(20.0, 200.0)),
            omega=float(rng.uniform(0.5, 2.0)),
            D=float(rng.uniform(0.5, 2.0)),
            d=float(rng.uniform(0.005, 0.1)),
            c=float(rng.uniform(0.005, 0.05)),
            omega1=float(rng.uniform(0.1, 0.5)),
            D1=float(rng.uniform(5.0, 20.0)),
        )
        try:
            interior_equilibrium(p)
        except ValueError:
            continue
        return p


def random_crossing_coeffs(rng: np.random.Generator) -> CharCoefficients:
    """Random characteristic coefficients with a guaranteed Hopf crossing.

    ``|b0| > a0`` forces the frequency quartic to have a positive root, and
    the transversality inequality 2*b0 > a1*b1 is required so the generated
    population is usable for the crossing-direction checks.
    """
    while True:
        a1 = float(rng.uniform(0.1, 2.0))
        a0 = float(rng.uniform(0.1, 2.0))
        b1 = float(rng.uniform(-1.0, 1.0))
        b0 = float(rng.uniform(a0 + 0.05, a0 + 3.0))
        cc = CharCoefficients(a1=a1, a0=a0, b1=b1, b0=b0)
        if 2.0 * b0 <= a1 * b1:
            continue
        if hopf_point(cc) is None:
            continue
        return cc


def with_tau(p: ModelParameters, tau: float) -> ModelParameters:
    return dataclasses.replace(p, tau=tau)
