"""Kinetics, equilibria, and linearization checks."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from conftest import random_interior_params
from lgbd.model import (
    EquilibriumKind,
    ModelParameters,
    ToleranceError,
    equilibria,
    interior_equilibrium,
    jacobian_fd,
    jacobian_fd_delayed,
    linearization_coeffs,
    rhs_delayed,
    rhs_nondelayed,
)


class TestParameters:
    def test_rejects_nonpositive_rates(self, baseline):
        with pytest.raises(ValueError):
            dataclasses.replace(baseline, r=-1.0)
        with pytest.raises(ValueError):
            dataclasses.replace(baseline, K=0.0)
        with pytest.raises(ValueError):
            dataclasses.replace(baseline, c=-0.01)

    def test_rejects_bad_exponent(self, baseline):
        # growth exponent is meaningful only on (1, 2]
        with pytest.raises(ValueError):
            dataclasses.replace(baseline, m=1.0)
        with pytest.raises(ValueError):
            dataclasses.replace(baseline, m=2.5)
        dataclasses.replace(baseline, m=1.6)  # fine

    def test_rejects_negative_delay(self, baseline):
        with pytest.raises(ValueError):
            dataclasses.replace(baseline, tau=-0.5)


class TestRhs:
    def test_delayed_reduces_to_instantaneous(self, baseline):
        fx, fy = rhs_nondelayed(3.0, 4.0, baseline)
        gx, gy = rhs_delayed(3.0, 4.0, 3.0, 4.0, baseline)
        assert fx == gx and fy == gy

    def test_vectorized_matches_scalar(self, baseline):
        xs = np.array([1.0, 5.0, 20.0])
        ys = np.array([0.5, 2.0, 8.0])
        fx, fy = rhs_nondelayed(xs, ys, baseline)
        for i in range(3):
            sx, sy = rhs_nondelayed(float(xs[i]), float(ys[i]), baseline)
            assert fx[i] == pytest.approx(sx, rel=1e-15)
            assert fy[i] == pytest.approx(sy, rel=1e-15)

    def test_negative_density_rejected(self, baseline):
        with pytest.raises(ValueError):
            rhs_nondelayed(-1.0, 1.0, baseline)
        with pytest.raises(ValueError):
            rhs_delayed(1.0, 1.0, 1.0, -2.0, baseline)

    def test_prey_only_axis_is_invariant(self, baseline):
        fx, fy = rhs_nondelayed(baseline.K, 0.0, baseline)
        assert fx == 0.0 and fy == 0.0

    def test_growth_exponent_enters_predator_growth(self, baseline):
        p16 = dataclasses.replace(baseline, m=1.6)
        _, fy2 = rhs_nondelayed(5.0, 3.0, baseline)
        _, fy16 = rhs_nondelayed(5.0, 3.0, p16)
        # same loss term, smaller growth term for m < 2 at Y > 1
        expected_gap = baseline.c * (3.0**2 - 3.0**1.6)
        assert fy2 - fy16 == pytest.approx(expected_gap, rel=1e-12)


class TestEquilibria:
    def test_baseline_interior_value(self, baseline):
        eq = interior_equilibrium(baseline)
        assert eq.x == 10.0  # omega1/c - D1 is exact in floating point here
        assert eq.y == pytest.approx(9.99, abs=1e-12)
        assert eq.kind is EquilibriumKind.INTERIOR

    def test_baseline_residual(self, baseline):
        eq = interior_equilibrium(baseline)
        fx, fy = rhs_nondelayed(eq.x, eq.y, baseline)
        assert abs(fx) < 1e-12 and abs(fy) < 1e-12

    def test_axial_states_always_present(self, baseline):
        kinds = [eq.kind for eq in equilibria(baseline)]
        assert EquilibriumKind.TRIVIAL in kinds
        assert EquilibriumKind.PREY_ONLY in kinds

    def test_no_interior_when_prey_level_exceeds_capacity(self, pattern):
        # X* = omega1/c - D1 ~ 0.38; K below it leaves no coexistence state
        p = dataclasses.replace(pattern, K=0.3)
        with pytest.raises(ValueError):
            interior_equilibrium(p)

    def test_closed_form_requires_quadratic_growth(self, baseline):
        with pytest.raises(ValueError):
            equilibria(dataclasses.replace(baseline, m=1.6))

    def test_random_interior_residuals(self):
        rng = np.random.default_rng(1207)
        for _ in range(25):
            p = random_interior_params(rng)
            eq = interior_equilibrium(p)
            fx, fy = rhs_nondelayed(eq.x, eq.y, p)
            scale = 1.0 + abs(eq.x) + abs(eq.y)
            assert abs(fx) < 1e-12 * scale
            assert abs(fy) < 1e-12 * scale


class TestLinearization:
    def test_blocks_match_finite_differences_at_baseline(self, baseline):
        eq = interior_equilibrium(baseline)
        lc = linearization_coeffs(eq, baseline)
        inst, lag = jacobian_fd_delayed(eq.x, eq.y, eq.x, eq.y, baseline)
        assert inst[0, 0] == pytest.approx(lc.a11, rel=1e-7)
        assert inst[0, 1] == pytest.approx(lc.a12, rel=1e-7)
        assert inst[1, 1] == pytest.approx(lc.c_inst, rel=1e-7)
        assert lag[1, 0] == pytest.approx(lc.b21, rel=1e-7)
        assert lag[1, 1] == pytest.approx(lc.b22, rel=1e-7)
        # the prey equation has no lagged dependence
        assert abs(lag[0, 0]) < 1e-9 and abs(lag[0, 1]) < 1e-9

    def test_predator_self_term_cancels(self, baseline):
        """The instantaneous and lagged predator self-terms sum to zero."""
        eq = interior_equilibrium(baseline)
        lc = linearization_coeffs(eq, baseline)
        assert lc.c_inst + lc.b22 == pytest.approx(0.0, abs=1e-13)

    def test_random_parameter_blocks(self):
        rng = np.random.default_rng(88041)
        for _ in range(30):
            p = random_interior_params(rng)
            eq = interior_equilibrium(p)
            lc = linearization_coeffs(eq, p)
            inst, lag = jacobian_fd_delayed(eq.x, eq.y, eq.x, eq.y, p)
            analytic = np.array(
                [[lc.a11, lc.a12], [0.0, lc.c_inst]]
            ) + np.array([[0.0, 0.0], [lc.b21, lc.b22]])
            fd = inst + lag
            scale = np.abs(analytic).max() + 1.0
            assert np.abs(analytic - fd).max() < 1e-6 * scale

    def test_rejects_non_interior_state(self, baseline):
        for eq in equilibria(baseline):
            if eq.kind is not EquilibriumKind.INTERIOR:
                with pytest.raises(ValueError):
                    linearization_coeffs(eq, baseline)


class TestFiniteDifferences:
    def test_nondelayed_jacobian_consistency(self, baseline):
        eq = interior_equilibrium(baseline)
        lc = linearization_coeffs(eq, baseline)
        full = jacobian_fd(eq.x, eq.y, baseline)
        assert full[0, 0] == pytest.approx(lc.a11, rel=1e-6)
        assert full[1, 0] == pytest.approx(lc.b21, rel=1e-6)
        # J22 = c_inst + b22 = 0 at the interior state
        assert abs(full[1, 1]) < 1e-7

    def test_unreliable_step_raises(self, baseline):
        with pytest.raises(ToleranceError):
            jacobian_fd(10.0, 10.0, baseline, h=25.0)

    def test_bad_step_rejected(self, baseline):
        with pytest.raises(ValueError):
            jacobian_fd(1.0, 1.0, baseline, h=0.0)
