"""Blow-up certificates, comparison closed forms, and threshold scans."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from lgbd.blowup import (
    check_nondelayed_condition,
    comparison_blowup_time,
    lower_prey_envelope,
    scan_delta1,
    threshold_bisection,
)
from lgbd.integrate import BlowUp, StepControl, integrate_ode


class TestCertificate:
    def test_worked_example(self, baseline):
        """delta1 = c/2 with X0 = 190e, Y0 = 250: every quantity is printable."""
        x0 = 190.0 * math.e
        cert = check_nondelayed_condition(baseline, x0, 250.0, delta1=0.005)
        assert cert.condition_holds
        assert cert.detail["prey_floor"] == pytest.approx(190.0, rel=1e-12)
        assert cert.detail["lhs"] == pytest.approx(200.0, rel=1e-12)
        assert cert.detail["rhs"] == pytest.approx(250.0, rel=1e-12)
        assert cert.t_star_bound == pytest.approx(0.8, rel=1e-12)

    def test_condition_fails_for_small_predator(self, baseline):
        cert = check_nondelayed_condition(baseline, 190.0 * math.e, 150.0, 0.005)
        assert not cert.condition_holds
        assert cert.t_star_bound is None

    def test_trivial_branch(self, baseline):
        """A non-positive prey floor needs no largeness at all."""
        p = dataclasses.replace(baseline, omega=0.5, c=0.5, D1=3.0)
        cert = check_nondelayed_condition(p, 1.0, 1.0, delta1=0.01)
        assert cert.detail["trivial"]
        assert cert.condition_holds
        assert cert.t_star_bound == pytest.approx(100.0)

    def test_delta1_must_sit_inside_zero_c(self, baseline):
        for bad in (0.0, baseline.c, 2.0 * baseline.c, -0.001):
            with pytest.raises(ValueError):
                check_nondelayed_condition(baseline, 100.0, 100.0, bad)

    def test_m2_only(self, baseline):
        p = dataclasses.replace(baseline, m=1.6)
        with pytest.raises(ValueError):
            check_nondelayed_condition(p, 100.0, 100.0, 0.005)

    def test_bound_is_honored_by_simulation(self, baseline):
        """Small sample of the theorem-bound property (full run in acceptance)."""
        rng = np.random.default_rng(4643)
        checked = 0
        while checked < 5:
            delta1 = float(rng.uniform(0.001, 0.009))
            floor = baseline.omega / (baseline.c - delta1) - baseline.D1
            u = float(rng.uniform(0.5, 3.0))
            x0 = floor * math.exp(u)
            y0 = float(rng.uniform(1.05, 3.0)) / (delta1 * u)
            cert = check_nondelayed_condition(baseline, x0, y0, delta1)
            if not cert.condition_holds:
                continue
            checked += 1
            ctl = StepControl(t_end=2.0 * cert.t_star_bound)
            traj = integrate_ode(np.array([x0, y0]), baseline, ctl)
            assert isinstance(traj.outcome, BlowUp)
            assert traj.outcome.t_high <= cert.t_star_bound * 1.01


class TestScan:
    def test_scan_beats_fixed_choice(self, baseline):
        x0, y0 = 190.0 * math.e, 250.0
        best = scan_delta1(baseline, x0, y0)
        fixed = check_nondelayed_condition(baseline, x0, y0, 0.005)
        assert best.condition_holds
        margin_best = best.detail["rhs"] - best.detail["lhs"]
        margin_fixed = fixed.detail["rhs"] - fixed.detail["lhs"]
        assert margin_best >= margin_fixed

    def test_scan_prefers_trivial_branch(self, baseline):
        p = dataclasses.replace(baseline, omega=0.5, c=0.5, D1=3.0)
        best = scan_delta1(p, 2.0, 2.0)
        assert best.detail["trivial"]

    def test_count_validation(self, baseline):
        with pytest.raises(ValueError):
            scan_delta1(baseline, 10.0, 10.0, count=0)


class TestComparison:
    def test_pure_quadratic(self):
        assert comparison_blowup_time(2.0, 0.0, 4.0) == pytest.approx(0.125)

    def test_with_decay(self):
        # dY/dt = Y^2 - Y from 2: T* = ln 2
        assert comparison_blowup_time(1.0, 1.0, 2.0) == pytest.approx(
            math.log(2.0), rel=1e-15
        )

    def test_subcritical_returns_none(self):
        assert comparison_blowup_time(1.0, 1.0, 0.5) is None

    def test_validation(self):
        with pytest.raises(ValueError):
            comparison_blowup_time(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            comparison_blowup_time(1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            comparison_blowup_time(1.0, 1.0, 0.0)

    def test_matches_integrator(self):
        c, b, y0 = 1.5, 0.7, 3.0
        t_star = comparison_blowup_time(c, b, y0)
        from lgbd.integrate import integrate

        out = integrate(
            lambda t, y: c * y * y - b * y,
            np.array([y0]),
            StepControl(t_end=2.0 * t_star),
        ).outcome
        assert isinstance(out, BlowUp)
        assert out.t_low <= t_star <= out.t_high


class TestEnvelope:
    def test_values_and_shape(self):
        t = np.array([0.0, 1.0, 2.0])
        env = lower_prey_envelope(3.0, 0.5, t)
        assert env[0] == 3.0
        assert env[1] == pytest.approx(3.0 * math.exp(-0.5))
        assert np.asarray(lower_prey_envelope(1.0, 1.0, 0.3)).shape == ()

    def test_envelope_bounds_simulation(self, baseline):
        """The prey never falls below x0*exp(-omega t) while x0 <= K."""
        ctl = StepControl(t_end=3.0)
        x0, y0 = 50.0, 80.0
        traj = integrate_ode(np.array([x0, y0]), baseline, ctl)
        times = np.asarray(traj.t)
        prey = np.asarray([s[0] for s in traj.y])
        env = lower_prey_envelope(x0, baseline.omega, times)
        assert np.all(prey >= env - 1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            lower_prey_envelope(-1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            lower_prey_envelope(1.0, 0.0, 0.0)


class TestThresholdBisection:
    def test_nondelayed_boundary(self, baseline):
        ctl = StepControl(t_end=40.0)
        res = threshold_bisection(baseline, ctl, 10.0, 100.0, width=0.5)
        assert 10.0 < res.scale_low < res.scale_high < 100.0
        assert res.scale_high - res.scale_low <= 0.5
        assert res.monotone

    def test_endpoints_must_disagree(self, baseline):
        ctl = StepControl(t_end=40.0)
        with pytest.raises(ValueError):
            threshold_bisection(baseline, ctl, 200.0, 700.0)  # both blow up
        with pytest.raises(ValueError):
            threshold_bisection(baseline, ctl, 1.0, 2.0)  # both complete

    def test_scale_ordering_validated(self, baseline):
        with pytest.raises(ValueError):
            threshold_bisection(baseline, StepControl(t_end=1.0), 5.0, 5.0)
