"""Adaptive integrator, blow-up detection, and escape-time refinement."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import with_tau
from lgbd.integrate import (
    BlowUp,
    Completed,
    HistoryBuffer,
    StepControl,
    StepFailure,
    estimate_blowup_time,
    integrate,
    integrate_dde,
    integrate_ode,
)


def bracket_width_ok(out: BlowUp) -> bool:
    return out.t_high - out.t_low <= max(1e-6, 1e-4 * out.t_high)


class TestStepControl:
    def test_validation(self):
        with pytest.raises(ValueError):
            StepControl(t_end=-1.0)
        with pytest.raises(ValueError):
            StepControl(t_end=1.0, rel_tol=0.0)
        with pytest.raises(ValueError):
            StepControl(t_end=1.0, h_min=1.0, h_max=0.5)


class TestCompletedRuns:
    def test_linear_decay_accuracy(self):
        ctl = StepControl(t_end=5.0, rel_tol=1e-10, abs_tol=1e-12)
        traj = integrate(lambda t, y: -y, np.array([1.0]), ctl)
        assert isinstance(traj.outcome, Completed)
        assert traj.t[-1] == pytest.approx(5.0, abs=1e-12)
        assert traj.y[-1][0] == pytest.approx(math.exp(-5.0), rel=1e-8)

    def test_oscillator_phase(self):
        ctl = StepControl(t_end=2.0 * math.pi, rel_tol=1e-10, abs_tol=1e-12)
        f = lambda t, y: np.array([y[1], -y[0]])
        traj = integrate(f, np.array([1.0, 0.0]), ctl)
        assert traj.y[-1][0] == pytest.approx(1.0, abs=1e-7)
        assert traj.y[-1][1] == pytest.approx(0.0, abs=1e-7)

    def test_breaks_are_honored(self):
        breaks = [0.3, 0.7, 1.5]
        ctl = StepControl(t_end=2.0)
        traj = integrate(lambda t, y: -y, np.array([1.0]), ctl, breaks=breaks)
        times = np.asarray(traj.t)
        for b in breaks:
            assert np.min(np.abs(times - b)) < 1e-12

    def test_monotone_time_grid(self):
        ctl = StepControl(t_end=3.0)
        traj = integrate(lambda t, y: np.sin(y), np.array([0.5]), ctl)
        assert np.all(np.diff(np.asarray(traj.t)) > 0.0)


class TestBlowupDetection:
    def test_riccati_bracket(self):
        """dY/dt = Y^2 from 1 escapes exactly at t = 1."""
        ctl = StepControl(t_end=2.0)
        traj = integrate(lambda t, y: y * y, np.array([1.0]), ctl)
        out = traj.outcome
        assert isinstance(out, BlowUp)
        assert out.t_low <= 1.0 <= out.t_high
        assert out.t_high - out.t_low < 1e-6
        assert bracket_width_ok(out)

    def test_logistic_comparison_bracket(self):
        """dY/dt = Y^2 - Y from 2 escapes at ln 2."""
        ctl = StepControl(t_end=2.0)
        traj = integrate(lambda t, y: y * y - y, np.array([2.0]), ctl)
        out = traj.outcome
        assert isinstance(out, BlowUp)
        mid = 0.5 * (out.t_low + out.t_high)
        assert abs(mid - math.log(2.0)) < 1e-5 * math.log(2.0)
        assert bracket_width_ok(out)

    def test_transient_spike_is_not_reported(self):
        """Growth that is pulled back down must complete, not blow up."""
        ctl = StepControl(t_end=12.0)
        f = lambda t, y: y * (7.0 - 1.25 * t)  # peak ~3e8 at t = 5.6
        traj = integrate(f, np.array([1.0]), ctl)
        assert isinstance(traj.outcome, Completed)
        assert traj.y[-1][0] < 1.0

    def test_stiff_region_reports_step_failure(self):
        """Step collapse without a threshold crossing is not a blow-up."""
        ctl = StepControl(t_end=5.0, blowup_threshold=1e300)
        traj = integrate(lambda t, y: np.exp(y), np.array([1.0]), ctl)
        out = traj.outcome
        assert isinstance(out, StepFailure)
        assert "threshold" in out.reason

    def test_power_law_family(self):
        """dY/dt = Y^p blows up at 1/((p-1) y0^(p-1)); brackets must contain it."""
        rng = np.random.default_rng(52193)
        for _ in range(10):
            pexp = float(rng.uniform(1.3, 3.0))
            y0 = float(rng.uniform(0.5, 4.0))
            t_star = 1.0 / ((pexp - 1.0) * y0 ** (pexp - 1.0))
            ctl = StepControl(t_end=2.0 * t_star + 1.0)
            traj = integrate(
                lambda t, y: np.abs(y) ** pexp, np.array([y0]), ctl
            )
            out = traj.outcome
            assert isinstance(out, BlowUp), (pexp, y0)
            assert out.t_low <= t_star <= out.t_high or (
                # allow one-sided fp slack no wider than the bracket itself
                min(abs(out.t_low - t_star), abs(out.t_high - t_star))
                < 1e-9 * max(1.0, t_star)
            )
            assert bracket_width_ok(out)


class TestModelRuns:
    def test_baseline_equilibrium_is_stationary(self, baseline):
        ctl = StepControl(t_end=20.0)
        traj = integrate_ode(np.array([10.0, 9.99]), baseline, ctl)
        assert isinstance(traj.outcome, Completed)
        final = traj.y[-1]
        assert final[0] == pytest.approx(10.0, abs=1e-6)
        assert final[1] == pytest.approx(9.99, abs=1e-6)

    def test_large_ic_blows_up(self, baseline):
        ctl = StepControl(t_end=10.0)
        traj = integrate_ode(np.array([700.0, 700.0]), baseline, ctl)
        assert isinstance(traj.outcome, BlowUp)
        assert bracket_width_ok(traj.outcome)

    def test_dde_matches_ode_without_delay_dependence(self, baseline):
        """Starting at the equilibrium, the lagged state never differs."""
        p = with_tau(baseline, 1.5)
        ctl = StepControl(t_end=10.0)
        traj = integrate_dde(np.array([10.0, 9.99]), p, ctl)
        assert isinstance(traj.outcome, Completed)
        assert traj.y[-1][0] == pytest.approx(10.0, abs=1e-6)

    def test_dde_requires_positive_delay(self, baseline):
        with pytest.raises(ValueError):
            integrate_dde(np.array([5.0, 5.0]), baseline, StepControl(t_end=1.0))

    def test_m16_scale_split(self, baseline):
        """Sub-quadratic growth still escapes from large data, not from small."""
        p = with_tau(baseline, 2.0)
        p = p.__class__(**{**p.__dict__, "m": 1.6})
        ctl = StepControl(t_end=10.0)
        big = integrate_dde(np.array([2000.0, 2000.0]), p, ctl)
        small = integrate_dde(np.array([200.0, 200.0]), p, ctl)
        assert isinstance(big.outcome, BlowUp)
        assert isinstance(small.outcome, Completed)


class TestEstimate:
    def test_riccati_estimate_consistent(self):
        rhs = lambda t, y: y * y
        ctl = StepControl(t_end=2.0)
        make = lambda c: integrate(rhs, np.array([1.0]), c)
        est = estimate_blowup_time(make, ctl, rhs=rhs, y0=np.array([1.0]))
        assert est.consistent
        assert est.t_low <= 1.0 <= est.t_high
        assert abs(est.arc_estimate - 1.0) < 1e-6

    def test_bernoulli_family_estimates(self):
        """Closed-form dY/dt = c Y^2 - b Y blow-up times over random draws."""
        rng = np.random.default_rng(20240817)
        for _ in range(8):
            c = float(rng.uniform(0.5, 3.0))
            b = float(rng.uniform(0.0, 1.5))
            y0 = float(rng.uniform(1.0, 5.0)) + b / c  # ensure escape
            t_star = (
                1.0 / (c * y0)
                if b == 0.0
                else math.log(c * y0 / (c * y0 - b)) / b
            )
            rhs = lambda t, y, c=c, b=b: c * y * y - b * y
            ctl = StepControl(t_end=2.0 * t_star + 1.0)
            make = lambda ctrl, rhs=rhs, y0=y0: integrate(
                rhs, np.array([y0]), ctrl
            )
            est = estimate_blowup_time(make, ctl, rhs=rhs, y0=np.array([y0]))
            assert est.consistent
            assert est.t_low <= t_star * (1 + 1e-7)
            assert est.t_high >= t_star * (1 - 1e-7)
            assert abs(est.arc_estimate - t_star) < 1e-5 * max(1.0, t_star)

    def test_bounded_run_raises(self, baseline):
        ctl = StepControl(t_end=5.0)
        make = lambda c: integrate_ode(np.array([10.0, 9.99]), baseline, c)
        with pytest.raises(ValueError):
            estimate_blowup_time(make, ctl)


class TestHistoryBuffer:
    def test_nodes_are_exact(self):
        buf = HistoryBuffer(0.0, np.array([0.0]))
        ts = np.linspace(0.0, 1.0, 11)
        for t in ts[1:]:
            buf.append(float(t), np.array([math.sin(t)]), np.array([math.cos(t)]))
        for t in ts:
            assert buf.value(float(t))[0] == pytest.approx(math.sin(t), abs=1e-15)

    def test_hermite_midpoint_accuracy(self):
        buf = HistoryBuffer(0.0, np.array([0.0]))
        h = 0.1
        for i in range(1, 21):
            t = i * h
            buf.append(t, np.array([math.sin(t)]), np.array([math.cos(t)]))
        worst = 0.0
        for i in range(1, 20):  # first interval lacks a left slope
            t = (i + 0.5) * h
            worst = max(worst, abs(buf.value(t)[0] - math.sin(t)))
        # cubic Hermite: O(h^4) interpolation error
        assert worst < 1e-6
        # the slope-free leading interval still interpolates at O(h^3)
        assert abs(buf.value(0.5 * h)[0] - math.sin(0.5 * h)) < 1e-4

    def test_constant_prehistory_and_forward_guard(self):
        buf = HistoryBuffer(0.0, np.array([1.0]))
        buf.append(1.0, np.array([2.0]), np.array([1.0]))
        # before t0 the initial function is the constant history
        assert buf.value(-0.5)[0] == 1.0
        # beyond the recorded window is a programming error
        with pytest.raises(RuntimeError):
            buf.value(1.5)
