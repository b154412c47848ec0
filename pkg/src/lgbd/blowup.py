"""Finite-time blow-up certificates, comparison closed forms, and threshold scans.

The predator equation dominates dY/dt >= delta1 * Y^2 as long as its loss
term stays below c - delta1, which holds while the prey remains above a
critical level.  Certificates check the printed largeness condition on the
initial data; the comparison problem dY/dt = c Y^2 - b Y supplies closed-form
blow-up times used as oracles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import BlowUp, Completed, StepControl, Trajectory, integrate_dde, integrate_ode
from .model import ModelParameters

__all__ = [
    "BlowupCertificate",
    "ThresholdResult",
    "check_nondelayed_condition",
    "comparison_blowup_time",
    "lower_prey_envelope",
    "scan_delta1",
    "threshold_bisection",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlowupCertificate:
    """Outcome of the initial-data largeness check.

    condition_holds guarantees finite-time predator blow-up with
    T* <= t_star_bound = 1/(delta1 * Y0).  detail carries the compared
    quantities: prey_floor = omega/(c - delta1) - D1, lhs = omega/delta1,
    rhs = Y0 * ln(X0 / prey_floor) (absent in the trivial branch where the
    prey floor is non-positive and no largeness is needed).
    """

    condition_holds: bool
    delta1: float
    t_star_bound: float | None
    detail: dict = field(default_factory=dict)


def check_nondelayed_condition(
    p: ModelParameters, x0: float, y0: float, delta1: float
) -> BlowupCertificate:
    """Evaluate the blow-up largeness condition for initial data (x0, y0)."""
    if p.m != 2.0:
        raise ValueError("the blow-up certificate applies to the m = 2 model")
    if not 0.0 < delta1 < p.c:
        raise ValueError(f"delta1 must lie in (0, c) = (0, {p.c}), got {delta1!r}")
    if not (x0 > 0.0 and y0 > 0.0 and np.isfinite(x0) and np.isfinite(y0)):
        raise ValueError("initial data must be positive and finite")

    prey_floor = p.omega / (p.c - delta1) - p.D1
    bound = 1.0 / (delta1 * y0)
    if prey_floor <= 0.0:
        # Trivial branch: the loss term never catches up with the growth term.
        detail = {"prey_floor": prey_floor, "trivial": True}
        return BlowupCertificate(True, delta1, bound, detail)
    lhs = p.omega / delta1
    rhs = y0 * math.log(x0 / prey_floor)
    holds = rhs > lhs
    detail = {"prey_floor": prey_floor, "lhs": lhs, "rhs": rhs, "trivial": False}
    return BlowupCertificate(holds, delta1, bound if holds else None, detail)


def scan_delta1(
    p: ModelParameters, x0: float, y0: float, count: int = 199
) -> BlowupCertificate:
    """Scan delta1 over (0, c) and return the weakest-condition certificate.

    The margin parameter trades the guaranteed escape rate against the
    largeness demanded of the initial data; the scan reports the choice
    with the largest slack (rhs - lhs), preferring the trivial branch
    where the condition is vacuous.
    """
    if count < 1:
        raise ValueError("count must be positive")
    best: BlowupCertificate | None = None
    best_margin = -math.inf
    for k in range(1, count + 1):
        delta1 = p.c * k / (count + 1)
        cert = check_nondelayed_condition(p, x0, y0, delta1)
        if cert.detail.get("trivial"):
            margin = math.inf
        else:
            margin = cert.detail["rhs"] - cert.detail["lhs"]
        if margin > best_margin:
            best, best_margin = cert, margin
    assert best is not None
    return best


def comparison_blowup_time(c_coef: float, b_coef: float, y0: float) -> float | None:
    """Closed-form blow-up time of dY/dt = c Y^2 - b Y.

    Returns 1/(c*y0) for b = 0, (1/b) ln(c*y0 / (c*y0 - b)) when y0 > b/c,
    and None otherwise (the solution decays instead of escaping).
    """
    if c_coef <= 0.0 or y0 <= 0.0 or b_coef < 0.0:
        raise ValueError("need c > 0, y0 > 0 and b >= 0")
    if b_coef == 0.0:
        return 1.0 / (c_coef * y0)
    if y0 > b_coef / c_coef:
        return math.log(c_coef * y0 / (c_coef * y0 - b_coef)) / b_coef
    return None


def lower_prey_envelope(x0: float, omega: float, t) -> np.ndarray | float:
    """Exponential lower envelope x0 * exp(-omega t) of the prey density.

    Valid while the prey starts at or below carrying capacity; predation can
    remove at most the fraction omega of the prey per unit time.
    """
    if x0 < 0.0 or omega <= 0.0:
        raise ValueError("need x0 >= 0 and omega > 0")
    return x0 * np.exp(-omega * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ThresholdResult:
    """Bracket around the initial-data scale separating bounded runs from blow-up.

    Runs at scale_low completed over the tested horizon; runs at scale_high
    blew up.  monotone records the equal-IC spot check at interior scales;
    violations are logged but not fatal (the boundary is horizon-relative and
    assumed monotone).
    """

    scale_low: float
    scale_high: float
    monotone: bool


def _outcome_at_scale(scale: float, p: ModelParameters, ctl: StepControl):
    ic = (scale, scale)
    traj = integrate_dde(ic, p, ctl) if p.tau > 0.0 else integrate_ode(ic, p, ctl)
    return traj.outcome


def threshold_bisection(
    p: ModelParameters,
    ctl: StepControl,
    scale_low: float,
    scale_high: float,
    width: float = 0.01,
) -> ThresholdResult:
    """Bisect the IC scale s (initial data (s, s)) between bounded and blow-up runs.

    Requires a completed run at scale_low and a blow-up at scale_high; anything
    else (including StepFailure) raises.  Five interior scales of the original
    range are spot-checked for monotonicity afterwards.
    """
    if not 0.0 < scale_low < scale_high:
        raise ValueError("need 0 < scale_low < scale_high")

    lo0, hi0 = scale_low, scale_high
    out_lo = _outcome_at_scale(scale_low, p, ctl)
    if not isinstance(out_lo, Completed):
        raise ValueError(f"run at scale_low={scale_low} did not complete: {out_lo!r}")
    out_hi = _outcome_at_scale(scale_high, p, ctl)
    if not isinstance(out_hi, BlowUp):
        raise ValueError(f"run at scale_high={scale_high} did not blow up: {out_hi!r}")

    lo, hi = scale_low, scale_high
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        out = _outcome_at_scale(mid, p, ctl)
        if isinstance(out, BlowUp):
            hi = mid
        elif isinstance(out, Completed):
            lo = mid
        else:
            raise RuntimeError(f"step failure at scale {mid}: {out!r}")

    monotone = True
    for i in range(1, 6):
        probe = lo0 + (hi0 - lo0) * i / 6.0
        if lo < probe < hi:
            continue  # inside the unresolved bracket
        out = _outcome_at_scale(probe, p, ctl)
        expected_blowup = probe >= hi
        actual_blowup = isinstance(out, BlowUp)
        if actual_blowup != expected_blowup:
            monotone = False
            log.warning(
                "threshold monotonicity violated at scale %.6g (bracket [%.6g, %.6g])",
                probe,
                lo,
                hi,
            )
    return ThresholdResult(lo, hi, monotone)
