"""Model definitions: parameters, right-hand sides, equilibria, linearization.

The two-species system couples logistic prey growth with Beddington-DeAngelis
predation and a predator population whose growth is driven by mating
encounters (a Y**m term, 1 < m <= 2) and limited by prey availability through
a modified Leslie-Gower loss term.  A gestation delay tau > 0 shifts the
predator loss term into the past.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParameters",
    "Equilibrium",
    "EquilibriumKind",
    "LinearizationCoefficients",
    "ToleranceError",
    "rhs_nondelayed",
    "rhs_delayed",
    "equilibria",
    "interior_equilibrium",
    "linearization_coeffs",
    "jacobian_fd",
    "jacobian_fd_delayed",
]

_POSITIVE_FIELDS = ("r", "K", "omega", "D", "c", "omega1", "D1")


class ToleranceError(RuntimeError):
    """A finite-difference step size cannot deliver the requested accuracy."""


@dataclass(frozen=True)
class ModelParameters:
    """Rate constants of the predator-prey system.

    Attributes:
        r: prey per-capita growth rate.
        K: prey carrying capacity.
        omega: maximum per-capita prey removal rate.
        D: additive refuge constant in the predation denominator.
        d: prey-proportional refuge coefficient (d >= 0).
        c: predator mating-encounter growth coefficient.
        omega1: maximum per-capita predator loss rate.
        D1: normalization of the predator loss term.
        m: predator growth exponent, 1 < m <= 2.
        tau: gestation delay (>= 0; 0 means the instantaneous model).
    """

    r: float
    K: float
    omega: float
    D: float
    d: float
    c: float
    omega1: float
    D1: float
    m: float = 2.0
    tau: float = 0.0

    def __post_init__(self) -> None:
        for name in _POSITIVE_FIELDS:
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"parameter {name} must be positive and finite, got {value!r}")
        if not np.isfinite(self.d) or self.d < 0.0:
            raise ValueError(f"parameter d must be non-negative, got {self.d!r}")
        if not np.isfinite(self.m) or not 1.0 < self.m <= 2.0:
            raise ValueError(f"exponent m must satisfy 1 < m <= 2, got {self.m!r}")
        if not np.isfinite(self.tau) or self.tau < 0.0:
            raise ValueError(f"delay tau must be non-negative, got {self.tau!r}")


class EquilibriumKind(enum.Enum):
    TRIVIAL = "trivial"
    PREY_ONLY = "prey_only"
    INTERIOR = "interior"


@dataclass(frozen=True)
class Equilibrium:
    """A spatially uniform steady state (x, y) with its classification."""

    x: float
    y: float
    kind: EquilibriumKind

    @property
    def state(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class LinearizationCoefficients:
    """Partial derivatives of the delayed system at an interior equilibrium.

    The prey row is instantaneous (a11, a12).  The predator row splits into an
    instantaneous self-coupling c_inst = c*Y* (from the mating term) and the
    delayed couplings b21, b22 (from the Leslie-Gower loss term evaluated at
    t - tau).  For tau = 0 the full Jacobian row is (b21, c_inst + b22), and
    at the interior equilibrium c_inst + b22 = 0 identically.
    """

    a11: float
    a12: float
    b21: float
    b22: float
    c_inst: float


def _check_state(x, y) -> None:
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("state components must be finite")
    if np.any(np.asarray(x) < 0.0) or np.any(np.asarray(y) < 0.0):
        raise ValueError("population densities must be non-negative")


def _rhs_core(x, y, p: ModelParameters):
    # No validation; hot path shared by the integrators and the PDE stepper.
    refuge = p.D + p.d * x + y
    fx = p.r * x * (1.0 - x / p.K) - p.omega * x * y / refuge
    fy = p.c * y**p.m - p.omega1 * y**2 / (x + p.D1)
    return fx, fy


def _rhs_delayed_core(x, y, x_lag, y_lag, p: ModelParameters):
    refuge = p.D + p.d * x + y
    fx = p.r * x * (1.0 - x / p.K) - p.omega * x * y / refuge
    fy = y * (p.c * y ** (p.m - 1.0) - p.omega1 * y_lag / (x_lag + p.D1))
    return fx, fy


def rhs_nondelayed(x, y, p: ModelParameters):
    """Instantaneous time derivatives (dx/dt, dy/dt).

    Accepts scalars or arrays of matching shape; densities must be finite and
    non-negative.
    """
    _check_state(x, y)
    return _rhs_core(x, y, p)


def rhs_delayed(x, y, x_lag, y_lag, p: ModelParameters):
    """Time derivatives with the predator loss term evaluated at the lagged state.

    Reduces to ``rhs_nondelayed`` when the lagged state equals the current one.
    """
    _check_state(x, y)
    _check_state(x_lag, y_lag)
    return _rhs_delayed_core(x, y, x_lag, y_lag, p)


def equilibria(p: ModelParameters) -> list[Equilibrium]:
    """All non-negative spatially uniform steady states.

    Always contains extinction (0, 0) and the prey-only state (K, 0).  The
    interior point X* = omega1/c - D1, with Y* read off the prey nullcline, is
    included when both components are positive.  Requires m = 2: for other
    exponents the predator nullcline depends on Y and the closed form does not
    apply.
    """
    if p.m != 2.0:
        raise ValueError("closed-form equilibria require m = 2")
    eqs = [
        Equilibrium(0.0, 0.0, EquilibriumKind.TRIVIAL),
        Equilibrium(p.K, 0.0, EquilibriumKind.PREY_ONLY),
    ]
    x_star = p.omega1 / p.c - p.D1
    if x_star > 0.0:
        growth = p.r * (1.0 - x_star / p.K)
        denom = p.omega - growth
        if growth > 0.0 and denom > 0.0:
            y_star = growth * (p.D + p.d * x_star) / denom
            if y_star > 0.0:
                eqs.append(Equilibrium(x_star, y_star, EquilibriumKind.INTERIOR))
    return eqs


def interior_equilibrium(p: ModelParameters) -> Equilibrium:
    """The coexistence steady state; raises ValueError when none exists."""
    for eq in equilibria(p):
        if eq.kind is EquilibriumKind.INTERIOR:
            return eq
    raise ValueError("no interior equilibrium for these parameters")


def linearization_coeffs(eq: Equilibrium, p: ModelParameters) -> LinearizationCoefficients:
    """Analytic linearization of the delayed system at an interior equilibrium."""
    if eq.kind is not EquilibriumKind.INTERIOR:
        raise ValueError("linearization coefficients are defined at the interior equilibrium")
    x, y = eq.x, eq.y
    refuge = p.D + p.d * x + y
    a11 = -p.r * x / p.K + p.omega * p.d * y * x / refuge**2
    a12 = -p.omega * x * (p.D + p.d * x) / refuge**2
    b21 = p.omega1 * y**2 / (x + p.D1) ** 2
    b22 = -p.omega1 * y / (x + p.D1)
    c_inst = p.c * y
    return LinearizationCoefficients(a11=a11, a12=a12, b21=b21, b22=b22, c_inst=c_inst)


def _central_diff(f, x: float, y: float, h: float) -> np.ndarray:
    cols = []
    for dx, dy in ((h, 0.0), (0.0, h)):
        fp = np.asarray(f(x + dx, y + dy), float)
        fm = np.asarray(f(x - dx, y - dy), float)
        cols.append((fp - fm) / (2.0 * h))
    return np.column_stack(cols)


def jacobian_fd(x: float, y: float, p: ModelParameters, h: float | None = None) -> np.ndarray:
    """Central finite-difference Jacobian of the instantaneous right-hand side.

    The difference is computed at steps h and h/2; disagreement beyond what
    second-order convergence allows indicates cancellation (h too small) or a
    too-coarse step and raises ToleranceError.
    """
    _check_state(x, y)
    if h is None:
        h = 1e-5 * (1.0 + abs(x) + abs(y))
    if h <= 0.0:
        raise ValueError("step h must be positive")

    def f(a, b):
        return _rhs_core(max(a, 0.0), max(b, 0.0), p)

    coarse = _central_diff(f, x, y, h)
    fine = _central_diff(f, x, y, 0.5 * h)
    scale = np.abs(fine).max() + 1.0
    if np.abs(coarse - fine).max() > 1e-4 * scale:
        raise ToleranceError(f"finite-difference step h={h!r} is unreliable at ({x}, {y})")
    return fine


def jacobian_fd_delayed(
    x: float,
    y: float,
    x_lag: float,
    y_lag: float,
    p: ModelParameters,
    h: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference blocks (d/d current state, d/d lagged state) of the delayed rhs."""
    _check_state(x, y)
    _check_state(x_lag, y_lag)
    if h is None:
        h = 1e-5 * (1.0 + abs(x) + abs(y) + abs(x_lag) + abs(y_lag))

    def f_now(a, b):
        return _rhs_delayed_core(max(a, 0.0), max(b, 0.0), x_lag, y_lag, p)

    def f_lag(a, b):
        return _rhs_delayed_core(x, y, max(a, 0.0), max(b, 0.0), p)

    j_now = _central_diff(f_now, x, y, h)
    j_lag = _central_diff(f_lag, x_lag, y_lag, h)
    return j_now, j_lag
