"""Linearized stability machinery for the uniform steady states.

Covers the non-delayed diffusion-driven (Turing) instability conditions, the
dispersion relation of the diffusive linearization, and the delayed
characteristic quasi-polynomial

    U_k(lambda, tau) = lambda^2 + A1(k) lambda + A0(k)
                       + exp(-lambda tau) (B1(k) lambda + B0(k)),

whose purely imaginary crossings give candidate Hopf points per spatial mode.
Wavenumbers are continuous here; zero-flux boxes of length L admit
k = n*pi/L.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Equilibrium,
    EquilibriumKind,
    LinearizationCoefficients,
    ModelParameters,
    interior_equilibrium,
    linearization_coeffs,
)

__all__ = [
    "Diffusivities",
    "CharCoefficients",
    "TuringReport",
    "DispersionSample",
    "HopfPoint",
    "TransversalityResult",
    "InconsistencyError",
    "char_coeffs",
    "char_coeffs_structural",
    "char_residual",
    "char_matrix",
    "nondelayed_jacobian",
    "turing_conditions",
    "dispersion_curve",
    "admissible_modes",
    "KSEARCH_COLUMNS",
    "carrying_capacity_scan",
    "routh_hurwitz_tau0",
    "hopf_point",
    "transversality",
    "continued_root",
]


class InconsistencyError(RuntimeError):
    """A closed-form crossing candidate fails its own defining equation."""


@dataclass(frozen=True)
class Diffusivities:
    """Diffusion coefficients (prey d1, predator d2); non-negative."""

    d1: float
    d2: float

    def __post_init__(self) -> None:
        if self.d1 < 0.0 or self.d2 < 0.0 or not np.all(np.isfinite([self.d1, self.d2])):
            raise ValueError("diffusivities must be non-negative and finite")


@dataclass(frozen=True)
class CharCoefficients:
    """Coefficients of the delayed characteristic equation at wavenumber k."""

    a1: float
    a0: float
    b1: float
    b0: float
    k: float = 0.0


def char_coeffs_structural(
    lc: LinearizationCoefficients, diff: Diffusivities, k: float
) -> CharCoefficients:
    """Characteristic coefficients assembled from the linearization blocks."""
    k2 = k * k
    p11 = diff.d1 * k2 - lc.a11  # prey diagonal of the instantaneous part, negated
    p22 = diff.d2 * k2 - lc.c_inst
    a1 = p11 + p22
    a0 = p11 * p22
    b1 = -lc.b22
    b0 = -lc.b22 * p11 - lc.a12 * lc.b21
    return CharCoefficients(a1=a1, a0=a0, b1=b1, b0=b0, k=k)


def char_coeffs(
    p: ModelParameters, eq: Equilibrium, diff: Diffusivities, k: float
) -> CharCoefficients:
    """Characteristic coefficients at the interior equilibrium, expanded form.

    Evaluates the fully expanded expressions in the raw model constants; the
    structural assembly from the linearization blocks is algebraically
    identical and is cross-checked in debug mode.
    """
    if eq.kind is not EquilibriumKind.INTERIOR:
        raise ValueError("characteristic coefficients are defined at the interior equilibrium")
    x, y = eq.x, eq.y
    k2 = k * k
    s2 = (p.D + p.d * x + y) ** 2
    pred_gain = p.omega * p.d * y * x / s2
    prey_decl = p.r * x / p.K
    cy = p.c * y
    lam1 = p.omega1 * y / (x + p.D1)

    a1 = (diff.d1 + diff.d2) * k2 - pred_gain + prey_decl - cy
    a0 = (
        diff.d1 * k2 * diff.d2 * k2
        - diff.d2 * k2 * pred_gain
        + diff.d2 * k2 * prey_decl
        - diff.d1 * k2 * cy
        + cy * pred_gain
        - cy * prey_decl
    )
    b1 = lam1
    b0 = (
        diff.d1 * k2 * lam1
        - pred_gain * lam1
        + prey_decl * lam1
        + p.omega * p.omega1 * x * y**2 * (p.D + p.d * x) / (s2 * (x + p.D1) ** 2)
    )
    cc = CharCoefficients(a1=a1, a0=a0, b1=b1, b0=b0, k=k)
    if __debug__:
        ref = char_coeffs_structural(linearization_coeffs(eq, p), diff, k)
        scale = max(abs(ref.a1), abs(ref.a0), abs(ref.b1), abs(ref.b0), 1.0)
        assert (
            max(abs(cc.a1 - ref.a1), abs(cc.a0 - ref.a0), abs(cc.b1 - ref.b1), abs(cc.b0 - ref.b0))
            <= 1e-12 * scale
        ), "expanded and structural characteristic coefficients disagree"
    return cc


def char_residual(cc: CharCoefficients, lam: complex, tau: float) -> complex:
    """U_k(lambda, tau); zero exactly on characteristic roots."""
    return lam * lam + cc.a1 * lam + cc.a0 + cmath.exp(-lam * tau) * (cc.b1 * lam + cc.b0)


def char_matrix(
    lc: LinearizationCoefficients,
    diff: Diffusivities,
    k: float,
    lam: complex,
    tau: float,
) -> np.ndarray:
    """Characteristic matrix Delta(lambda) whose determinant is U_k(lambda, tau)."""
    k2 = k * k
    ear = cmath.exp(-lam * tau)
    return np.array(
        [
            [lam + diff.d1 * k2 - lc.a11, -lc.a12],
            [-lc.b21 * ear, lam + diff.d2 * k2 - lc.c_inst - lc.b22 * ear],
        ],
        dtype=complex,
    )


def nondelayed_jacobian(lc: LinearizationCoefficients) -> np.ndarray:
    """Jacobian of the tau = 0 system at the interior equilibrium."""
    return np.array([[lc.a11, lc.a12], [lc.b21, lc.c_inst + lc.b22]])


@dataclass(frozen=True)
class TuringReport:
    """The four classical diffusion-driven instability conditions plus diagnostics.

    trace_negative and det_positive certify stability of the uniform state
    without diffusion; growth_band_exists (d1*J22 + d2*J11 > 0) and
    band_reachable ((J11/d1 + J22/d2)^2 > 4 det/(d1 d2)) certify that
    det(J - k^2 diag(d)) dips negative at a positive k^2.  k2_max_growth is
    the argmax of Re(lambda) over k >= 0 from the dispersion curve.
    """

    trace_negative: bool
    det_positive: bool
    growth_band_exists: bool
    band_reachable: bool
    k2_max_growth: float
    turing_unstable: bool


def _dispersion_eigen(jac: np.ndarray, diff: Diffusivities, k2: float) -> tuple[complex, complex]:
    tr = jac[0, 0] + jac[1, 1] - (diff.d1 + diff.d2) * k2
    det = (jac[0, 0] - diff.d1 * k2) * (jac[1, 1] - diff.d2 * k2) - jac[0, 1] * jac[1, 0]
    disc = cmath.sqrt(complex(tr * tr - 4.0 * det))
    return (tr + disc) / 2.0, (tr - disc) / 2.0


def _max_growth_k2(jac: np.ndarray, diff: Diffusivities) -> float:
    if diff.d1 == 0.0 and diff.d2 == 0.0:
        return 0.0
    d1d2 = diff.d1 * diff.d2
    k2_c = 0.0
    if d1d2 > 0.0:
        k2_c = (diff.d1 * jac[1, 1] + diff.d2 * jac[0, 0]) / (2.0 * d1d2)
    scale = np.abs(jac).max() / max(min(d for d in (diff.d1, diff.d2) if d > 0.0), 1e-300)
    k2_hi = max(1.0, 4.0 * max(k2_c, 0.0), 2.0 * scale)
    grid = np.linspace(0.0, k2_hi, 2001)
    best_k2, best_re = 0.0, -math.inf
    for k2 in grid:
        lam, _ = _dispersion_eigen(jac, diff, float(k2))
        if lam.real > best_re:
            best_re = lam.real
            best_k2 = float(k2)
    # One parabolic refinement around the grid optimum.
    h = grid[1] - grid[0]
    if 0.0 < best_k2 < k2_hi:
        f0 = _dispersion_eigen(jac, diff, best_k2 - h)[0].real
        f1 = best_re
        f2 = _dispersion_eigen(jac, diff, best_k2 + h)[0].real
        denom = f0 - 2.0 * f1 + f2
        if denom < 0.0:
            best_k2 += 0.5 * h * (f0 - f2) / denom
    return best_k2


def turing_conditions(jac: np.ndarray, diff: Diffusivities) -> TuringReport:
    """Evaluate the diffusion-driven instability conditions for a 2x2 Jacobian."""
    jac = np.asarray(jac, float)
    if jac.shape != (2, 2):
        raise ValueError("expected a 2x2 Jacobian")
    if diff.d1 <= 0.0 or diff.d2 <= 0.0:
        raise ValueError("the Turing conditions require positive diffusivities")
    j11, j12 = jac[0]
    j21, j22 = jac[1]
    tr = j11 + j22
    det = j11 * j22 - j12 * j21
    cond1 = tr < 0.0
    cond2 = det > 0.0
    cond3 = diff.d1 * j22 + diff.d2 * j11 > 0.0
    cond4 = (j11 / diff.d1 + j22 / diff.d2) ** 2 > 4.0 * det / (diff.d1 * diff.d2)
    return TuringReport(
        trace_negative=bool(cond1),
        det_positive=bool(cond2),
        growth_band_exists=bool(cond3),
        band_reachable=bool(cond4),
        k2_max_growth=_max_growth_k2(jac, diff),
        turing_unstable=bool(cond1 and cond2 and cond3 and cond4),
    )


@dataclass(frozen=True)
class DispersionSample:
    """Leading eigenvalue of J - k^2 diag(d1, d2) at one wavenumber."""

    k: float
    re_lambda_max: float
    im_lambda: float


def dispersion_curve(
    jac: np.ndarray, diff: Diffusivities, k_grid
) -> list[DispersionSample]:
    """Leading growth rate of the diffusive linearization over a wavenumber grid."""
    jac = np.asarray(jac, float)
    samples = []
    for k in np.asarray(k_grid, float):
        if k < 0.0:
            raise ValueError("wavenumbers must be non-negative")
        lam_p, lam_m = _dispersion_eigen(jac, diff, float(k * k))
        lam = lam_p if lam_p.real >= lam_m.real else lam_m
        samples.append(DispersionSample(float(k), lam.real, lam.imag))
    return samples


def admissible_modes(length: float, n_max: int) -> np.ndarray:
    """Zero-flux wavenumbers k_n = n*pi/length for n = 0..n_max."""
    if length <= 0.0 or n_max < 0:
        raise ValueError("need length > 0 and n_max >= 0")
    return np.arange(n_max + 1) * math.pi / length


KSEARCH_COLUMNS = (
    "K",
    "status",
    "x_star",
    "y_star",
    "re_lambda_uniform",
    "re_lambda_best",
    "best_mode",
    "mode_outgrows_uniform",
)


def carrying_capacity_scan(p0: ModelParameters, diff: Diffusivities, caps, modes=None) -> list[tuple]:
    """Screen carrying-capacity values for pattern-admitting linearizations.

    For each K the interior state is linearized and the leading growth rate
    evaluated over the given wavenumbers (defaults to the integer modes of a
    pi-length zero-flux box); a K is flagged when some nonzero mode outgrows
    the uniform one.  Rows follow KSEARCH_COLUMNS; values of K without an
    interior state carry a status marker and NaN fields.
    """
    if modes is None:
        modes = np.arange(0, 41, dtype=float)
    rows: list[tuple] = []
    for cap in np.asarray(caps, dtype=float):
        p = dataclasses.replace(p0, K=float(cap))
        try:
            eq = interior_equilibrium(p)
        except ValueError:
            rows.append(
                (float(cap), "no_interior", math.nan, math.nan, math.nan, math.nan, -1, False)
            )
            continue
        jac = nondelayed_jacobian(linearization_coeffs(eq, p))
        samples = dispersion_curve(jac, diff, modes)
        re_vals = np.array([s.re_lambda_max for s in samples])
        best = int(np.argmax(re_vals[1:]) + 1)
        flagged = bool(re_vals[best] > max(0.0, re_vals[0]))
        rows.append(
            (
                float(cap),
                "interior",
                eq.x,
                eq.y,
                float(re_vals[0]),
                float(re_vals[best]),
                best,
                flagged,
            )
        )
    return rows


def routh_hurwitz_tau0(cc: CharCoefficients) -> bool:
    """Stability of the mode at tau = 0: A1 + B1 > 0 and A0 + B0 > 0."""
    return cc.a1 + cc.b1 > 0.0 and cc.a0 + cc.b0 > 0.0


@dataclass(frozen=True)
class HopfPoint:
    """A purely imaginary crossing of the delayed characteristic equation.

    tau_star is the smallest non-negative delay at which lambda = i*omega0
    solves the mode's characteristic equation; branch j adds 2*pi*j/omega0.
    transversal records the printed sufficient inequality 2*B0 > A1*B1.
    """

    k: float
    omega0: float
    tau_star: float
    branch: int
    transversal: bool


def hopf_point(cc: CharCoefficients, branch: int = 0) -> HopfPoint | None:
    """Candidate Hopf crossing for one mode, or None when no crossing exists.

    The crossing frequency solves z^2 + Q z + (A0^2 - B0^2) = 0 with
    z = omega^2 and Q = A1^2 - B1^2 - 2 A0; the largest positive root is
    taken (it is the one crossing into the right half-plane).  The critical
    delay comes from the two real/imaginary crossing equations resolved with
    atan2, so the characteristic residual vanishes by construction.
    """
    if branch < 0:
        raise ValueError("branch index must be non-negative")
    q = cc.a1 * cc.a1 - cc.b1 * cc.b1 - 2.0 * cc.a0
    delta = cc.a0 * cc.a0 - cc.b0 * cc.b0
    disc = q * q - 4.0 * delta
    if disc < 0.0:
        return None
    z = 0.5 * (-q + math.sqrt(disc))
    if z <= 0.0:
        return None
    omega0 = math.sqrt(z)

    denom = cc.b0 * cc.b0 + z * cc.b1 * cc.b1
    if denom <= 0.0:
        return None  # B0 = B1 = 0: no delayed part, no crossing
    cos_wt = (cc.b0 * (z - cc.a0) - z * cc.a1 * cc.b1) / denom
    sin_wt = omega0 * (cc.a1 * cc.b0 + cc.b1 * (z - cc.a0)) / denom
    mag = math.hypot(cos_wt, sin_wt)
    if abs(mag - 1.0) > 1e-6:
        raise InconsistencyError(
            f"crossing angle has non-unit magnitude {mag!r}; frequency and coefficients disagree"
        )
    theta = math.atan2(sin_wt, cos_wt)
    if theta < 0.0:
        theta += 2.0 * math.pi
    tau_star = theta / omega0 + branch * 2.0 * math.pi / omega0

    residual = char_residual(cc, 1j * omega0, tau_star)
    scale = max(1.0, z, abs(cc.a0), abs(cc.b0))
    if abs(residual) > 1e-8 * scale:
        raise InconsistencyError(
            f"characteristic residual {abs(residual):.3e} too large at the computed crossing"
        )
    return HopfPoint(
        k=cc.k,
        omega0=omega0,
        tau_star=tau_star,
        branch=branch,
        transversal=2.0 * cc.b0 > cc.a1 * cc.b1,
    )


def continued_root(cc: CharCoefficients, tau: float, lam0: complex) -> complex:
    """Newton continuation of a characteristic root at delay tau from seed lam0."""
    lam = complex(lam0)
    for _ in range(100):
        ear = cmath.exp(-lam * tau)
        u = lam * lam + cc.a1 * lam + cc.a0 + ear * (cc.b1 * lam + cc.b0)
        du = 2.0 * lam + cc.a1 + ear * (cc.b1 - tau * (cc.b1 * lam + cc.b0))
        if du == 0:
            raise ZeroDivisionError("degenerate Newton step in root continuation")
        step = u / du
        lam -= step
        if abs(step) <= 1e-14 * max(1.0, abs(lam)):
            break
    return lam


@dataclass(frozen=True)
class TransversalityResult:
    """Crossing-speed check at a Hopf point.

    inequality_holds is the printed sufficient condition 2*B0 > A1*B1;
    slope is d(Re lambda)/d tau at tau* from Newton continuation of the root,
    the oracle of record.
    """

    inequality_holds: bool
    slope: float


def transversality(
    cc: CharCoefficients, hp: HopfPoint, rel_step: float = 1e-6
) -> TransversalityResult:
    """Numerically continued crossing speed at a Hopf point."""
    eps = rel_step * max(1.0, hp.tau_star)
    lam0 = 1j * hp.omega0
    tau_m = hp.tau_star - eps
    if tau_m < 0.0:
        tau_m = 0.0
        eps_m = hp.tau_star
    else:
        eps_m = eps
    lam_minus = continued_root(cc, tau_m, lam0)
    lam_plus = continued_root(cc, hp.tau_star + eps, lam0)
    slope = (lam_plus.real - lam_minus.real) / (eps + eps_m)
    return TransversalityResult(
        inequality_holds=2.0 * cc.b0 > cc.a1 * cc.b1,
        slope=slope,
    )
