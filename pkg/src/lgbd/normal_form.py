"""Center-manifold reduction at a delay-induced Hopf point.

Builds the complex eigenvector pairing for the critical characteristic
root, the quadratic/cubic coefficients of the reduced equation on the
center manifold, and the scalar quantities that classify the bifurcating
periodic orbit (direction, orbital stability, period trend).

Everything here works on a single spatial mode: the instantaneous and
delayed Jacobian blocks are shifted by ``-d1*k**2`` / ``-d2*k**2`` and the
delay enters through ``exp(-lambda*tau)`` factors.  ``k = 0`` recovers the
non-spatial delayed system.
"""

from __future__ import annotations

import cmath
import dataclasses
import enum
import math
from typing import Callable, Optional

import numpy as np

from .linear_analysis import (
    CharCoefficients,
    Diffusivities,
    HopfPoint,
    char_matrix,
    continued_root,
)
from .model import LinearizationCoefficients, ModelParameters


class NormalFormError(RuntimeError):
    """Base class for failures of the center-manifold computation."""


class DegeneratePairingError(NormalFormError):
    """The eigenvector pairing is ill-defined (vanishing normalizer or
    the supplied (omega0, tau_star) is not a characteristic root)."""


class ResonanceError(NormalFormError):
    """A resolvent solve for the quadratic manifold coefficients hit a
    (near-)singular matrix: an internal resonance of the critical mode."""


class TransversalityError(NormalFormError):
    """The critical root does not cross the imaginary axis transversally,
    so the classification quantities are undefined."""


# ---------------------------------------------------------------------------
# eigenvector pairing
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ComplexPairing:
    """Critical eigenvector data at a Hopf point.

    ``alpha2`` is the second component of the right eigenvector
    ``q(theta) = (1, alpha2) * exp(i*omega0*tau_star*theta)`` and
    ``alpha2_star`` the second component of the adjoint eigenvector
    ``q*(s) = n_bar * (1, alpha2_star) * exp(i*omega0*tau_star*s)``;
    ``n_bar`` normalizes the pairing so that ``<q*, q> = 1``.

    Both components are obtained from the (conjugate-transpose)
    eigenproblem of the characteristic matrix.  The closed-form textbook
    expressions are evaluated alongside and kept for comparison:
    ``alpha2_closed_form`` agrees with ``alpha2`` at ``k = 0`` but carries
    the opposite sign on the ``d1*k**2`` shift, and ``alpha2_star_closed_form``
    additionally conjugates the delay exponential, so disagreement at a
    generic point is expected and is reported rather than hidden.
    """

    alpha2: complex
    alpha2_star: complex
    n_bar: complex
    omega0: float
    tau_star: float
    alpha2_closed_form: complex
    alpha2_star_closed_form: complex
    closed_form_deviation: float

    @property
    def q0(self) -> np.ndarray:
        return np.array([1.0, self.alpha2], dtype=complex)

    @property
    def qstar0(self) -> np.ndarray:
        return np.array([1.0, self.alpha2_star], dtype=complex)


def delayed_block(lc: LinearizationCoefficients) -> np.ndarray:
    """Jacobian block multiplying the delayed state, ``[[0, 0], [b21, b22]]``."""
    return np.array([[0.0, 0.0], [lc.b21, lc.b22]])


def bilinear_pairing(
    psi: Callable[[float], np.ndarray],
    phi: Callable[[float], np.ndarray],
    lc: LinearizationCoefficients,
    tau_star: float,
    n_nodes: int = 80,
) -> complex:
    """Evaluate the adjoint pairing ``<psi, phi>`` by quadrature.

    ``phi`` maps ``theta in [-1, 0]`` and ``psi`` maps ``s in [0, 1]`` to
    C^2 vectors.  The pairing is

        conj(psi(0)) . phi(0)
            + tau_star * integral_{-1}^{0} conj(psi(xi+1)) . B . phi(xi) dxi

    with ``B`` the delayed Jacobian block.  Gauss-Legendre quadrature is
    exact to machine precision for the exponential eigenfunctions used in
    practice, which makes this a useful independent check on the
    closed-form normalization.
    """
    if tau_star <= 0.0:
        raise ValueError("tau_star must be positive")
    b_del = delayed_block(lc)
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    # map [-1, 1] -> [-1, 0]
    xi = 0.5 * (nodes - 1.0)
    total = 0.0 + 0.0j
    for x, w in zip(xi, weights):
        total += w * (np.conj(psi(x + 1.0)) @ (b_del @ phi(x)))
    integral = 0.5 * total
    return complex(np.conj(psi(0.0)) @ phi(0.0) + tau_star * integral)


def _null_vector(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Right null vector of a 2x2 complex matrix via SVD.

    Returns the vector scaled to first component 1 and the relative
    smallest singular value (quality of the null space).
    """
    u, s, vh = np.linalg.svd(m)
    vec = np.conj(vh[-1])
    rel = float(s[-1] / s[0]) if s[0] > 0.0 else 0.0
    if abs(vec[0]) < 1e-12 * abs(vec[1]):
        raise DegeneratePairingError(
            "critical eigenvector has vanishing first component; "
            "the (1, alpha2) normalization is not available"
        )
    return vec / vec[0], rel


def eigen_pairing(
    lc: LinearizationCoefficients,
    diff: Diffusivities,
    k: float,
    omega0: float,
    tau_star: float,
) -> ComplexPairing:
    """Construct the normalized eigenvector pairing at a Hopf point.

    The right eigenvector comes from the null space of the characteristic
    matrix at ``lambda = i*omega0`` and the adjoint eigenvector from the
    null space of its conjugate transpose.  The normalizer enforces
    ``<q*, q> = 1`` exactly; ``<q*, q_bar> = 0`` then holds automatically
    because the two vectors belong to distinct eigenvalues.  Both
    identities are re-checked by quadrature before returning.

    Raises
    ------
    DegeneratePairingError
        If ``(omega0, tau_star)`` is not actually a characteristic root,
        if the normalizing denominator vanishes, or if either pairing
        identity fails its 1e-10 tolerance.
    """
    if omega0 <= 0.0 or tau_star <= 0.0:
        raise ValueError("omega0 and tau_star must be positive")
    m = char_matrix(lc, diff, k, 1j * omega0, tau_star)
    scale = float(np.linalg.norm(m))

    q0, rel_right = _null_vector(m)
    qs0, rel_left = _null_vector(m.conj().T)
    if max(rel_right, rel_left) > 1e-7:
        raise DegeneratePairingError(
            "characteristic matrix is not singular at i*omega0 "
            f"(relative smallest singular value {max(rel_right, rel_left):.3e}); "
            "(omega0, tau_star) is not a crossing of this mode"
        )
    alpha2 = complex(q0[1])
    alpha2_star = complex(qs0[1])

    # Closed-form textbook expressions, kept for comparison.
    d1k2 = diff.d1 * k * k
    d2k2 = diff.d2 * k * k
    rot = cmath.exp(-1j * omega0 * tau_star)
    alpha2_cf = (1j * omega0 - lc.a11 - d1k2) / lc.a12
    alpha2_star_cf = -(1j * omega0 + lc.a11 + d2k2) / (lc.b21 * rot)
    dev = max(
        abs(alpha2 - alpha2_cf) / max(1.0, abs(alpha2)),
        abs(alpha2_star - alpha2_star_cf) / max(1.0, abs(alpha2_star)),
    )

    denom = 1.0 + alpha2 * np.conj(alpha2_star) + tau_star * (
        lc.b21 + alpha2 * lc.b22
    ) * np.conj(alpha2_star) * rot
    if abs(denom) < 1e-12 * max(1.0, abs(alpha2), abs(alpha2_star)):
        raise DegeneratePairingError(
            "pairing normalizer vanishes; adjoint and critical eigenvectors "
            "are orthogonal in the delay pairing"
        )
    n_bar = 1.0 / denom

    pairing = ComplexPairing(
        alpha2=alpha2,
        alpha2_star=complex(alpha2_star),
        n_bar=complex(n_bar),
        omega0=omega0,
        tau_star=tau_star,
        alpha2_closed_form=complex(alpha2_cf),
        alpha2_star_closed_form=complex(alpha2_star_cf),
        closed_form_deviation=float(dev),
    )

    # Residual of the eigenvalue relation and both pairing identities.
    resid = float(np.linalg.norm(m @ pairing.q0))
    if resid > 1e-10 * max(1.0, scale):
        raise DegeneratePairingError(
            f"critical eigenvector residual {resid:.3e} exceeds tolerance"
        )
    w = omega0 * tau_star

    def q_fun(theta: float) -> np.ndarray:
        return pairing.q0 * cmath.exp(1j * w * theta)

    def qbar_fun(theta: float) -> np.ndarray:
        return np.conj(pairing.q0) * cmath.exp(-1j * w * theta)

    def qstar_fun(s: float) -> np.ndarray:
        # the stored normalizer is the conjugated one (as used in the g
        # coefficients); the eigenfunction itself carries its conjugate
        return np.conj(n_bar) * pairing.qstar0 * cmath.exp(1j * w * s)

    inner_qq = bilinear_pairing(qstar_fun, q_fun, lc, tau_star)
    inner_qqbar = bilinear_pairing(qstar_fun, qbar_fun, lc, tau_star)
    if abs(inner_qq - 1.0) > 1e-10 or abs(inner_qqbar) > 1e-10:
        raise DegeneratePairingError(
            "pairing identities violated: <q*,q>-1 = "
            f"{abs(inner_qq - 1.0):.3e}, <q*,qbar> = {abs(inner_qqbar):.3e}"
        )
    return pairing


# ---------------------------------------------------------------------------
# quadratic/cubic coefficients of the reduced equation
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class NonlinearCouplings:
    """Scalar prefactors of the quadratic expansion of the kinetics.

    ``prey_crowding``   -- r/K        (prey self-limitation)
    ``prey_predation``  -- omega/D    (prey loss to predation)
    ``predator_growth`` -- c          (predator self-reinforcement)
    ``predator_loss``   -- omega1/D1  (delayed intraspecific competition)

    Zeroing all four removes every quadratic term, which is the basis of
    the consistency test that all g coefficients then vanish.
    """

    prey_crowding: float
    prey_predation: float
    predator_growth: float
    predator_loss: float

    @classmethod
    def from_parameters(cls, p: ModelParameters) -> "NonlinearCouplings":
        return cls(
            prey_crowding=p.r / p.K,
            prey_predation=p.omega / p.D,
            predator_growth=p.c,
            predator_loss=p.omega1 / p.D1,
        )


@dataclasses.dataclass(frozen=True)
class GCoefficients:
    """Taylor coefficients of the reduced equation and the manifold data.

    ``w20(theta)`` and ``w11(theta)`` are the quadratic coefficients of
    the center-manifold graph, available through the stored evaluations
    at ``theta = 0`` and ``theta = -1`` (all that the cubic coefficient
    needs).  ``e1``/``e2`` are the particular-solution vectors of the
    two resolvent solves.
    """

    g20: complex
    g11: complex
    g02: complex
    g21: complex
    e1: np.ndarray
    e2: np.ndarray
    w20_0: np.ndarray
    w20_m1: np.ndarray
    w11_0: np.ndarray
    w11_m1: np.ndarray


def _resolvent_solve(
    matrix: np.ndarray, rhs: np.ndarray, label: str
) -> np.ndarray:
    """Solve a 2x2 resolvent system with singularity and residual guards."""
    scale = float(np.linalg.norm(matrix))
    det = complex(matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0])
    if abs(det) < 1e-14 * max(1.0, scale * scale):
        raise ResonanceError(
            f"resolvent matrix for {label} is singular "
            f"(|det| = {abs(det):.3e}); resonant critical mode"
        )
    sol = np.linalg.solve(matrix, rhs)
    resid = float(np.linalg.norm(matrix @ sol - rhs))
    if resid > 1e-12 * max(1.0, float(np.linalg.norm(rhs))):
        raise ResonanceError(
            f"resolvent solve for {label} left residual {resid:.3e}"
        )
    return sol


def g_coefficients(
    pairing: ComplexPairing,
    p: ModelParameters,
    lc: LinearizationCoefficients,
    diff: Diffusivities,
    k: float,
    omega0: float,
    tau_star: float,
    couplings: Optional[NonlinearCouplings] = None,
    strict_cubic_weight: bool = False,
) -> GCoefficients:
    """Quadratic and cubic coefficients of the reduced Hopf equation.

    The quadratic coefficients follow directly from the kinetics expansion
    contracted against the adjoint eigenvector.  The cubic one needs the
    center-manifold correction terms ``w20``/``w11``, whose constant parts
    come from two resolvent solves (at frequencies ``2i*omega0`` and 0 in
    the matrix, both with the critical delay rotation on the delayed
    column -- kept exactly as in the source derivation).

    ``strict_cubic_weight`` switches the second exponential of ``w20``
    from the conventional ``conj(g02)/3`` weight to ``conj(g20)/3``; the
    default follows the standard reduction.

    Raises ``ResonanceError`` when a resolvent matrix is singular.
    """
    if couplings is None:
        couplings = NonlinearCouplings.from_parameters(p)
    cr = couplings.prey_crowding
    pw = couplings.prey_predation
    pg = couplings.predator_growth
    pl = couplings.predator_loss

    a2 = pairing.alpha2
    a2b = np.conj(a2)
    a2sb = np.conj(pairing.alpha2_star)
    nb = pairing.n_bar
    w = omega0 * tau_star
    rot_m = cmath.exp(-1j * w)  # e^{-i w0 tau*}
    rot_p = cmath.exp(1j * w)
    cos_w = math.cos(w)

    g20 = 2.0 * tau_star * nb * (
        (-cr - pw * a2) + a2sb * a2 * a2 * (pg - pl * rot_m)
    )
    g11 = tau_star * nb * (
        (-cr - pw * a2.real) + a2sb * a2 * a2b * (pg - pl * cos_w)
    )
    g02 = 2.0 * tau_star * nb * (
        (-cr - pw * a2b) + a2sb * a2b * a2b * (pg - pl * rot_p)
    )

    d1k2 = diff.d1 * k * k
    d2k2 = diff.d2 * k * k
    cy = lc.c_inst

    m1 = np.array(
        [
            [2j * omega0 - lc.a11 - d1k2, -lc.a12],
            [-lc.b21 * rot_m, 2j * omega0 - cy - d2k2 - lc.b22 * rot_m],
        ],
        dtype=complex,
    )
    rhs1 = 2.0 * np.array(
        [-cr - pw * a2, a2 * a2 * (pg - pl * rot_m)], dtype=complex
    )
    e1 = _resolvent_solve(m1, rhs1, "w20")

    m2 = np.array(
        [
            [-lc.a11 - d1k2, -lc.a12],
            [-lc.b21 * rot_m, -cy - d2k2 - lc.b22 * rot_m],
        ],
        dtype=complex,
    )
    rhs2 = np.array(
        [-cr - pw * a2.real, (a2 * a2b) * (pg - pl * cos_w)], dtype=complex
    )
    e2 = _resolvent_solve(m2, rhs2, "w11")

    q0 = pairing.q0
    q0b = np.conj(q0)
    second = np.conj(g20) if strict_cubic_weight else np.conj(g02)

    def w20(theta: float) -> np.ndarray:
        return (
            (1j * g20 / w) * q0 * cmath.exp(1j * w * theta)
            + (1j * second / (3.0 * w)) * q0b * cmath.exp(-1j * w * theta)
            + e1 * cmath.exp(2j * w * theta)
        )

    def w11(theta: float) -> np.ndarray:
        return (
            (-1j * g11 / w) * q0 * cmath.exp(1j * w * theta)
            + (1j * np.conj(g11) / w) * q0b * cmath.exp(-1j * w * theta)
            + e2
        )

    w20_0 = w20(0.0)
    w20_m1 = w20(-1.0)
    w11_0 = w11(0.0)
    w11_m1 = w11(-1.0)

    g21 = 2.0 * tau_star * nb * (
        -cr * (a2 * w11_0[0] + 0.5 * w20_0[0])
        + a2sb * pg * (0.5 * a2b * w20_0[1] + a2 * w11_0[1])
        + a2sb
        * pl
        * (
            a2 * w11_m1[1]
            + 0.5 * a2b * w20_0[1] * rot_p
            + a2 * w11_0[1] * rot_m
            + 0.5 * a2b * w20_m1[1]
        )
        + pw * (w11_0[1] + 0.5 * a2b * w20_0[0] + 0.5 * w20_0[1] + a2 * w11_0[0])
    )

    return GCoefficients(
        g20=complex(g20),
        g11=complex(g11),
        g02=complex(g02),
        g21=complex(g21),
        e1=e1,
        e2=e2,
        w20_0=w20_0,
        w20_m1=w20_m1,
        w11_0=w11_0,
        w11_m1=w11_m1,
    )


# ---------------------------------------------------------------------------
# classification of the bifurcating orbit
# ---------------------------------------------------------------------------


class BifurcationDirection(enum.Enum):
    SUPERCRITICAL = "supercritical"
    SUBCRITICAL = "subcritical"


class PeriodicStability(enum.Enum):
    STABLE_PERIODIC = "stable"
    UNSTABLE_PERIODIC = "unstable"


class PeriodTrend(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


@dataclasses.dataclass(frozen=True)
class HopfQuantities:
    """First Lyapunov data of the Hopf point.

    ``mu2`` locates the periodic orbits (positive: beyond the critical
    delay), ``beta2`` is twice the real part of the first Lyapunov
    coefficient (negative: orbitally stable), and ``t2`` gives the
    leading correction to the period.
    """

    c1: complex
    mu2: float
    beta2: float
    t2: float
    direction: BifurcationDirection
    stability: PeriodicStability
    period_trend: PeriodTrend


def hopf_quantities(
    g: GCoefficients,
    omega0: float,
    tau_star: float,
    lambda_prime: complex,
) -> HopfQuantities:
    """Classify the bifurcating periodic orbit from the g coefficients.

    Raises ``TransversalityError`` when the real part of the root velocity
    is numerically zero, since the direction quantity divides by it.
    """
    w = omega0 * tau_star
    if w <= 0.0:
        raise ValueError("omega0 * tau_star must be positive")
    c1 = (1j / (2.0 * w)) * (
        g.g20 * g.g11 - 2.0 * abs(g.g11) ** 2 - abs(g.g02) ** 2 / 3.0
    ) + 0.5 * g.g21
    if abs(lambda_prime.real) < 1e-12:
        raise TransversalityError(
            "Re lambda'(tau*) is numerically zero; the crossing is not "
            "transversal and mu2 is undefined"
        )
    mu2 = -c1.real / lambda_prime.real
    beta2 = 2.0 * c1.real
    t2 = -(c1.imag + mu2 * lambda_prime.imag) / w
    direction = (
        BifurcationDirection.SUPERCRITICAL
        if mu2 > 0.0
        else BifurcationDirection.SUBCRITICAL
    )
    stability = (
        PeriodicStability.STABLE_PERIODIC
        if beta2 < 0.0
        else PeriodicStability.UNSTABLE_PERIODIC
    )
    trend = PeriodTrend.INCREASING if t2 > 0.0 else PeriodTrend.DECREASING
    return HopfQuantities(
        c1=complex(c1),
        mu2=float(mu2),
        beta2=float(beta2),
        t2=float(t2),
        direction=direction,
        stability=stability,
        period_trend=trend,
    )


def lambda_prime_numeric(cc: CharCoefficients, hp: HopfPoint) -> complex:
    """Root velocity d(lambda)/d(tau) at the Hopf point.

    Implicit differentiation of the characteristic function gives

        lambda' = lambda (B1 lambda + B0) e^{-lambda tau}
                  / (2 lambda + A1 + (B1 - tau (B1 lambda + B0)) e^{-lambda tau})

    evaluated at ``lambda = i*omega0``, ``tau = tau_star``.  The value is
    cross-checked against a central finite difference of the continued
    characteristic root; disagreement raises ``TransversalityError`` (the
    usual cause is a repeated root, where the derivative blows up).
    """
    lam = 1j * hp.omega0
    tau = hp.tau_star
    rot = cmath.exp(-lam * tau)
    num = lam * (cc.b1 * lam + cc.b0) * rot
    den = 2.0 * lam + cc.a1 + (cc.b1 - tau * (cc.b1 * lam + cc.b0)) * rot
    scale = max(1.0, abs(lam), abs(cc.a1), abs(cc.b1 * lam + cc.b0))
    if abs(den) < 1e-12 * scale:
        raise TransversalityError(
            "characteristic root is not simple; root velocity undefined"
        )
    value = num / den

    eps = 1e-6 * max(1.0, tau)
    if tau - eps > 0.0:
        lam_hi = continued_root(cc, tau + eps, lam)
        lam_lo = continued_root(cc, tau - eps, lam)
        fd = (lam_hi - lam_lo) / (2.0 * eps)
    else:
        lam_hi = continued_root(cc, tau + eps, lam)
        fd = (lam_hi - lam) / eps
    if abs(fd - value) > 1e-5 * max(1.0, abs(value)):
        raise TransversalityError(
            f"analytic root velocity {value!r} disagrees with continuation "
            f"difference {fd!r}"
        )
    return complex(value)


# ---------------------------------------------------------------------------
# end-to-end report
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class HopfReport:
    """Everything the delay-bifurcation pipeline produces for one mode."""

    k: float
    omega0: float
    tau_star: float
    lambda_prime: complex
    pairing: ComplexPairing
    g: GCoefficients
    quantities: HopfQuantities


def hopf_report(
    p: ModelParameters,
    diff: Diffusivities,
    k: float = 0.0,
    branch: int = 0,
    strict_cubic_weight: bool = False,
) -> HopfReport:
    """Run the full Hopf classification for one spatial mode.

    Locates the delay crossing of mode ``k``, builds the eigenvector
    pairing and g coefficients there, and classifies the bifurcation.
    Raises ``ValueError`` if the mode has no positive-frequency crossing.
    """
    from .linear_analysis import char_coeffs_structural, hopf_point
    from .model import interior_equilibrium, linearization_coeffs

    eq = interior_equilibrium(p)
    lc = linearization_coeffs(eq, p)
    cc = char_coeffs_structural(lc, diff, k)
    hp = hopf_point(cc, branch=branch)
    if hp is None:
        raise ValueError(
            f"mode k={k:g} has no imaginary-axis crossing; "
            "the delay cannot destabilize it"
        )
    lam_prime = lambda_prime_numeric(cc, hp)
    pairing = eigen_pairing(lc, diff, k, hp.omega0, hp.tau_star)
    g = g_coefficients(
        pairing,
        p,
        lc,
        diff,
        k,
        hp.omega0,
        hp.tau_star,
        strict_cubic_weight=strict_cubic_weight,
    )
    quantities = hopf_quantities(g, hp.omega0, hp.tau_star, lam_prime)
    return HopfReport(
        k=k,
        omega0=hp.omega0,
        tau_star=hp.tau_star,
        lambda_prime=lam_prime,
        pairing=pairing,
        g=g,
        quantities=quantities,
    )
