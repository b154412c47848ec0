"""Method-of-lines reaction-diffusion solver with zero-flux boundaries.

Discretizes the diffusive model (and its gestation-delay variant) on a 1D
interval or 2D rectangle with second-order central differences and
homogeneous Neumann boundaries, and steps it with an IMEX scheme: the
stiff diffusion part is treated by backward Euler (tridiagonal solves;
alternating-direction sweeps in 2D) while the kinetics stay explicit, so
the coarse time steps used in pattern studies remain usable even when the
diffusion number is large.  An explicit mode exists for cross-checks and
auto-caps its step at the usual stability bound.

Blow-up detection mirrors the ODE integrator contract, applied to the
field max-norm.
"""

from __future__ import annotations

import bisect
import dataclasses
import math
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import solve_banded

from .integrate import BlowUp, Completed, SimOutcome, StepControl, StepFailure
from .linear_analysis import Diffusivities
from .model import ModelParameters, _rhs_core, _rhs_delayed_core, interior_equilibrium

# Negativity more severe than this magnitude is an error; anything between
# -_NEG_EPS and 0 is attributed to roundoff and zeroed.
_NEG_EPS = 1e-12

ReactionFn = Callable[[np.ndarray, np.ndarray, float], tuple[np.ndarray, np.ndarray]]


@dataclasses.dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, lx] (1D) or [0, lx] x [0, ly] (2D).

    ``ny`` selects the dimension: leave it ``None`` for a line.  Spacing is
    ``lx / (nx - 1)`` so the endpoints are grid points.
    """

    nx: int
    lx: float = math.pi
    ny: Optional[int] = None
    ly: Optional[float] = None

    def __post_init__(self) -> None:
        if self.nx < 3:
            raise ValueError("nx must be at least 3")
        if not (self.lx > 0.0 and math.isfinite(self.lx)):
            raise ValueError("lx must be positive and finite")
        if self.ny is not None:
            if self.ny < 3:
                raise ValueError("ny must be at least 3")
            if self.ly is None:
                object.__setattr__(self, "ly", math.pi)
            if not (self.ly > 0.0 and math.isfinite(self.ly)):
                raise ValueError("ly must be positive and finite")
        elif self.ly is not None:
            raise ValueError("ly given without ny")

    @property
    def dimension(self) -> int:
        return 2 if self.ny is not None else 1

    @property
    def dx(self) -> float:
        return self.lx / (self.nx - 1)

    @property
    def dy(self) -> float:
        if self.ny is None:
            raise ValueError("1D grid has no dy")
        return self.ly / (self.ny - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.lx, self.nx)

    @property
    def y(self) -> np.ndarray:
        if self.ny is None:
            raise ValueError("1D grid has no y axis")
        return np.linspace(0.0, self.ly, self.ny)

    @property
    def shape(self) -> tuple[int, ...]:
        # 2D fields are indexed [y, x]
        return (self.ny, self.nx) if self.ny is not None else (self.nx,)


@dataclasses.dataclass(frozen=True)
class SpatialField:
    """Prey/predator density fields at one instant.

    Plain construction checks finiteness and shape agreement only; use
    :meth:`of_densities` to additionally enforce the non-negativity
    contract (tiny negative roundoff is zeroed, worse is an error).
    """

    prey: np.ndarray
    predator: np.ndarray
    t: float

    def __post_init__(self) -> None:
        prey = np.asarray(self.prey, dtype=float)
        predator = np.asarray(self.predator, dtype=float)
        if prey.shape != predator.shape:
            raise ValueError("component shapes differ")
        if not (np.all(np.isfinite(prey)) and np.all(np.isfinite(predator))):
            raise ValueError("field contains non-finite entries")
        object.__setattr__(self, "prey", prey)
        object.__setattr__(self, "predator", predator)

    @classmethod
    def of_densities(
        cls, prey: np.ndarray, predator: np.ndarray, t: float
    ) -> "SpatialField":
        return cls(_clip_density(prey), _clip_density(predator), t)

    def max_norm(self) -> float:
        return float(
            max(np.max(np.abs(self.prey)), np.max(np.abs(self.predator)))
        )

    def frozen(self) -> "SpatialField":
        """Copy with write-protected arrays, safe to hand out."""
        prey = self.prey.copy()
        predator = self.predator.copy()
        prey.setflags(write=False)
        predator.setflags(write=False)
        return SpatialField(prey, predator, self.t)


def _clip_density(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    low = float(np.min(f)) if f.size else 0.0
    if low < -_NEG_EPS:
        raise ValueError(f"density is negative beyond roundoff (min {low:.3e})")
    if low < 0.0:
        f = np.maximum(f, 0.0)
    return f


def laplacian(f: np.ndarray, g: Grid) -> np.ndarray:
    """Second-order Laplacian with zero-flux (mirror-ghost) boundaries.

    At the boundary the reflected ghost point turns the stencil into
    ``2*(f[1] - f[0])/dx**2``, which keeps constants in the kernel and
    makes the discrete integral of the result vanish identically.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {g.shape}")
    out = np.empty_like(f)
    if g.dimension == 1:
        inv = 1.0 / g.dx**2
        out[1:-1] = (f[:-2] - 2.0 * f[1:-1] + f[2:]) * inv
        out[0] = 2.0 * (f[1] - f[0]) * inv
        out[-1] = 2.0 * (f[-2] - f[-1]) * inv
        return out
    invx = 1.0 / g.dx**2
    invy = 1.0 / g.dy**2
    out[:, 1:-1] = (f[:, :-2] - 2.0 * f[:, 1:-1] + f[:, 2:]) * invx
    out[:, 0] = 2.0 * (f[:, 1] - f[:, 0]) * invx
    out[:, -1] = 2.0 * (f[:, -2] - f[:, -1]) * invx
    out[1:-1, :] += (f[:-2, :] - 2.0 * f[1:-1, :] + f[2:, :]) * invy
    out[0, :] += 2.0 * (f[1, :] - f[0, :]) * invy
    out[-1, :] += 2.0 * (f[-2, :] - f[-1, :]) * invy
    return out


def quadrature_weights(g: Grid) -> np.ndarray:
    """Trapezoidal weights under which the discrete Laplacian conserves mass."""
    wx = np.full(g.nx, g.dx)
    wx[0] = wx[-1] = 0.5 * g.dx
    if g.dimension == 1:
        return wx
    wy = np.full(g.ny, g.dy)
    wy[0] = wy[-1] = 0.5 * g.dy
    return np.outer(wy, wx)


def field_integral(f: np.ndarray, g: Grid) -> float:
    return float(np.sum(quadrature_weights(g) * np.asarray(f, dtype=float)))


# ---------------------------------------------------------------------------
# implicit diffusion sweeps
# ---------------------------------------------------------------------------


class _BandedBE:
    """Factor-free banded representation of (I - dt*d*L) for one axis."""

    def __init__(self, n: int, coef: float) -> None:
        # coef = dt * d / dx^2
        self.identity = coef == 0.0
        if self.identity:
            return
        ab = np.zeros((3, n))
        ab[1, :] = 1.0 + 2.0 * coef
        ab[0, 1:] = -coef
        ab[2, :-1] = -coef
        ab[0, 1] = -2.0 * coef  # mirror ghost at the left boundary
        ab[2, -2] = -2.0 * coef  # and at the right
        self.ab = ab

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve along the first axis of ``rhs`` (vectorized over columns)."""
        if self.identity:
            return rhs
        return solve_banded((1, 1), self.ab, rhs, check_finite=False)


class _DiffusionStep:
    """Backward-Euler (1D) / alternating-direction (2D) diffusion solve."""

    def __init__(self, g: Grid, d: float, dt: float) -> None:
        self.g = g
        self.solve_x = _BandedBE(g.nx, dt * d / g.dx**2)
        self.solve_y = (
            _BandedBE(g.ny, dt * d / g.dy**2) if g.dimension == 2 else None
        )

    def apply(self, f: np.ndarray) -> np.ndarray:
        if self.g.dimension == 1:
            return self.solve_x.solve(f)
        # x sweep operates along columns of f.T, y sweep along columns of f
        half = self.solve_x.solve(f.T).T
        return self.solve_y.solve(half)


# ---------------------------------------------------------------------------
# time marching
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class PdeResult:
    snapshots: list
    outcome: SimOutcome

    def final(self) -> SpatialField:
        return self.snapshots[-1]


def _resolve_step(
    requested: float, t_end: float, diff: Diffusivities, g: Grid, scheme: str
) -> tuple[float, int]:
    if requested <= 0.0:
        raise ValueError("time step must be positive")
    dt = requested
    if scheme == "explicit":
        dmax = max(diff.d1, diff.d2)
        if dmax > 0.0:
            h2 = g.dx**2 if g.dimension == 1 else min(g.dx, g.dy) ** 2
            dt = min(dt, h2 / (2.0 * g.dimension * dmax))
    elif scheme != "imex":
        raise ValueError(f"unknown scheme {scheme!r}")
    n_steps = max(1, math.ceil(t_end / dt - 1e-12))
    return t_end / n_steps, n_steps


def _chase_field_blowup(u, v, t, dt0, t_end, reaction, diff, g, scheme, threshold):
    """Follow a field past the norm threshold until the step collapses.

    Blow-up is corroborated by step collapse: a trial step is halved whenever
    the max-norm more than quadruples (or leaves the float range), and the
    chase ends when the admissible step drops below 1e-9 relative to the
    current time.  The short remaining stretch to the singularity is then
    bounded by a power-law fit of the escape rate through the chased states.
    Growth that subsides back below half the threshold instead hands the
    state back with no outcome so the regular march can resume; growth that
    merely persists to the horizon completes normally.
    """

    def rates(cu, cv, ct):
        fu, fv = reaction(cu, cv, ct)
        ru = fu + diff.d1 * laplacian(cu, g)
        rv = fv + diff.d2 * laplacian(cv, g)
        return fu, fv, float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))

    records: list[tuple[float, float]] = []
    dt = dt0
    while t < t_end:
        if dt < 1e-9 * max(1.0, t):
            break
        with np.errstate(over="ignore", invalid="ignore"):
            fu, fv, fnorm = rates(u, v, t)
            if scheme == "imex":
                u_try = _DiffusionStep(g, diff.d1, dt).apply(u + dt * fu)
                v_try = _DiffusionStep(g, diff.d2, dt).apply(v + dt * fv)
            else:
                u_try = u + dt * (fu + diff.d1 * laplacian(u, g))
                v_try = v + dt * (fv + diff.d2 * laplacian(v, g))
        n_old = float(max(np.max(np.abs(u)), np.max(np.abs(v))))
        finite = bool(np.all(np.isfinite(u_try)) and np.all(np.isfinite(v_try)))
        n_new = (
            float(max(np.max(np.abs(u_try)), np.max(np.abs(v_try))))
            if finite
            else math.inf
        )
        if finite and n_new <= 4.0 * n_old:
            if math.isfinite(fnorm) and fnorm > 0.0:
                records.append((n_old, fnorm))
            t = min(t + dt, t_end)
            u, v = u_try, v_try
            if n_new < 0.5 * threshold:
                return t, u, v, None
            if n_new <= 1.5 * n_old:
                dt = min(2.0 * dt, dt0)
        else:
            dt *= 0.5
    if t >= t_end:
        return t_end, u, v, Completed(t_end)

    eps_tail = 32.0 * np.finfo(float).eps * max(1.0, t)
    with np.errstate(over="ignore", invalid="ignore"):
        _, _, f_lo = rates(u, v, t)
    n_lo = float(max(np.max(np.abs(u)), np.max(np.abs(v))))
    if math.isfinite(f_lo) and f_lo > 0.0 and n_lo > 0.0:
        p = 2.0
        for n_prev, f_prev in reversed(records):
            if 0.0 < n_prev <= 0.25 * n_lo:
                p = math.log(f_lo / f_prev) / math.log(n_lo / n_prev)
                break
        p = min(8.0, max(1.05, p))
        tail = max(1.5 * (n_lo / f_lo) / (p - 1.0), eps_tail)
    else:
        tail = eps_tail
    return t, u, v, BlowUp(t, t + tail)


def evolve_fields(
    u0: np.ndarray,
    v0: np.ndarray,
    reaction: ReactionFn,
    diff: Diffusivities,
    g: Grid,
    ctl: StepControl,
    scheme: str = "imex",
    snapshot_stride: int = 0,
    enforce_nonnegative: bool = False,
    on_step: Optional[Callable[[float, np.ndarray, np.ndarray], None]] = None,
) -> PdeResult:
    """March a two-species reaction-diffusion system to ``ctl.t_end``.

    The reaction callback receives the current component arrays and time
    and returns their instantaneous rates; diffusion is handled by the
    scheme.  ``ctl.h_init`` is the requested (fixed) time step and
    ``ctl.blowup_threshold`` arms blow-up detection on the field max-norm:
    a crossing switches to an adaptive chase that either corroborates the
    singularity (step collapse, reported as a tight bracket) or resumes the
    march when the growth proves transient.  Non-negativity enforcement is
    suspended while a chase is in flight.  Snapshots are stored every
    ``snapshot_stride`` accepted steps (0 keeps only the endpoints) plus
    always the initial and final state.

    This is the bare engine: fields may be signed (linearized dynamics).
    Density non-negativity is opted into by ``enforce_nonnegative``.
    """
    u = np.array(u0, dtype=float)
    v = np.array(v0, dtype=float)
    if u.shape != g.shape or v.shape != g.shape:
        raise ValueError("initial fields do not match the grid")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("initial fields must be finite")

    dt, n_steps = _resolve_step(ctl.h_init, ctl.t_end, diff, g, scheme)
    step_u = _DiffusionStep(g, diff.d1, dt) if scheme == "imex" else None
    step_v = _DiffusionStep(g, diff.d2, dt) if scheme == "imex" else None

    snaps = [SpatialField(u.copy(), v.copy(), 0.0).frozen()]
    t = 0.0
    outcome: SimOutcome = Completed(ctl.t_end)
    while t < ctl.t_end * (1.0 - 1e-15):
        # next index on the uniform step grid (t can sit off-grid after a
        # transient chase; the partial landing step below realigns it)
        j = int(math.floor(t / dt + 1e-9)) + 1
        on_grid = j <= n_steps
        target = j * dt if j < n_steps else ctl.t_end
        dtx = target - t
        exact = abs(dtx - dt) <= 1e-9 * dt

        fu, fv = reaction(u, v, t)
        if scheme == "imex":
            su = step_u if exact else _DiffusionStep(g, diff.d1, dtx)
            sv = step_v if exact else _DiffusionStep(g, diff.d2, dtx)
            u_new = su.apply(u + dtx * fu)
            v_new = sv.apply(v + dtx * fv)
        else:
            u_new = u + dtx * (fu + diff.d1 * laplacian(u, g))
            v_new = v + dtx * (fv + diff.d2 * laplacian(v, g))

        crossed = not (
            np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))
        ) or max(np.max(np.abs(u_new)), np.max(np.abs(v_new))) > ctl.blowup_threshold
        if crossed:
            t, u, v, escape = _chase_field_blowup(
                u, v, t, dtx, ctl.t_end, reaction, diff, g, scheme, ctl.blowup_threshold
            )
            if escape is not None:
                outcome = escape
                break
            continue
        if enforce_nonnegative:
            try:
                u_new = _clip_density(u_new)
                v_new = _clip_density(v_new)
            except ValueError as exc:
                outcome = StepFailure(target, str(exc))
                break

        u, v, t = u_new, v_new, target
        if on_step is not None:
            on_step(t, u, v)
        if snapshot_stride > 0 and on_grid and j % snapshot_stride == 0 and j < n_steps:
            snaps.append(SpatialField(u.copy(), v.copy(), t).frozen())

    if isinstance(outcome, Completed):
        snaps.append(SpatialField(u.copy(), v.copy(), ctl.t_end).frozen())
    else:
        snaps.append(SpatialField(u.copy(), v.copy(), t).frozen())
    return PdeResult(snapshots=snaps, outcome=outcome)


def simulate_rd(
    ic: SpatialField,
    p: ModelParameters,
    diff: Diffusivities,
    g: Grid,
    ctl: StepControl,
    scheme: str = "imex",
    snapshot_stride: int = 0,
) -> PdeResult:
    """Simulate the diffusive model from ``ic`` (no gestation delay)."""
    if p.tau != 0.0:
        raise ValueError("parameters carry a delay; use simulate_rd_delayed")

    def reaction(u: np.ndarray, v: np.ndarray, t: float):
        return _rhs_core(u, v, p)

    return evolve_fields(
        ic.prey,
        ic.predator,
        reaction,
        diff,
        g,
        ctl,
        scheme=scheme,
        snapshot_stride=snapshot_stride,
        enforce_nonnegative=True,
    )


class FieldHistory:
    """Ring buffer of field snapshots covering the delay window.

    Stores (t, u, v) at the solver's step cadence and interpolates
    linearly in time.  Queries at or before the initial time return the
    initial fields (constant prehistory).
    """

    def __init__(self, tau: float, dt: float, t0: float, u0: np.ndarray, v0: np.ndarray):
        if tau <= 0.0:
            raise ValueError("tau must be positive")
        self._tau = tau
        self._capacity = max(2, math.ceil(tau / dt) + 2)
        self._times: list[float] = [t0]
        self._u: list[np.ndarray] = [np.array(u0, dtype=float)]
        self._v: list[np.ndarray] = [np.array(v0, dtype=float)]

    def push(self, t: float, u: np.ndarray, v: np.ndarray) -> None:
        if t <= self._times[-1]:
            raise ValueError("history times must increase")
        self._times.append(t)
        self._u.append(np.array(u, dtype=float))
        self._v.append(np.array(v, dtype=float))
        # drop entries older than the window, always keeping one at or
        # before t - tau so interpolation stays bracketed
        cutoff = t - self._tau
        while len(self._times) > 2 and self._times[1] <= cutoff:
            self._times.pop(0)
            self._u.pop(0)
            self._v.pop(0)

    def interpolate(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        times = self._times
        if t <= times[0]:
            return self._u[0], self._v[0]
        if t >= times[-1]:
            return self._u[-1], self._v[-1]
        j = bisect.bisect_right(times, t)
        t0, t1 = times[j - 1], times[j]
        w = (t - t0) / (t1 - t0)
        u = (1.0 - w) * self._u[j - 1] + w * self._u[j]
        v = (1.0 - w) * self._v[j - 1] + w * self._v[j]
        return u, v


def simulate_rd_delayed(
    ic: SpatialField,
    p: ModelParameters,
    diff: Diffusivities,
    g: Grid,
    ctl: StepControl,
    scheme: str = "imex",
    snapshot_stride: int = 0,
) -> PdeResult:
    """Simulate the diffusive model with gestation delay ``p.tau``.

    The predator reaction is evaluated against the field history at
    ``t - tau`` (linear interpolation between buffered snapshots); the
    prehistory is the initial condition held constant on [-tau, 0].
    """
    if p.tau <= 0.0:
        raise ValueError("delay must be positive; use simulate_rd for tau = 0")
    dt, _ = _resolve_step(ctl.h_init, ctl.t_end, diff, g, scheme)
    hist = FieldHistory(p.tau, dt, 0.0, ic.prey, ic.predator)

    def reaction(u: np.ndarray, v: np.ndarray, t: float):
        u_lag, v_lag = hist.interpolate(t - p.tau)
        return _rhs_delayed_core(u, v, u_lag, v_lag, p)

    return evolve_fields(
        ic.prey,
        ic.predator,
        reaction,
        diff,
        g,
        ctl,
        scheme=scheme,
        snapshot_stride=snapshot_stride,
        enforce_nonnegative=True,
        on_step=hist.push,
    )


# ---------------------------------------------------------------------------
# diagnostics and initial conditions
# ---------------------------------------------------------------------------


def mode_amplitudes(
    f: Union[np.ndarray, SpatialField],
    g: Grid,
    modes: Sequence[int],
    component: str = "prey",
) -> np.ndarray:
    """Cosine-basis amplitudes a_n = (2/L) * integral f(x) cos(n pi x / L) dx.

    Trapezoidal quadrature on the grid; ``a_0`` uses the 1/L mean
    normalization so a constant field reports its own value there.
    Accepts a raw 1D component array or a SpatialField (then ``component``
    selects prey or predator).
    """
    if isinstance(f, SpatialField):
        f = getattr(f, component)
    f = np.asarray(f, dtype=float)
    if g.dimension != 1 or f.shape != g.shape:
        raise ValueError("mode_amplitudes expects a 1D field on the grid")
    x = g.x
    w = quadrature_weights(g)
    out = np.empty(len(modes))
    for i, n in enumerate(modes):
        basis = np.cos(n * math.pi * x / g.lx)
        coeff = (1.0 if n == 0 else 2.0) / g.lx
        out[i] = coeff * float(np.sum(w * f * basis))
    return out


def equilibrium_field(p: ModelParameters, g: Grid) -> SpatialField:
    """Homogeneous field at the interior equilibrium."""
    eq = interior_equilibrium(p)
    return SpatialField.of_densities(
        np.full(g.shape, eq.x), np.full(g.shape, eq.y), 0.0
    )


def perturbed_equilibrium_ic(
    p: ModelParameters,
    g: Grid,
    amplitude: float,
    mode: int,
    kind: str = "cos2",
) -> SpatialField:
    """Interior equilibrium plus a small cosine-type perturbation.

    ``kind="cos2"`` uses amplitude*cos^2(mode*x) (both components), zeroed
    at the domain endpoints — the open-interval indicator reading of the
    pattern-study initial data; ``kind="cos"`` uses a plain cosine, which
    excites exactly one Neumann mode.  2D grids apply the product profile
    in x and y.
    """
    eq = interior_equilibrium(p)
    if kind == "cos2":

        def axis_profile(s: np.ndarray, length: float) -> np.ndarray:
            prof = np.cos(mode * s) ** 2
            prof[0] = prof[-1] = 0.0
            return prof

    elif kind == "cos":

        def axis_profile(s: np.ndarray, length: float) -> np.ndarray:
            return np.cos(mode * math.pi * s / length)

    else:
        raise ValueError(f"unknown perturbation kind {kind!r}")
    if g.dimension == 1:
        profile = axis_profile(g.x, g.lx)
    else:
        profile = np.outer(axis_profile(g.y, g.ly), axis_profile(g.x, g.lx))
    prey = eq.x + amplitude * profile
    predator = eq.y + amplitude * profile
    return SpatialField.of_densities(prey, predator, 0.0)
