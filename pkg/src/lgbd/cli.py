"""Command-line front end: config-driven runs, sweeps, repro bundles.

Exit codes: 0 for success (a detected blow-up is a scientific result,
not a failure), 1 for usage/config/IO errors, 2 for numerical failures
(step-size collapse, singular solves, violated internal checks).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .blowup import check_nondelayed_condition, threshold_bisection
from .integrate import StepFailure, integrate_dde, integrate_ode
from .linear_analysis import (
    KSEARCH_COLUMNS,
    InconsistencyError,
    carrying_capacity_scan,
    char_coeffs_structural,
    dispersion_curve,
    hopf_point,
    nondelayed_jacobian,
    turing_conditions,
)
from .model import (
    ModelParameters,
    ToleranceError,
    interior_equilibrium,
    linearization_coeffs,
)
from .normal_form import NormalFormError, hopf_report
from .output import (
    format_value,
    hopf_report_row,
    hopf_report_text,
    write_snapshot,
    write_table_csv,
    write_text,
)
from .repro import BUNDLES, outcome_fields, run_bundle
from .runconfig import ConfigError, RunConfig, load_config
from .spatial import (
    SpatialField,
    equilibrium_field,
    perturbed_equilibrium_ic,
    simulate_rd,
    simulate_rd_delayed,
)


def _status_line(fields: dict) -> str:
    return " ".join(f"{k}={format_value(v)}" for k, v in fields.items())


def _initial_state(cfg: RunConfig, p: ModelParameters) -> np.ndarray:
    kind = cfg.get("ic.kind")
    if kind == "constant":
        return np.array([cfg.require("ic.x0"), cfg.require("ic.y0")], dtype=float)
    if kind == "equilibrium":
        eq = interior_equilibrium(p)
        return np.array(eq.state, dtype=float)
    raise ConfigError(f"ic.kind {kind!r} is not usable for point simulations")


def _initial_field(cfg: RunConfig, p: ModelParameters, g) -> SpatialField:
    kind = cfg.get("ic.kind")
    if kind == "constant":
        x0 = cfg.require("ic.x0")
        y0 = cfg.require("ic.y0")
        return SpatialField.of_densities(
            np.full(g.shape, float(x0)), np.full(g.shape, float(y0)), 0.0
        )
    if kind == "equilibrium":
        return equilibrium_field(p, g)
    if kind == "perturbed":
        return perturbed_equilibrium_ic(
            p,
            g,
            amplitude=cfg.get("ic.amplitude"),
            mode=cfg.get("ic.mode"),
            kind=cfg.get("ic.profile"),
        )
    raise ConfigError(f"unknown ic.kind {kind!r}")


def _jacobian_from_config(cfg: RunConfig) -> np.ndarray:
    jac = cfg.jacobian()
    if jac is not None:
        return jac
    p = cfg.model_parameters()
    eq = interior_equilibrium(p)
    lc = linearization_coeffs(eq, p)
    return nondelayed_jacobian(lc)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(cfg: RunConfig, args) -> int:
    p = cfg.model_parameters()
    ctl = cfg.step_control()
    s0 = _initial_state(cfg, p)
    traj = integrate_dde(s0, p, ctl) if p.tau > 0.0 else integrate_ode(s0, p, ctl)
    fields = outcome_fields(traj.outcome)
    meta = {"tau": p.tau, "x0": s0[0], "y0": s0[1]}
    meta.update(fields)
    rows = [(t, x, y) for t, (x, y) in zip(traj.t, traj.y)]
    write_table_csv(os.path.join(args.out_dir, "trajectory.csv"), ["t", "X", "Y"], rows, meta)
    print(_status_line(fields))
    return 2 if isinstance(traj.outcome, StepFailure) else 0


def _cmd_pde(cfg: RunConfig, args) -> int:
    p = cfg.model_parameters()
    diff = cfg.diffusivities()
    g = cfg.grid()
    ctl = cfg.step_control()
    ic = _initial_field(cfg, p, g)
    stride = cfg.get("pde.snapshot_stride")
    scheme = cfg.get("pde.scheme")
    if p.tau > 0.0:
        result = simulate_rd_delayed(ic, p, diff, g, ctl, scheme=scheme, snapshot_stride=stride)
    else:
        result = simulate_rd(ic, p, diff, g, ctl, scheme=scheme, snapshot_stride=stride)
    for i, snap in enumerate(result.snapshots):
        write_snapshot(args.out_dir, snap, g, i, fmt=args.format)
    fields = outcome_fields(result.outcome)
    write_table_csv(
        os.path.join(args.out_dir, "summary.csv"),
        list(fields.keys()),
        [tuple(fields.values())],
        {"nx": g.nx, "ny": g.ny if g.dimension == 2 else 1, "snapshots": len(result.snapshots)},
    )
    print(_status_line(fields))
    return 2 if isinstance(result.outcome, StepFailure) else 0


def _cmd_dispersion(cfg: RunConfig, args) -> int:
    jac = _jacobian_from_config(cfg)
    diff = cfg.diffusivities()
    k_max = cfg.require("dispersion.k_max")
    n = cfg.get("dispersion.n_points")
    k_grid = np.linspace(0.0, float(k_max), int(n))
    samples = dispersion_curve(jac, diff, k_grid)
    ddiag = np.diag([diff.d1, diff.d2])
    rows = []
    for s in samples:
        jk = jac - ddiag * s.k**2
        rows.append(
            (s.k, s.re_lambda_max, s.im_lambda, float(np.linalg.det(jk)), float(np.trace(jk)))
        )
    write_table_csv(
        os.path.join(args.out_dir, "dispersion.csv"),
        ["k", "re_lambda_max", "im_lambda", "det_jk", "trace_jk"],
        rows,
        {"d1": diff.d1, "d2": diff.d2},
    )
    peak = max(samples, key=lambda s: s.re_lambda_max)
    print(_status_line({"max_re_lambda": peak.re_lambda_max, "k_at_max": peak.k}))
    return 0


def _cmd_turing(cfg: RunConfig, args) -> int:
    jac = _jacobian_from_config(cfg)
    diff = cfg.diffusivities()
    rep = turing_conditions(jac, diff)
    columns = [
        "trace_negative",
        "det_positive",
        "growth_band_exists",
        "band_reachable",
        "k2_max_growth",
        "turing_unstable",
    ]
    values = (
        rep.trace_negative,
        rep.det_positive,
        rep.growth_band_exists,
        rep.band_reachable,
        rep.k2_max_growth,
        rep.turing_unstable,
    )
    write_table_csv(
        os.path.join(args.out_dir, "turing.csv"),
        columns,
        [values],
        {"d1": diff.d1, "d2": diff.d2},
    )
    text = "\n".join(f"{c} = {format_value(v)}" for c, v in zip(columns, values)) + "\n"
    write_text(os.path.join(args.out_dir, "turing.txt"), text)
    print(_status_line({"turing_unstable": rep.turing_unstable}))
    return 0


def _cmd_hopf(cfg: RunConfig, args) -> int:
    p = cfg.model_parameters()
    diff = cfg.diffusivities()
    eq = interior_equilibrium(p)
    lc = linearization_coeffs(eq, p)
    branch = cfg.get("hopf.branch")
    rows = []
    for k in cfg.get("hopf.k_values"):
        cc = char_coeffs_structural(lc, diff, float(k))
        hp = hopf_point(cc, branch=branch)
        if hp is None:
            rows.append((float(k), "none", math.nan, math.nan, False))
        else:
            rows.append((float(k), "crossing", hp.omega0, hp.tau_star, hp.transversal))
    write_table_csv(
        os.path.join(args.out_dir, "hopf_table.csv"),
        ["k", "status", "omega0", "tau_star", "transversal"],
        rows,
        {"branch": branch},
    )

    report_k = float(cfg.get("hopf.report_k"))
    try:
        report = hopf_report(
            p,
            diff,
            k=report_k,
            branch=branch,
            strict_cubic_weight=cfg.get("hopf.strict_cubic"),
        )
    except ValueError:
        print(_status_line({"report_k": report_k, "status": "no-crossing"}))
        return 0
    columns, row = hopf_report_row(report)
    write_table_csv(os.path.join(args.out_dir, "hopf_report.csv"), columns, [row])
    write_text(os.path.join(args.out_dir, "hopf_report.txt"), hopf_report_text(report))
    print(
        _status_line(
            {
                "omega0": report.omega0,
                "tau_star": report.tau_star,
                "direction": report.quantities.direction.value,
                "stability": report.quantities.stability.value,
            }
        )
    )
    return 0


def _cmd_blowup_check(cfg: RunConfig, args) -> int:
    p = cfg.model_parameters()
    delta1 = cfg.require("blowup.delta1")
    x0 = cfg.require("ic.x0")
    y0 = cfg.require("ic.y0")
    cert = check_nondelayed_condition(p, float(x0), float(y0), float(delta1))
    bound = cert.t_star_bound if cert.t_star_bound is not None else math.nan
    line = _status_line({"holds": cert.condition_holds, "t_star_bound": bound})
    detail = "".join(
        f"{key} = {format_value(value)}\n" for key, value in sorted(cert.detail.items())
    )
    write_text(
        os.path.join(args.out_dir, "certificate.txt"),
        line + "\n" + detail,
    )
    print(line)
    return 0


def _cmd_threshold(cfg: RunConfig, args) -> int:
    p = cfg.model_parameters()
    ctl = cfg.step_control()
    result = threshold_bisection(
        p,
        ctl,
        float(cfg.require("threshold.scale_low")),
        float(cfg.require("threshold.scale_high")),
        width=float(cfg.get("threshold.width", 0.01)),
    )
    fields = {
        "scale_low": result.scale_low,
        "scale_high": result.scale_high,
        "monotone": result.monotone,
    }
    write_text(os.path.join(args.out_dir, "threshold.txt"), _status_line(fields) + "\n")
    print(_status_line(fields))
    return 0


# -- sweep ------------------------------------------------------------------


def _sweep_points(cfg: RunConfig, prefix: str):
    key = cfg.require(f"{prefix}.key")
    start = float(cfg.require(f"{prefix}.start"))
    stop = float(cfg.require(f"{prefix}.stop"))
    count = int(cfg.require(f"{prefix}.count"))
    scale = cfg.get(f"{prefix}.scale")
    if count < 2:
        raise ConfigError(f"{prefix}.count must be at least 2")
    if scale == "linear":
        values = np.linspace(start, stop, count)
    elif scale == "log":
        if start <= 0.0 or stop <= 0.0:
            raise ConfigError("log scale requires positive endpoints")
        values = np.geomspace(start, stop, count)
    else:
        raise ConfigError(f"unknown {prefix}.scale {scale!r}")
    return key, [float(v) for v in values]


def _sweep_eval(task):
    index, base_values, assignments, run_kind = task
    cfg = RunConfig(dict(base_values))
    for key, value in assignments:
        cfg = cfg.replace(key, value)
    p = cfg.model_parameters()
    swept = [value for _, value in assignments]
    if run_kind == "simulate":
        ctl = cfg.step_control()
        s0 = _initial_state(cfg, p)
        traj = integrate_dde(s0, p, ctl) if p.tau > 0.0 else integrate_ode(s0, p, ctl)
        f = outcome_fields(traj.outcome)
        tf, (xf, yf) = traj.t[-1], traj.y[-1]
        return index, (*swept, f["outcome"], f["t_low"], f["t_high"], tf, xf, yf)
    if run_kind == "turing":
        diff = cfg.diffusivities()
        eq = interior_equilibrium(p)
        lc = linearization_coeffs(eq, p)
        rep = turing_conditions(nondelayed_jacobian(lc), diff)
        return index, (
            *swept,
            rep.trace_negative,
            rep.det_positive,
            rep.growth_band_exists,
            rep.band_reachable,
            rep.k2_max_growth,
            rep.turing_unstable,
        )
    raise ConfigError(f"unknown sweep.run {run_kind!r}")


def _cmd_sweep(cfg: RunConfig, args) -> int:
    key1, values1 = _sweep_points(cfg, "sweep")
    run_kind = cfg.get("sweep.run")
    two_dim = cfg.has("sweep2.key")
    tasks = []
    if two_dim:
        key2, values2 = _sweep_points(cfg, "sweep2")
        for i, v1 in enumerate(values1):
            for j, v2 in enumerate(values2):
                index = i * len(values2) + j
                tasks.append((index, cfg.values, ((key1, v1), (key2, v2)), run_kind))
        swept_cols = [key1, key2]
    else:
        for i, v1 in enumerate(values1):
            tasks.append((i, cfg.values, ((key1, v1),), run_kind))
        swept_cols = [key1]

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_eval, tasks))
    else:
        results = [_sweep_eval(t) for t in tasks]
    results.sort(key=lambda item: item[0])

    if run_kind == "simulate":
        tail = ["outcome", "t_low", "t_high", "t_final", "x_final", "y_final"]
    else:
        tail = [
            "trace_negative",
            "det_positive",
            "growth_band_exists",
            "band_reachable",
            "k2_max_growth",
            "turing_unstable",
        ]
    columns = ["index", *swept_cols, *tail]
    rows = [(index, *cells) for index, cells in results]
    write_table_csv(
        os.path.join(args.out_dir, "sweep_index.csv"),
        columns,
        rows,
        {"run": run_kind, "points": len(rows)},
    )
    print(_status_line({"points": len(rows)}))
    return 0


def _cmd_k_search(cfg: RunConfig, args) -> int:
    """Scan the carrying capacity for pattern-admitting values.

    For each K the interior state is linearized and the nondelayed
    dispersion relation evaluated on integer modes of the unit-pi domain;
    a K is flagged when some nonzero mode outgrows the uniform one.
    """
    p0 = cfg.model_parameters()
    diff = cfg.diffusivities()
    start = float(cfg.require("ksearch.start"))
    stop = float(cfg.require("ksearch.stop"))
    count = int(cfg.require("ksearch.count"))
    scale = cfg.get("ksearch.scale")
    if scale == "log":
        k_values = np.geomspace(start, stop, count)
    else:
        k_values = np.linspace(start, stop, count)
    rows = carrying_capacity_scan(p0, diff, k_values)
    write_table_csv(
        os.path.join(args.out_dir, "ksearch.csv"),
        list(KSEARCH_COLUMNS),
        rows,
        {"d1": diff.d1, "d2": diff.d2},
    )
    hits = [r for r in rows if r[-1]]
    print(_status_line({"candidates": len(hits), "scanned": len(rows)}))
    return 0


def _cmd_repro(args) -> int:
    run_bundle(args.bundle, args.out_dir, fmt=args.format)
    print(_status_line({"bundle": args.bundle, "out_dir": os.path.join(args.out_dir, args.bundle)}))
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

_COMMANDS = {
    "simulate": _cmd_simulate,
    "pde": _cmd_pde,
    "dispersion": _cmd_dispersion,
    "turing": _cmd_turing,
    "hopf": _cmd_hopf,
    "blowup-check": _cmd_blowup_check,
    "threshold": _cmd_threshold,
    "sweep": _cmd_sweep,
    "k-search": _cmd_k_search,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgbd",
        description=(
            "Simulation and bifurcation toolkit for a delayed "
            "predator-prey system with diffusion"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="flat key=value config file")
        sp.add_argument("--out-dir", default=".", help="directory for output files")
        sp.add_argument(
            "--format", choices=["csv", "pgm", "both"], default="csv",
            help="snapshot format for field output",
        )
        sp.add_argument(
            "--workers", type=int, default=1, help="worker processes for sweeps"
        )
        sp.add_argument(
            "--dump-config", action="store_true",
            help="print the canonical config echo and exit",
        )
        sp.add_argument(
            "--seedless", action="store_true",
            help="assert the run uses no randomness (always true here)",
        )
    rp = sub.add_parser("repro")
    rp.add_argument("bundle", choices=sorted(BUNDLES))
    rp.add_argument("--out-dir", default=".")
    rp.add_argument("--format", choices=["csv", "pgm", "both"], default="both")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "repro":
            return _cmd_repro(args)
        cfg = load_config(args.config)
        if args.dump_config:
            sys.stdout.write(cfg.dump())
            return 0
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ToleranceError, InconsistencyError, NormalFormError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
