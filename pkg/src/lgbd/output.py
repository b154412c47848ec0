"""Deterministic file output: CSV tables, field snapshots, PGM images.

Every writer here is byte-stable: identical inputs produce identical
bytes (floats are serialized with ``repr``, which round-trips exactly;
no timestamps or environment data are embedded).
"""

from __future__ import annotations

import os
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .normal_form import HopfReport
from .spatial import Grid, SpatialField


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_text(path: str, text: str) -> None:
    _write(path, text)


def render_table(
    columns: Sequence[str],
    rows: Iterable[Sequence],
    metadata: Optional[Mapping[str, object]] = None,
) -> str:
    lines = []
    if metadata:
        for key, value in metadata.items():
            lines.append(f"# {key}={format_value(value)}")
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match columns")
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_table_csv(
    path: str,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    metadata: Optional[Mapping[str, object]] = None,
) -> None:
    _write(path, render_table(columns, rows, metadata))


def render_field_csv(arr: np.ndarray, t: float, g: Grid) -> str:
    arr = np.asarray(arr, dtype=float)
    if arr.shape != g.shape:
        raise ValueError("field shape does not match grid")
    ny = g.ny if g.dimension == 2 else 1
    lines = [f"# t={repr(float(t))} nx={g.nx} ny={ny}"]
    rows = arr.reshape(ny, g.nx)
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_field_csv(path: str, arr: np.ndarray, t: float, g: Grid) -> None:
    _write(path, render_field_csv(arr, t, g))


def render_pgm(arr: np.ndarray, t: float) -> str:
    """8-bit text PGM (P2) with per-snapshot min-max normalization.

    The comment line records the time and the normalization bounds; a
    constant field maps to uniform 0 with ``zero_range=1`` so the
    degenerate normalization is recoverable.
    """
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError("PGM export expects a 1D or 2D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("PGM export requires finite data")
    lo = float(np.min(arr))
    hi = float(np.max(arr))
    zero_range = hi == lo
    if zero_range:
        pixels = np.zeros(arr.shape, dtype=int)
    else:
        pixels = np.rint((arr - lo) / (hi - lo) * 255.0).astype(int)
    h, w = arr.shape
    lines = [
        "P2",
        f"# t={repr(float(t))} lo={repr(lo)} hi={repr(hi)} "
        f"zero_range={1 if zero_range else 0}",
        f"{w} {h}",
        "255",
    ]
    flat = pixels.ravel()
    # keep lines short for strict PGM readers
    for start in range(0, flat.size, 16):
        lines.append(" ".join(str(v) for v in flat[start : start + 16]))
    return "\n".join(lines) + "\n"


def write_pgm(path: str, arr: np.ndarray, t: float) -> None:
    _write(path, render_pgm(arr, t))


def write_snapshot(
    base: str,
    snap: SpatialField,
    g: Grid,
    index: int,
    fmt: str = "csv",
) -> list[str]:
    """Write one snapshot's components in the requested format(s).

    Returns the list of paths written.  ``base`` is the directory; files
    are named ``<component>_<index:06d>.<ext>``.
    """
    if fmt not in ("csv", "pgm", "both"):
        raise ValueError(f"unknown snapshot format {fmt!r}; use csv, pgm or both")
    written = []
    for name, arr in (("prey", snap.prey), ("predator", snap.predator)):
        stem = os.path.join(base, f"{name}_{index:06d}")
        if fmt in ("csv", "both"):
            write_field_csv(stem + ".csv", arr, snap.t, g)
            written.append(stem + ".csv")
        if fmt in ("pgm", "both"):
            write_pgm(stem + ".pgm", arr, snap.t)
            written.append(stem + ".pgm")
    return written


# ---------------------------------------------------------------------------
# Hopf classification report
# ---------------------------------------------------------------------------

_REPORT_COMPLEX = (
    ("lambda_prime", lambda r: r.lambda_prime),
    ("alpha2", lambda r: r.pairing.alpha2),
    ("alpha2_star", lambda r: r.pairing.alpha2_star),
    ("n_bar", lambda r: r.pairing.n_bar),
    ("g20", lambda r: r.g.g20),
    ("g11", lambda r: r.g.g11),
    ("g02", lambda r: r.g.g02),
    ("g21", lambda r: r.g.g21),
    ("c1", lambda r: r.quantities.c1),
)


def hopf_report_row(report: HopfReport) -> tuple[list[str], list]:
    """Flatten a HopfReport to (columns, row) with complex re/im pairs."""
    columns = ["k", "omega0", "tau_star"]
    row: list = [report.k, report.omega0, report.tau_star]
    for name, getter in _REPORT_COMPLEX:
        value = getter(report)
        columns.extend([f"{name}_re", f"{name}_im"])
        row.extend([value.real, value.imag])
    columns.extend(
        [
            "closed_form_deviation",
            "mu2",
            "beta2",
            "t2",
            "direction",
            "stability",
            "period_trend",
        ]
    )
    q = report.quantities
    row.extend(
        [
            report.pairing.closed_form_deviation,
            q.mu2,
            q.beta2,
            q.t2,
            q.direction.value,
            q.stability.value,
            q.period_trend.value,
        ]
    )
    return columns, row


def hopf_report_text(report: HopfReport) -> str:
    """Human-readable rendering of the Hopf classification."""
    q = report.quantities
    pr = report.pairing

    def c(z: complex) -> str:
        return f"{z.real!r} {'+' if z.imag >= 0 else '-'} {abs(z.imag)!r}i"

    lines = [
        f"mode k            : {report.k!r}",
        f"frequency omega0  : {report.omega0!r}",
        f"critical delay    : {report.tau_star!r}",
        f"root velocity     : {c(report.lambda_prime)}",
        f"alpha2            : {c(pr.alpha2)}",
        f"alpha2*           : {c(pr.alpha2_star)}",
        f"normalizer        : {c(pr.n_bar)}",
        f"closed-form dev.  : {pr.closed_form_deviation!r}",
        f"g20               : {c(report.g.g20)}",
        f"g11               : {c(report.g.g11)}",
        f"g02               : {c(report.g.g02)}",
        f"g21               : {c(report.g.g21)}",
        f"c1(0)             : {c(q.c1)}",
        f"mu2               : {q.mu2!r}",
        f"beta2             : {q.beta2!r}",
        f"T2                : {q.t2!r}",
        f"direction         : {q.direction.value}",
        f"orbit stability   : {q.stability.value}",
        f"period trend      : {q.period_trend.value}",
    ]
    return "\n".join(lines) + "\n"
