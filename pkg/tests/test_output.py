"""Tests for the text and CSV emitters."""

import io
import math
import os

import numpy as np
import pytest

from lgbd.linear_analysis import Diffusivities
from lgbd.normal_form import hopf_report
from lgbd.output import (
    format_value,
    hopf_report_row,
    hopf_report_text,
    render_field_csv,
    render_pgm,
    render_table,
    write_field_csv,
    write_pgm,
    write_snapshot,
    write_table_csv,
    write_text,
)
from lgbd.spatial import Grid, SpatialField


class TestFormatValue:
    def test_floats_round_trip(self):
        rng = np.random.default_rng(421)
        values = [0.1, 1.0, -3.5e-7, 1.5e-300, math.pi, 101.15]
        values += list(rng.uniform(-1e6, 1e6, size=20))
        for v in values:
            assert float(format_value(float(v))) == float(v)
            assert float(format_value(np.float64(v))) == float(v)

    def test_integers(self):
        assert format_value(3) == "3"
        assert format_value(np.int64(-7)) == "-7"

    def test_booleans_lowercase(self):
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        # numpy bools must not leak Python's capitalized repr
        assert format_value(np.True_) == "true"
        assert format_value(np.False_) == "false"

    def test_strings_pass_through(self):
        assert format_value("blow_up") == "blow_up"


class TestRenderTable:
    def test_layout(self):
        txt = render_table(["a", "b"], [(1.0, True), (0.5, False)], {"n": 2})
        lines = txt.splitlines()
        assert lines[0] == "# n=2"
        assert lines[1] == "a,b"
        assert lines[2] == "1.0,true"
        assert lines[3] == "0.5,false"
        assert txt.endswith("\n")

    def test_no_metadata_no_comments(self):
        txt = render_table(["x"], [(1,)])
        assert not txt.startswith("#")
        assert txt == "x\n1\n"

    def test_deterministic(self):
        rows = [(i * 0.1, i) for i in range(5)]
        a = render_table(["v", "i"], rows, {"seed": 1})
        b = render_table(["v", "i"], rows, {"seed": 1})
        assert a == b

    def test_write_round_trip(self, tmp_path):
        path = os.path.join(tmp_path, "sub", "t.csv")
        write_table_csv(path, ["x", "y"], [(1.5, 2.5)], {"k": "v"})
        body = open(path, encoding="utf-8").read()
        assert body == "# k=v\nx,y\n1.5,2.5\n"
        data = np.loadtxt(io.StringIO(body), delimiter=",", skiprows=2)
        np.testing.assert_allclose(data, [1.5, 2.5])


class TestRenderPgm:
    def test_header_and_range(self):
        txt = render_pgm(np.linspace(0.0, 1.0, 4), 1.0)
        lines = txt.splitlines()
        assert lines[0] == "P2"
        assert lines[1] == "# t=1.0 lo=0.0 hi=1.0 zero_range=0"
        assert lines[2] == "4 1"
        assert lines[3] == "255"
        pixels = [int(v) for v in lines[4].split()]
        assert pixels[0] == 0 and pixels[-1] == 255
        assert all(0 <= v <= 255 for v in pixels)

    def test_constant_field_degenerate_normalization(self):
        txt = render_pgm(np.full(4, 2.5), 0.5)
        assert "zero_range=1" in txt
        assert txt.splitlines()[4] == "0 0 0 0"

    def test_2d_dimensions_line(self):
        txt = render_pgm(np.arange(9.0).reshape(3, 3), 0.0)
        assert txt.splitlines()[2] == "3 3"

    def test_write(self, tmp_path):
        path = os.path.join(tmp_path, "f.pgm")
        write_pgm(path, np.linspace(0, 1, 4), 0.0)
        assert open(path).read() == render_pgm(np.linspace(0, 1, 4), 0.0)


class TestRenderFieldCsv:
    def test_1d(self):
        g = Grid(nx=4, lx=1.0)
        txt = render_field_csv(np.array([1.0, 2.0, 4.0, 8.0]), 0.25, g)
        lines = txt.splitlines()
        assert lines[0] == "# t=0.25 nx=4 ny=1"
        assert lines[1] == "1.0,2.0,4.0,8.0"

    def test_2d_row_per_y(self):
        g = Grid(nx=3, lx=1.0, ny=3, ly=2.0)
        arr = np.arange(9.0).reshape(3, 3)
        txt = render_field_csv(arr, 1.5, g)
        body = np.loadtxt(io.StringIO(txt), delimiter=",", skiprows=1)
        np.testing.assert_allclose(body, arr)

    def test_write_round_trip(self, tmp_path):
        g = Grid(nx=4, lx=1.0)
        arr = np.array([0.5, 1.5, 2.5, 3.5])
        path = os.path.join(tmp_path, "field.csv")
        write_field_csv(path, arr, 2.0, g)
        back = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_allclose(back, arr)


class TestWriteSnapshot:
    def setup_method(self):
        self.g = Grid(nx=5, lx=1.0)
        self.snap = SpatialField(
            prey=np.linspace(1.0, 2.0, 5), predator=np.linspace(3.0, 4.0, 5), t=0.5
        )

    def test_csv_naming(self, tmp_path):
        paths = write_snapshot(str(tmp_path), self.snap, self.g, 3)
        names = [os.path.basename(p) for p in paths]
        assert names == ["prey_000003.csv", "predator_000003.csv"]
        for p in paths:
            assert os.path.exists(p)

    def test_both_formats(self, tmp_path):
        paths = write_snapshot(str(tmp_path), self.snap, self.g, 0, fmt="both")
        exts = sorted(os.path.splitext(p)[1] for p in paths)
        assert exts == [".csv", ".csv", ".pgm", ".pgm"]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            write_snapshot(str(tmp_path), self.snap, self.g, 0, fmt="svg")


class TestHopfReportRendering:
    def setup_method(self):
        self.report = hopf_report(
            __import__("lgbd.presets", fromlist=["BASELINE"]).BASELINE,
            Diffusivities(0.0, 0.0),
        )

    def test_row_flattens_complex_pairs(self):
        cols, row = hopf_report_row(self.report)
        assert len(cols) == len(row)
        idx = {c: i for i, c in enumerate(cols)}
        assert row[idx["omega0"]] == self.report.omega0
        assert row[idx["tau_star"]] == self.report.tau_star
        assert row[idx["c1_re"]] == self.report.quantities.c1.real
        assert row[idx["c1_im"]] == self.report.quantities.c1.imag
        assert row[idx["direction"]] == "supercritical"
        assert row[idx["stability"]] == "stable"
        assert row[idx["period_trend"]] == "increasing"

    def test_text_contains_classification(self):
        txt = hopf_report_text(self.report)
        assert "critical delay" in txt
        assert "supercritical" in txt
        assert "mu2" in txt
        assert str(self.report.tau_star) in txt

    def test_text_write(self, tmp_path):
        path = os.path.join(tmp_path, "report.txt")
        write_text(path, hopf_report_text(self.report))
        assert open(path, encoding="utf-8").read() == hopf_report_text(self.report)
