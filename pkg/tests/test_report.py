import re

import numpy as np
import pytest

from tfse.report import csv_text, emit_csv, emit_plot, format_cell, parse_csv, svg_text

T1_ROWS = [
    {"alpha": a, "N": n, "M": m, "E_l": el, "rate_l": None, "E_g": eg, "rate_g": None}
    for a, rows in {
        0.3: [(512, 23, 9.0586e-06, 1.7320e-02), (1024, 32, 4.5730e-06, 1.4312e-02), (2048, 46, 2.1972e-06, 1.1843e-02)],
        0.5: [(512, 23, 2.0332e-05, 6.5287e-03), (1024, 32, 1.0409e-05, 4.6379e-03), (2048, 46, 5.0306e-06, 3.3033e-03)],
        0.7: [(512, 23, 3.5230e-05, 1.7573e-03), (1024, 32, 1.8061e-05, 1.0318e-03), (2048, 46, 8.7224e-06, 6.2977e-04)],
    }.items()
    for n, m, el, eg in rows
]


def polylines(svg):
    return re.findall(r'<polyline data-series="([^"]+)" data-alpha="([^"]+)" data-points="([^"]+)"', svg)


class TestCsv:
    def test_golden_row(self):
        row = {"alpha": 0.5, "N": 512, "M": 23, "E_l": 2.03323e-05, "rate_l": None, "E_g": 6.52870e-03, "rate_g": None}
        assert csv_text("table1", [row]) == "alpha,N,M,E_l,rate_l,E_g,rate_g\n0.5,512,23,2.0332e-05,,6.5287e-03,\n"

    def test_header_only(self):
        assert csv_text("table1", []) == "alpha,N,M,E_l,rate_l,E_g,rate_g\n"

    def test_cells(self):
        assert format_cell("alpha", 0.005) == "0.005"
        assert format_cell("E_l", 1.0) == "1.0000e+00"
        assert format_cell("rate", None) == ""
        assert format_cell("N", 8) == "8"

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        rows = [
            {"alpha": float(a), "N": int(n), "M": 7, "E_l": float(f"{e:.4e}"), "rate_l": float(f"{r:.4e}"), "E_g": float(f"{g:.4e}"), "rate_g": None}
            for a, n, e, r, g in zip(rng.uniform(0.01, 0.99, 20), rng.integers(1, 9000, 20), rng.uniform(1e-9, 1, 20), rng.uniform(-2, 2, 20), rng.uniform(1e-9, 1, 20))
        ]
        assert parse_csv(csv_text("table1", rows)) == rows

    def test_file_output(self, tmp_path):
        out = tmp_path / "t.csv"
        emit_csv("table1", T1_ROWS, out)
        first = out.read_bytes()
        emit_csv("table1", T1_ROWS, out)
        assert out.read_bytes() == first
        assert b"\r" not in first
        assert sorted(p.name for p in tmp_path.iterdir()) == ["t.csv"]

    def test_stdout(self, capsys):
        emit_csv("probe-kernel", [])
        assert capsys.readouterr().out == "alpha,gamma,N,error,rate\n"

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            emit_csv("table1", T1_ROWS, tmp_path / "missing" / "t.csv")


class TestSvg:
    def test_one_polyline_per_alpha(self):
        lines = polylines(svg_text("table1", T1_ROWS))
        assert sorted(a for _, a, _ in lines) == ["0.3", "0.5", "0.7"]

    def test_local_slopes(self):
        for _, _, data in polylines(svg_text("table1", T1_ROWS)):
            pts = np.array([[float(v) for v in p.split(",")] for p in data.split()])
            slope = np.polyfit(pts[:, 0], pts[:, 1], 1)[0]
            assert slope == pytest.approx(-1.0, abs=0.06)

    def test_guide_line(self):
        assert 'class="guide" data-slope="-1"' in svg_text("table1", T1_ROWS)

    def test_single_alpha(self):
        rows = [r for r in T1_ROWS if r["alpha"] == 0.5]
        assert len(polylines(svg_text("table1", rows))) == 1

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert emit_plot("table1", T1_ROWS, a) and emit_plot("table1", T1_ROWS, b)
        assert a.read_bytes() == b.read_bytes()

    def test_nothing_to_plot(self, tmp_path):
        out = tmp_path / "x.svg"
        assert not emit_plot("table1", T1_ROWS[:1], out)
        assert not emit_plot("stability", T1_ROWS, out)
        assert not out.exists()
