"""Schema goldens, round-trip, determinism, and CLI tests for the figures."""

import csv
from pathlib import Path

import pytest

import repplots
from repplots import cli
from repplots.figures import DECODE_COLUMNS, MC_COLUMNS, PHASE_COLUMNS


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


@pytest.fixture
def decode_csv(tmp_path):
    path = tmp_path / "decode_sweep.csv"
    rows = [
        [3, 0.05, 0.05, 0.05, 1000, 50, 0.05, 0.0069],
        [3, 0.07, 0.07, 0.07, 1000, 90, 0.09, 0.009],
        [5, 0.05, 0.05, 0.05, 1000, 30, 0.03, 0.0054],
        [5, 0.07, 0.07, 0.07, 1000, 110, 0.11, 0.0099],
    ]
    write_csv(path, DECODE_COLUMNS, rows)
    return path


@pytest.fixture
def mc_csv(tmp_path):
    path = tmp_path / "mc_run.csv"
    rows = [
        ["IV", 0.0, 8, 2.1, 1.2, 0.05, 0.3, 0.7, 0],
        ["IV", 0.0, 8, 2.4, 0.7, 0.04, 0.35, 0.7, 0],
        ["IV", 0.0, 12, 2.1, 1.5, 0.06, 0.3, 0.6, 0],
        ["IV", 0.0, 12, 2.4, 0.5, 0.05, 0.35, 0.6, 0],
        ["IV", 0.0, 12, 2.6, "nan", "nan", 0.4, 0.6, 10],
    ]
    write_csv(path, MC_COLUMNS, rows)
    return path


@pytest.fixture
def phase_csv(tmp_path):
    path = tmp_path / "phase_diagram.csv"
    rows = [["IV", 0.02, 2.1, 0.03], ["IV", 0.06, 1.76, 0.05], ["II", 0.02, 3.2, 0.05]]
    write_csv(path, PHASE_COLUMNS, rows)
    return path


class TestSchema:
    def test_missing_columns_listed(self, tmp_path):
        bad = tmp_path / "bad.csv"
        write_csv(bad, ["a", "b"], [[1, 2]])
        spec = repplots.FigureSpec(
            kind="error-rate-curves", inputs=[str(bad)], output=str(tmp_path / "x.png")
        )
        with pytest.raises(repplots.SchemaError) as exc:
            repplots.render(spec)
        assert "rate" in str(exc.value)

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError):
            repplots.FigureSpec(kind="pie", inputs=[], output=str(tmp_path / "x.png"))

    def test_empty_dataset_renders_empty_axes(self, tmp_path):
        empty = tmp_path / "empty.csv"
        write_csv(empty, DECODE_COLUMNS, [])
        out = tmp_path / "empty.png"
        spec = repplots.FigureSpec(
            kind="error-rate-curves", inputs=[str(empty)], output=str(out)
        )
        points = repplots.render(spec)
        assert points == []
        assert out.exists() and out.stat().st_size > 0


class TestRoundTrip:
    def test_decode_points(self, decode_csv, tmp_path):
        out = tmp_path / "fig.png"
        spec = repplots.FigureSpec(
            kind="error-rate-curves", inputs=[str(decode_csv)], output=str(out)
        )
        points = repplots.render(spec)
        with open(decode_csv) as fh:
            rows = list(csv.DictReader(fh))
        table = {(r["d"], r["p"], r["rate"]) for r in rows}
        assert len(points) == len(rows)
        for pt in points:
            assert (pt["d"], pt["x"], pt["y"]) in table

    def test_crossing_points_skip_invalid(self, mc_csv, tmp_path):
        out = tmp_path / "fig.png"
        spec = repplots.FigureSpec(
            kind="crossing-panel", inputs=[str(mc_csv)], output=str(out)
        )
        points = repplots.render(spec)
        # the nan row is dropped, everything else appears exactly once
        assert len(points) == 4
        assert all(pt["y"] != "nan" for pt in points)

    def test_phase_points(self, phase_csv, tmp_path):
        out = tmp_path / "fig.png"
        spec = repplots.FigureSpec(
            kind="phase-diagram", inputs=[str(phase_csv)], output=str(out)
        )
        points = repplots.render(spec)
        assert len(points) == 3


class TestDeterminism:
    def test_byte_stable_output(self, decode_csv, tmp_path):
        outs = []
        for name in ("a.png", "b.png"):
            out = tmp_path / name
            spec = repplots.FigureSpec(
                kind="error-rate-curves", inputs=[str(decode_csv)], output=str(out)
            )
            repplots.render(spec)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_inputs_not_mutated(self, decode_csv, tmp_path):
        before = decode_csv.read_bytes()
        spec = repplots.FigureSpec(
            kind="error-rate-curves",
            inputs=[str(decode_csv)],
            output=str(tmp_path / "x.png"),
        )
        repplots.render(spec)
        assert decode_csv.read_bytes() == before

    def test_style_version_pinned(self):
        assert repplots.STYLE_VERSION == "1"


class TestNishimoriOverlay:
    def test_dashed_line_from_manifest(self, phase_csv, tmp_path):
        manifest = tmp_path / "manifest.json"
        manifest.write_text('{"nishimori_T": {"0.02": 0.9, "0.06": 1.3}}')
        out = tmp_path / "fig.png"
        spec = repplots.FigureSpec(
            kind="phase-diagram",
            inputs=[str(phase_csv)],
            output=str(out),
            nishimori=str(manifest),
        )
        points = repplots.render(spec)
        assert out.exists()
        # overlay adds no data points
        assert len(points) == 3


class TestCli:
    def test_happy_path(self, decode_csv, tmp_path, capsys):
        out = tmp_path / "fig.svg"
        code = cli.main(
            ["error-rate-curves", "--in", str(decode_csv), "--out", str(out)]
        )
        assert code == 0
        assert out.exists()
        assert "4 points" in capsys.readouterr().out

    def test_schema_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        write_csv(bad, ["a"], [[1]])
        code = cli.main(
            ["crossing-panel", "--in", str(bad), "--out", str(tmp_path / "x.png")]
        )
        assert code == 1

    def test_missing_file(self, tmp_path):
        code = cli.main(
            ["error-rate-curves", "--in", str(tmp_path / "nope.csv"),
             "--out", str(tmp_path / "x.png")]
        )
        assert code == 1
