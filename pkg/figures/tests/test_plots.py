import csv
import json

import numpy as np
import pytest

from figures import calibration_points, log_floor, stop_time_groups
from figures.cli import main


def write_calibration(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("instance_id", "delta_level", "t_cross", "correct"))
        writer.writerows(rows)


def write_runs(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("policy", "mode", "instance_id", "seed",
                         "stop_time", "censored", "correct", "delta_final"))
        writer.writerows(rows)


def synthetic_calibration(tmp_path, error_rate_of):
    """200-instance table with per-level error rates set by a callable."""
    rows = []
    rng = np.random.default_rng(0)
    levels = (0.5, 0.2, 0.1, 0.05)
    for idx in range(200):
        for lv in levels:
            wrong = rng.random() < error_rate_of(lv)
            rows.append((idx, lv, 100 + idx, int(not wrong)))
    path = tmp_path / "calibration.csv"
    write_calibration(path, rows)
    return path


def test_calibration_points_error_proportions(tmp_path):
    path = tmp_path / "cal.csv"
    write_calibration(path, [
        (0, 0.5, 10, 1), (1, 0.5, 12, 0),
        (0, 0.1, 40, 1), (1, 0.1, 44, 1),
        (2, 0.1, "", ""),  # never crossed: excluded
    ])
    levels, errors = calibration_points(
        list(csv.DictReader(open(path))))
    np.testing.assert_allclose(levels, [0.1, 0.5])
    np.testing.assert_allclose(errors, [0.0, 0.5])


def test_calibration_needs_two_levels(tmp_path):
    path = tmp_path / "cal.csv"
    write_calibration(path, [(0, 0.1, 10, 1)])
    out = tmp_path / "fig.png"
    assert main(["calibration", "--in", str(path),
                 "--out", str(out)]) == 2


def test_log_floor():
    vals = np.array([0.0, 0.2, 0.04])
    np.testing.assert_allclose(log_floor(vals), [0.02, 0.2, 0.04])
    np.testing.assert_allclose(log_floor(np.zeros(2)), [1e-6, 1e-6])


def test_calibration_all_correct_plots_at_floor(tmp_path):
    path = synthetic_calibration(tmp_path, lambda lv: 0.0)
    out = tmp_path / "fig.png"
    assert main(["calibration", "--in", str(path), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_calibration_exact_rate_fit_matches_diagonal(tmp_path):
    # error proportion equal to the level at every level: the isotonic
    # fit must coincide with the diagonal
    from figures.isotonic import isotonic_fit
    levels = np.array([0.02, 0.1, 0.3, 0.5])
    _, fit = isotonic_fit(levels, levels)
    np.testing.assert_allclose(fit, levels)


def test_calibration_curve_below_diagonal_for_conservative_data(tmp_path):
    # stylized-threshold-shaped data: empirical error far below the level
    path = synthetic_calibration(tmp_path, lambda lv: lv / 20.0)
    rows = list(csv.DictReader(open(path)))
    levels, errors = calibration_points(rows)
    from figures.isotonic import isotonic_fit
    _, fit = isotonic_fit(levels, errors)
    assert np.all(fit < levels)
    out = tmp_path / "fig.png"
    assert main(["calibration", "--in", str(path), "--out", str(out)]) == 0


def test_stop_time_groups_orders_and_filters(tmp_path):
    path = tmp_path / "runs.csv"
    write_runs(path, [
        ("tas", "active", 0, 0, 120, 0, 1, "0.09"),
        ("tas", "active", 0, 1, 150, 0, 1, "0.08"),
        ("uniform", "agnostic", 0, 0, "", 1, 0, "0.5"),
        ("bc", "agnostic", 0, 0, 300, 0, 1, "0.07"),
    ])
    groups = stop_time_groups(list(csv.DictReader(open(path))))
    assert list(groups) == [("tas", "active"), ("bc", "agnostic")]
    assert groups[("tas", "active")] == [120, 150]


def test_boxplot_with_bounds(tmp_path):
    runs = tmp_path / "runs.csv"
    write_runs(runs, [("tas", "active", 0, r, 100 + r, 0, 1, "0.09")
                      for r in range(5)])
    bounds = tmp_path / "bounds.json"
    bounds.write_text(json.dumps(
        {"active": {"tstar": 40.0, "lower": 88.0, "practical": 160.0}}))
    out = tmp_path / "box.png"
    assert main(["boxplot", "--in", str(runs), "--bounds", str(bounds),
                 "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_boxplot_without_bounds_warns(tmp_path, capsys):
    runs = tmp_path / "runs.csv"
    write_runs(runs, [("tas", "active", 0, 0, 100, 0, 1, "0.09")])
    out = tmp_path / "box.png"
    assert main(["boxplot", "--in", str(runs), "--out", str(out)]) == 0
    assert "warning" in capsys.readouterr().err


def test_boxplot_no_completed_runs_fails(tmp_path):
    runs = tmp_path / "runs.csv"
    write_runs(runs, [("tas", "active", 0, 0, "", 1, 0, "0.5")])
    assert main(["boxplot", "--in", str(runs),
                 "--out", str(tmp_path / "box.png")]) == 2


def write_trace(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "Lambda", "delta_hat", "recommended_set",
                         "phase", "A_t", "I_t"))
        writer.writerows(rows)


def test_risk_over_time_multiple_traces(tmp_path):
    t1 = tmp_path / "tas_agnostic.csv"
    write_trace(t1, [(t, 0.1 * t, max(1e-3, 1.0 / t), "1", "tracking", 1, 0)
                     for t in range(1, 50)])
    t2 = tmp_path / "uniform_agnostic.csv"
    write_trace(t2, [(t, 0.0, 1.0, "", "tracking", 0, 0)
                     for t in range(1, 30)])  # flat unconverged curve
    out = tmp_path / "risk.png"
    assert main(["risk_over_time", "--in", str(t1), str(t2),
                 "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_missing_input_fails(tmp_path):
    assert main(["calibration", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "fig.png")]) == 2


def test_rerun_is_byte_identical(tmp_path):
    path = synthetic_calibration(tmp_path, lambda lv: lv / 10.0)
    out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
    assert main(["calibration", "--in", str(path), "--out", str(out1)]) == 0
    assert main(["calibration", "--in", str(path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    svg1, svg2 = tmp_path / "a.svg", tmp_path / "b.svg"
    assert main(["calibration", "--in", str(path), "--out", str(svg1)]) == 0
    assert main(["calibration", "--in", str(path), "--out", str(svg2)]) == 0
    assert svg1.read_bytes() == svg2.read_bytes()
