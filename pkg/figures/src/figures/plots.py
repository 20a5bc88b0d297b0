"""The three figure kinds, each a pure function of its input tables.

Inputs are the CSV/JSON files emitted by the `abcs` command line:
calibration.csv (instance_id, delta_level, t_cross, correct), runs.csv
(policy, mode, ..., stop_time, ...), trace CSVs (t, Lambda, delta_hat,
...), and the bounds JSON {mode: {tstar, lower, practical}}.
"""
from __future__ import annotations

import csv
import sys

import matplotlib

matplotlib.use("Agg")
# fixed hash salt so SVG element ids do not vary between runs
matplotlib.rcParams["svg.hashsalt"] = "figures"
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .isotonic import isotonic_fit  # noqa: E402

FIGSIZE = (6.0, 4.5)
DPI = 120


def _read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _save(fig, out_path):
    fig.savefig(out_path, dpi=DPI, metadata=_no_metadata(out_path))
    plt.close(fig)


def _no_metadata(out_path) -> dict:
    # strip the creator/date fields so identical inputs give identical bytes
    name = str(out_path).lower()
    if name.endswith(".svg"):
        return {"Date": None, "Creator": None}
    return {"Software": None}


def calibration_points(rows: list[dict]):
    """Per delta-level empirical error proportion among crossed runs."""
    by_level: dict[float, list[int]] = {}
    for row in rows:
        if row["t_cross"] in ("", None):
            continue
        by_level.setdefault(float(row["delta_level"]), []).append(
            1 - int(row["correct"]))
    if len(by_level) < 2:
        raise ValueError("need at least 2 distinct crossed delta levels")
    levels = np.array(sorted(by_level))
    errors = np.array([np.mean(by_level[lv]) for lv in levels])
    return levels, errors


def log_floor(values: np.ndarray) -> np.ndarray:
    """Replace zeros by half the smallest positive value (log axes)."""
    positive = values[values > 0]
    floor = positive.min() / 2.0 if positive.size else 1e-6
    return np.where(values > 0, values, floor)


def plot_calibration(path, out_path):
    rows = _read_csv(path)
    levels, errors = calibration_points(rows)
    _, fit = isotonic_fit(levels, errors)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(levels, levels, "k--", lw=1, label="y = x")
    ax.plot(levels, log_floor(errors), "o", color="C0",
            label="empirical error")
    ax.plot(levels, log_floor(fit), "-", color="C1", label="isotonic fit")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("risk assessment level")
    ax.set_ylabel("empirical error proportion")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)


def stop_time_groups(rows: list[dict]):
    """Ordered dict of (policy, mode) -> stop times, insertion order."""
    groups: dict[tuple[str, str], list[int]] = {}
    for row in rows:
        key = (row["policy"], row["mode"])
        groups.setdefault(key, [])
        if row["stop_time"] not in ("", None):
            groups[key].append(int(row["stop_time"]))
    groups = {k: v for k, v in groups.items() if v}
    if not groups:
        raise ValueError("no completed runs to plot")
    return groups


def plot_boxplot(path, out_path, bounds: dict | None = None):
    rows = _read_csv(path)
    groups = stop_time_groups(rows)
    labels = [f"{p}\n{m}" for p, m in groups]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.boxplot(list(groups.values()), tick_labels=labels)
    if bounds:
        drawn = set()
        for k, (_, mode) in enumerate(groups, start=1):
            b = bounds.get(mode)
            if b is None:
                continue
            lo_lab = "lower bound" if "lower" not in drawn else None
            pr_lab = "practical bound" if "practical" not in drawn else None
            drawn.update(("lower", "practical"))
            ax.hlines(b["lower"], k - 0.4, k + 0.4, colors="C2",
                      linestyles="dashed", label=lo_lab)
            ax.hlines(b["practical"], k - 0.4, k + 0.4, colors="C3",
                      linestyles="dotted", label=pr_lab)
        if drawn:
            ax.legend()
    else:
        print("warning: no bounds given, plotting boxes only",
              file=sys.stderr)
    ax.set_ylabel("stopping time")
    fig.tight_layout()
    _save(fig, out_path)


def plot_risk_over_time(paths, out_path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for path in paths:
        rows = _read_csv(path)
        t = np.array([int(r["t"]) for r in rows])
        dh = np.array([float(r["delta_hat"]) for r in rows])
        label = str(path).rsplit("/", 1)[-1].removesuffix(".csv")
        ax.plot(t, dh, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("risk assessment")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_path)
