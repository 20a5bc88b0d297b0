"""Figure generation from the simulation CLI's CSV/JSON outputs."""

from .isotonic import isotonic_fit
from .plots import (calibration_points, log_floor, plot_boxplot,
                    plot_calibration, plot_risk_over_time, stop_time_groups)

__all__ = [
    "isotonic_fit", "calibration_points", "log_floor", "plot_boxplot",
    "plot_calibration", "plot_risk_over_time", "stop_time_groups",
]

__version__ = "0.1.0"
