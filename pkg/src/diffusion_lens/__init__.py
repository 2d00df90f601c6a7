"""diffusion-lens: per-(region, topic) engagement series and SIR fitting
for timestamped, geolocated text-event streams."""

from .fit import FitConfig, FitResult, fit, fit_batch, sse_loss
from .series import EngagementSeries, LabeledEvent, build_series, spatial_rollup
from .sir import (
    PeakMetrics,
    SirParams,
    SirState,
    SirTrajectory,
    derivatives,
    integrate,
    peak_metrics,
    sample_daily,
)

__version__ = "0.1.0"

__all__ = [
    "EngagementSeries",
    "FitConfig",
    "FitResult",
    "LabeledEvent",
    "PeakMetrics",
    "SirParams",
    "SirState",
    "SirTrajectory",
    "build_series",
    "derivatives",
    "fit",
    "fit_batch",
    "integrate",
    "peak_metrics",
    "sample_daily",
    "spatial_rollup",
    "sse_loss",
]
