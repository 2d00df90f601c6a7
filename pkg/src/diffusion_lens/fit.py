"""Least-squares estimation of (beta, gamma) per engagement series.

The loss is the sum of squared residuals between the model's infected
curve sampled at integer days and the observed daily counts. Minimization
uses a self-contained Nelder-Mead simplex with bound handling by
reflection and a fixed set of start points; everything is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSeriesError, NumericalError
from .series import EngagementSeries
from .sir import (
    DEFAULT_STEP,
    PeakMetrics,
    SirParams,
    SirState,
    SirTrajectory,
    integrate,
    peak_metrics,
    sample_daily,
)

DEFAULT_STARTS = ((0.5, 0.3), (2.0, 1.0), (5.0, 4.0), (12.0, 10.0))


@dataclass(frozen=True)
class FitConfig:
    horizon_days: int = 32
    step: float = DEFAULT_STEP
    i0_rule: str = "observed"  # "observed": I(0)=max(day0, 1); "fit": free param
    loss_target: str = "active"  # or "cumulative"
    param_min: float = 0.0
    param_max: float = 50.0
    tol: float = 1e-8
    max_evals: int = 2000
    starts: tuple[tuple[float, float], ...] = DEFAULT_STARTS

    def __post_init__(self):
        if self.param_max <= self.param_min:
            raise ValueError("empty parameter bounds")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.i0_rule not in ("observed", "fit"):
            raise ValueError(f"unknown i0 rule: {self.i0_rule}")
        if self.loss_target not in ("active", "cumulative"):
            raise ValueError(f"unknown loss target: {self.loss_target}")


@dataclass
class FitResult:
    region: tuple[str, str]
    topic: str
    params: Optional[SirParams]
    init: Optional[SirState]
    loss: float
    metrics: Optional[PeakMetrics]
    converged: bool
    evaluations: int
    error: Optional[str] = None


def _initial_state(observed: np.ndarray, n: float, i0: Optional[float] = None) -> SirState:
    if i0 is None:
        i0 = max(float(observed[0]), 1.0)
    if n <= i0:
        raise DegenerateSeriesError(f"population {n} not larger than I(0)={i0}")
    return SirState(s=n - i0, i=i0, r=0.0, t=0.0)


def _model_curve(params: SirParams, init: SirState, cfg: FitConfig) -> np.ndarray:
    traj = integrate(params, init, horizon=float(cfg.horizon_days - 1) if cfg.horizon_days > 1 else cfg.step, step=cfg.step)
    return sample_daily(traj, cfg.horizon_days)


def sse_loss(
    params: SirParams,
    observed: EngagementSeries,
    cfg: FitConfig,
    i0: Optional[float] = None,
) -> float:
    counts = np.asarray(observed.day_counts, dtype=np.float64)
    if len(counts) != cfg.horizon_days:
        raise ValueError(
            f"series length {len(counts)} != horizon {cfg.horizon_days}"
        )
    init = _initial_state(counts, float(observed.n_users), i0)
    model = _model_curve(params, init, cfg)
    if cfg.loss_target == "cumulative":
        model = np.cumsum(model)
        counts = np.cumsum(counts)
    resid = model - counts
    return float(resid @ resid)


def _fold(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Reflect out-of-bounds coordinates back into [lo, hi]."""
    width = hi - lo
    y = np.mod(x - lo, 2.0 * width)
    y = np.where(y > width, 2.0 * width - y, y)
    return lo + y


def nelder_mead(
    func,
    x0: np.ndarray,
    scale: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    tol: float,
    max_evals: int,
) -> tuple[np.ndarray, float, int, bool]:
    """Minimize func over a box via the Nelder-Mead simplex.

    Points outside the box are folded back by reflection before
    evaluation. Returns (x_best, f_best, evaluations, converged).
    """
    ndim = len(x0)
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        val = func(_fold(x, lo, hi))
        if not np.isfinite(val):
            raise NumericalError("non-finite loss during simplex search")
        return val

    simplex = [np.asarray(x0, dtype=np.float64)]
    for j in range(ndim):
        v = simplex[0].copy()
        v[j] += scale[j]
        simplex.append(v)
    values = [f(v) for v in simplex]

    converged = False
    while evals < max_evals:
        order = sorted(range(ndim + 1), key=lambda i: values[i])
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        f_lo, f_hi = values[0], values[-1]
        if f_hi - f_lo <= tol * (1.0 + abs(f_lo)):
            converged = True
            break

        centroid = np.mean(simplex[:-1], axis=0)
        reflected = centroid + (centroid - simplex[-1])
        f_r = f(reflected)
        if f_r < values[0]:
            expanded = centroid + 2.0 * (centroid - simplex[-1])
            f_e = f(expanded)
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
        elif f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
        else:
            contracted = centroid + 0.5 * (simplex[-1] - centroid)
            f_c = f(contracted)
            if f_c < values[-1]:
                simplex[-1], values[-1] = contracted, f_c
            else:
                best = simplex[0]
                for j in range(1, ndim + 1):
                    simplex[j] = best + 0.5 * (simplex[j] - best)
                    values[j] = f(simplex[j])

    best = int(np.argmin(values))
    return _fold(simplex[best], lo, hi), values[best], evals, converged


def fit(observed: EngagementSeries, cfg: FitConfig = FitConfig()) -> FitResult:
    counts = np.asarray(observed.day_counts, dtype=np.float64)
    n = float(observed.n_users)
    if np.count_nonzero(counts) < 2:
        return FitResult(
            region=observed.region,
            topic=observed.topic,
            params=None,
            init=None,
            loss=float("nan"),
            metrics=None,
            converged=False,
            evaluations=0,
            error="degenerate series: fewer than 2 nonzero days",
        )

    fit_i0 = cfg.i0_rule == "fit"

    def objective(x):
        params = SirParams(beta=float(x[0]), gamma=float(x[1]), n=n)
        i0 = float(x[2]) if fit_i0 else None
        return sse_loss(params, observed, cfg, i0=i0)

    if fit_i0:
        i0_hi = max(2.0, min(n - 1.0, 2.0 * max(float(counts.max()), 1.0)))
        lo = np.array([cfg.param_min, cfg.param_min, 1.0])
        hi = np.array([cfg.param_max, cfg.param_max, i0_hi])
    else:
        lo = np.array([cfg.param_min, cfg.param_min])
        hi = np.array([cfg.param_max, cfg.param_max])

    best: Optional[tuple[np.ndarray, float, int, bool]] = None
    total_evals = 0
    try:
        for b0, g0 in cfg.starts:
            x0 = [b0, g0] + ([max(float(counts[0]), 1.0)] if fit_i0 else [])
            x0 = np.asarray(x0, dtype=np.float64)
            scale = np.maximum(0.25, 0.5 * x0)
            x, f_val, evals, conv = nelder_mead(
                objective, x0, scale, lo, hi, cfg.tol, cfg.max_evals
            )
            total_evals += evals
            if (
                best is None
                or f_val < best[1] - 1e-12
                or (abs(f_val - best[1]) <= 1e-12 and x[0] < best[0][0])
            ):
                best = (x, f_val, evals, conv)
    except (DegenerateSeriesError, NumericalError) as exc:
        return FitResult(
            region=observed.region,
            topic=observed.topic,
            params=None,
            init=None,
            loss=float("nan"),
            metrics=None,
            converged=False,
            evaluations=total_evals,
            error=str(exc),
        )

    x, f_val, _, conv = best
    params = SirParams(beta=float(x[0]), gamma=float(x[1]), n=n)
    init = _initial_state(counts, n, float(x[2]) if fit_i0 else None)
    horizon = float(cfg.horizon_days - 1) if cfg.horizon_days > 1 else cfg.step
    traj = integrate(params, init, horizon=horizon, step=cfg.step)
    return FitResult(
        region=observed.region,
        topic=observed.topic,
        params=params,
        init=init,
        loss=f_val,
        metrics=peak_metrics(traj, params),
        converged=conv,
        evaluations=total_evals,
    )


def fit_batch(series: Sequence[EngagementSeries], cfg: FitConfig = FitConfig()) -> list[FitResult]:
    """Fit every series; per-series failures are captured in the result,
    never aborting the batch. Output order matches input order."""
    results = []
    for s in series:
        try:
            results.append(fit(s, cfg))
        except Exception as exc:  # defensive: flag, keep going
            results.append(
                FitResult(
                    region=s.region,
                    topic=s.topic,
                    params=None,
                    init=None,
                    loss=float("nan"),
                    metrics=None,
                    converged=False,
                    evaluations=0,
                    error=str(exc),
                )
            )
    return results


def model_trajectory(result: FitResult, cfg: FitConfig = FitConfig()) -> Optional[SirTrajectory]:
    if result.params is None or result.init is None:
        return None
    horizon = float(cfg.horizon_days - 1) if cfg.horizon_days > 1 else cfg.step
    return integrate(result.params, result.init, horizon=horizon, step=cfg.step)
