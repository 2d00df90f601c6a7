"""SIR dynamics: derivative evaluation, fixed-step RK4 integration, daily
sampling, and peak metrics.

The system is
    dS/dt = -beta * I * S / N
    dI/dt =  beta * I * S / N - gamma * I
    dR/dt =  gamma * I
with constant total population N = S + I + R (no vital dynamics). Time is
measured in days; beta and gamma are per-day rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._accel import njit
from .errors import NumericalError

DEFAULT_STEP = 0.01

#: Magnitudes below this (from roundoff) are clamped to zero.
_NEG_TOL = 1e-12


@dataclass(frozen=True)
class SirParams:
    beta: float
    gamma: float
    n: float

    def __post_init__(self):
        if self.beta < 0 or self.gamma < 0:
            raise ValueError("rates must be non-negative")
        if self.n <= 0:
            raise ValueError("population must be positive")


@dataclass(frozen=True)
class SirState:
    s: float
    i: float
    r: float
    t: float = 0.0


@dataclass
class SirTrajectory:
    step: float
    t: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray

    def state_at(self, idx: int) -> SirState:
        return SirState(self.s[idx], self.i[idx], self.r[idx], self.t[idx])


def derivatives(state: SirState, params: SirParams) -> tuple[float, float, float]:
    """Right-hand side of the SIR system; the three terms sum to zero."""
    infection = params.beta * state.i * state.s / params.n
    recovery = params.gamma * state.i
    return (-infection, infection - recovery, recovery)


@njit(cache=True)
def _rk4_sir(beta, gamma, n, s0, i0, r0, n_steps, h):
    out = np.empty((n_steps + 1, 3))
    s, i, r = s0, i0, r0
    out[0, 0], out[0, 1], out[0, 2] = s, i, r
    for step in range(1, n_steps + 1):
        # k1
        inf1 = beta * i * s / n
        rec1 = gamma * i
        ds1, di1, dr1 = -inf1, inf1 - rec1, rec1
        # k2
        s2, i2 = s + 0.5 * h * ds1, i + 0.5 * h * di1
        inf2 = beta * i2 * s2 / n
        rec2 = gamma * i2
        ds2, di2, dr2 = -inf2, inf2 - rec2, rec2
        # k3
        s3, i3 = s + 0.5 * h * ds2, i + 0.5 * h * di2
        inf3 = beta * i3 * s3 / n
        rec3 = gamma * i3
        ds3, di3, dr3 = -inf3, inf3 - rec3, rec3
        # k4
        s4, i4 = s + h * ds3, i + h * di3
        inf4 = beta * i4 * s4 / n
        rec4 = gamma * i4
        ds4, di4, dr4 = -inf4, inf4 - rec4, rec4

        s = s + (h / 6.0) * (ds1 + 2.0 * ds2 + 2.0 * ds3 + ds4)
        i = i + (h / 6.0) * (di1 + 2.0 * di2 + 2.0 * di3 + di4)
        r = r + (h / 6.0) * (dr1 + 2.0 * dr2 + 2.0 * dr3 + dr4)
        if s < 0.0 and s > -1e-12 * n:
            s = 0.0
        if i < 0.0 and i > -1e-12 * n:
            i = 0.0
        if r < 0.0 and r > -1e-12 * n:
            r = 0.0
        out[step, 0], out[step, 1], out[step, 2] = s, i, r
    return out


def integrate(
    params: SirParams,
    init: SirState,
    horizon: float,
    step: float = DEFAULT_STEP,
) -> SirTrajectory:
    """Classical fixed-step RK4 from t=0 through at least `horizon` days."""
    if step <= 0:
        raise ValueError("step must be positive")
    if horizon < step:
        raise ValueError("horizon must be at least one step")
    if abs((init.s + init.i + init.r) - params.n) > 1e-6 * params.n:
        raise ValueError("initial state does not conserve the population")
    n_steps = int(math.ceil(horizon / step - 1e-12))
    out = _rk4_sir(
        params.beta, params.gamma, params.n,
        float(init.s), float(init.i), float(init.r),
        n_steps, float(step),
    )
    if not np.all(np.isfinite(out)):
        bad = int(np.argwhere(~np.isfinite(out).all(axis=1))[0, 0])
        raise NumericalError(f"non-finite state at t={bad * step:.6g}")
    t = np.arange(n_steps + 1) * step
    return SirTrajectory(step=step, t=t, s=out[:, 0], i=out[:, 1], r=out[:, 2])


def sample_daily(traj: SirTrajectory, days: int) -> np.ndarray:
    """I(t) at t = 0, 1, ..., days-1. The step must divide one day so the
    grid hits integers exactly."""
    per_day = round(1.0 / traj.step)
    if abs(per_day * traj.step - 1.0) > 1e-9:
        raise ValueError(f"step {traj.step} does not divide 1 day")
    last = (days - 1) * per_day
    if days < 1 or last >= len(traj.i):
        raise ValueError(f"trajectory horizon too short for {days} days")
    return traj.i[0 : last + 1 : per_day].copy()


@dataclass(frozen=True)
class PeakMetrics:
    t_star: Optional[float]
    i_peak: Optional[float]
    r0: float
    participation_ratio: Optional[float]


def reproduction_number(params: SirParams) -> float:
    if params.gamma > 0:
        return params.beta / params.gamma
    return math.inf if params.beta > 0 else 0.0


def peak_metrics(traj: SirTrajectory, params: SirParams) -> PeakMetrics:
    """Grid argmax of I when an interior peak exists.

    When beta*S(0)/(gamma*N) <= 1 the infected curve is non-increasing and
    the peak fields are reported absent (rendered "NA" downstream).
    """
    r0 = reproduction_number(params)
    s0 = traj.s[0]
    no_outbreak = params.beta == 0.0 or (
        params.gamma > 0 and params.beta * s0 / (params.gamma * params.n) <= 1.0
    )
    if no_outbreak:
        return PeakMetrics(None, None, r0, None)
    idx = int(np.argmax(traj.i))
    if idx == 0 and traj.i[-1] <= traj.i[0]:
        return PeakMetrics(None, None, r0, None)
    i_peak = float(traj.i[idx])
    return PeakMetrics(
        t_star=float(traj.t[idx]),
        i_peak=i_peak,
        r0=r0,
        participation_ratio=i_peak / params.n,
    )


def write_trajectory(path, traj: SirTrajectory, params: SirParams):
    """Plot-ready export: t, S, I, R, participation ratio."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t\tS\tI\tR\tparticipation_ratio\n")
        for k in range(len(traj.t)):
            fh.write(
                f"{traj.t[k]:.6g}\t{traj.s[k]:.10g}\t{traj.i[k]:.10g}"
                f"\t{traj.r[k]:.10g}\t{traj.i[k] / params.n:.10g}\n"
            )
