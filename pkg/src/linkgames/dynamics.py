"""Exact integration of the switched averaging dynamics and the game value.

Within each dwell interval the system matrix is constant, so the flow is the
matrix exponential of a symmetric negative Laplacian.  Everything here works
in the eigenbasis of the per-interval matrix: propagation, the value
integral, and the backward costate recursion are all spectral, which removes
step-size error from every downstream comparison.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidMatrixError, ScheduleError
from .graph import AdversaryAction, DesignerAction, WeightedGraph, system_matrix

# Eigenvalues smaller than this in magnitude are snapped to zero so the
# consensus mode stays exact.
EIGENVALUE_ZERO_TOL = 1e-12


@lru_cache(maxsize=32)
def _leggauss(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre_nodes(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to the interval [a, b]."""
    x, w = _leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid + half * x, half * w


@dataclass(frozen=True)
class WeightFunction:
    """Positive integrable weighting k(t): constant or exponential decay."""

    kind: str = "constant"
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "exponential-decay"):
            raise ValueError(f"unknown weight function kind {self.kind!r}")
        if self.alpha < 0:
            raise ValueError("decay rate must be non-negative")

    @classmethod
    def constant(cls) -> "WeightFunction":
        return cls("constant", 0.0)

    @classmethod
    def exponential_decay(cls, alpha: float) -> "WeightFunction":
        return cls("exponential-decay", float(alpha))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.ones_like(t)
        return np.exp(-self.alpha * t)

    def tail_integral(self, t, horizon: float):
        """Closed form of the tail mass ∫_t^horizon k(s) ds."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant" or self.alpha == 0.0:
            return horizon - t
        return (np.exp(-self.alpha * t) - np.exp(-self.alpha * horizon)) / self.alpha


@dataclass(frozen=True)
class SwitchingSchedule:
    """Piecewise-constant action pairs over [0, T] with minimum dwell time."""

    breakpoints: Tuple[float, ...]
    actions: Tuple[Tuple[AdversaryAction, DesignerAction], ...]
    dwell: float

    def __init__(
        self,
        breakpoints: Sequence[float],
        actions: Sequence[Tuple[AdversaryAction, DesignerAction]],
        dwell: float,
    ):
        breakpoints = tuple(float(t) for t in breakpoints)
        actions = tuple((u, v) for u, v in actions)
        if dwell <= 0:
            raise ScheduleError("dwell time must be positive")
        if len(breakpoints) < 2:
            raise ScheduleError("schedule needs at least one interval")
        if len(actions) != len(breakpoints) - 1:
            raise ScheduleError(
                f"{len(breakpoints) - 1} intervals but {len(actions)} action pairs"
            )
        if abs(breakpoints[0]) != 0.0:
            raise ScheduleError("schedule must start at t = 0")
        for a, b in zip(breakpoints, breakpoints[1:]):
            if not b > a:
                raise ScheduleError("breakpoints must be strictly increasing")
            if b - a < dwell - 1e-12:
                raise ScheduleError(
                    f"interval [{a}, {b}] shorter than the dwell time {dwell}"
                )
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "dwell", float(dwell))

    @classmethod
    def constant(
        cls,
        horizon: float,
        u: AdversaryAction,
        v: DesignerAction,
        dwell: Optional[float] = None,
    ) -> "SwitchingSchedule":
        return cls((0.0, horizon), ((u, v),), horizon if dwell is None else dwell)

    @property
    def horizon(self) -> float:
        return self.breakpoints[-1]

    @property
    def interval_count(self) -> int:
        return len(self.actions)


def matrix_exponential_action(A: np.ndarray, t: float, x: Sequence[float]) -> np.ndarray:
    """e^{At} x by spectral decomposition of the symmetric matrix A."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise ValueError("t must be non-negative")
    scale = max(1.0, np.abs(A).max() if A.size else 1.0)
    if not np.all(np.abs(A - A.T) <= 1e-9 * scale):
        raise InvalidMatrixError("matrix is not symmetric")
    lam, Q = np.linalg.eigh(A)
    lam = np.where(np.abs(lam) < EIGENVALUE_ZERO_TOL, 0.0, lam)
    return Q @ (np.exp(lam * t) * (Q.T @ x))


class _IntervalData:
    """Spectral data for one dwell interval (internal)."""

    __slots__ = ("start", "end", "eigenvalues", "basis", "start_state", "coords", "drop_before")

    def __init__(self, start, end, eigenvalues, basis, start_state, drop_before):
        self.start = start
        self.end = end
        self.eigenvalues = eigenvalues
        self.basis = basis
        self.start_state = start_state
        self.coords = basis.T @ start_state
        # Accumulated ||x0||^2 - ||x(start)||^2, assembled from expm1 terms so
        # tiny horizons do not lose the drop to cancellation.
        self.drop_before = drop_before

    def state(self, t):
        dt = t - self.start
        return self.basis @ (np.exp(self.eigenvalues * dt) * self.coords)

    def states(self, ts: np.ndarray) -> np.ndarray:
        dt = ts - self.start
        factors = np.exp(np.outer(dt, self.eigenvalues))
        return (factors * self.coords) @ self.basis.T

    def drop(self, ts: np.ndarray) -> np.ndarray:
        """||x0||^2 - ||x(t)||^2 for t in this interval, cancellation-free."""
        dt = np.atleast_1d(np.asarray(ts, dtype=float)) - self.start
        local = -(self.coords**2) @ np.expm1(2.0 * np.outer(self.eigenvalues, dt))
        return self.drop_before + local

    def end_drop(self) -> float:
        return float(self.drop(np.array([self.end]))[0])


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Piecewise-exponential solution with per-interval spectral data."""

    schedule: SwitchingSchedule
    x0: np.ndarray
    intervals: Tuple[_IntervalData, ...]
    breakpoint_states: Tuple[np.ndarray, ...]

    @property
    def horizon(self) -> float:
        return self.schedule.horizon

    @property
    def node_count(self) -> int:
        return self.x0.shape[0]

    @property
    def average(self) -> float:
        return float(self.x0.mean())

    @property
    def mean_state(self) -> np.ndarray:
        return np.full(self.node_count, self.average)

    def _interval_index(self, t: float) -> int:
        if t < 0 or t > self.horizon + 1e-12:
            raise ValueError(f"t = {t} outside [0, {self.horizon}]")
        idx = bisect.bisect_right(self.schedule.breakpoints, t) - 1
        return min(max(idx, 0), len(self.intervals) - 1)

    def state(self, t: float) -> np.ndarray:
        return self.intervals[self._interval_index(t)].state(t)

    def states(self, ts: Sequence[float]) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.empty((ts.shape[0], self.node_count))
        for row, t in enumerate(ts):
            out[row] = self.state(float(t))
        return out

    def disagreement_drop(self, t: float) -> float:
        """||x0 - xbar||^2 - ||x(t) - xbar||^2 (the mean term cancels)."""
        k = self._interval_index(t)
        return float(self.intervals[k].drop(np.array([t]))[0])

    def deviation_norm(self, t: float) -> float:
        y = self.state(t) - self.mean_state
        return float(np.linalg.norm(y))

    def sample(self, num: int) -> Tuple[np.ndarray, np.ndarray]:
        """Uniform grid of ``num`` samples over [0, T] with the states."""
        ts = np.linspace(0.0, self.horizon, num)
        return ts, self.states(ts)


def simulate(
    graph: WeightedGraph, schedule: SwitchingSchedule, x0: Sequence[float]
) -> Trajectory:
    """Propagate the switched averaging flow exactly, interval by interval."""
    x0 = np.array(x0, dtype=float)
    if x0.shape != (graph.node_count,):
        raise ValueError(f"x0 must have length {graph.node_count}")
    intervals: List[_IntervalData] = []
    states = [x0.copy()]
    drop_so_far = 0.0
    x = x0.copy()
    for k, (u, v) in enumerate(schedule.actions):
        A = system_matrix(graph, u, v)
        lam, Q = np.linalg.eigh(A)
        lam = np.where(np.abs(lam) < EIGENVALUE_ZERO_TOL, 0.0, lam)
        data = _IntervalData(
            schedule.breakpoints[k], schedule.breakpoints[k + 1], lam, Q, x, drop_so_far
        )
        intervals.append(data)
        x = data.state(data.end)
        drop_so_far = data.end_drop()
        states.append(x.copy())
    for s in states:
        s.setflags(write=False)
    x0.setflags(write=False)
    return Trajectory(schedule, x0, tuple(intervals), tuple(states))


def utility(traj: Trajectory, k: WeightFunction, quad_nodes: int = 32) -> float:
    """Game value: time-weighted disagreement reduction over the horizon.

    Returns ∫_0^T k(t) (||x0 - xbar||^2 - ||x(t) - xbar||^2) dt, accumulated
    per dwell interval by Gauss-Legendre quadrature in spectral coordinates.
    The designer drives this up, the adversary drives it down; a trajectory
    started at consensus scores zero.
    """
    total = 0.0
    for data in traj.intervals:
        ts, w = gauss_legendre_nodes(data.start, data.end, quad_nodes)
        total += float(np.dot(w, k(ts) * data.drop(ts)))
    return total


def costate(
    traj: Trajectory,
    k: WeightFunction,
    samples_per_interval: int = 17,
    quad_nodes: int = 32,
) -> Tuple[np.ndarray, np.ndarray]:
    """Adjoint p with p' = -k (x - xbar) - A p and p(T) = 0, on a time grid.

    Integrates backward interval by interval in the interval's eigenbasis;
    the returned grid contains ``samples_per_interval`` points per interval
    (breakpoints included once) and p is continuous across breakpoints.
    """
    if samples_per_interval < 2:
        raise ValueError("need at least two samples per interval")
    xbar = traj.mean_state
    times: List[np.ndarray] = []
    values: List[np.ndarray] = []
    p_end = np.zeros(traj.node_count)
    for data in reversed(traj.intervals):
        a, b = data.start, data.end
        lam, Q = data.eigenvalues, data.basis
        p_end_s = Q.T @ p_end
        y_start_s = Q.T @ (data.start_state - xbar)
        ts = np.linspace(a, b, samples_per_interval)
        block = np.empty((ts.shape[0], traj.node_count))
        for row, t in enumerate(ts):
            nodes, weights = gauss_legendre_nodes(t, b, quad_nodes)
            # Integrand in spectral coordinates: k(s) e^{lam (2s - t - a)} y_i(a).
            expo = np.exp(np.outer(2.0 * nodes - t - a, lam))
            integral = (weights * k(nodes)) @ expo * y_start_s
            block[row] = Q @ (np.exp(lam * (b - t)) * p_end_s + integral)
        p_end = block[0]
        times.append(ts[:-1] if values else ts)
        values.append(block[:-1] if values else block)
    times.reverse()
    values.reverse()
    return np.concatenate(times), np.vstack(values)
