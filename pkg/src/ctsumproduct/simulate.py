"""
Exact simulation of the latent jump process and its binary observable.

Random numbers come from numpy's Philox counter-based bit generator, which
produces the same stream on every platform for a given seed.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import AbsorbingStateWarning, EmptyGrid
from .markov import RateModel

__all__ = [
    "Trajectory",
    "ObservationTrace",
    "SampledObservations",
    "make_rng",
    "gillespie",
    "observe",
    "sample",
    "sample_trajectory",
    "grid_size",
    "reconstruct",
]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def _frozen_array(x, dtype):
    a = np.array(x, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Trajectory:
    """
    Piecewise-constant path of the latent state on ``[0, horizon]``.

    ``jump_targets[k]`` is the state entered at ``jump_times[k]``.
    ``absorbed`` is set when the path reached a state with no way out
    before the horizon.
    """
    initial_state: int
    jump_times: np.ndarray
    jump_targets: np.ndarray
    horizon: float
    absorbed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "jump_times", _frozen_array(self.jump_times, float))
        object.__setattr__(self, "jump_targets", _frozen_array(self.jump_targets, int))

    def state_at(self, t):
        """State occupied at time(s) ``t`` (right-continuous)."""
        k = np.searchsorted(self.jump_times, t, side="right")
        states = np.concatenate([[self.initial_state], self.jump_targets])
        return states[k]

    def to_json(self) -> dict:
        return {
            "initial": int(self.initial_state),
            "times": [float(x) for x in self.jump_times],
            "targets": [int(x) for x in self.jump_targets],
            "horizon": float(self.horizon),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Trajectory":
        return cls(int(d["initial"]), d["times"], d["targets"], float(d["horizon"]))


@dataclass(frozen=True)
class ObservationTrace:
    """
    Binary observation ``Y(t)`` on ``[0, horizon]``.

    ``Y`` starts at ``initial_value`` and flips at each of
    ``transition_times``; it is right-continuous.
    """
    initial_value: int
    transition_times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = _frozen_array(self.transition_times, float)
        if self.initial_value not in (0, 1):
            raise ValueError(f"initial value must be 0 or 1, got {self.initial_value!r}")
        if times.size and (np.any(np.diff(times) <= 0) or times[0] <= 0
                           or times[-1] >= self.horizon):
            raise ValueError("transition times must be strictly increasing in (0, horizon)")
        object.__setattr__(self, "transition_times", times)
        object.__setattr__(self, "horizon", float(self.horizon))

    def value_at(self, t):
        k = np.searchsorted(self.transition_times, t, side="right")
        return (self.initial_value + k) % 2

    def to_json(self) -> dict:
        return {
            "y0": int(self.initial_value),
            "times": [float(x) for x in self.transition_times],
            "horizon": float(self.horizon),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ObservationTrace":
        return cls(int(d["y0"]), d["times"], float(d["horizon"]))


@dataclass(frozen=True)
class SampledObservations:
    """
    Observation values on the uniform grid ``dt, 2 dt, ..., K dt``.

    ``initial`` holds ``Y(0)``, which the discrete algorithm uses to
    condition its starting distribution.
    """
    dt: float
    values: np.ndarray
    initial: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, np.int8))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, len(self.values) + 1)

    def with_initial(self) -> np.ndarray:
        """Values on ``0, dt, ..., K dt`` including ``Y(0)``."""
        return np.concatenate([[self.initial], self.values]).astype(np.int8)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "y"])
            w.writerow([repr(0.0), int(self.initial)])
            for t, y in zip(self.times, self.values):
                w.writerow([f"{t:.17g}", int(y)])

    @classmethod
    def read_csv(cls, path) -> "SampledObservations":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        t = np.array([float(r["t"]) for r in rows])
        y = np.array([int(r["y"]) for r in rows])
        if t.size < 2 or t[0] != 0.0:
            raise ValueError("sampled CSV must start at t=0 and hold at least one step")
        return cls(dt=float(t[1] - t[0]), values=y[1:], initial=int(y[0]))


def gillespie(model: RateModel, horizon: float,
              initial: Union[int, str] = "stationary", seed: int = 0) -> Trajectory:
    """
    Exact stochastic simulation of the jump process on ``[0, horizon]``.

    Holding times in state ``i`` are exponential with rate ``-W[i, i]``;
    the next state is ``j`` with probability ``W[j, i] / -W[i, i]``.

    Parameters
    ----------
    model : RateModel
    horizon : float
        Simulation length, > 0.
    initial : int or "stationary"
        Starting state, or draw it from the stationary distribution.
    seed : int
        Seed for the Philox generator; identical seeds give bit-identical
        trajectories.

    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    rng = make_rng(seed)
    W = np.asarray(model.W)
    n = model.n
    if isinstance(initial, str):
        if initial != "stationary":
            raise ValueError(f"unknown initial specification {initial!r}")
        state = int(np.searchsorted(np.cumsum(model.pi), rng.random() * model.pi.sum(),
                                    side="right"))
        state = min(state, n - 1)
    else:
        state = int(initial)
        if not 0 <= state < n:
            raise ValueError(f"initial state {state} out of range")

    exit_rates = -np.diag(W)
    jump_cdf = []
    for i in range(n):
        col = W[:, i].copy()
        col[i] = 0.0
        jump_cdf.append(np.cumsum(col))

    x0 = state
    times, targets = [], []
    t = 0.0
    absorbed = False
    while True:
        rate = exit_rates[state]
        if rate <= 0:
            absorbed = True
            break
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        cdf = jump_cdf[state]
        nxt = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        # guard against round-off selecting a zero-rate tail state
        while nxt >= n or W[nxt, state] <= 0 or nxt == state:
            nxt = (nxt - 1) % n
        times.append(t)
        targets.append(nxt)
        state = nxt
    if absorbed:
        warnings.warn(f"absorbing state {state} reached at t={t!r} before horizon {horizon!r}",
                      AbsorbingStateWarning, stacklevel=2)
    return Trajectory(x0, times, targets, float(horizon), absorbed)


def observe(trajectory: Trajectory, model: RateModel) -> ObservationTrace:
    """Binary observable of a trajectory: 1 while the state is in the observable set."""
    m = model.indicator()
    states = np.concatenate([[trajectory.initial_state], trajectory.jump_targets])
    y = m[states]
    flips = np.flatnonzero(np.diff(y) != 0)
    times = trajectory.jump_times[flips]
    # a jump landing exactly on the horizon cannot start a sojourn
    times = times[times < trajectory.horizon]
    return ObservationTrace(int(y[0]), times, trajectory.horizon)


def grid_size(horizon: float, dt: float) -> int:
    """Largest ``K`` with ``K * dt <= horizon`` (up to round-off in the ratio)."""
    return int(np.floor(horizon / dt * (1 + 1e-12)))


def sample(trace: ObservationTrace, dt: float) -> SampledObservations:
    """Sample ``Y(k dt)`` for ``k = 1..K`` with ``K dt <= T``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    K = grid_size(trace.horizon, dt)
    if K < 1:
        raise EmptyGrid(f"dt={dt!r} exceeds horizon {trace.horizon!r}")
    t = dt * np.arange(1, K + 1)
    return SampledObservations(dt=float(dt), values=trace.value_at(t),
                               initial=int(trace.initial_value))


def sample_trajectory(trajectory: Trajectory, model: RateModel, dt: float) -> SampledObservations:
    """Sample the latent path on the grid and apply the indicator."""
    K = grid_size(trajectory.horizon, dt)
    if K < 1:
        raise EmptyGrid(f"dt={dt!r} exceeds horizon {trajectory.horizon!r}")
    m = model.indicator()
    t = dt * np.arange(1, K + 1)
    return SampledObservations(dt=float(dt), values=m[trajectory.state_at(t)],
                               initial=int(m[trajectory.initial_state]))


def reconstruct(samples: SampledObservations) -> ObservationTrace:
    """
    Observation trace implied by a sampled record.

    Each value is held from its sample time until the next sample, so a
    change between samples ``k - 1`` and ``k`` is placed at ``k * dt``.  The
    horizon is ``(K + 1/2) * dt`` so a change at the last sample still opens
    a sojourn of positive length while the sampling grid is unchanged;
    sampling the result with the same ``dt`` returns ``samples`` exactly.
    """
    y = samples.with_initial()
    k = np.flatnonzero(np.diff(y) != 0) + 1
    return ObservationTrace(int(y[0]), samples.dt * k, samples.dt * (len(y) - 0.5))


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj.to_json(), fh, indent=1)
        fh.write("\n")
