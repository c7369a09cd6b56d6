"""
Convergence and timing study: discrete-time smoothing against the
continuous-time posterior as the sampling step shrinks.
"""
from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .continuous import posterior, query, query_many
from .discrete import discrete_transition_matrix, forward_backward
from .errors import DegenerateSojourn, InsufficientGrid, ZeroBoundaryFlux, ZeroLikelihood
from .export import format_float
from .markov import RateModel
from .simulate import gillespie, observe, reconstruct, sample

__all__ = [
    "DEFAULT_DT_LIST",
    "ConvergenceReport",
    "TrialResult",
    "loglog_fit",
    "run_trial",
    "run_convergence",
]

DEFAULT_DT_LIST = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
MAX_RERUNS = 100


@dataclass
class TrialResult:
    trial: int
    seed: int
    reruns: int
    errors: List[float]
    discrete_seconds: List[float]


@dataclass
class ConvergenceReport:
    """
    Outcome of :func:`run_convergence`.

    ``errors[i][k]`` is the largest absolute posterior difference over grid
    points and states for ``dt_values[i]`` in trial ``k``.  Timings are in
    seconds: ``discrete_seconds`` is the mean wall time of one discrete
    smoothing run, ``query_seconds`` the time of a single continuous query.
    """
    dt_values: List[float]
    errors: List[List[float]]
    mean: List[float]
    std: List[float]
    slope: float
    intercept: float
    discrete_seconds: List[float]
    query_seconds: List[float]
    discrete_exponent: float
    horizon: float
    n_trials: int
    seed: int
    seeds: List[int]
    reruns: int
    exact_trace: bool = False
    model: dict = field(default_factory=dict)
    version: str = ""

    def to_json(self) -> dict:
        return asdict(self)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dt", "mean_error", "std_error", "discrete_seconds", "query_seconds"])
            for row in zip(self.dt_values, self.mean, self.std,
                           self.discrete_seconds, self.query_seconds):
                w.writerow([format_float(x) for x in row])


def loglog_fit(x, y):
    """Least-squares ``(slope, intercept)`` of ``log y`` against ``log x``."""
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def check_dt_list(dt_list: Sequence[float]):
    dts = [float(x) for x in dt_list]
    if len(dts) < 3 or any(not x > 0 for x in dts):
        raise InsufficientGrid("need at least three positive dt values")
    if max(dts) / min(dts) < 100 * (1 - 1e-9):
        raise InsufficientGrid("dt values must span at least two decades")
    return dts


def run_trial(model: RateModel, horizon: float, dt_list: Sequence[float], seed: int,
              trial: int = 0, seed_stride: int = 1, exact_trace: bool = False) -> TrialResult:
    """
    Simulate one trace and record the discrete/continuous discrepancy per ``dt``.

    Both algorithms see the same sampled record: the continuous one gets
    the trace rebuilt from the samples by :func:`reconstruct`.  With
    ``exact_trace`` the continuous algorithm gets the simulated trace
    instead, so sojourns shorter than ``dt`` that fall between samples
    show up as O(1) discrepancies.

    Traces the algorithms reject (zero likelihood, zero boundary flux or a
    degenerate sojourn) are redrawn with the seed advanced by
    ``seed_stride``; the number of redraws is reported.
    """
    s = seed
    for attempt in range(MAX_RERUNS + 1):
        try:
            traj = gillespie(model, horizon, "stationary", s)
            trace = observe(traj, model)
            exact = posterior(model, trace) if exact_trace else None
            errs, secs = [], []
            for dt in dt_list:
                obs = sample(trace, dt)
                t0 = time.perf_counter()
                dp = forward_backward(discrete_transition_matrix(model, dt), obs, model)
                secs.append(time.perf_counter() - t0)
                pf = exact if exact is not None else posterior(model, reconstruct(obs))
                pc = query_many(pf, dp.times)
                errs.append(float(np.max(np.abs(pc - dp.probs))))
            return TrialResult(trial, s, attempt, errs, secs)
        except (ZeroLikelihood, ZeroBoundaryFlux, DegenerateSojourn):
            s += seed_stride
    raise RuntimeError(f"trial {trial}: no usable trace after {MAX_RERUNS} reruns")


def _time_queries(model, horizon, dt_list, seed, n_queries, repeats):
    trace = observe(gillespie(model, horizon, "stationary", seed), model)
    pf = posterior(model, trace)
    out = []
    for dt in dt_list:
        grid = dt * np.arange(int(np.floor(horizon / dt * (1 + 1e-12))) + 1)
        pick = grid[np.linspace(0, grid.size - 1, n_queries).astype(int)]
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            for t in pick:
                query(pf, t)
            best = min(best, (time.perf_counter() - t0) / n_queries)
        out.append(best)
    return out


def run_convergence(model: RateModel, horizon: float = 10.0, n_trials: int = 40,
                    dt_list: Sequence[float] = DEFAULT_DT_LIST, seed: int = 0,
                    workers: Optional[int] = None, n_queries: int = 200,
                    timing_repeats: int = 3, model_info: Optional[dict] = None,
                    exact_trace: bool = False) -> ConvergenceReport:
    """
    Ensemble comparison of the two algorithms over a list of sampling steps.

    Trial ``k`` uses seed ``seed + k``; rejected traces are redrawn with the
    seed advanced by ``n_trials``.  With ``workers`` > 1 trials run in
    separate processes, in which case the discrete timings are still taken
    from the trials but are noisier; query timing is always single-threaded.

    Raises
    ------
    InsufficientGrid
        If ``dt_list`` has fewer than three values or spans less than two decades.

    """
    from . import __version__

    dts = check_dt_list(dt_list)
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    args = [(model, horizon, dts, seed + k, k, n_trials, exact_trace) for k in range(n_trials)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(run_trial, *zip(*args)))
    else:
        results = [run_trial(*a) for a in args]
    results.sort(key=lambda r: r.trial)

    errors = np.array([r.errors for r in results]).T
    mean = errors.mean(axis=1)
    std = errors.std(axis=1, ddof=1) if n_trials > 1 else np.zeros(len(dts))
    slope, intercept = loglog_fit(dts, mean)

    disc = np.array([r.discrete_seconds for r in results]).mean(axis=0)
    qsec = _time_queries(model, horizon, dts, seed, n_queries, timing_repeats)
    exponent, _ = loglog_fit(1.0 / np.asarray(dts), disc)

    return ConvergenceReport(
        dt_values=dts,
        errors=errors.tolist(),
        mean=mean.tolist(),
        std=std.tolist(),
        slope=slope,
        intercept=intercept,
        discrete_seconds=disc.tolist(),
        query_seconds=list(qsec),
        discrete_exponent=float(exponent),
        horizon=float(horizon),
        n_trials=int(n_trials),
        seed=int(seed),
        seeds=[r.seed for r in results],
        reruns=int(sum(r.reruns for r in results)),
        exact_trace=bool(exact_trace),
        model=model_info or {},
        version=__version__,
    )
