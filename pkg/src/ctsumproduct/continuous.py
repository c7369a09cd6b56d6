"""
Continuous-time forward/backward message passing on a binary observation record.

Within a sojourn of constant observation the forward message solves
``d alpha/dt = U alpha`` and the backward message ``d beta/dt = -U.T beta``,
where ``U`` is the generator restricted to the states consistent with the
observation.  At each observation transition the messages are carried
across by the rates connecting the two active sets.  The posterior is
``alpha * beta`` normalized pointwise, evaluated lazily at any time.

Messages are stored with a spectral shift: for a segment whose block has
dominant eigenvalue ``mu`` we propagate with ``exp((U - mu I) tau)``,
which neither underflows nor overflows on long sojourns.  Shifts and
per-segment rescaling are tracked as log offsets and cancel in the
posterior.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateSojourn, OutOfRange, ZeroBoundaryFlux, ZeroLikelihood
from .markov import (
    RateModel,
    TruncatedSubmatrix,
    eigendecompose,
    matrix_exponential,
    truncate,
)
from .simulate import ObservationTrace, grid_size

__all__ = [
    "Sojourn",
    "Propagator",
    "SegmentSolution",
    "PosteriorFunction",
    "segment",
    "forward_pass",
    "backward_pass",
    "forward_boundary",
    "backward_boundary",
    "posterior",
    "query",
    "query_many",
    "query_dense",
]

MIN_SOJOURN = 1e-12
FAST_PATH_COND = 1e6


@dataclass(frozen=True)
class Sojourn:
    start: float
    end: float
    observation_value: int
    active_set: tuple

    @property
    def length(self) -> float:
        return self.end - self.start


class Propagator:
    """
    Shifted matrix exponentials of one truncated block.

    ``forward(v, tau)`` returns ``exp((U - mu I) tau) v`` and
    ``backward(v, tau)`` returns ``exp((U - mu I).T tau) v`` where ``mu`` is
    the largest real part among the eigenvalues of ``U``.  When the block
    has a well-conditioned eigenbasis (condition number below 1e6) the
    exponentials are evaluated from the eigen-decomposition; otherwise by
    Pade scaling and squaring.  Immutable after construction.
    """

    def __init__(self, block: TruncatedSubmatrix):
        self.block = block
        U = np.asarray(block.U)
        self.spectral = eigendecompose(block)
        lam = np.asarray(self.spectral.eigenvalues)
        self.shift = float(np.max(lam.real))
        self.shifted = U - self.shift * np.eye(U.shape[0])
        self.fast = (self.spectral.diagonalizable
                     and self.spectral.condition_number < FAST_PATH_COND)
        if self.fast:
            self._lam = lam - self.shift
            self._V = self.spectral.right_vectors
            self._Vinv = self.spectral.left_vectors.T

    def _coeffs(self, v, transpose):
        # expansion coefficients of v in the eigenbasis of U (or U.T)
        if transpose:
            return self._V.T @ v
        return self._Vinv @ v

    def _expand(self, coeffs, tau, transpose):
        tau = np.asarray(tau, dtype=float)
        E = np.exp(np.multiply.outer(self._lam, tau))
        basis = self._Vinv.T if transpose else self._V
        if coeffs.ndim == 1 and tau.ndim == 1:
            out = basis @ (E * coeffs[:, None])
        else:
            out = basis @ (E * coeffs)
        return np.real(out)

    def forward(self, v, tau):
        """``exp((U - mu) tau) v``; ``tau`` may be an array, giving one column per time."""
        if self.fast:
            return self._expand(self._coeffs(v, False), tau, False)
        if np.ndim(tau):
            return np.stack([matrix_exponential(self.shifted, x) @ v for x in tau], axis=1)
        return matrix_exponential(self.shifted, tau) @ v

    def backward(self, v, tau):
        """``exp((U - mu).T tau) v``; vectorized over ``tau`` like :meth:`forward`."""
        if self.fast:
            return self._expand(self._coeffs(v, True), tau, True)
        if np.ndim(tau):
            return np.stack([matrix_exponential(self.shifted.T, x) @ v for x in tau], axis=1)
        return matrix_exponential(self.shifted.T, tau) @ v

    def step_matrix(self, dt: float) -> np.ndarray:
        return matrix_exponential(self.shifted, dt)


def _propagators(model: RateModel) -> dict:
    return {v: Propagator(truncate(model, v)) for v in (0, 1)}


@dataclass(frozen=True)
class SegmentSolution:
    """
    Forward and backward messages on one sojourn.

    The unscaled messages are::

        alpha(t) = exp(log_scale_alpha + mu (t - start)) * forward(t)
        beta(t)  = exp(log_scale_beta + mu (end - t)) * backward(t)

    with ``forward(start) = alpha0`` and ``backward(end) = betaT``, both of
    unit 1-norm.
    """
    sojourn: Sojourn
    U: TruncatedSubmatrix
    alpha0: np.ndarray
    betaT: np.ndarray
    log_scale_alpha: float
    log_scale_beta: float
    propagator: Propagator = field(repr=False, compare=False)

    @property
    def shift(self) -> float:
        return self.propagator.shift

    def forward(self, t):
        """Scaled forward message at time(s) ``t`` (columns for array ``t``)."""
        a = self.propagator.forward(self.alpha0, np.asarray(t) - self.sojourn.start)
        return np.maximum(a, 0.0)

    def backward(self, t):
        b = self.propagator.backward(self.betaT, self.sojourn.end - np.asarray(t))
        return np.maximum(b, 0.0)

    def log_normalizer(self, t):
        """``log Z(t)`` with all scale factors re-applied."""
        z = np.sum(self.forward(t) * self.backward(t), axis=0)
        with np.errstate(divide="ignore"):
            return (np.log(z) + self.log_scale_alpha + self.log_scale_beta
                    + self.shift * self.sojourn.length)

    def posterior(self, t):
        """Posterior restricted to the active set at time(s) ``t``."""
        rho = self.forward(t) * self.backward(t)
        z = np.sum(rho, axis=0)
        if np.any(~(z > 0)):
            raise ZeroLikelihood(float(np.atleast_1d(t)[np.flatnonzero(~(np.atleast_1d(z) > 0))[0]]))
        return rho / z


@dataclass(frozen=True)
class PosteriorFunction:
    """
    Piecewise description of the posterior occupancy ``p(t)`` on ``[0, T]``.

    Call it (or use :func:`query`) to evaluate at any time.
    """
    segments: tuple
    model: RateModel
    starts: tuple = field(repr=False)

    @property
    def horizon(self) -> float:
        return self.segments[-1].sojourn.end

    def locate(self, t: float) -> int:
        if not 0 <= t <= self.horizon:
            raise OutOfRange(f"t={t!r} outside [0, {self.horizon!r}]")
        return max(bisect.bisect_right(self.starts, t) - 1, 0)

    def __call__(self, t):
        if np.ndim(t):
            return query_many(self, t)
        return query(self, t)


def segment(trace: ObservationTrace, model: RateModel) -> List[Sojourn]:
    """
    Split ``[0, T]`` into sojourns of constant observation.

    Raises
    ------
    DegenerateSojourn
        If any sojourn is shorter than 1e-12.

    """
    edges = np.concatenate([[0.0], trace.transition_times, [trace.horizon]])
    lengths = np.diff(edges)
    if np.any(lengths < MIN_SOJOURN):
        k = int(np.flatnonzero(lengths < MIN_SOJOURN)[0])
        raise DegenerateSojourn(
            f"sojourn [{edges[k]!r}, {edges[k + 1]!r}] is shorter than {MIN_SOJOURN}")
    out = []
    y = trace.initial_value
    for a, b in zip(edges[:-1], edges[1:]):
        out.append(Sojourn(float(a), float(b), y, model.active_set(y)))
        y = 1 - y
    return out


def forward_boundary(model: RateModel, old_active: Sequence[int], new_active: Sequence[int],
                     alpha_before, time: float = np.nan) -> Tuple[np.ndarray, float]:
    """
    Carry the forward message across an observation transition.

    ``alpha_after[j]`` is proportional to ``sum_i W[j, i] alpha_before[i]``
    over ``i`` in the old active set, normalized over ``j`` in the new one.
    Returns the normalized vector and the normalizer.

    Raises
    ------
    ZeroBoundaryFlux
        If no probability flows into the new active set.

    """
    W = np.asarray(model.W)
    flux = W[np.ix_(list(new_active), list(old_active))] @ np.asarray(alpha_before)
    s = flux.sum()
    if not s > 0:
        raise ZeroBoundaryFlux(time)
    return flux / s, float(s)


def backward_boundary(model: RateModel, prev_active: Sequence[int], next_active: Sequence[int],
                      beta_after, time: float = np.nan) -> Tuple[np.ndarray, float]:
    """
    Carry the backward message across an observation transition.

    ``beta_before[j]`` is proportional to ``sum_i W[i, j] beta_after[i]``
    over ``i`` in the later active set, normalized over ``j`` in the
    earlier one.
    """
    W = np.asarray(model.W)
    flux = W[np.ix_(list(next_active), list(prev_active))].T @ np.asarray(beta_after)
    s = flux.sum()
    if not s > 0:
        raise ZeroBoundaryFlux(time)
    return flux / s, float(s)


def forward_pass(model: RateModel, sojourns: Sequence[Sojourn],
                 propagators: Optional[dict] = None) -> List[Tuple[np.ndarray, float]]:
    """
    Forward message at the start of each sojourn.

    Returns a list of ``(alpha0, log_scale)`` with ``alpha0`` of unit sum
    over the sojourn's active set.

    Raises
    ------
    ZeroBoundaryFlux
        If no rate carries the forward message into the next active set.

    """
    props = propagators or _propagators(model)
    first = sojourns[0]
    a = np.asarray(model.pi)[list(first.active_set)]
    s = a.sum()
    if not s > 0:
        raise ZeroLikelihood(0.0, "stationary distribution has no mass on the initial observation")
    a = a / s
    log_scale = float(np.log(s))
    out = [(a, log_scale)]
    for prev, nxt in zip(sojourns[:-1], sojourns[1:]):
        prop = props[prev.observation_value]
        end = np.maximum(prop.forward(a, prev.length), 0.0)
        s = end.sum()
        if not s > 0:
            raise ZeroBoundaryFlux(prev.end, f"forward message vanished before t={prev.end!r}")
        log_scale += prop.shift * prev.length + np.log(s)
        a, s = forward_boundary(model, prev.active_set, nxt.active_set, end / s, prev.end)
        log_scale += float(np.log(s))
        out.append((a, log_scale))
    return out


def backward_pass(model: RateModel, sojourns: Sequence[Sojourn],
                  propagators: Optional[dict] = None) -> List[Tuple[np.ndarray, float]]:
    """
    Backward message at the end of each sojourn, as ``(betaT, log_scale)``.

    The last sojourn starts from the uniform distribution on its active set.

    Raises
    ------
    ZeroBoundaryFlux
        If no rate connects a state of the earlier active set to the later one.

    """
    props = propagators or _propagators(model)
    last = sojourns[-1]
    k = len(last.active_set)
    b = np.full(k, 1.0 / k)
    log_scale = float(np.log(k))
    out = [(b, log_scale)]
    for prev, nxt in zip(sojourns[-2::-1], sojourns[:0:-1]):
        prop = props[nxt.observation_value]
        start = np.maximum(prop.backward(b, nxt.length), 0.0)
        s = start.sum()
        if not s > 0:
            raise ZeroBoundaryFlux(nxt.start, f"backward message vanished after t={nxt.start!r}")
        log_scale += prop.shift * nxt.length + np.log(s)
        b, s = backward_boundary(model, prev.active_set, nxt.active_set, start / s, nxt.start)
        log_scale += float(np.log(s))
        out.append((b, log_scale))
    return out[::-1]


def posterior(model: RateModel, trace: ObservationTrace) -> PosteriorFunction:
    """Run both passes and assemble the lazily evaluated posterior."""
    sojourns = segment(trace, model)
    props = _propagators(model)
    fwd = forward_pass(model, sojourns, props)
    bwd = backward_pass(model, sojourns, props)
    segs = []
    for soj, (a0, la), (bT, lb) in zip(sojourns, fwd, bwd):
        prop = props[soj.observation_value]
        segs.append(SegmentSolution(soj, prop.block, a0, bT, la, lb, prop))
    return PosteriorFunction(tuple(segs), model, tuple(s.start for s in sojourns))


def _embed(model, active_set, p):
    full = np.zeros((model.n,) + p.shape[1:])
    full[list(active_set)] = p
    return full


def query(pf: PosteriorFunction, t: float) -> np.ndarray:
    """
    Posterior over all ``n`` states at time ``t``.

    Sojourns are closed on the left, so ``t`` equal to a transition time
    uses the sojourn that begins there.
    """
    seg = pf.segments[pf.locate(t)]
    rho = seg.forward(t) * seg.backward(t)
    z = rho.sum()
    if not z > 0:
        raise ZeroLikelihood(t)
    return _embed(pf.model, seg.sojourn.active_set, rho / z)


def query_many(pf: PosteriorFunction, times) -> np.ndarray:
    """Posterior at each of ``times`` as a ``(len(times), n)`` array.

    Each point is evaluated independently, exactly as :func:`query` does,
    with the exponentials batched per sojourn.
    """
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < 0 or times.max() > pf.horizon):
        raise OutOfRange(f"query times outside [0, {pf.horizon!r}]")
    idx = np.searchsorted(np.asarray(pf.starts), times, side="right") - 1
    idx = np.maximum(idx, 0)
    out = np.zeros((times.size, pf.model.n))
    for k in np.unique(idx):
        sel = idx == k
        seg = pf.segments[k]
        p = seg.posterior(times[sel])
        out[np.ix_(sel, list(seg.sojourn.active_set))] = p.T
    return out


def query_dense(pf: PosteriorFunction, grid_dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Posterior on the grid ``0, grid_dt, ..., K grid_dt``.

    Within each sojourn the messages are stepped with a cached
    ``exp(U grid_dt)``, so the cost is one matrix-vector product per grid
    point and direction.

    Returns
    -------
    times : (K + 1,) ndarray
    probs : (K + 1, n) ndarray

    """
    if not grid_dt > 0:
        raise ValueError(f"grid_dt must be positive, got {grid_dt!r}")
    K = grid_size(pf.horizon, grid_dt)
    times = grid_dt * np.arange(K + 1)
    idx = np.searchsorted(np.asarray(pf.starts), times, side="right") - 1
    idx = np.maximum(idx, 0)
    probs = np.zeros((K + 1, pf.model.n))
    steps = {}
    for k in np.unique(idx):
        pts = np.flatnonzero(idx == k)
        seg = pf.segments[k]
        v = seg.sojourn.observation_value
        if v not in steps:
            E = seg.propagator.step_matrix(grid_dt)
            steps[v] = (E, E.T.copy())
        E, Et = steps[v]
        m = pts.size
        A = np.empty((seg.U.size, m))
        B = np.empty((seg.U.size, m))
        a = seg.forward(times[pts[0]])
        A[:, 0] = a / a.sum()
        for j in range(1, m):
            a = E @ A[:, j - 1]
            A[:, j] = a / a.sum()
        b = seg.backward(times[pts[-1]])
        B[:, -1] = b / b.sum()
        for j in range(m - 2, -1, -1):
            b = Et @ B[:, j + 1]
            B[:, j] = b / b.sum()
        rho = np.maximum(A, 0.0) * np.maximum(B, 0.0)
        probs[np.ix_(pts, list(seg.sojourn.active_set))] = (rho / rho.sum(axis=0)).T
    return times, probs
