"""
Discrete-time forward/backward smoothing on a uniformly sampled binary record.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroLikelihood
from .markov import RateModel, matrix_exponential
from .simulate import SampledObservations

__all__ = ["DiscretePosterior", "discrete_transition_matrix", "forward_backward", "smooth"]


@dataclass(frozen=True)
class DiscretePosterior:
    """
    Smoothed occupancy probabilities on the grid ``0, dt, ..., K dt``.

    Attributes
    ----------
    dt : float
    probs : (K + 1, n) ndarray
        Row ``k`` is the posterior at ``k * dt``.
    logZ : (K + 1,) ndarray
        Log of the unscaled normalizer ``sum(alpha_k * beta_k)`` at each
        step; constant in ``k`` up to round-off.

    """
    dt: float
    probs: np.ndarray
    logZ: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.probs.shape[0])


def discrete_transition_matrix(model_or_W, dt: float) -> np.ndarray:
    """Column-stochastic ``P = exp(W dt)`` of the chain sampled every ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    W = model_or_W.W if isinstance(model_or_W, RateModel) else model_or_W
    return matrix_exponential(W, dt)


def forward_backward(P, observations: SampledObservations, model: RateModel,
                     rescale: bool = True) -> DiscretePosterior:
    """
    Posterior state occupancy given the sampled binary observations.

    The forward message starts from the stationary distribution masked to
    the states consistent with ``Y(0)``; each step multiplies by ``P`` and
    masks with the observation.  The backward message starts at all ones.
    Both are renormalized to unit sum each step unless ``rescale`` is off,
    with the log factors kept in ``logZ``.

    Raises
    ------
    ZeroLikelihood
        If the forward message vanishes, i.e. the observed sequence is
        impossible under ``P``.

    """
    y = observations.with_initial()
    if np.any((y != 0) & (y != 1)):
        raise ValueError("observation values must be 0 or 1")
    ind = model.indicator().astype(float)
    masks = np.stack([1 - ind, ind])
    return smooth(P, masks, y, np.asarray(model.pi), observations.dt, rescale=rescale)


def smooth(P, masks, labels, initial, dt: float = 1.0,
           rescale: bool = True) -> DiscretePosterior:
    """
    Forward/backward smoothing with evidence given as state masks.

    Parameters
    ----------
    P : (n, n) ndarray
        Column-stochastic transition matrix.
    masks : (m, n) ndarray
        Distinct evidence vectors; ``masks[labels[k]]`` is the observation
        message at step ``k``.
    labels : (K + 1,) int array
        Mask index for steps ``0..K``.
    initial : (n,) ndarray
        Prior at step 0, multiplied by the step-0 mask.
    dt : float
        Grid spacing, used only for times in the result and error messages.

    """
    P = np.asarray(P, dtype=float)
    masks = np.atleast_2d(np.asarray(masks, dtype=float))
    n = P.shape[0]
    if P.shape != (n, n) or masks.shape[1] != n or np.shape(initial) != (n,):
        raise ValueError("transition matrix, masks and prior dimensions disagree")
    y = np.asarray(labels)
    K = len(y) - 1

    fwd = [m[:, None] * P for m in masks]
    bwd = [P.T * m[None, :] for m in masks]

    alpha = np.empty((K + 1, n))
    beta = np.empty((K + 1, n))
    log_a = np.zeros(K + 1)
    log_b = np.zeros(K + 1)

    a = np.asarray(initial, dtype=float) * masks[y[0]]
    s = a.sum()
    if not s > 0:
        raise ZeroLikelihood(0.0, "prior has no mass on the initial observation")
    if rescale:
        a = a / s
        log_a[0] = np.log(s)
    alpha[0] = a
    for k in range(1, K + 1):
        a = fwd[y[k]] @ a
        s = a.sum()
        if not s > 0:
            raise ZeroLikelihood(k * dt)
        if rescale:
            a = a / s
            log_a[k] = log_a[k - 1] + np.log(s)
        alpha[k] = a

    b = np.ones(n)
    if rescale:
        b = b / n
        log_b[K] = np.log(n)
    beta[K] = b
    for k in range(K - 1, -1, -1):
        b = bwd[y[k + 1]] @ b
        s = b.sum()
        if not s > 0:
            raise ZeroLikelihood(k * dt)
        if rescale:
            b = b / s
            log_b[k] = log_b[k + 1] + np.log(s)
        beta[k] = b

    rho = alpha * beta
    z = rho.sum(axis=1)
    if np.any(~(z > 0)):
        k = int(np.flatnonzero(~(z > 0))[0])
        raise ZeroLikelihood(k * dt)
    probs = rho / z[:, None]
    return DiscretePosterior(dt=float(dt), probs=probs, logZ=np.log(z) + log_a + log_b)
