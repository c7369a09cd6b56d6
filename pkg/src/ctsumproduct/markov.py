"""
Rate models, truncated submatrices and the small dense linear algebra they need.

Generators use the column convention: ``W[j, i]`` is the rate of jumping
from state ``i`` to state ``j`` and every column sums to zero.  State
indices in this API are 0-based.

"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    ColumnSumNonzero,
    ConvergenceFailure,
    EmptyObservableSet,
    FullObservableSet,
    InvalidGenerator,
    NegativeOffDiagonal,
    NonFinite,
    NonIrreducible,
)

__all__ = [
    "RateModel",
    "TruncatedSubmatrix",
    "SpectralData",
    "validate_generator",
    "stationary_distribution",
    "truncate",
    "matrix_exponential",
    "eigendecompose",
]

MAX_STATES = 64
COLUMN_SUM_ATOL = 1e-12
NULLSPACE_RTOL = 1e-10
DISTINCT_RTOL = 1e-9
DEFECTIVE_COND = 1e8


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RateModel:
    """
    A validated continuous-time Markov generator with a binary observable.

    Build instances with :func:`validate_generator`; the constructor does
    not check its inputs.

    Attributes
    ----------
    W : (n, n) ndarray
        Column generator.
    observable_set : tuple of int
        Sorted states whose occupancy produces observation 1.
    pi : (n,) ndarray
        Stationary distribution.
    labels : tuple of str
        State names, ``"1"..."n"`` by default.

    """
    W: np.ndarray
    observable_set: tuple
    pi: np.ndarray
    labels: tuple = ()

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def hidden_set(self) -> tuple:
        obs = set(self.observable_set)
        return tuple(i for i in range(self.n) if i not in obs)

    def indicator(self) -> np.ndarray:
        """Observation value of each state as an int array."""
        m = np.zeros(self.n, dtype=int)
        m[list(self.observable_set)] = 1
        return m

    def active_set(self, observation_value: int) -> tuple:
        if observation_value == 1:
            return self.observable_set
        if observation_value == 0:
            return self.hidden_set
        raise ValueError(f"observation value must be 0 or 1, got {observation_value!r}")


@dataclass(frozen=True)
class TruncatedSubmatrix:
    """Block of ``W`` on the states consistent with one observation value."""
    active_set: tuple
    U: np.ndarray
    observation_value: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.active_set)


@dataclass(frozen=True)
class SpectralData:
    """
    Eigen-decomposition of a small dense matrix.

    ``right_vectors[:, i]`` and ``left_vectors[:, i]`` pair with
    ``eigenvalues[i]`` and are scaled so that
    ``left_vectors.T @ right_vectors`` is the identity when the matrix is
    diagonalizable.
    """
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    diagonalizable: bool
    distinct_count: int
    condition_number: float = field(default=np.inf)


def validate_generator(raw_matrix, observable_set: Sequence[int],
                       labels: Optional[Sequence[str]] = None) -> RateModel:
    """
    Check a generator and observable set and return a :class:`RateModel`.

    Parameters
    ----------
    raw_matrix : array_like, shape (n, n)
        Column generator, ``raw_matrix[j, i]`` the rate from ``i`` to ``j``.
    observable_set : sequence of int
        0-based indices of the states observed as 1.
    labels : sequence of str, optional
        State names.

    Raises
    ------
    NegativeOffDiagonal, ColumnSumNonzero, EmptyObservableSet,
    FullObservableSet, NonIrreducible, NonFinite, InvalidGenerator

    """
    W = np.array(raw_matrix, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InvalidGenerator(f"generator must be square, got shape {W.shape}")
    n = W.shape[0]
    if not 2 <= n <= MAX_STATES:
        raise InvalidGenerator(f"state count must be in [2, {MAX_STATES}], got {n}")
    if not np.all(np.isfinite(W)):
        raise NonFinite("generator contains non-finite entries")

    off = W - np.diag(np.diag(W))
    if np.any(off < 0):
        j, i = np.argwhere(off < 0)[0]
        raise NegativeOffDiagonal(f"negative rate {W[j, i]!r} at ({j}, {i})")
    sums = W.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums) > COLUMN_SUM_ATOL)
    if bad.size:
        raise ColumnSumNonzero(int(bad[0]), float(sums[bad[0]]))

    obs = sorted(set(int(i) for i in observable_set))
    if any(i < 0 or i >= n for i in obs):
        raise InvalidGenerator(f"observable indices out of range for n={n}: {obs}")
    if not obs:
        raise EmptyObservableSet("observable set is empty")
    if len(obs) == n:
        raise FullObservableSet("observable set covers every state")

    if labels is None:
        labels = tuple(str(i + 1) for i in range(n))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise InvalidGenerator("labels must be unique and one per state")

    pi = _null_vector(W)
    return RateModel(W=_freeze(W), observable_set=tuple(obs), pi=_freeze(pi),
                     labels=labels)


def _null_vector(W):
    scale = np.linalg.norm(W, np.inf)
    if scale == 0:
        raise NonIrreducible("zero generator has no unique stationary distribution")
    _, s, vh = np.linalg.svd(W)
    if s[-2] < NULLSPACE_RTOL * scale:
        raise NonIrreducible(
            f"null space of the generator is not one-dimensional "
            f"(second smallest singular value {s[-2]:.3e})")
    v = vh[-1]
    v = v / v.sum()
    # entries are nonnegative up to round-off
    v = np.where(v < 0, 0.0, v)
    v = v / v.sum()
    if np.linalg.norm(W @ v, np.inf) > NULLSPACE_RTOL * scale:
        raise NonIrreducible("stationary vector failed the residual check")
    return v


def stationary_distribution(model: RateModel) -> np.ndarray:
    """Stationary distribution ``pi`` with ``W @ pi = 0`` and ``sum(pi) = 1``."""
    return _null_vector(np.asarray(model.W))


def truncate(model: RateModel, observation_value: int) -> TruncatedSubmatrix:
    """
    Restrict ``W`` to the states consistent with ``observation_value``.

    The diagonal of the block keeps the full outflow of each state, so
    columns of the block sum to minus the rate of leaving the active set.
    """
    active = model.active_set(observation_value)
    idx = np.asarray(active)
    U = model.W[np.ix_(idx, idx)]
    return TruncatedSubmatrix(active_set=tuple(active), U=_freeze(U),
                              observation_value=observation_value)


def matrix_exponential(M, t: float = 1.0) -> np.ndarray:
    """
    ``exp(M * t)`` by scaling and squaring with a degree-13 Pade approximant.

    Raises
    ------
    NonFinite
        If ``M`` or ``t`` is not finite.

    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)) or not np.isfinite(t):
        raise NonFinite("matrix exponential of non-finite input")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if t == 0:
        return np.eye(M.shape[0])
    return scipy.linalg.expm(M * t)


def eigendecompose(U) -> SpectralData:
    """
    Eigenvalues with biorthogonal left and right eigenvectors.

    Accepts a :class:`TruncatedSubmatrix` or a square array.  The result is
    flagged non-diagonalizable when eigenvalues coincide to within
    ``1e-9 * ||U||_inf`` or the eigenvector matrix has condition number
    above ``1e8``.
    """
    M = np.asarray(U.U if isinstance(U, TruncatedSubmatrix) else U, dtype=float)
    k = M.shape[0]
    try:
        lam, wl, vr = scipy.linalg.eig(M, left=True, right=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc

    order = np.lexsort((lam.imag, lam.real))[::-1]
    lam, wl, vr = lam[order], wl[:, order], vr[:, order]
    if np.all(np.abs(lam.imag) == 0):
        lam = lam.real
        wl, vr = wl.real, vr.real

    scale = max(np.linalg.norm(M, np.inf), np.finfo(float).tiny)
    tol = DISTINCT_RTOL * scale
    distinct = []
    for x in lam:
        if all(abs(x - y) > tol for y in distinct):
            distinct.append(x)
    repeated = len(distinct) < k

    with np.errstate(all="ignore"):
        cond = np.linalg.cond(vr)
    if not np.isfinite(cond):
        cond = np.inf
    diagonalizable = (not repeated) and cond <= DEFECTIVE_COND
    if repeated and k > 1:
        # A repeated eigenvalue can still have a full eigenbasis
        # (e.g. multiples of the identity or c*J - d*I); accept it only if
        # the eigenvectors are well conditioned and reconstruct the matrix.
        if cond <= DEFECTIVE_COND:
            recon = vr @ np.diag(lam) @ np.linalg.inv(vr)
            diagonalizable = np.linalg.norm(recon - M, np.inf) <= 1e-9 * scale

    if diagonalizable:
        # biorthogonal scaling: rows of inv(V) are the left vectors
        wl = np.linalg.inv(vr).T
    else:
        d = np.sum(wl * vr, axis=0)
        with np.errstate(all="ignore"):
            wl = np.where(np.abs(d) > 0, wl / np.where(d == 0, 1, d), wl)
    return SpectralData(eigenvalues=lam, right_vectors=vr, left_vectors=wl,
                        diagonalizable=bool(diagonalizable),
                        distinct_count=len(distinct), condition_number=float(cond))
