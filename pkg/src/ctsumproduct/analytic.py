"""
Closed-form posteriors for two 3-state systems and structural checks.

* symmetric chain 1 <-> 2 <-> 3 with ``w12 = w21 = a``, ``w32 = b`` and
  state 3 observed, on a hidden sojourn of length ``T`` entered and left
  through state 2;
* irreversible loop 1 -> 2 -> 3 -> 1 with state 1 observed, on a hidden
  sojourn entered at state 2 and left from state 3.

Times passed to a :class:`ClosedFormPosterior` are measured from the start
of the hidden sojourn.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .continuous import SegmentSolution
from .errors import NotDiagonalizable, NotTwoEigenvalues
from .markov import DISTINCT_RTOL, eigendecompose

__all__ = [
    "CaseTag",
    "ClosedFormPosterior",
    "SecondOrderCheck",
    "symmetric_chain_posterior",
    "loop_posterior",
    "second_order_residual",
    "normalization_drift",
]


class CaseTag(enum.Enum):
    SYMMETRIC_CHAIN = "SymmetricChain"
    LOOP_DISTINCT = "LoopDistinct"
    LOOP_EQUAL = "LoopEqual"


@dataclass(frozen=True)
class ClosedFormPosterior:
    """
    Posterior on the two hidden states of a 3-state example, in closed form.

    ``hidden_states`` are the 0-based indices of the two hidden states in
    the full 3-state model; the first component of every vector returned
    corresponds to ``hidden_states[0]``.
    """
    case_tag: CaseTag
    parameters: dict
    T: float
    eigen_data: dict
    constants: dict
    hidden_states: tuple = (0, 1)
    n_states: int = field(default=3)

    def alpha(self, t):
        t = np.asarray(t, dtype=float)
        c, e = self.constants, self.eigen_data
        if self.case_tag is CaseTag.SYMMETRIC_CHAIN:
            return (c["A"] * np.multiply.outer(e["v1"], np.exp(e["lambda1"] * t))
                    + c["B"] * np.multiply.outer(e["v2"], np.exp(e["lambda2"] * t)))
        w32, w13 = self.parameters["w32"], self.parameters["w13"]
        if self.case_tag is CaseTag.LOOP_EQUAL:
            w = w32
            return np.stack([np.exp(-w * t), t * np.exp(-w * t)])
        g = c["gamma"]
        return np.stack([np.exp(-w32 * t), g * np.exp(-w32 * t) - g * np.exp(-w13 * t)])

    def beta(self, t):
        t = np.asarray(t, dtype=float)
        if self.case_tag is CaseTag.SYMMETRIC_CHAIN:
            return self.alpha(self.T - t)
        w32, w13 = self.parameters["w32"], self.parameters["w13"]
        s = self.T - t
        if self.case_tag is CaseTag.LOOP_EQUAL:
            w = w32
            return np.stack([s * np.exp(-w * s), np.exp(-w * s)])
        g = self.constants["gamma"]
        return np.stack([np.exp(-w32 * s) - np.exp(-w13 * s), np.exp(-w13 * s) / g])

    def rho(self, t):
        """Unnormalized posterior from the closed-form expression."""
        t = np.asarray(t, dtype=float)
        c, e, T = self.constants, self.eigen_data, self.T
        if self.case_tag is CaseTag.SYMMETRIC_CHAIN:
            l1, l2 = e["lambda1"], e["lambda2"]
            g = (np.exp((l1 - l2) * t + l2 * T) + np.exp((l2 - l1) * t + l1 * T))
            return np.multiply.outer(c["cal_A"], g) + np.multiply.outer(c["cal_B"], np.ones_like(t))
        w32, w13 = self.parameters["w32"], self.parameters["w13"]
        if self.case_tag is CaseTag.LOOP_EQUAL:
            return np.exp(-w32 * T) * np.stack([T - t, t])
        g = np.exp(-w32 * t - w13 * (T - t))
        return (np.multiply.outer(np.array([-1.0, 1.0]), g)
                + np.multiply.outer(np.array([np.exp(-w32 * T), -np.exp(-w13 * T)]),
                                    np.ones_like(t)))

    @property
    def Z(self) -> float:
        return self.constants["Z"]

    def __call__(self, t):
        """Posterior on the hidden pair; columns index time for array input."""
        t = np.asarray(t, dtype=float)
        if self.case_tag is CaseTag.LOOP_EQUAL:
            T = self.T
            return np.stack([(T - t) / T, t / T])
        return self.rho(t) / self.Z

    def full(self, t):
        """Posterior embedded in all three states (zero on the observed state)."""
        p = self(t)
        out = np.zeros((self.n_states,) + p.shape[1:])
        out[list(self.hidden_states)] = p
        return out


@dataclass(frozen=True)
class SecondOrderCheck:
    coefficient: complex
    asymptote: np.ndarray
    residual: float
    tolerance: float = np.inf

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def symmetric_chain_posterior(a: float, b: float, T: float) -> ClosedFormPosterior:
    """
    Closed form for the symmetric chain with hidden block ``[[-a, a], [a, -a-b]]``.

    Eigenvalues are the roots of ``x**2 + (2a + b) x + a b``, i.e.
    ``-a - b/2 +/- sqrt(a**2 + b**2/4)``.
    """
    if not (a > 0 and b > 0 and T > 0):
        raise ValueError("a, b and T must be positive")
    gamma = b / (2 * a)
    root = np.hypot(1.0, gamma)
    l1 = -a - b / 2 + a * root
    l2 = -a - b / 2 - a * root
    v1 = np.array([gamma + root, 1.0])
    v2 = np.array([gamma - root, 1.0])
    # alpha(0) = (0, 1) = A v1 + B v2
    A, B = np.linalg.solve(np.column_stack([v1, v2]), [0.0, 1.0])
    cal_A = A * B * v1 * v2
    cal_B = A ** 2 * np.exp(l1 * T) * v1 * v1 + B ** 2 * np.exp(l2 * T) * v2 * v2
    return ClosedFormPosterior(
        case_tag=CaseTag.SYMMETRIC_CHAIN,
        parameters={"a": a, "b": b},
        T=float(T),
        eigen_data={"lambda1": l1, "lambda2": l2, "v1": v1, "v2": v2, "gamma": gamma},
        constants={"A": A, "B": B, "cal_A": cal_A, "cal_B": cal_B, "Z": float(cal_B.sum())},
        hidden_states=(0, 1),
    )


def loop_posterior(w32: float, w13: float, T: float) -> ClosedFormPosterior:
    """
    Closed form for the irreversible loop on the hidden pair (2, 3).

    Uses the Jordan form when the two rates agree to relative 1e-9, in
    which case the probability moves linearly from state 2 to state 3.
    """
    if not (w32 > 0 and w13 > 0 and T > 0):
        raise ValueError("rates and T must be positive")
    params = {"w32": w32, "w13": w13}
    if abs(w32 - w13) <= 1e-9 * max(w32, w13):
        w = w32
        params = {"w32": w, "w13": w}
        eig = {
            "lambda": -w,
            "P": np.array([[0.0, w], [1.0, 0.0]]),
            "J": np.array([[-w, 1.0], [0.0, -w]]),
            "P_inv": np.array([[0.0, 1.0], [1.0 / w, 0.0]]),
        }
        return ClosedFormPosterior(CaseTag.LOOP_EQUAL, params, float(T), eig,
                                   {"Z": T * np.exp(-w * T)}, hidden_states=(1, 2))
    gamma = w32 / (w13 - w32)
    eig = {"lambda1": -w32, "lambda2": -w13,
           "v1": np.array([1.0, gamma]), "v2": np.array([0.0, 1.0])}
    Z = np.exp(-w32 * T) - np.exp(-w13 * T)
    return ClosedFormPosterior(CaseTag.LOOP_DISTINCT, params, float(T), eig,
                               {"gamma": gamma, "Z": Z}, hidden_states=(1, 2))


def _spectral_groups(spec, tol):
    lam = np.asarray(spec.eigenvalues)
    groups = []
    for i, x in enumerate(lam):
        for g in groups:
            if abs(x - lam[g[0]]) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def second_order_residual(segment: SegmentSolution, probe_times, step=None,
                          tolerance: float = np.inf) -> SecondOrderCheck:
    """
    Check ``p'' = (l1 - l2)**2 (p - p_inf)`` on one sojourn by finite differences.

    ``p_inf`` is the time-independent part of ``alpha * beta`` divided by
    the normalizer.  Second derivatives use central differences with
    ``step`` (default ``1e-5`` times the sojourn length).

    Raises
    ------
    NotDiagonalizable
        If the block has no eigenbasis.
    NotTwoEigenvalues
        If the block does not have exactly two distinct eigenvalues.

    """
    block = segment.U
    spec = eigendecompose(block)
    if not spec.diagonalizable:
        raise NotDiagonalizable("truncated block is not diagonalizable")
    if spec.distinct_count != 2:
        raise NotTwoEigenvalues(
            f"truncated block has {spec.distinct_count} distinct eigenvalues, need 2")

    U = np.asarray(block.U)
    tol = DISTINCT_RTOL * np.linalg.norm(U, np.inf)
    groups = _spectral_groups(spec, tol)
    lam = np.asarray(spec.eigenvalues)
    V, L = spec.right_vectors, spec.left_vectors
    L_len = segment.sojourn.length
    mu = segment.shift

    const = 0
    lams = []
    for g in groups:
        proj = V[:, g] @ L[:, g].T
        lc = lam[g[0]]
        lams.append(lc)
        const = const + np.exp((lc - mu) * L_len) * (proj @ segment.alpha0) * (proj.T @ segment.betaT)
    const = np.real(const)
    asymptote = const / const.sum()
    coef = (lams[0] - lams[1]) ** 2

    h = step if step is not None else 1e-5 * L_len
    t = np.asarray(probe_times, dtype=float)
    s0, s1 = segment.sojourn.start, segment.sojourn.end
    if np.any(t - h < s0) or np.any(t + h > s1):
        raise ValueError("probe times must lie at least one step inside the sojourn")
    p = segment.posterior(t)
    d2 = (segment.posterior(t + h) - 2 * p + segment.posterior(t - h)) / h ** 2
    resid = d2 - np.real(coef) * (p - asymptote[:, None])
    return SecondOrderCheck(coefficient=coef, asymptote=asymptote,
                            residual=float(np.max(np.abs(resid))), tolerance=tolerance)


def normalization_drift(segment: SegmentSolution, probes: int = 100) -> float:
    """
    Largest relative change of ``Z(t) = sum(alpha(t) * beta(t))`` over a sojourn.

    ``Z`` is evaluated at ``probes`` evenly spaced interior times with all
    scale factors applied; the first probe is the reference.
    """
    if probes < 2:
        raise ValueError("need at least two probes")
    s = segment.sojourn
    t = np.linspace(s.start, s.end, probes + 2)[1:-1]
    logz = segment.log_normalizer(t)
    return float(np.max(np.abs(np.expm1(logz - logz[0]))))
