# coding: utf-8

# # Three-state examples with closed forms
#
# Two small models have posteriors we can write down by hand: a
# symmetric chain 1-2-3 where state 3 is observed, and an irreversible
# loop 1->2->3->1 where state 1 is observed. We compare the closed forms
# with the general algorithm on a single hidden sojourn.

import numpy as np

from ctsumproduct import (
    ObservationTrace,
    chain3,
    loop3,
    loop_posterior,
    normalization_drift,
    posterior,
    second_order_residual,
    symmetric_chain_posterior,
)
from ctsumproduct.errors import NotDiagonalizable


def hidden_segment(model, T):
    # observed for one unit, hidden for T, observed again
    pf = posterior(model, ObservationTrace(1, [1.0, 1.0 + T], T + 2.0))
    return pf.segments[1]


for label, model, cf in [
    ("chain a=1 b=2 T=3", chain3(1.0, 2.0), symmetric_chain_posterior(1.0, 2.0, 3.0)),
    ("loop w32=1 w13=2 T=1", loop3(1.0, 2.0), loop_posterior(1.0, 2.0, 1.0)),
    ("loop equal rates T=2", loop3(1.5, 1.5), loop_posterior(1.5, 1.5, 2.0)),
]:
    seg = hidden_segment(model, cf.T)
    tau = np.linspace(0, cf.T, 1000)
    diff = np.abs(seg.posterior(seg.sojourn.start + tau) - cf(tau)).max()
    print(f"{label:22s} closed form vs general: {diff:.1e}   Z drift: {normalization_drift(seg):.1e}")

# With equal loop rates the block is a Jordan block and probability
# moves linearly from state 2 to state 3.

cf = loop_posterior(1.5, 1.5, 2.0)
print("equal-rate loop p(t) at t=0, 0.5, 1, 1.5, 2:")
print(np.round(cf(np.linspace(0, 2, 5)), 6))

# When the hidden block has two distinct eigenvalues, p(t) solves
# p'' = (l1 - l2)^2 (p - p_inf). Check by finite differences.

seg = hidden_segment(chain3(1.0, 2.0), 3.0)
chk = second_order_residual(seg, seg.sojourn.start + np.linspace(0.1, 2.9, 20))
print(f"second-order residual on the chain: {chk.residual:.1e}, (l1-l2)^2 = {chk.coefficient.real:.4f}")
try:
    second_order_residual(hidden_segment(loop3(1.5, 1.5), 2.0), [2.0])
except NotDiagonalizable as exc:
    print("equal-rate loop:", type(exc).__name__)
