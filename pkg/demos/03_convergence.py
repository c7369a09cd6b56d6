# coding: utf-8

# # Convergence of the discrete recursion
#
# Both algorithms see the same sampled record. As the sampling step
# shrinks the discrete posterior approaches the continuous one, and the
# gap should close linearly in dt. Meanwhile the discrete cost grows
# like 1/dt while a continuous query stays flat.
#
# Pass a trial count on the command line; the default is small so this
# runs in a few seconds.

import sys

import numpy as np

from ctsumproduct import cftr
from ctsumproduct.convergence import DEFAULT_DT_LIST, run_convergence

n_trials = int(sys.argv[1]) if len(sys.argv) > 1 else 8
rep = run_convergence(cftr(), horizon=10.0, n_trials=n_trials, dt_list=DEFAULT_DT_LIST, seed=0)

print(f"{'dt':>8} {'mean err':>10} {'std':>10} {'discrete s':>11} {'query s':>10}")
for row in zip(rep.dt_values, rep.mean, rep.std, rep.discrete_seconds, rep.query_seconds):
    print("{:8.0e} {:10.3e} {:10.3e} {:11.3e} {:10.2e}".format(*row))

print(f"\nlog-log slope of error vs dt: {rep.slope:.3f}")
print(f"discrete cost exponent in 1/dt: {rep.discrete_exponent:.3f}")
q = np.asarray(rep.query_seconds)
print(f"query time spread: {q.max() / q.min():.2f}x")
