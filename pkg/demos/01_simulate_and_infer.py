# coding: utf-8

# # Simulating an ion channel and inferring its hidden state
#
# The CFTR gating model has seven states. Only two of them (4 and 5)
# conduct, so a recording tells us whether the channel is open but not
# which closed or open state it is in. Here we simulate a record and
# ask for the posterior over all seven states.

import numpy as np

from ctsumproduct import cftr, gillespie, observe, posterior, query

model = cftr()
print("stationary distribution:", np.round(model.pi, 4))

# Exact simulation over ten time units. Same seed, same trajectory.

traj = gillespie(model, horizon=10.0, seed=7)
trace = observe(traj, model)
print(f"{len(traj.jump_times)} jumps, {len(trace.transition_times)} open/closed switches")

# Build the posterior once. After that each query costs two small
# matrix exponentials no matter how long the record is.

pf = posterior(model, trace)
print(f"{len(pf.segments)} sojourns")

for t in (0.0, 2.5, 5.0, 7.5, 10.0):
    p = query(pf, t)
    print(f"t={t:5.2f}  observed={int(trace.value_at(t))}  "
          f"p={np.array2string(p, precision=3, suppress_small=True)}  "
          f"true state={int(traj.state_at(t)) + 1}")

# How often is the most probable state the true one?

t = np.linspace(0, 10, 2001)
p = pf(t)
hits = np.mean(np.argmax(p, axis=1) == traj.state_at(t))
print(f"MAP state matches the simulated state {100 * hits:.1f}% of the time")
