"""
Best-reply iteration versus the gradient flow
=============================================

On well-behaved instances both settle at the same profile. The flow moves
monotonically; best-reply iteration jumps. On wide instances where the
kernel changes branch, best replies can cycle.
"""

import numpy as np

from bidflow import (MarketParams, StrategyProfile, best_reply_iteration,
                     flow_dynamics)

params = MarketParams.symmetric(1.0, 1.1, 0.9, 1.6, 1.0, 0.1, n_nodes=11)
start = StrategyProfile.truthful(params)

flow = flow_dynamics(start, params)
it = best_reply_iteration(start, params)
print(f"flow: {flow.status} after {flow.n_steps} Euler steps, "
      f"largest single-step decrease {flow.max_decrease:.1e}")
print(f"best replies: {it.status} after {it.n_iter} iterations")
print("distance between limits:", f"{flow.final.sup_distance(it.final):.1e}")

# drift along the flow, every 100 Euler steps
for t, g in list(zip(flow.times, flow.drift_norms))[::10]:
    print(f"t = {t:6.2f}   |drift| = {g:.2e}")

# a wide instance: best replies cycle, and the flow stalls at a kink
wide = MarketParams.symmetric(0.95, 2.474, 0.585, 3.389, 1.0, 0.116, n_nodes=21)
it = best_reply_iteration(StrategyProfile.truthful(wide), wide, max_iter=60)
print("wide instance, best replies:", it.status, "period", it.period)
for k in range(1, 5):
    print("  iterate", it.n_iter - k, np.round(it.profiles[-k].bids[0][::5], 4))
low = flow_dynamics(StrategyProfile.truthful(wide), wide, t_max=100.0)
print("wide instance, flow:", low.status, f"drift {low.drift_norms[-1]:.2e}")
