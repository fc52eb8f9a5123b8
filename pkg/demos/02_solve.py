"""
Smallest and largest equilibria
===============================

Flow the bid functions up from truthful bidding and down from the top of the
bid interval. When both limits coincide the equilibrium is unique.
"""

import numpy as np

from bidflow import MarketParams, extremal_equilibria, validate_params

params = MarketParams.symmetric(c_lo=1.0, c_hi=1.1, b_lo=0.9, b_hi=1.6,
                                demand=1.0, loss_coeff=0.1, n_nodes=21)

# the corner flag fails here by design; the solver handles every branch
print("failed flags:", validate_params(params).failed)

res = extremal_equilibria(params)
print("verdict:", res.verdict, " sup distance:", f"{res.sup_distance:.2e}")
print("residuals:", [f"{v:.1e}" for v in res.residual_lower])

costs = params.grids[0].nodes
for c, b in zip(costs[::4], res.lower.bids[0][::4]):
    print(f"cost {c:.3f} -> bid {b:.5f}  (markup {b / c - 1:.3%})")

# the degenerate-density benchmark: everyone bids c / (1 - 2 r d)
full = MarketParams.full_information(1.0, 0.9, 1.6, demand=1.0, loss_coeff=0.1)
res = extremal_equilibria(full)
print("full information:", np.unique(np.round(res.lower.bids[0], 9)), "vs", 1 / 0.8)
