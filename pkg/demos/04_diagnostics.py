"""
Checking the conditions behind uniqueness
=========================================

Every check samples the region the solver actually visits and reports its
worst margin, with a witness point when it fails.
"""

from bidflow import MarketParams, extremal_equilibria, run_checks
from bidflow.diagnostics import check_increasing_differences

params = MarketParams.symmetric(1.0, 1.1, 0.9, 1.6, 1.0, 0.1, n_nodes=21)
res = extremal_equilibria(params)
for e in run_checks(params, res, samples=500):
    print(f"{e.name:24s} {'pass' if e.passed else 'FAIL'}  margin {e.margin: .3e}  {e.note}")

# very wide bids and low costs break increasing differences
bad = MarketParams.symmetric(0.1, 0.2, 0.5, 1.6, 1.6, 0.3, n_nodes=11)
e = check_increasing_differences(bad)
print("\nwide instance:", e.name, "pass" if e.passed else "FAIL", e.witness)
