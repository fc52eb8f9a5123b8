"""
Where do the conditions hold?
=============================

A scrambled Halton sweep over (d, r, c_lo, c_hi, b_lo, b_hi). The corner
flag and the equilibrium bid bound never hold together, so the solver relies
on the remaining flags plus the requirement that the whole equilibrium band
sits on the interior branch of the kernel.
"""

from bidflow.diagnostics import ALL_FLAGS, SOLVER_FLAGS, feasibility_search

print("all flags:", len(feasibility_search(budget=10_000, require=ALL_FLAGS)), "instances")
cands = feasibility_search(budget=10_000, require=SOLVER_FLAGS)
print("solver flags:", len(cands), "instances")
for c in cands[:5]:
    v = c.values
    print("  " + "  ".join(f"{k}={v[k]:.3f}" for k in v), f" slack {c.margin:.3f}")
