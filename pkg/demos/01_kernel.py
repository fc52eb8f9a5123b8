"""
The two-node market kernel
==========================

Each generator bids a price; the operator splits a demand ``d`` between them
so as to minimize the cost of supply including quadratic line losses with
coefficient ``r``. The quantity awarded to a bidder depends only on the bid
ratio, which is what makes equilibria scale with costs.
"""

import numpy as np

from bidflow import ElectricityKernel, kernel_F, kernel_qbar

d, r = 1.0, 0.1
K = ElectricityKernel(d, r)

# equal bids split the demand evenly
print("K(1, 1) =", K.evaluate(1.0, [1.0]))

# undercutting wins quantity, overbidding loses it
bids = np.linspace(0.5, 2.0, 7)
for x in bids:
    print(f"own bid {x:4.2f} vs 1.0 -> quantity {K.evaluate(x, [1.0]):.4f}")

# far enough apart, one bidder is priced out and the other serves q-bar
print("q-bar =", kernel_qbar(d, r))
print("F(3, 1) =", kernel_F(3.0, 1.0, d, r), "< 0, so K(3, 1) =", K.evaluate(3.0, [1.0]))

# only the ratio matters
x, y = 1.3, 1.1
print("K(x, y), K(10x, 10y):", K.evaluate(x, [y]), K.evaluate(10 * x, [10 * y]))
