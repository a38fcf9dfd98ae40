"""
Testing whether data could come from a binary tree
==================================================

The checker takes the observable matrices P, T and Tw. It estimates the
constant k, the ratios r and the offsets s. It then reports the largest
residual for each condition. Model-generated data pass. A small dent in one
cell is enough to fail.
"""

import numpy as np

from sbtop import DataTriple, SbtopParams, check_theorem1, check_theorem5, predict

rng = np.random.default_rng(0)
params = SbtopParams.from_complements(
    pB=[0.2, 0.5, 0.8], pD=0.6, pF=[0.1, 0.4, 0.7, 0.9],
    tA=[3.0, 3.5, 4.0], tB=[1.0, 1.5, 2.5], tC=2.0, tD=1.0,
    tE=[2.0, 2.5, 3.0, 3.0], tF=[0.5, 1.0, 1.5, 2.5])
data = predict(params)

report = check_theorem1(data)
print("passed:", report.passed)
print("k =", report.k, " (pD =", params.pD, ")")
print("r =", report.r, " (pB / max pB =", params.pB / params.pB.max(), ")")
print("s =", report.s, " (tB - tB[h] =", params.tB - params.tB[report.h], ")")
for name, value in report.residuals.items():
    print(f"  {name:14s} {value:.2e}")

# Nudge one accuracy by .05 and check again.
P = data.P.copy()
P[1, 2] += 0.05
bad = check_theorem1(DataTriple(P=P, T=data.T, Tw=data.Tw))
print("\nafter the nudge, passed:", bad.passed)
for name, value in bad.residuals.items():
    print(f"  {name:14s} {value:.2e}")

# The three-arc variant accepts a wider class of data, including anything the
# binary tree produces.
print("\nthree-arc check on the original data:", check_theorem5(data).passed)
