"""
Predicting accuracy and response time from a tree
=================================================

A trial starts at the source. It takes arc A or arc B, and then a second arc
ends at a correct or an incorrect terminal. Probabilities on the first arcs
depend on the level i of one factor, those after B on the level j of the
other. The time of a trial is the sum of the two arc times on its path.
"""

import numpy as np

from sbtop import SbtopParams, correct_measure_product, predict, validate_params

# One cell: half the trials take A, and 40% of those end correct; the other half
# take B, and 16% of those end correct.
params = SbtopParams.from_complements(pB=[0.5], pD=0.4, pF=[0.16], tA=[4.5], tB=[2.0],
                                      tC=1.0, tD=4.0, tE=[2.0], tF=[5.0])
print("problems:", validate_params(params) or "none")

# Accuracy is .5 * .4 + .5 * .16, and the summed correct-path time is
# .5 * .4 * (4.5 + 4) + .5 * .16 * (2 + 5).
data = predict(params)
print("p      =", data.P[0, 0])
print("p * t  =", correct_measure_product(params, 0, 0))
print("t      =", data.T[0, 0])

# A 3 x 4 design. Each row is a level of the first factor, each column a level of the second.
params = SbtopParams.from_complements(
    pB=[0.2, 0.5, 0.8], pD=0.6, pF=[0.1, 0.4, 0.7, 0.9],
    tA=[3.0, 3.5, 4.0], tB=[1.0, 1.5, 2.5], tC=2.0, tD=1.0,
    tE=[2.0, 2.5, 3.0, 3.0], tF=[0.5, 1.0, 1.5, 2.5])
data = predict(params)
np.set_printoptions(precision=4, suppress=True)
print("P =\n", data.P)
print("T =\n", data.T)
print("Tw =\n", data.Tw)
