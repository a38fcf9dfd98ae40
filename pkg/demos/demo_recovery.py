"""
Recovering parameters from data
===============================

When data pass the check, a parameter set that reproduces them can be
rebuilt. The set is unique only up to the admissible scalings. Recovery
picks the smallest B-branch scale and zero anchors for tD and tB(h). It then
shifts times, if needed, so that none is negative.
"""

import numpy as np

from sbtop import SbtopParams, check_theorem1, predict, recover_parameters
from sbtop.cli import params_table
from sbtop.recovery import degrees_of_freedom
from sbtop.transforms import solve_scaling

truth = SbtopParams.from_complements(
    pB=[0.3, 0.6, 0.9], pD=0.45, pF=[0.2, 0.5, 0.8],
    tA=[2.0, 2.5, 3.0], tB=[1.0, 2.0, 2.5], tC=1.5, tD=0.5,
    tE=[1.0, 1.5, 2.0], tF=[0.5, 1.0, 2.0])
data = predict(truth)
model = recover_parameters(data, check_theorem1(data))

print(params_table(("true", truth), ("recovered", model.params)))
print("\ngauge:", model.gauge)
print("fit:", model.fit)

# The two parameter sets differ, but one admissible scaling links them.
s = solve_scaling(truth, model.params, tol=1e-8)
print(f"\nlinking scaling: c = {s.c:.4f}, e = {s.e:.4f}, f = {s.f:.4f}")
print("max |P diff|:", np.max(np.abs(predict(model.params).P - data.P)))
print("degrees of freedom for a 3 x 3 design:", degrees_of_freedom(3, 3))
