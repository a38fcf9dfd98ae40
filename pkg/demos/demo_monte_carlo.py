"""
Simulated trials and sampling noise
===================================

Trials are sampled path by path. Each cell and each partition of its trials
has its own random stream, so a given seed gives the same result however
many threads run it. With many trials the empirical matrices pass the check,
once the tolerance allows for sampling error.
"""

import numpy as np

from sbtop import SbtopParams, check_theorem1, predict, simulate_design

params = SbtopParams.from_complements(pB=[0.5, 0.1], pD=0.4, pF=[0.16, 0.80],
                                      tA=[4.5, 4.5], tB=[2.0, 3.0], tC=1.0, tD=4.0,
                                      tE=[2.0, 2.0], tF=[5.0, 8.0])
exact = predict(params)

emp = simulate_design(params, n_trials_per_cell=200_000, seed=1, n_partitions=4, workers=4)
se = emp.standard_errors()
print("P_hat - P (in standard errors):\n", np.round((emp.P_hat - exact.P) / se["P"], 2))
print("T_hat - T (in standard errors):\n", np.round((emp.T_hat - exact.T) / se["T"], 2))

# The seed fixes the output. The thread count does not affect it.
again = simulate_design(params, n_trials_per_cell=200_000, seed=1, n_partitions=4, workers=1)
print("identical across thread counts:", np.array_equal(emp.n_correct, again.n_correct))

tol = 5 * max(float(np.nanmax(v)) for v in se.values())
report = check_theorem1(emp.to_data_triple(), tol=tol)
print(f"check at tol {tol:.4f}:", report.passed)
print("strict check at 1e-6:", check_theorem1(emp.to_data_triple()).passed)
