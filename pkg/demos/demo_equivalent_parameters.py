"""
Different parameters, identical predictions
===========================================

Scaling the B-branch probability by c and shifting some arc times gives a
new parameter set with the same P, T and Tw. Below, the one-cell example is
carried to a second column. A second Psi level j' = 1 serves as the reference.
"""

from sbtop import SbtopParams, ScalingParams, apply_transform, predict, solve_scaling
from sbtop.cli import params_table
from sbtop.transforms import feasible_c_range, verify_invariance

old = SbtopParams.from_complements(pB=[0.5], pD=0.4, pF=[0.16, 0.20], tA=[4.5], tB=[2.0],
                                   tC=1.0, tD=4.0, tE=[2.0, 2.0], tF=[5.0, 8.0])
print("admissible c range:", feasible_c_range(old))

scaling = ScalingParams(c=1.6, e=3.0, f=1.0, kC=0.0, j_prime=1, tF_star_jprime=4.0, tE_star_jprime=2.0)
new = apply_transform(old, scaling)
print(params_table(("old", old), ("new", new)))

# Correct responses agree exactly. Incorrect-response times agree only when the
# incorrect-side constants are tied to the others, as in ScalingParams.preserving.
print("\nfree kC, tE*:", verify_invariance(old, new))
tied = apply_transform(old, ScalingParams.preserving(old, 1.6, 3.0, 1.0, 4.0, j_prime=1))
print("tied kC, tE*:", verify_invariance(old, tied))

# Given both columns, the scaling constants can be read back.
s = solve_scaling(old, tied, j_prime=1)
print("\nrecovered c, e, f:", s.c, s.e, s.f)
print("P before/after:", predict(old).P[0], predict(tied).P[0])
