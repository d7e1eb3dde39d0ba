"""
A constant estimator that is hard to beat near its constant
============================================================

The constant ``7405926`` ignores the data, yet its mean squared error is
below the sample mean's ``1/n`` on an interval around it. Away from the
constant its error never shrinks.
"""

# %%
from decision_lab import CRYSTAL_BALL, EstimatorSpec, run_consistency, run_crystal_ball
from decision_lab import run_quantifier_contrast

rep = run_crystal_ball(n=100, reps=5000, seed=3)
mse = rep.tables["mse"]
for theta, a, b in zip(mse.column("theta")[::6], mse.column("mse_mean")[::6], mse.column("mse_crystal")[::6]):
    print(f"theta - c = {theta - CRYSTAL_BALL:+.2f}   mean {a:.5f}   constant {b:.5f}")
print(rep.verdict("crystal-crossing").detail)

# %%
# Error as the sample grows, at theta = 0. Only the sample mean improves.
cons = run_consistency(reps=20_000, seed=3)
print(cons.tables["mse"].to_csv())

# %%
# Two ways to score an estimator: a single number at the true value, or a
# whole curve over every candidate value.
qc = run_quantifier_contrast(EstimatorSpec("CrystalBall"), reps=100)
print(qc.tables["summary"].to_csv())
