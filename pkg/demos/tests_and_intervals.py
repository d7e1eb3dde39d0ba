"""
Coverage, power and p-values for a Normal mean
===============================================

Known unit variance. Intervals are ``xbar +/- c sigma / sqrt(n)``; the test
rejects ``theta = theta0`` in favour of larger values when
``sqrt(n)(xbar - theta0) > c_alpha``.
"""

# %%
from scipy import stats

from decision_lab import ci_normal, run_coverage, run_power_curve
from decision_lab.inference import TestSpec, np_test, null_p_values, power

print(ci_normal(0.0, 100, 1.0, 0.05))
print(run_coverage(reps=20_000, seed=2).tables["coverage"].to_csv())

# %%
spec = TestSpec(theta0=0.0, alpha=0.05, n=100)
print(np_test(0.25, spec))
print(power(0.3, spec))

# %%
# Closed-form power against simulated rejection rates.
curve = run_power_curve(spec, reps=20_000, seed=2)
print(curve.tables["power"].to_csv())

# %%
# Under the null the p-value is uniform.
p = null_p_values(spec, 10_000, seed_plan=4)
print(stats.kstest(p, "uniform"))
