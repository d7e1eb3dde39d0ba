"""
Posterior actions and units of measurement
===========================================

A conjugate Normal update, the actions that minimise posterior expected
loss, and how rescaling one regressor reorders the terms of a summed
squared-error loss.
"""

# %%
from decision_lab import bayes_action, posterior_normal_normal, run_units_sensitivity
from decision_lab.bayes import NormalPrior

post = posterior_normal_normal(NormalPrior(0.0, 1.0), [2.0], sigma2=1.0)
print(post)
for loss in ("Square", "Absolute", "ZeroOneEps"):
    a = bayes_action(post, loss)
    print(f"{loss:>10}: action {a.action:.4f}, {a.closed_form_name} {a.closed_form:.4f}")

# %%
# Fitted values do not care about units. The loss contribution of the
# rescaled coefficient falls by the square of the factor.
rep = run_units_sensitivity(reps=2000, seed=0)
print(rep.tables["invariants"].to_csv())
print(rep.tables["contributions"].to_csv())
for v in rep.verdicts:
    print("PASS" if v.passed else "FAIL", v.reference, "-", v.detail)
