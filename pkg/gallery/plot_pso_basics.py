"""
Standard PSO on the sphere
--------------------------

A 30-particle swarm on the 10-D sphere. We follow the best value and the
swarm diversity (mean distance to the centroid, scaled by the box diagonal)
as the evaluations are spent, once with the inertia form and once with the
constriction form of the velocity update.
"""

import matplotlib.pyplot as plt
import numpy as np

from gradpso import EvalBudget, HybridSpec, PsoParams, RngStream, make_objective, run_strategy

forms = {"inertia": PsoParams(), "constriction": PsoParams.constriction()}

fig, (ax_val, ax_div) = plt.subplots(1, 2, figsize=(10, 4))
for label, params in forms.items():
    f = make_objective("f1_sphere", 10)
    res = run_strategy(f, HybridSpec(pso=params), 30, EvalBudget(15_000), RngStream(0))
    h = np.array(res.history)
    ax_val.semilogy(h[:, 1], h[:, 2], label=label)
    ax_div.semilogy(h[:, 1], h[:, 3], label=label)
    print(f"{label:12s} final {res.value:.3e} after {res.evals} evaluations")

ax_val.set_xlabel("evaluations")
ax_val.set_ylabel("best value")
ax_div.set_xlabel("evaluations")
ax_div.set_ylabel("diversity")
ax_val.legend()
fig.tight_layout()
fig.savefig("pso_basics.png")
