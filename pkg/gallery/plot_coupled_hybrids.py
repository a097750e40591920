"""
Coupled velocity rules
----------------------

Each coupled hybrid changes only the particle velocity rule. Here all of them
get the same budget, the same seeds and therefore the same initial swarm on
the 10-D Rosenbrock function.
"""

import matplotlib.pyplot as plt
import numpy as np

from gradpso import EvalBudget, HybridSpec, RngStream, make_objective, run_strategy

kinds = ["standard_pso", "dgpsogs", "grad_replace", "four_term", "psog1", "psog2", "maeda_spsa"]
seeds = range(5)

fig, ax = plt.subplots(figsize=(7, 4))
for kind in kinds:
    finals = []
    for seed in seeds:
        f = make_objective("f2_rosenbrock", 10, seed=seed)
        res = run_strategy(f, HybridSpec(kind=kind), 30, EvalBudget(10_000), RngStream(seed))
        finals.append(res.value)
        if seed == 0:
            h = np.array(res.history)
            ax.semilogy(h[:, 1], h[:, 2], label=kind)
    print(f"{kind:13s} median final over {len(finals)} seeds: {np.median(finals):.3e}")

ax.set_xlabel("evaluations")
ax.set_ylabel("best value (seed 0)")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("coupled_hybrids.png")
