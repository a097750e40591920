"""
A small benchmark table
-----------------------

The harness runs every (strategy, seed) cell under one evaluation budget and
summarises per strategy. This reproduces the shape of a comparison table at
desk scale: three dimensions, three strategies, a handful of seeds.
"""

import matplotlib.pyplot as plt
import numpy as np

from gradpso import ExperimentConfig, run_experiment
from gradpso.harness import format_table

dims = [10, 20, 30]
strategies = ["standard_pso", "gpso", "two_phase"]
medians = {s: [] for s in strategies}

for dim in dims:
    config = ExperimentConfig.from_dict({
        "objective": "f2_rosenbrock",
        "dim": dim,
        "Np": 30,
        "budget": {"max_evals": 1000 * dim},
        "strategies": strategies,
        "seeds": [0, 1, 2],
    })
    summaries, _ = run_experiment(config, jobs=3)
    print(f"\nRosenbrock D={dim}")
    print(format_table(summaries))
    for s in strategies:
        medians[s].append(summaries[s].median_final)

fig, ax = plt.subplots(figsize=(5, 3.5))
for s in strategies:
    ax.semilogy(dims, np.maximum(medians[s], 1e-30), "o-", label=s)
ax.set_xlabel("dimension")
ax.set_ylabel("median final value")
ax.legend()
fig.tight_layout()
fig.savefig("benchmark_comparison.png")
