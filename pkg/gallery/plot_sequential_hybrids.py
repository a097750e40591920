"""
Sequential and concurrent schedules
-----------------------------------

GPSO alternates PSO bursts with BFGS polishing of the swarm best. GRPSO
starts with a gradient descent, archives the minimum and then lets a repelled
swarm look elsewhere. ``two_phase`` spends 70% of the budget on PSO and the rest
on one BFGS run. ``islands`` runs a PSO island next to a multistart-BFGS island
and shares the best point every 10 iterations.

Shekel's foxholes has 25 basins, so the success rate (reaching the deepest
hole) tells the strategies apart.
"""

import matplotlib.pyplot as plt
import numpy as np

from gradpso import ExperimentConfig, run_experiment

config = ExperimentConfig.from_dict({
    "objective": "f5_foxholes",
    "dim": 2,
    "Np": 20,
    "budget": {"max_evals": 5000},
    "strategies": ["standard_pso", "gpso", "grpso", "two_phase", "islands"],
    "seeds": list(range(15)),
})
summaries, traces = run_experiment(config)

names = list(summaries)
rates = [summaries[n].success_rate for n in names]
for n in names:
    s = summaries[n]
    print(f"{n:13s} success {s.success_rate:.2f}  median final {s.median_final:.4f}")

fig, ax = plt.subplots(figsize=(6, 3.5))
ax.bar(names, rates, color="0.4")
ax.set_ylim(0, 1.05)
ax.set_ylabel("success rate")
fig.tight_layout()
fig.savefig("sequential_hybrids.png")
