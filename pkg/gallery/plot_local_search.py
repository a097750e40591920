"""
Gradient engines on Rosenbrock
------------------------------

Steepest descent, Newton, BFGS and Fletcher-Reeves CG, all started from the
classic point (-1.2, 1) with Armijo backtracking. The paths show why the
curved valley punishes plain gradient steps.
"""

import matplotlib.pyplot as plt
import numpy as np

from gradpso import EvalBudget, make_objective
from gradpso.core import Objective
from gradpso.gradsearch import local_search

f = make_objective("f2_rosenbrock", 2)


def traced(method):
    # wrap the objective so every evaluated point is kept
    seen = []

    def func(x):
        seen.append(np.array(x))
        return f.func(x)

    g = Objective("trace", func, f.lower, f.upper, grad=f.grad_func, hess=f.hess_func)
    res = local_search(method, g, [-1.2, 1.0], EvalBudget(2000))
    return res, np.array(seen)


xs = np.linspace(-2, 2, 300)
ys = np.linspace(-1, 3, 300)
X, Y = np.meshgrid(xs, ys)
Z = 100 * (Y - X**2) ** 2 + (1 - X) ** 2

fig, ax = plt.subplots(figsize=(6, 5))
ax.contour(X, Y, np.log10(Z + 1e-3), levels=25, cmap="Greys")
for method in ("sd", "newton", "bfgs", "cg"):
    res, pts = traced(method)
    ax.plot(pts[:, 0], pts[:, 1], ".-", ms=2, lw=0.8, label=f"{method} ({res.evals} evals)")
    print(f"{method:6s} f* = {res.value:.2e}  iterations = {res.iters}  evals = {res.evals}")
ax.plot(1, 1, "k*", ms=12)
ax.legend(loc="lower right")
fig.savefig("local_search.png")
