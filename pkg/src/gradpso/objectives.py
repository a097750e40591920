"""De Jong test suite (F1-F5) and a name registry.

Exact forms used here:

* ``f1_sphere``      sum(x_i^2) on [-5.12, 5.12]^D, min 0 at the origin
* ``f2_rosenbrock``  sum(100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2) on [-2.048, 2.048]^D, min 0 at ones
* ``f3_step``        sum(floor(x_i)) on [-5.12, 5.12]^D, min -6 D on [-5.12, -5)^D
* ``f4_quartic``     sum(i x_i^4) + N(0, 1) on [-1.28, 1.28]^D, deterministic part min 0 at the origin
* ``f5_foxholes``    Shekel's foxholes, fixed D = 2 on [-65.536, 65.536]^2, min ~0.998 near (-32, -32)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .core import Objective, as_vector

__all__ = [
    "SuiteEntry",
    "SUITE",
    "OBJECTIVE_NAMES",
    "make_objective",
    "evaluate",
    "gradient",
    "fd_gradient",
    "sphere",
    "rosenbrock",
    "step",
    "quartic",
    "foxholes",
]


def sphere(x):
    return float(np.dot(x, x))


def sphere_grad(x):
    return 2.0 * x


def sphere_hess(x):
    return 2.0 * np.eye(x.shape[0])


def rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rosenbrock_grad(x):
    g = np.zeros_like(x)
    r = x[1:] - x[:-1] ** 2
    g[:-1] = -400.0 * x[:-1] * r - 2.0 * (1.0 - x[:-1])
    g[1:] += 200.0 * r
    return g


def rosenbrock_hess(x):
    d = x.shape[0]
    H = np.zeros((d, d))
    idx = np.arange(d - 1)
    H[idx, idx] += 1200.0 * x[:-1] ** 2 - 400.0 * x[1:] + 2.0
    H[idx + 1, idx + 1] += 200.0
    H[idx, idx + 1] = -400.0 * x[:-1]
    H[idx + 1, idx] = -400.0 * x[:-1]
    return H


def step(x):
    return float(np.sum(np.floor(x)))


def step_grad(x):
    # piecewise constant: zero almost everywhere
    return np.zeros_like(x)


def quartic(x):
    i = np.arange(1, x.shape[0] + 1)
    return float(np.sum(i * x**4))


def quartic_grad(x):
    i = np.arange(1, x.shape[0] + 1)
    return 4.0 * i * x**3


def quartic_hess(x):
    i = np.arange(1, x.shape[0] + 1)
    return np.diag(12.0 * i * x**2)


_FOX_GRID = np.array([-32.0, -16.0, 0.0, 16.0, 32.0])
FOXHOLES_A = np.vstack([np.tile(_FOX_GRID, 5), np.repeat(_FOX_GRID, 5)])


def foxholes(x):
    j = np.arange(1, 26)
    inner = j + np.sum((x[:, None] - FOXHOLES_A) ** 6, axis=0)
    return float(1.0 / (0.002 + np.sum(1.0 / inner)))


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    func: Callable
    grad: Optional[Callable]
    hess: Optional[Callable]
    half_width: float
    differentiability: str
    default_dims: Tuple[int, ...]
    fixed_dim: Optional[int] = None
    noise_std: float = 0.0

    def optimum(self, dim: int):
        if self.name == "f2_rosenbrock":
            return 0.0, np.ones(dim)
        if self.name == "f3_step":
            return -6.0 * dim, np.full(dim, -5.12)
        if self.name == "f5_foxholes":
            loc = np.array([-32.0, -32.0])
            return foxholes(loc), loc
        return 0.0, np.zeros(dim)


SUITE = {
    e.name: e
    for e in [
        SuiteEntry("f1_sphere", sphere, sphere_grad, sphere_hess, 5.12, "smooth", (10, 20, 30)),
        SuiteEntry(
            "f2_rosenbrock", rosenbrock, rosenbrock_grad, rosenbrock_hess, 2.048, "smooth", (10, 20, 30)
        ),
        SuiteEntry("f3_step", step, step_grad, None, 5.12, "piecewise-constant", (10, 20, 30)),
        SuiteEntry(
            "f4_quartic", quartic, quartic_grad, quartic_hess, 1.28, "noisy", (10, 20, 30), noise_std=1.0
        ),
        SuiteEntry(
            "f5_foxholes", foxholes, None, None, 65.536, "smooth-but-use-fd", (2,), fixed_dim=2
        ),
    ]
}
OBJECTIVE_NAMES = tuple(sorted(SUITE))


def make_objective(name: str, dim: Optional[int] = None, noise: bool = True, seed: int = 0) -> Objective:
    """Build a fresh :class:`Objective` for a suite function.

    ``noise=False`` switches off the additive Gaussian noise of ``f4_quartic``.
    """
    try:
        entry = SUITE[name]
    except KeyError:
        raise KeyError(f"unknown objective {name!r}; choose from {', '.join(OBJECTIVE_NAMES)}") from None
    if dim is None:
        dim = entry.fixed_dim or entry.default_dims[0]
    if entry.fixed_dim is not None and dim != entry.fixed_dim:
        raise ValueError(f"{name} is defined only for dim={entry.fixed_dim}")
    if dim < 1 or (name == "f2_rosenbrock" and dim < 2):
        raise ValueError(f"unsupported dimension {dim} for {name}")
    value, loc = entry.optimum(dim)
    return Objective(
        name,
        entry.func,
        np.full(dim, -entry.half_width),
        np.full(dim, entry.half_width),
        grad=entry.grad,
        hess=entry.hess,
        optimum=(value, loc),
        noise_std=entry.noise_std if noise else 0.0,
        seed=seed,
    )


def evaluate(objective: Objective, x) -> float:
    return objective.evaluate(x)


def gradient(objective: Objective, x) -> np.ndarray:
    return objective.gradient(x)


def fd_gradient(objective: Objective, x, h=None) -> np.ndarray:
    if h is not None and np.any(np.asarray(h) <= 0):
        raise ValueError("finite-difference step must be positive")
    return objective.fd_gradient(as_vector(x, objective.dim), h)
