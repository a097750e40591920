"""Shared numeric plumbing: vectors, objective handles, budgets, random streams."""
from __future__ import annotations

import copy
import zlib
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "BudgetExhausted",
    "ConfigError",
    "NonFiniteError",
    "EvalBudget",
    "RngStream",
    "Objective",
    "as_vector",
    "next_uniform",
    "derive_substream",
]


class BudgetExhausted(RuntimeError):
    """Raised by an :class:`Objective` when its evaluation limit is reached."""


class ConfigError(ValueError):
    """Invalid experiment or strategy configuration."""


class NonFiniteError(ValueError):
    """Raised when a vector or objective value contains NaN or Inf."""


def as_vector(x, dim: Optional[int] = None, name: str = "x") -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class EvalBudget:
    """Stop whichever of ``max_evals`` / ``max_iters`` is hit first."""

    max_evals: int
    max_iters: int = 10**9

    def __post_init__(self):
        if self.max_evals < 0 or self.max_iters < 0:
            raise ValueError("budget limits must be non-negative")


def _name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


class RngStream:
    """Seeded random stream with deterministic child streams.

    Backed by numpy's PCG64 seeded through ``SeedSequence``; children are
    keyed on the parent's path plus an integer (or string) index, so the
    same ``(seed, path)`` always yields the same draws on any platform.
    """

    def __init__(self, seed: int, path: Sequence[int] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(entropy=self.seed & (2**64 - 1), spawn_key=self.path)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"

    def derive(self, index) -> "RngStream":
        if isinstance(index, str):
            index = _name_key(index)
        if index < 0:
            raise ValueError("entity index must be >= 0")
        return RngStream(self.seed, self.path + (int(index),))

    def uniform(self, size=None):
        return self._gen.random(size)

    def normal(self, mean=0.0, std=1.0, size=None):
        return self._gen.normal(mean, std, size)

    def rademacher(self, size: int) -> np.ndarray:
        return np.where(self._gen.random(size) < 0.5, -1.0, 1.0)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)


def next_uniform(stream: RngStream) -> float:
    return float(stream.uniform())


def derive_substream(stream: RngStream, entity_index: int) -> RngStream:
    return stream.derive(entity_index)


class Objective:
    """An evaluatable function with bounds, optional derivatives and counters.

    ``eval_count`` counts calls to the function itself; analytic gradient and
    Hessian calls are counted separately in ``grad_count``. A finite-difference
    gradient costs ``2 * dim`` function evaluations.

    An evaluation limit can be imposed with :meth:`limited`; any evaluation
    past it raises :class:`BudgetExhausted` without calling the function.
    """

    def __init__(
        self,
        name: str,
        func: Callable[[np.ndarray], float],
        lower,
        upper,
        grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        hess: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        optimum: Optional[tuple] = None,
        noise_std: float = 0.0,
        seed: int = 0,
    ):
        self.name = name
        self.lower = as_vector(lower, name="lower")
        self.upper = as_vector(upper, self.lower.shape[0], name="upper")
        if np.any(self.lower >= self.upper):
            raise ValueError("every bound needs lo < hi")
        self.dim = self.lower.shape[0]
        self.func = func
        self.grad_func = grad
        self.hess_func = hess
        self.optimum = optimum
        self.noise_std = float(noise_std)
        self.noise_stream = RngStream(seed).derive("objective-noise")
        self.eval_count = 0
        self.grad_count = 0
        self.limit: Optional[int] = None

    def __repr__(self):
        return f"Objective({self.name!r}, dim={self.dim}, evals={self.eval_count})"

    @property
    def bounds(self):
        return list(zip(self.lower.tolist(), self.upper.tolist()))

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def has_gradient(self) -> bool:
        return self.grad_func is not None

    @property
    def remaining(self) -> float:
        if self.limit is None:
            return np.inf
        return max(self.limit - self.eval_count, 0)

    def clip(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    @contextmanager
    def limited(self, n_evals):
        """Temporarily cap further evaluations at ``n_evals`` (nested caps compose)."""
        saved = self.limit
        cap = self.eval_count + int(n_evals)
        self.limit = cap if saved is None else min(saved, cap)
        try:
            yield self
        finally:
            self.limit = saved

    def evaluate(self, x) -> float:
        x = as_vector(x, self.dim)
        if self.limit is not None and self.eval_count >= self.limit:
            raise BudgetExhausted(f"{self.name}: evaluation limit {self.limit} reached")
        self.eval_count += 1
        value = float(self.func(x))
        if self.noise_std > 0.0:
            value += self.noise_std * float(self.noise_stream.normal())
        if not np.isfinite(value):
            raise NonFiniteError(f"{self.name} returned a non-finite value at {x}")
        return value

    __call__ = evaluate

    def gradient(self, x) -> np.ndarray:
        x = as_vector(x, self.dim)
        if self.grad_func is None:
            return self.fd_gradient(x)
        self.grad_count += 1
        return as_vector(self.grad_func(x), self.dim, name="gradient")

    def fd_gradient(self, x, h=None) -> np.ndarray:
        """Central differences, probes clamped into the box; costs ``2 * dim`` evaluations."""
        x = as_vector(x, self.dim)
        if h is None:
            h = 1e-6 * np.maximum(1.0, np.abs(x))
        h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
        if np.any(h <= 0):
            raise ValueError("finite-difference step must be positive")
        g = np.zeros(self.dim)
        for i in range(self.dim):
            xp = x.copy()
            xm = x.copy()
            xp[i] = min(x[i] + h[i], self.upper[i])
            xm[i] = max(x[i] - h[i], self.lower[i])
            g[i] = (self.evaluate(xp) - self.evaluate(xm)) / (xp[i] - xm[i])
        return g

    def hessian(self, x) -> np.ndarray:
        """Analytic Hessian when available, else symmetrised differences of the gradient."""
        x = as_vector(x, self.dim)
        if self.hess_func is not None:
            self.grad_count += 1
            return np.asarray(self.hess_func(x), dtype=float)
        H = np.zeros((self.dim, self.dim))
        h = 1e-5 * np.maximum(1.0, np.abs(x))
        for i in range(self.dim):
            xp = x.copy()
            xm = x.copy()
            xp[i] = min(x[i] + h[i], self.upper[i])
            xm[i] = max(x[i] - h[i], self.lower[i])
            H[i] = (self.gradient(xp) - self.gradient(xm)) / (xp[i] - xm[i])
        return 0.5 * (H + H.T)

    def clone(self, index: int = 0) -> "Objective":
        """Copy with zeroed counters; ``index > 0`` gets an independent noise stream."""
        twin = copy.copy(self)
        twin.eval_count = 0
        twin.grad_count = 0
        twin.limit = None
        twin.noise_stream = copy.deepcopy(self.noise_stream)
        if index:
            twin.noise_stream = self.noise_stream.derive(index)
        return twin

    def merge_counts(self, *clones: "Objective"):
        for c in clones:
            self.eval_count += c.eval_count
            self.grad_count += c.grad_count
