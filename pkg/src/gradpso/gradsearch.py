"""Gradient-based local search: steepest descent, Newton, BFGS and Fletcher-Reeves CG.

All engines share an Armijo backtracking line search and a common driver,
:func:`local_search`. The SPSA two-probe gradient estimator lives here too.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional

import numpy as np
from scipy import linalg

from .core import BudgetExhausted, EvalBudget, Objective, RngStream, as_vector

__all__ = [
    "HessianUnusable",
    "LineSearchParams",
    "LineSearchResult",
    "QuasiNewtonState",
    "CgState",
    "LocalResult",
    "METHODS",
    "armijo_backtrack",
    "steepest_descent_step",
    "newton_direction",
    "newton_step",
    "bfgs_update",
    "fr_beta",
    "cg_direction",
    "cg_step",
    "exact_quadratic_step",
    "cg_quadratic",
    "spsa_gradient",
    "spsa_gain",
    "local_search",
]

METHODS = ("sd", "newton", "bfgs", "cg")
CURVATURE_EPS = 1e-12


class HessianUnusable(ValueError):
    """The Hessian is singular or not positive definite."""

    def __init__(self, msg="hessian_unusable"):
        super().__init__(msg)


@dataclass(frozen=True)
class LineSearchParams:
    eta0: float = 1.0
    shrink: float = 0.5
    armijo_c: float = 1e-4
    max_backtracks: int = 40

    def __post_init__(self):
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be >= 1")


class LineSearchResult(NamedTuple):
    eta: float
    x: np.ndarray
    value: float
    backtracks: int
    sufficient: bool


def armijo_backtrack(
    f: Objective, x, direction, grad, params: LineSearchParams = LineSearchParams(), fx=None
) -> LineSearchResult:
    """Shrink the step from ``eta0`` until the sufficient-decrease test passes.

    Trial points are clamped into the objective's box; the decrease test
    then uses the actual (projected) displacement. When no step passes, the
    smallest step ``eta0 * shrink**max_backtracks`` is returned with
    ``sufficient=False``.
    """
    x = as_vector(x, f.dim)
    d = as_vector(direction, f.dim, "direction")
    g = as_vector(grad, f.dim, "grad")
    if float(g @ d) >= 0.0:
        raise ValueError("direction is not a descent direction")
    if fx is None:
        fx = f.evaluate(x)
    eta = params.eta0
    trial, value = x, fx
    for k in range(params.max_backtracks + 1):
        eta = params.eta0 * params.shrink**k
        trial = f.clip(x + eta * d)
        if np.array_equal(trial, x):
            break
        value = f.evaluate(trial)
        if value <= fx + params.armijo_c * float(g @ (trial - x)):
            return LineSearchResult(eta, trial, value, k, True)
    return LineSearchResult(eta, trial, value, params.max_backtracks, False)


def steepest_descent_step(x, grad, eta: float) -> np.ndarray:
    if eta <= 0:
        raise ValueError("eta must be positive")
    return as_vector(x) - eta * as_vector(grad)


def newton_direction(grad, hessian) -> np.ndarray:
    """Solve ``H d = -grad`` by Cholesky; raise :class:`HessianUnusable` if H is not PD."""
    H = np.asarray(hessian, dtype=float)
    g = as_vector(grad, H.shape[0], "grad")
    if not np.all(np.isfinite(H)):
        raise HessianUnusable()
    try:
        factor = linalg.cho_factor(H, lower=True, check_finite=False)
    except linalg.LinAlgError:
        raise HessianUnusable() from None
    d = -linalg.cho_solve(factor, g, check_finite=False)
    if not np.all(np.isfinite(d)):
        raise HessianUnusable()
    return d


def newton_step(x, grad, hessian, eta: float = 1.0) -> np.ndarray:
    if eta <= 0:
        raise ValueError("eta must be positive")
    return as_vector(x) + eta * newton_direction(grad, hessian)


@dataclass
class QuasiNewtonState:
    """Inverse-Hessian approximation ``B`` plus the last point and gradient."""

    B: np.ndarray
    prev_x: Optional[np.ndarray] = None
    prev_grad: Optional[np.ndarray] = None
    skipped: bool = False
    secant_residual: float = 0.0

    @classmethod
    def identity(cls, dim, x=None, grad=None):
        return cls(np.eye(dim), None if x is None else as_vector(x), None if grad is None else as_vector(grad))


def bfgs_update(state: QuasiNewtonState, x_new, grad_new) -> QuasiNewtonState:
    """Inverse BFGS update. Resets ``B`` to the identity when ``y.s <= 1e-12``."""
    x_new = as_vector(x_new)
    grad_new = as_vector(grad_new, x_new.shape[0], "grad_new")
    dim = x_new.shape[0]
    if state.prev_x is None or state.prev_grad is None:
        return QuasiNewtonState(state.B.copy(), x_new.copy(), grad_new.copy())
    s = x_new - state.prev_x
    y = grad_new - state.prev_grad
    sy = float(y @ s)
    if not sy > CURVATURE_EPS:
        return QuasiNewtonState(np.eye(dim), x_new.copy(), grad_new.copy(), skipped=True)
    rho = 1.0 / sy
    V = np.eye(dim) - rho * np.outer(s, y)
    B = V @ state.B @ V.T + rho * np.outer(s, s)
    B = 0.5 * (B + B.T)
    residual = float(np.max(np.abs(B @ y - s)))
    return QuasiNewtonState(B, x_new.copy(), grad_new.copy(), skipped=False, secant_residual=residual)


@dataclass
class CgState:
    prev_direction: Optional[np.ndarray] = None
    prev_grad_sqnorm: float = 0.0
    since_restart: int = 0
    converged: bool = False


def fr_beta(grad_sqnorm: float, prev_grad_sqnorm: float) -> float:
    """Fletcher-Reeves ratio ``|g_t|^2 / |g_{t-1}|^2``."""
    return grad_sqnorm / prev_grad_sqnorm


def cg_direction(state: CgState, grad, restart_every: Optional[int] = None):
    """Return ``(p, new_state)``; ``p = -g + beta * p_prev`` with FR beta.

    Restarts (``beta = 0``) on the first call, every ``restart_every`` steps
    (default: the dimension), on a non-finite beta, or when ``p`` fails to
    be a descent direction.
    """
    g = as_vector(grad)
    gsq = float(g @ g)
    if gsq == 0.0:
        return np.zeros_like(g), replace(state, converged=True)
    period = restart_every or g.shape[0]
    p = -g
    since = 0
    if state.prev_direction is not None and state.prev_grad_sqnorm > 0 and state.since_restart < period:
        with np.errstate(over="ignore", invalid="ignore"):
            beta = fr_beta(gsq, state.prev_grad_sqnorm)
            cand = -g + beta * state.prev_direction
        if np.isfinite(beta) and np.all(np.isfinite(cand)) and float(g @ cand) < 0:
            p = cand
            since = state.since_restart
    return p, CgState(p.copy(), gsq, since + 1, False)


def exact_quadratic_step(grad, direction, hessian) -> float:
    """Step length ``g.g / p.H.p``, exact for quadratics under conjugate directions."""
    g = as_vector(grad)
    p = as_vector(direction)
    return float(g @ g) / float(p @ np.asarray(hessian) @ p)


def cg_step(state: CgState, x, grad, f: Objective, ls: LineSearchParams = LineSearchParams(), fx=None):
    """One CG iteration with Armijo step length; returns ``(x_new, value, state)``.

    A zero gradient yields ``state.converged`` and no move.
    """
    x = as_vector(x, f.dim)
    p, state = cg_direction(state, grad)
    if state.converged:
        return x, (f.evaluate(x) if fx is None else fx), state
    res = armijo_backtrack(f, x, p, grad, ls, fx)
    if not res.sufficient:
        return x, (f.evaluate(x) if fx is None else fx), replace(state, prev_direction=None)
    return res.x, res.value, state


def cg_quadratic(H, b, x0, n_iter: int):
    """Minimise ``0.5 x'Hx - b'x`` with FR CG and the exact step; returns the gradient norms."""
    H = np.asarray(H, dtype=float)
    x = as_vector(x0)
    state = CgState()
    norms = []
    for _ in range(n_iter):
        g = H @ x - b
        norms.append(float(np.linalg.norm(g)))
        p, state = cg_direction(state, g, restart_every=n_iter + 1)
        if state.converged:
            break
        x = x + exact_quadratic_step(g, p, H) * p
    norms.append(float(np.linalg.norm(H @ x - b)))
    return x, norms


def spsa_gain(c0, t: int, gamma: float = 0.101):
    return c0 / (t + 1) ** gamma


def spsa_gradient(f: Objective, x, c_perturb, stream: Optional[RngStream] = None, delta=None) -> np.ndarray:
    """Two-probe simultaneous-perturbation gradient estimate.

    ``c_perturb`` may be a scalar or a per-dimension array. Probe points are
    clamped into the box and the difference quotient uses the actual
    probe separation. Consumes exactly two evaluations.
    """
    x = as_vector(x, f.dim)
    c = np.broadcast_to(np.asarray(c_perturb, dtype=float), x.shape)
    if np.any(c <= 0):
        raise ValueError("c_perturb must be positive")
    if delta is None:
        delta = stream.rademacher(f.dim)
    delta = as_vector(delta, f.dim, "delta")
    xp = f.clip(x + c * delta)
    xm = f.clip(x - c * delta)
    diff = f.evaluate(xp) - f.evaluate(xm)
    sep = xp - xm
    g = np.zeros(f.dim)
    nz = sep != 0
    g[nz] = diff / sep[nz]
    return g


@dataclass
class LocalResult:
    x: np.ndarray
    value: float
    evals: int
    iters: int = 0
    converged: bool = False
    secant_residuals: List[float] = field(default_factory=list)

    def __iter__(self):
        # unpack as (x*, f*, evals_used)
        return iter((self.x, self.value, self.evals))


def _project(d, x, f: Objective):
    d = d.copy()
    d[(x <= f.lower) & (d < 0)] = 0.0
    d[(x >= f.upper) & (d > 0)] = 0.0
    return d


def local_search(
    method: str,
    f: Objective,
    x0,
    budget: EvalBudget,
    ls: LineSearchParams = LineSearchParams(),
    grad_tol: float = 1e-8,
    f0: Optional[float] = None,
) -> LocalResult:
    """Run one of ``sd``, ``newton``, ``bfgs``, ``cg`` from ``x0``.

    Iterates until ``max|grad| < grad_tol``, the line search stalls or the
    budget runs out, and returns the best accepted point. Passing ``f0``
    (the known value at ``x0``) saves one evaluation.
    """
    if method not in METHODS:
        raise ValueError(f"unknown local search method {method!r}")
    start = f.eval_count
    x = f.clip(as_vector(x0, f.dim))
    if budget.max_evals == 0 or budget.max_iters == 0:
        fx = f.evaluate(x) if f0 is None else f0
        return LocalResult(x, fx, f.eval_count - start)

    result = LocalResult(x, np.inf, 0)
    with f.limited(budget.max_evals):
        try:
            fx = f.evaluate(x) if f0 is None else float(f0)
            result.value = fx
            g = f.gradient(x)
            qn = QuasiNewtonState.identity(f.dim, x, g)
            cg = CgState()
            for it in range(budget.max_iters):
                if np.max(np.abs(g)) < grad_tol:
                    result.converged = True
                    break
                if method == "sd":
                    d = -g
                elif method == "newton":
                    try:
                        d = newton_direction(g, f.hessian(x))
                    except HessianUnusable:
                        d = -g
                elif method == "bfgs":
                    d = -qn.B @ g
                else:
                    d, cg = cg_direction(cg, g)
                d = _project(d, x, f)
                if not float(g @ d) < 0:
                    d = _project(-g, x, f)
                    if not float(g @ d) < 0:
                        break
                step = armijo_backtrack(f, x, d, g, ls, fx)
                if not step.sufficient and not np.array_equal(d, -g):
                    # fall back to plain steepest descent once
                    qn = QuasiNewtonState.identity(f.dim, x, g)
                    cg = CgState()
                    d = _project(-g, x, f)
                    if float(g @ d) < 0:
                        step = armijo_backtrack(f, x, d, g, ls, fx)
                if not step.sufficient:
                    break
                x, fx = step.x, step.value
                result.x, result.value, result.iters = x, fx, it + 1
                g = f.gradient(x)
                if method == "bfgs":
                    qn = bfgs_update(qn, x, g)
                    if not qn.skipped:
                        result.secant_residuals.append(qn.secant_residual)
            else:
                result.converged = bool(np.max(np.abs(g)) < grad_tol)
        except BudgetExhausted:
            pass
    result.evals = f.eval_count - start
    return result
