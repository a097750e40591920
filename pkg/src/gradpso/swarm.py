"""Standard particle swarm: state, velocity rules, topologies and diversity."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np

from .core import Objective, RngStream, as_vector

__all__ = [
    "PsoParams",
    "Particle",
    "SwarmState",
    "init_swarm",
    "pso_velocity",
    "move_particle",
    "step_swarm",
    "neighborhood_best",
    "diversity",
    "swarm_diversity",
    "install_gbest",
]


@dataclass(frozen=True)
class PsoParams:
    """Velocity-rule settings.

    Defaults are the inertia form (omega=0.729, c1=c2=1.49445); use
    :meth:`constriction` for the constriction form (phi=0.7298, c1=c2=2.05).
    ``per_dimension_rand=False`` draws one scalar per term instead of one per
    coordinate. ``inertia_ramp`` replaces omega by a linear 0.9 -> 0.4 ramp
    over ``ramp_iters`` iterations.
    """

    omega: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    phi: float = 0.7298
    use_constriction: bool = False
    vmax_fraction: float = 0.5
    topology: str = "global"
    ring_k: int = 1
    boundary: str = "clamp_zero_velocity"
    per_dimension_rand: bool = True
    inertia_ramp: bool = False
    ramp_iters: int = 1000

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("acceleration constants must be non-negative")
        if not 0 < self.phi <= 1:
            raise ValueError("phi must lie in (0, 1]")
        if not 0 < self.vmax_fraction <= 1:
            raise ValueError("vmax_fraction must lie in (0, 1]")
        if self.topology not in ("global", "ring"):
            raise ValueError(f"unsupported topology {self.topology!r}")
        if self.ring_k < 1:
            raise ValueError("ring_k must be >= 1")
        if self.boundary != "clamp_zero_velocity":
            raise ValueError(f"unsupported boundary policy {self.boundary!r}")

    @classmethod
    def constriction(cls, **kw):
        kw.setdefault("phi", 0.7298)
        kw.setdefault("c1", 2.05)
        kw.setdefault("c2", 2.05)
        return cls(use_constriction=True, **kw)

    def inertia(self, t: int) -> float:
        if not self.inertia_ramp:
            return self.omega
        frac = min(t / max(self.ramp_iters, 1), 1.0)
        return 0.9 - 0.5 * frac


@dataclass
class Particle:
    x: np.ndarray
    v: np.ndarray
    p: np.ndarray
    p_value: float
    value: float
    rng: Optional[RngStream] = None
    aux: Optional[RngStream] = None
    memory: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.x.shape[0]


@dataclass
class SwarmState:
    particles: List[Particle]
    gbest: np.ndarray
    gbest_value: float
    gbest_index: int
    vmax: np.ndarray
    t: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.particles)

    def positions(self) -> np.ndarray:
        return np.array([p.x for p in self.particles])

    def refresh_gbest(self):
        values = [p.p_value for p in self.particles]
        i = int(np.argmin(values))
        self.gbest_index = i
        self.gbest = self.particles[i].p.copy()
        self.gbest_value = values[i]


def init_swarm(
    f: Objective,
    n_particles: int,
    stream: RngStream,
    params: PsoParams = PsoParams(),
    center=None,
    std=None,
) -> SwarmState:
    """Sample ``n_particles`` uniformly in the box, or from N(center, std) when given.

    Each particle owns ``stream.derive(i)``; ``n_particles`` evaluations are used.
    """
    if n_particles < 1:
        raise ValueError("need at least one particle")
    vmax = params.vmax_fraction * f.span
    particles = []
    for i in range(n_particles):
        rng = stream.derive(i)
        if center is None:
            x = f.lower + rng.uniform(f.dim) * f.span
        else:
            x = f.clip(np.asarray(center, dtype=float) + np.asarray(std, dtype=float) * rng.normal(size=f.dim))
        v = (2.0 * rng.uniform(f.dim) - 1.0) * vmax
        particles.append(Particle(x, v, x.copy(), np.inf, np.inf, rng, rng.derive(0)))
    state = SwarmState(particles, particles[0].x.copy(), np.inf, 0, vmax)
    try:
        for p in particles:
            p.value = p.p_value = f.evaluate(p.x)
    finally:
        state.refresh_gbest()
    return state


def pso_velocity(
    particle: Particle,
    nbest,
    params: PsoParams,
    stream: Optional[RngStream] = None,
    vmax=None,
    omega: Optional[float] = None,
    r1=None,
    r2=None,
    clamp: bool = True,
) -> np.ndarray:
    """Inertia or constriction velocity update, clamped to ``+-vmax``.

    ``r1``/``r2`` override the random draws (scalars or per-dimension arrays).
    """
    d = particle.dim
    if r1 is None:
        r1 = stream.uniform(d) if params.per_dimension_rand else stream.uniform()
    if r2 is None:
        r2 = stream.uniform(d) if params.per_dimension_rand else stream.uniform()
    pull = params.c1 * r1 * (particle.p - particle.x) + params.c2 * r2 * (nbest - particle.x)
    if params.use_constriction:
        v = params.phi * (particle.v + pull)
    else:
        w = params.omega if omega is None else omega
        v = w * particle.v + pull
    if clamp and vmax is not None:
        v = np.clip(v, -vmax, vmax)
    return v


def move_particle(particle: Particle, v, f: Objective):
    """Apply ``x += v``; coordinates leaving the box are clamped and their velocity zeroed."""
    x = particle.x + v
    out = (x < f.lower) | (x > f.upper)
    if np.any(out):
        x = np.clip(x, f.lower, f.upper)
        v = np.where(out, 0.0, v)
    particle.x = x
    particle.v = v


def neighborhood_best(state: SwarmState, topology: Union[str, PsoParams], i: int, k: int = 1) -> np.ndarray:
    """Best pbest visible to particle ``i``; ties go to the lowest index."""
    if isinstance(topology, PsoParams):
        topology, k = topology.topology, topology.ring_k
    n = state.size
    if not 0 <= i < n:
        raise IndexError(i)
    if topology == "global":
        return state.gbest
    idx = sorted({(i + o) % n for o in range(-k, k + 1)})
    best = min(idx, key=lambda j: (state.particles[j].p_value, j))
    return state.particles[best].p


VelocityRule = Callable[[SwarmState, int, Particle, np.ndarray], np.ndarray]


def step_swarm(
    state: SwarmState, f: Objective, params: PsoParams = PsoParams(), rule: Optional[VelocityRule] = None
) -> SwarmState:
    """Advance every particle once (one evaluation each) and refresh pbest/gbest.

    Neighbourhood bests are frozen at the start of the step. ``rule`` replaces
    the standard velocity update for hybrid variants. If the budget runs out
    mid-step, gbest is refreshed from the particles evaluated so far before
    :class:`BudgetExhausted` propagates.
    """
    omega = params.inertia(state.t)
    nbests = [neighborhood_best(state, params, i).copy() for i in range(state.size)]
    try:
        for i, p in enumerate(state.particles):
            if rule is None:
                v = pso_velocity(p, nbests[i], params, p.rng, state.vmax, omega=omega)
            else:
                v = rule(state, i, p, nbests[i])
            move_particle(p, as_vector(v, p.dim, "velocity"), f)
            p.value = f.evaluate(p.x)
            if p.value < p.p_value:
                p.p = p.x.copy()
                p.p_value = p.value
    finally:
        state.refresh_gbest()
    state.t += 1
    return state


def install_gbest(state: SwarmState, x, value: float) -> bool:
    """Make ``(x, value)`` the gbest if it improves it; the owner's pbest follows."""
    if not value < state.gbest_value:
        return False
    owner = state.particles[state.gbest_index]
    owner.p = as_vector(x, owner.dim).copy()
    owner.p_value = float(value)
    state.gbest = owner.p.copy()
    state.gbest_value = float(value)
    return True


def swarm_diversity(positions, span) -> float:
    """Mean distance to the centroid divided by the box-diagonal length."""
    X = np.atleast_2d(np.asarray(positions, dtype=float))
    diag = float(np.linalg.norm(span))
    if np.all(X == X[0]):
        return 0.0
    centred = X - X.mean(axis=0)
    return float(np.sum(np.sqrt(np.sum(centred**2, axis=1)))) / (X.shape[0] * diag)


def diversity(state: SwarmState, f: Objective) -> float:
    return swarm_diversity(state.positions(), f.span)
