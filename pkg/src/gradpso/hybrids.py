"""Gradient/swarm hybrid strategies as interchangeable engines.

Coupled rules modify the particle velocity (``dgpsogs``, ``grad_replace``,
``four_term``, ``psog1``/``psog2``, ``maeda_spsa``); sequential schedules
alternate whole phases (``gpso``, ``grpso``, ``two_phase``); ``islands`` runs
several engines side by side and shares the best point every few iterations.

Every engine exposes the same small protocol (``start``, ``step``,
``finalize``, ``adopt``) and is driven by :func:`run_strategy`, which
enforces the evaluation budget and records the convergence history.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import BudgetExhausted, ConfigError, EvalBudget, Objective, RngStream, as_vector
from .gradsearch import QuasiNewtonState, bfgs_update, local_search, spsa_gain, spsa_gradient
from .swarm import (
    Particle,
    PsoParams,
    SwarmState,
    diversity,
    init_swarm,
    install_gbest,
    pso_velocity,
    step_swarm,
)

log = logging.getLogger(__name__)

__all__ = [
    "STRATEGIES",
    "HybridSpec",
    "LocalMinimaArchive",
    "RunResult",
    "dgpsogs_velocity",
    "grad_replace_velocity",
    "four_term_velocity",
    "decay_coefficient",
    "psog_velocity",
    "select_maeda_particles",
    "maeda_step",
    "make_engine",
    "run_strategy",
    "run_gpso",
    "run_grpso",
    "run_two_phase",
    "run_concurrent",
    "minimize",
]

STRATEGIES = (
    "standard_pso",
    "maeda_spsa",
    "dgpsogs",
    "grad_replace",
    "four_term",
    "psog1",
    "psog2",
    "gpso",
    "grpso",
    "two_phase",
    "islands",
)
ISLAND_ONLY = ("multistart_bfgs",)
_ALIASES = {"gpso_sequential": "gpso", "concurrent_islands": "islands"}
SCHEMES = ("all", "best_only", "half")


@dataclass(frozen=True)
class HybridSpec:
    """Strategy identifier plus every strategy parameter.

    Only the fields relevant to ``kind`` are read. ``None`` means "use the
    problem-scaled default": ``eta`` is 0.01 for ``four_term`` and
    0.01 * range for ``maeda_spsa``; ``inner_local_evals`` is 200 * D;
    ``repulsion_radius`` is 0.1 * range; ``spsa_c`` is 0.05 * range;
    ``decay_horizon`` is the iteration count the budget allows.
    """

    kind: str = "standard_pso"
    label: Optional[str] = None
    delta: float = 0.5
    c: float = 0.5
    literal_sign: bool = False
    c3: float = 1.0
    c4: float = 0.5
    eta: Optional[float] = None
    diversity_low: float = 1e-3
    epsilon: float = 1e-10
    scheme: str = "all"
    spsa_c: Optional[float] = None
    decay_enabled: bool = False
    decay_horizon: Optional[int] = None
    phase_split: float = 0.7
    inner_pso_iters: int = 50
    inner_local_evals: Optional[int] = None
    local_method: str = "bfgs"
    islands: int = 2
    exchange_period: int = 10
    island_kinds: Tuple[str, ...] = ("standard_pso", "multistart_bfgs")
    repulsion_radius: Optional[float] = None
    repulsion_gain: float = 1.0
    pso: PsoParams = PsoParams()

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "island_kinds", tuple(self.island_kinds))
        if kind not in STRATEGIES + ISLAND_ONLY:
            raise ConfigError(f"unknown strategy {self.kind!r}")
        if not 0 <= self.delta <= 1:
            raise ConfigError("delta must lie in [0, 1]")
        if self.c <= 0:
            raise ConfigError("c must be positive")
        if self.c3 < 0 or self.c4 < 0:
            raise ConfigError("c3 and c4 must be non-negative")
        if self.eta is not None and self.eta < 0:
            raise ConfigError("eta must be non-negative")
        if self.diversity_low < 0 or self.epsilon <= 0:
            raise ConfigError("diversity_low must be >= 0 and epsilon > 0")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.decay_horizon is not None and self.decay_horizon <= 2:
            raise ConfigError("decay_horizon must exceed 2")
        if not 0 < self.phase_split < 1:
            raise ConfigError("phase_split must lie in (0, 1)")
        if self.inner_pso_iters < 1 or (self.inner_local_evals is not None and self.inner_local_evals < 1):
            raise ConfigError("inner phase budgets must be >= 1")
        if self.islands < 1 or self.exchange_period < 1:
            raise ConfigError("islands and exchange_period must be >= 1")
        for k in self.island_kinds:
            if _ALIASES.get(k, k) not in STRATEGIES + ISLAND_ONLY or k in ("islands", "concurrent_islands"):
                raise ConfigError(f"invalid island kind {k!r}")
        if self.repulsion_gain < 0 or (self.repulsion_radius is not None and self.repulsion_radius < 0):
            raise ConfigError("repulsion parameters must be non-negative")

    @property
    def name(self) -> str:
        return self.label or self.kind

    @property
    def psog_order(self) -> int:
        return 2 if self.kind == "psog2" else 1

    @classmethod
    def from_dict(cls, data) -> "HybridSpec":
        if isinstance(data, str):
            return cls(kind=data)
        if isinstance(data, HybridSpec):
            return data
        data = dict(data)
        known = {f.name for f in fields(cls)} | {"psog_order"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown strategy field(s): {', '.join(sorted(unknown))}")
        order = data.pop("psog_order", None)
        if data.get("kind") == "psog":
            if order not in (None, 1, 2):
                raise ConfigError("psog_order must be 1 or 2")
            data["kind"] = "psog2" if order == 2 else "psog1"
        if "pso" in data and isinstance(data["pso"], dict):
            try:
                data["pso"] = PsoParams(**data["pso"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad pso parameters: {exc}") from None
        return cls(**data)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, PsoParams):
                value = {g.name: getattr(value, g.name) for g in fields(value)}
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


@dataclass
class LocalMinimaArchive:
    """Insert-only list of distinct local minima (pairwise farther apart than ``radius``)."""

    radius: float
    entries: List[Tuple[np.ndarray, float]] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def insert(self, x, value: float) -> bool:
        """Add a minimum; returns ``True`` when it coincides with an archived one."""
        x = as_vector(x)
        for k, (loc, val) in enumerate(self.entries):
            if np.linalg.norm(x - loc) <= self.radius:
                if value < val:
                    self.entries[k] = (x.copy(), float(value))
                return True
        self.entries.append((x.copy(), float(value)))
        return False

    def best(self):
        return min(self.entries, key=lambda e: e[1])


@dataclass
class RunResult:
    strategy: str
    x: np.ndarray
    value: float
    evals: int
    history: List[Tuple[int, int, float, float]]
    info: dict = field(default_factory=dict)


# --- coupled velocity rules -------------------------------------------------


def _unit(v):
    n = float(np.linalg.norm(v))
    return v / n if n > 0 and np.isfinite(n) else np.zeros_like(v)


def dgpsogs_velocity(
    particle: Particle,
    gbest,
    div: float,
    params: PsoParams,
    spec: HybridSpec,
    stream: Optional[RngStream] = None,
    grad=None,
    vmax=None,
    omega=None,
    r1=None,
    r2=None,
):
    """Diversity-switched rule: plain PSO while ``div > diversity_low``.

    Below the threshold the cognitive term follows the unit negative gradient
    and the social term is divided by ``div + epsilon``.
    """
    if div > spec.diversity_low:
        return pso_velocity(particle, gbest, params, stream, vmax, omega=omega, r1=r1, r2=r2)
    d = particle.dim
    if r1 is None:
        r1 = stream.uniform(d) if params.per_dimension_rand else stream.uniform()
    if r2 is None:
        r2 = stream.uniform(d) if params.per_dimension_rand else stream.uniform()
    w = params.omega if omega is None else omega
    v = (
        w * particle.v
        + params.c1 * r1 * _unit(-np.asarray(grad, dtype=float))
        + params.c2 * r2 * ((gbest - particle.x) / (div + spec.epsilon))
    )
    return v if vmax is None else np.clip(v, -vmax, vmax)


def grad_replace_velocity(particle: Particle, gbest, spec: HybridSpec, grad, vmax=None):
    """``V + c (delta (-grad) + (1 - delta)(G - X))``.

    With ``spec.literal_sign`` the bracket is subtracted instead, as the
    rule is sometimes printed.
    """
    bracket = spec.delta * (-np.asarray(grad, dtype=float)) + (1.0 - spec.delta) * (gbest - particle.x)
    v = particle.v - spec.c * bracket if spec.literal_sign else particle.v + spec.c * bracket
    return v if vmax is None else np.clip(v, -vmax, vmax)


def decay_coefficient(c: float, horizon: int) -> float:
    """One application of ``c <- c - 2c/n``."""
    return c - 2.0 * c / horizon


def four_term_velocity(
    particle: Particle, gbest, params: PsoParams, eta: float, grad=None, stream=None, vmax=None, omega=None, r1=None, r2=None
):
    """Standard update plus ``-eta * grad`` as a fourth term."""
    v = pso_velocity(particle, gbest, params, stream, vmax, omega=omega, r1=r1, r2=r2, clamp=False)
    if eta:
        v = v - eta * np.asarray(grad, dtype=float)
    return v if vmax is None else np.clip(v, -vmax, vmax)


def psog_velocity(v_pso, grad, spec: HybridSpec, B=None, r4: Optional[float] = None, stream=None, vmax=None):
    """``c3 V_pso + c4 r4 |V_pso| * unit(-B grad)``; ``B`` defaults to the identity."""
    v_pso = np.asarray(v_pso, dtype=float)
    v = spec.c3 * v_pso
    if spec.c4:
        g = np.asarray(grad, dtype=float)
        direction = -(g if B is None else B @ g)
        if float(np.linalg.norm(direction)) > 0:
            if r4 is None:
                r4 = stream.uniform()
            v = v + spec.c4 * r4 * _unit(direction) * float(np.linalg.norm(v_pso))
    return v if vmax is None else np.clip(v, -vmax, vmax)


def select_maeda_particles(state: SwarmState, scheme: str) -> List[int]:
    """Indices that take the SPSA rule: everyone, the gbest owner, or the better half."""
    n = state.size
    if scheme == "all":
        return list(range(n))
    if scheme == "best_only":
        return [state.gbest_index]
    if scheme == "half":
        order = sorted(range(n), key=lambda j: (state.particles[j].p_value, j))
        return sorted(order[: math.ceil(n / 2)])
    raise ValueError(f"unknown scheme {scheme!r}")


def maeda_step(
    state: SwarmState, f: Objective, params: PsoParams, spec: HybridSpec, eta=None, c_perturb=None
) -> SwarmState:
    """One swarm step where selected particles replace ``omega V`` by ``-eta * SPSA gradient``.

    Each selected particle spends two extra evaluations on its SPSA probes.
    ``state.notes`` records the selected indices and the SPSA evaluation count.
    """
    t = state.t
    if eta is None:
        eta = spsa_gain(0.01 * f.span, t)
    if c_perturb is None:
        c_perturb = spsa_gain(spec.spsa_c if spec.spsa_c is not None else 0.05 * f.span, t)
    chosen = set(select_maeda_particles(state, spec.scheme))
    state.notes["hybrid"] = sorted(chosen)
    state.notes["spsa_evals"] = 0

    def rule(st, i, p, nbest):
        if i not in chosen:
            return pso_velocity(p, nbest, params, p.rng, st.vmax, omega=params.inertia(t))
        ghat = spsa_gradient(f, p.x, c_perturb, p.aux)
        st.notes["spsa_evals"] += 2
        v = pso_velocity(p, nbest, params, p.rng, None, omega=0.0, clamp=False) - eta * ghat
        return np.clip(v, -st.vmax, st.vmax)

    return step_swarm(state, f, params, rule)


# --- engines ----------------------------------------------------------------


class Engine:
    """Shared state for all strategies; subclasses implement ``start`` and ``step``."""

    def __init__(self, f: Objective, spec: HybridSpec, n_particles: int, stream: RngStream, budget: EvalBudget):
        self.f = f
        self.spec = spec
        self.n_particles = n_particles
        self.stream = stream
        self.budget = budget
        self.iteration = 0
        self.best_x = None
        self.best_value = np.inf
        self.done = False
        self.swarm: Optional[SwarmState] = None
        self.local_phase = False

    @property
    def local_evals(self) -> int:
        return self.spec.inner_local_evals or 200 * self.f.dim

    def note(self, x, value):
        if value < self.best_value:
            self.best_x = np.array(x, dtype=float)
            self.best_value = float(value)

    def note_swarm(self):
        if self.swarm is not None and self.swarm.gbest_value < np.inf:
            self.note(self.swarm.gbest, self.swarm.gbest_value)

    def start(self):
        raise NotImplementedError

    def step(self):
        raise NotImplementedError

    def finalize(self):
        self.note_swarm()

    def diversity(self) -> float:
        if self.swarm is None or self.local_phase:
            return -1.0
        return diversity(self.swarm, self.f)

    def adopt(self, x, value) -> bool:
        if not value < self.best_value:
            return False
        if self.swarm is not None:
            install_gbest(self.swarm, x, value)
        self.note(x, value)
        return True

    def refine(self, x0, f0, n_evals, grad_tol=1e-8):
        """Local search from ``x0`` with at most ``n_evals`` evaluations."""
        return local_search(self.spec.local_method, self.f, x0, EvalBudget(n_evals), grad_tol=grad_tol, f0=f0)


class SwarmEngine(Engine):
    """Standard PSO; coupled variants override :meth:`rule`."""

    def start(self):
        self.swarm = init_swarm(self.f, self.n_particles, self.stream.derive("swarm"), self.spec.pso)
        self.note_swarm()

    def rule(self):
        return None

    def step(self):
        try:
            step_swarm(self.swarm, self.f, self.params(), self.rule())
        finally:
            self.note_swarm()
        self.iteration += 1

    def params(self) -> PsoParams:
        return self.spec.pso


class DgpsogsEngine(SwarmEngine):
    def rule(self):
        st = self.swarm
        div = diversity(st, self.f)
        omega = self.spec.pso.inertia(st.t)
        if div > self.spec.diversity_low:
            return None

        def rule(st, i, p, nbest):
            g = self.f.gradient(p.x)
            return dgpsogs_velocity(p, nbest, div, self.spec.pso, self.spec, p.rng, g, st.vmax, omega)

        return rule


class GradReplaceEngine(SwarmEngine):
    def rule(self):
        def rule(st, i, p, nbest):
            g = self.f.gradient(p.x) if self.spec.delta else np.zeros(p.dim)
            return grad_replace_velocity(p, nbest, self.spec, g, st.vmax)

        return rule


class FourTermEngine(SwarmEngine):
    def __init__(self, *args):
        super().__init__(*args)
        self._params = self.spec.pso
        self.eta = 0.01 if self.spec.eta is None else self.spec.eta
        self.horizon = self.spec.decay_horizon or max(3, self.budget.max_evals // max(self.n_particles, 1))

    def params(self):
        return self._params

    def rule(self):
        if self.spec.decay_enabled:
            p = self._params
            self._params = replace(
                p, c1=decay_coefficient(p.c1, self.horizon), c2=decay_coefficient(p.c2, self.horizon)
            )
        params = self._params
        omega = params.inertia(self.swarm.t)

        def rule(st, i, p, nbest):
            g = self.f.gradient(p.x) if self.eta else None
            return four_term_velocity(p, nbest, params, self.eta, g, p.rng, st.vmax, omega)

        return rule


class PsogEngine(SwarmEngine):
    def rule(self):
        spec = self.spec
        omega = spec.pso.inertia(self.swarm.t)

        def rule(st, i, p, nbest):
            v_pso = pso_velocity(p, nbest, spec.pso, p.rng, st.vmax, omega=omega)
            if not spec.c4:
                return psog_velocity(v_pso, None, spec, vmax=st.vmax)
            g = self.f.gradient(p.x)
            B = None
            if spec.psog_order == 2:
                qn = p.memory.get("qn") or QuasiNewtonState.identity(p.dim)
                qn = bfgs_update(qn, p.x, g)
                p.memory["qn"] = qn
                B = qn.B
            return psog_velocity(v_pso, g, spec, B, stream=p.aux, vmax=st.vmax)

        return rule


class MaedaEngine(SwarmEngine):
    def __init__(self, *args):
        super().__init__(*args)
        self.hybrid_counts: List[int] = []

    def step(self):
        spec = self.spec
        t = self.swarm.t
        eta = spsa_gain(self.spec.eta if self.spec.eta is not None else 0.01 * self.f.span, t)
        try:
            maeda_step(self.swarm, self.f, spec.pso, spec, eta=eta)
        finally:
            self.note_swarm()
            self.hybrid_counts.append(len(self.swarm.notes.get("hybrid", ())))
        self.iteration += 1


class GpsoEngine(SwarmEngine):
    """PSO for ``inner_pso_iters`` iterations, then a local search from gbest; repeat."""

    def __init__(self, *args):
        super().__init__(*args)
        self._pso_iters = 0
        self.refinements: List[Tuple[float, float]] = []

    def step(self):
        if self._pso_iters < self.spec.inner_pso_iters:
            self.local_phase = False
            super().step()
            self._pso_iters += 1
            return
        self.local_phase = True
        st = self.swarm
        before = st.gbest_value
        res = self.refine(st.gbest, before, self.local_evals)
        install_gbest(st, res.x, res.value)
        self.refinements.append((before, st.gbest_value))
        self.note_swarm()
        self._pso_iters = 0
        self.iteration += 1


class GrpsoEngine(Engine):
    """Gradient search first, then a repelled PSO escaping archived minima; repeat."""

    def __init__(self, *args):
        super().__init__(*args)
        span = self.f.span
        radius = self.spec.repulsion_radius
        self.radius = 0.1 * float(np.max(span)) if radius is None else radius
        self.archive = LocalMinimaArchive(self.radius)
        self.sigma = 0.2 * span
        self.center = 0.5 * (self.f.lower + self.f.upper)
        self._pso_iters = 0
        self._loop = 0
        self.archive_sizes: List[int] = []

    def _descend(self, x0=None, f0=None):
        self.local_phase = True
        self.swarm = None
        if x0 is None:
            rng = self.stream.derive("restart").derive(self._loop)
            x0 = self.f.clip(self.center + self.sigma * rng.normal(size=self.f.dim))
        try:
            res = self.refine(x0, f0, self.local_evals)
        finally:
            self._loop += 1
        if np.isfinite(res.value):
            if self.archive.insert(res.x, res.value):
                self.sigma = self.sigma / 2.0
            self.note(res.x, res.value)
        self.archive_sizes.append(len(self.archive))

    def start(self):
        self._descend()

    def _repelled(self):
        entries = list(self.archive.entries)
        params = self.spec.pso
        gain, radius = self.spec.repulsion_gain, self.radius
        omega = params.inertia(self.swarm.t)

        def rule(st, i, p, nbest):
            v = pso_velocity(p, nbest, params, p.rng, None, omega=omega, clamp=False)
            for loc, _ in entries:
                diff = p.x - loc
                dist2 = float(diff @ diff)
                if 0.0 < dist2 <= radius**2:
                    v = v + gain * diff / dist2
            return np.clip(v, -st.vmax, st.vmax)

        return rule

    def step(self):
        if self.swarm is None:
            self.local_phase = False
            best_loc, _ = self.archive.best() if len(self.archive) else (self.center, None)
            stream = self.stream.derive("swarm").derive(self._loop)
            try:
                self.swarm = init_swarm(self.f, self.n_particles, stream, self.spec.pso, best_loc, self.sigma)
            finally:
                self.note_swarm()
            self._pso_iters = 0
        elif self._pso_iters < self.spec.inner_pso_iters:
            self.local_phase = False
            try:
                step_swarm(self.swarm, self.f, self.spec.pso, self._repelled())
            finally:
                self.note_swarm()
            self._pso_iters += 1
        else:
            st = self.swarm
            if len(self.archive) and st.gbest_value < self.archive.best()[1]:
                self._descend(st.gbest, st.gbest_value)
            else:
                self.center = self.best_x
                self._descend()
        self.iteration += 1

    def finalize(self):
        self.note_swarm()

    def adopt(self, x, value):
        if not value < self.best_value:
            return False
        self.note(x, value)
        self.center = self.best_x
        return True


class TwoPhaseEngine(SwarmEngine):
    """PSO for ``phase_split`` of the budget, then one local search from gbest."""

    def __init__(self, *args):
        super().__init__(*args)
        self.phase = 1
        self.phase1_value = np.inf
        self.switch_evals = None
        self._start_count = self.f.eval_count
        self.cap = int(self.spec.phase_split * self.budget.max_evals)

    def _used(self):
        return self.f.eval_count - self._start_count

    def step(self):
        if self.phase == 1:
            room = self.cap - self._used()
            if room > 0:
                try:
                    with self.f.limited(room):
                        super().step()
                except BudgetExhausted:
                    if self.f.remaining == 0:
                        raise
                    self.iteration += 1
            if self._used() >= self.cap or room <= 0:
                self.phase = 2
                self.phase1_value = self.swarm.gbest_value
                self.switch_evals = self._used()
            return
        self.local_phase = True
        remaining = min(self.f.remaining, self.budget.max_evals - self._used())
        if remaining < 1:
            log.info("two_phase: no evaluations left for the local phase; skipped")
        else:
            st = self.swarm
            # spend the whole remainder: no gradient-norm stop
            res = self.refine(st.gbest, st.gbest_value, remaining, grad_tol=0.0)
            install_gbest(st, res.x, res.value)
            self.note_swarm()
        self.done = True
        self.iteration += 1


class MultistartEngine(Engine):
    """Local searches from uniform random starts (an island building block)."""

    def start(self):
        self.local_phase = True
        self.restarts = 0
        self._search()

    def _search(self):
        rng = self.stream.derive("multistart").derive(self.restarts)
        self.restarts += 1
        x0 = self.f.lower + rng.uniform(self.f.dim) * self.f.span
        res = self.refine(x0, None, self.local_evals)
        if np.isfinite(res.value):
            self.note(res.x, res.value)

    def step(self):
        self._search()
        self.iteration += 1


def _advance(engine: Engine) -> bool:
    """Run one engine step; on budget exhaustion count the partial step and finalize."""
    try:
        engine.step()
        if engine.f.remaining == 0:
            engine.finalize()
            engine.done = True
        return True
    except BudgetExhausted:
        engine.iteration += 1
        engine.finalize()
        engine.done = True
        return False


class IslandsEngine(Engine):
    """Independent engines on cloned objectives, exchanging the best point every ``k`` iterations."""

    def __init__(self, *args):
        super().__init__(*args)
        n = self.spec.islands
        kinds = [self.spec.island_kinds[i % len(self.spec.island_kinds)] for i in range(n)]
        share, extra = divmod(self.budget.max_evals, n)
        self.clones: List[Objective] = []
        self.members: List[Engine] = []
        self._base_count = self.f.eval_count
        for i, kind in enumerate(kinds):
            clone = self.f.clone(i)
            clone.limit = share + (1 if i < extra else 0)
            stream = self.stream if i == 0 else self.stream.derive("island").derive(i)
            member_budget = EvalBudget(clone.limit, self.budget.max_iters)
            self.members.append(make_engine(replace(self.spec, kind=kind), clone, self.n_particles, stream, member_budget))
            self.clones.append(clone)
        self.shared_history: List[float] = []

    def _sync(self):
        self.f.eval_count = self._base_count + sum(c.eval_count for c in self.clones)
        self.f.grad_count = sum(c.grad_count for c in self.clones)
        for m in self.members:
            if m.best_x is not None:
                self.note(m.best_x, m.best_value)

    def start(self):
        for m in self.members:
            try:
                m.start()
            except BudgetExhausted:
                m.finalize()
                m.done = True
        self._sync()

    def step(self):
        for m in self.members:
            if not m.done:
                _advance(m)
        self.iteration += 1
        self._sync()
        if self.iteration % self.spec.exchange_period == 0 and len(self.members) > 1:
            for m in self.members:
                m.adopt(self.best_x, self.best_value)
            self.shared_history.append(self.best_value)
        if all(m.done for m in self.members):
            self.done = True

    def finalize(self):
        for m in self.members:
            m.finalize()
        self._sync()

    def diversity(self) -> float:
        return self.members[0].diversity()


_ENGINES = {
    "standard_pso": SwarmEngine,
    "maeda_spsa": MaedaEngine,
    "dgpsogs": DgpsogsEngine,
    "grad_replace": GradReplaceEngine,
    "four_term": FourTermEngine,
    "psog1": PsogEngine,
    "psog2": PsogEngine,
    "gpso": GpsoEngine,
    "grpso": GrpsoEngine,
    "two_phase": TwoPhaseEngine,
    "islands": IslandsEngine,
    "multistart_bfgs": MultistartEngine,
}


def make_engine(spec: HybridSpec, f: Objective, n_particles: int, stream: RngStream, budget: EvalBudget) -> Engine:
    if n_particles < 1:
        raise ConfigError("n_particles must be >= 1")
    return _ENGINES[spec.kind](f, spec, n_particles, stream, budget)


def _engine_info(engine: Engine) -> dict:
    info = {"iterations": engine.iteration}
    if isinstance(engine, MaedaEngine):
        info["hybrid_counts"] = engine.hybrid_counts
    if isinstance(engine, GpsoEngine):
        info["refinements"] = engine.refinements
    if isinstance(engine, GrpsoEngine):
        info["archive"] = engine.archive
        info["archive_sizes"] = engine.archive_sizes
    if isinstance(engine, TwoPhaseEngine):
        info["phase1_value"] = engine.phase1_value
        info["switch_evals"] = engine.switch_evals
    if isinstance(engine, IslandsEngine):
        info["shared_history"] = engine.shared_history
        info["island_values"] = [m.best_value for m in engine.members]
    return info


def run_strategy(
    f: Objective, spec: HybridSpec, n_particles: int, budget: EvalBudget, stream: RngStream
) -> RunResult:
    """Drive one strategy until the budget (evaluations or iterations) is spent.

    The history holds ``(iteration, evals, best_value, diversity)`` after the
    start-up and after every iteration that consumed evaluations.
    """
    if isinstance(spec, str):
        spec = HybridSpec(kind=spec)
    start = f.eval_count
    engine = make_engine(spec, f, n_particles, stream, budget)
    history: List[Tuple[int, int, float, float]] = []

    def record():
        evals = f.eval_count - start
        if engine.best_value < np.inf and (not history or evals > history[-1][1]):
            history.append((engine.iteration, evals, engine.best_value, engine.diversity()))

    with f.limited(budget.max_evals):
        try:
            engine.start()
        except BudgetExhausted:
            engine.finalize()
            engine.done = True
        record()
        while not engine.done and engine.iteration < budget.max_iters:
            _advance(engine)
            record()
    x = engine.best_x if engine.best_x is not None else np.full(f.dim, np.nan)
    return RunResult(spec.name, x, engine.best_value, f.eval_count - start, history, _engine_info(engine))


def _run_kind(kind, f, spec, n_particles, budget, stream):
    if spec.kind != kind:
        raise ConfigError(f"expected a {kind} spec, got {spec.kind}")
    return run_strategy(f, spec, n_particles, budget, stream)


def run_gpso(f, spec: HybridSpec, n_particles: int, budget: EvalBudget, stream: RngStream) -> RunResult:
    return _run_kind("gpso", f, spec, n_particles, budget, stream)


def run_grpso(f, spec: HybridSpec, n_particles: int, budget: EvalBudget, stream: RngStream) -> RunResult:
    return _run_kind("grpso", f, spec, n_particles, budget, stream)


def run_two_phase(f, spec: HybridSpec, n_particles: int, budget: EvalBudget, stream: RngStream) -> RunResult:
    return _run_kind("two_phase", f, spec, n_particles, budget, stream)


def run_concurrent(f, spec: HybridSpec, n_particles: int, budget: EvalBudget, stream: RngStream) -> RunResult:
    return _run_kind("islands", f, spec, n_particles, budget, stream)


def minimize(
    f: Objective,
    strategy: str = "standard_pso",
    n_particles: int = 30,
    max_evals: int = 10_000,
    seed: int = 0,
    max_iters: int = 10**9,
    **spec_fields,
) -> RunResult:
    """Convenience wrapper: ``minimize(make_objective("f1_sphere", 10), "gpso", seed=3)``."""
    spec = HybridSpec(kind=strategy, **spec_fields)
    return run_strategy(f, spec, n_particles, EvalBudget(max_evals, max_iters), RngStream(seed))
