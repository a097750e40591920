"""Multi-seed, equal-budget experiment runner with CSV/JSON outputs."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .core import ConfigError, EvalBudget, RngStream
from .hybrids import HybridSpec, run_strategy
from .objectives import SUITE, make_objective

__all__ = [
    "ExperimentConfig",
    "TraceRecord",
    "Summary",
    "CellResult",
    "TRACE_HEADER",
    "load_config",
    "apply_overrides",
    "run_cell",
    "run_experiment",
    "summarize",
    "write_outputs",
    "format_table",
]

TRACE_HEADER = ("strategy", "seed", "iter", "evals", "gbest", "diversity")


@dataclass
class ExperimentConfig:
    objective: str
    dim: int
    Np: int = 30
    budget: EvalBudget = field(default_factory=lambda: EvalBudget(30_000))
    strategies: List[HybridSpec] = field(default_factory=lambda: [HybridSpec()])
    seeds: List[int] = field(default_factory=lambda: [0])
    success_threshold: Optional[float] = None
    trace_stride: int = 10

    def __post_init__(self):
        if self.objective not in SUITE:
            raise ConfigError(f"unknown objective {self.objective!r}")
        entry = SUITE[self.objective]
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ConfigError("dim must be a positive integer")
        if entry.fixed_dim is not None and self.dim != entry.fixed_dim:
            raise ConfigError(f"{self.objective} supports only dim={entry.fixed_dim}")
        if self.objective == "f2_rosenbrock" and self.dim < 2:
            raise ConfigError("f2_rosenbrock needs dim >= 2")
        if not isinstance(self.Np, int) or self.Np < 1:
            raise ConfigError("Np must be a positive integer")
        if isinstance(self.budget, dict):
            try:
                self.budget = EvalBudget(**self.budget)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad budget: {exc}") from None
        if isinstance(self.budget, int):
            self.budget = EvalBudget(self.budget)
        if not isinstance(self.budget, EvalBudget):
            raise ConfigError("budget must be {max_evals, max_iters}")
        if isinstance(self.strategies, (str, dict, HybridSpec)):
            self.strategies = [self.strategies]
        try:
            self.strategies = [HybridSpec.from_dict(s) for s in self.strategies]
        except TypeError as exc:
            raise ConfigError(f"bad strategy: {exc}") from None
        names = [s.name for s in self.strategies]
        if not names:
            raise ConfigError("at least one strategy is required")
        if len(set(names)) != len(names):
            raise ConfigError("strategy identifiers must be unique (set 'label' to disambiguate)")
        if isinstance(self.seeds, int) or not self.seeds:
            raise ConfigError("seeds must be a non-empty list of integers")
        if not all(isinstance(s, int) and not isinstance(s, bool) for s in self.seeds):
            raise ConfigError("seeds must be integers")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        self.seeds = list(self.seeds)
        if not isinstance(self.trace_stride, int) or self.trace_stride < 1:
            raise ConfigError("trace_stride must be an integer >= 1")

    @property
    def threshold(self) -> float:
        """Success threshold: explicit, else 0.999 for foxholes and optimum + 1e-3 otherwise."""
        if self.success_threshold is not None:
            return float(self.success_threshold)
        if self.objective == "f5_foxholes":
            return 0.999
        return SUITE[self.objective].optimum(self.dim)[0] + 1e-3

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        missing = {"objective", "dim"} - set(data)
        if missing:
            raise ConfigError(f"missing config key(s): {', '.join(sorted(missing))}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "dim": self.dim,
            "Np": self.Np,
            "budget": {"max_evals": self.budget.max_evals, "max_iters": self.budget.max_iters},
            "strategies": [s.to_dict() for s in self.strategies],
            "seeds": list(self.seeds),
            "success_threshold": self.success_threshold,
            "trace_stride": self.trace_stride,
        }


def load_config(path) -> dict:
    """Read a JSON config file into a plain dict (validated later by :class:`ExperimentConfig`)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def apply_overrides(data: dict, overrides: Sequence[str]) -> dict:
    """Apply ``key=value`` strings; values are parsed as JSON when possible.

    ``budget.max_evals=5000`` style dotted keys reach into the budget object.
    """
    data = json.loads(json.dumps(data))
    known = {f.name for f in fields(ExperimentConfig)}
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        head, _, sub = key.partition(".")
        if head not in known:
            raise ConfigError(f"unknown config key {head!r} in override")
        if sub:
            if head != "budget" or sub not in ("max_evals", "max_iters"):
                raise ConfigError(f"unknown config key {key!r} in override")
            budget = data.get("budget") or {}
            if not isinstance(budget, dict):
                budget = {"max_evals": budget}
            budget[sub] = value
            data["budget"] = budget
        else:
            data[head] = value
    return data


class TraceRecord(NamedTuple):
    strategy: str
    seed: int
    iter: int
    evals: int
    gbest: float
    diversity: float


@dataclass
class Summary:
    best_final: float
    median_final: float
    mean_final: float
    std_final: float
    success_rate: float
    median_evals_to_success: float
    n_runs: int

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = None if isinstance(v, float) and math.isinf(v) else v
        return out


@dataclass
class CellResult:
    strategy: str
    seed: int
    final: float
    evals: int
    evals_to_success: float
    records: List[TraceRecord]


def summarize(finals: Sequence[float], threshold: float, evals_to_success: Optional[Sequence[float]] = None) -> Summary:
    """Statistics over one strategy's runs.

    ``std_final`` is the sample deviation (0 for a single run). The median
    evaluations-to-success is taken over successful runs only and is ``inf``
    when no run succeeded.
    """
    finals = np.asarray(list(finals), dtype=float)
    if finals.size == 0:
        raise ValueError("summarize needs at least one final value")
    hits = finals < threshold
    std = float(np.std(finals, ddof=1)) if finals.size > 1 else 0.0
    ets = np.inf
    if evals_to_success is not None:
        ok = [e for e in evals_to_success if np.isfinite(e)]
        if ok:
            ets = float(np.median(ok))
    return Summary(
        best_final=float(finals.min()),
        median_final=float(np.median(finals)),
        mean_final=float(finals.mean()),
        std_final=std,
        success_rate=float(hits.mean()),
        median_evals_to_success=ets,
        n_runs=int(finals.size),
    )


def run_cell(config: ExperimentConfig, spec: HybridSpec, seed: int) -> CellResult:
    """Run one (strategy, seed) pair on a fresh objective handle.

    Streams depend only on the seed, so all strategies of a seed share the
    same initial swarm and objective noise sequence.
    """
    f = make_objective(config.objective, config.dim, seed=seed)
    res = run_strategy(f, spec, config.Np, config.budget, RngStream(seed))
    if res.evals > config.budget.max_evals or f.eval_count > config.budget.max_evals:
        raise RuntimeError(f"{spec.name} seed {seed} used {res.evals} > {config.budget.max_evals} evaluations")
    threshold = config.threshold
    ets = next((float(ev) for _, ev, val, _ in res.history if val < threshold), math.inf)
    stride = config.trace_stride
    kept = [h for h in res.history if h[0] % stride == 0]
    if res.history and (not kept or kept[-1] is not res.history[-1]):
        kept.append(res.history[-1])
    records = [TraceRecord(spec.name, seed, it, ev, val, div) for it, ev, val, div in kept]
    return CellResult(spec.name, seed, res.value, res.evals, ets, records)


def _cell(args):
    return run_cell(*args)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> Tuple[Dict[str, Summary], List[TraceRecord]]:
    """Run every (strategy, seed) cell and summarise per strategy.

    ``jobs > 1`` farms cells out to worker processes; results are collected in
    (strategy, seed) order so the output does not depend on ``jobs``.
    """
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    cells = [(config, spec, seed) for spec in config.strategies for seed in config.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]
    summaries: Dict[str, Summary] = {}
    traces: List[TraceRecord] = []
    for spec in config.strategies:
        mine = [r for r in results if r.strategy == spec.name]
        summaries[spec.name] = summarize(
            [r.final for r in mine], config.threshold, [r.evals_to_success for r in mine]
        )
        for r in mine:
            traces.extend(r.records)
    return summaries, traces


def _num(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v == -1.0:
        return "-1"
    return repr(v)


def write_outputs(summaries: Dict[str, Summary], traces: Sequence[TraceRecord], out_dir) -> Tuple[Path, Path]:
    """Write ``traces.csv`` and ``summary.json`` into ``out_dir``."""
    out = Path(out_dir)
    trace_path = out / "traces.csv"
    summary_path = out / "summary.json"
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(trace_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for r in traces:
                w.writerow([r.strategy, r.seed, r.iter, r.evals, _num(r.gbest), _num(r.diversity)])
        payload = {name: s.to_json() for name, s in summaries.items()}
        summary_path.write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return trace_path, summary_path


def format_table(summaries: Dict[str, Summary]) -> str:
    """Aligned text table: strategy x (median final, success rate, median evals to success)."""
    header = ("strategy", "median_final", "success_rate", "median_evals_to_success")
    rows = [header]
    for name, s in summaries.items():
        ets = "inf" if math.isinf(s.median_evals_to_success) else f"{s.median_evals_to_success:.0f}"
        rows.append((name, f"{s.median_final:.6g}", f"{s.success_rate:.2f}", ets))
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for k, r in enumerate(rows):
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
