import math

import numpy as np
import pytest

from gradpso.core import ConfigError, EvalBudget, Objective, RngStream
from gradpso.hybrids import (
    STRATEGIES,
    HybridSpec,
    LocalMinimaArchive,
    decay_coefficient,
    dgpsogs_velocity,
    four_term_velocity,
    grad_replace_velocity,
    maeda_step,
    minimize,
    psog_velocity,
    run_concurrent,
    run_gpso,
    run_grpso,
    run_strategy,
    run_two_phase,
    select_maeda_particles,
)
from gradpso.objectives import make_objective
from gradpso.swarm import Particle, PsoParams, init_swarm, pso_velocity


def particle(x, v=None, p=None):
    x = np.asarray(x, dtype=float)
    v = np.zeros_like(x) if v is None else np.asarray(v, dtype=float)
    p = x.copy() if p is None else np.asarray(p, dtype=float)
    return Particle(x, v, p, 0.0, 0.0)


def run(kind, f, n=20, evals=2000, seed=0, **kw):
    return run_strategy(f, HybridSpec(kind=kind, **kw), n, EvalBudget(evals), RngStream(seed))


class TestDgpsogs:
    def test_normalised_gradient_term(self):
        p = particle([3, 4])
        params = PsoParams(omega=0, c1=1, c2=0)
        v = dgpsogs_velocity(p, np.zeros(2), 0.0, params, HybridSpec(), grad=[6, 8], r1=1.0, r2=1.0)
        np.testing.assert_allclose(v, [-0.6, -0.8])

    def test_zero_gradient(self):
        p = particle([3, 4], v=[1, 1])
        params = PsoParams(omega=1, c1=1, c2=0)
        v = dgpsogs_velocity(p, np.zeros(2), 0.0, params, HybridSpec(), grad=[0, 0], r1=1.0, r2=1.0)
        np.testing.assert_array_equal(v, [1, 1])

    def test_collapsed_social_term_clamped(self):
        p = particle([0, 0])
        params = PsoParams(omega=0, c1=0, c2=1)
        vmax = np.array([2.56, 2.56])
        v = dgpsogs_velocity(p, np.array([1.0, 0.0]), 0.0, params, HybridSpec(), grad=[0, 0], vmax=vmax, r1=1.0, r2=1.0)
        np.testing.assert_array_equal(v, [2.56, 0.0])
        assert np.all(np.isfinite(v))

    def test_high_diversity_is_plain_pso(self):
        p = particle([1, 1], v=[0.3, -0.2], p=[0, 2])
        params = PsoParams()
        a = dgpsogs_velocity(p, np.zeros(2), 0.5, params, HybridSpec(), RngStream(3), grad=[9, 9], vmax=np.ones(2))
        b = pso_velocity(p, np.zeros(2), params, RngStream(3), np.ones(2))
        np.testing.assert_array_equal(a, b)


class TestGradReplace:
    def test_pure_gradient(self):
        v = grad_replace_velocity(particle([1, 1]), np.zeros(2), HybridSpec(delta=1, c=1), [3, -2])
        np.testing.assert_array_equal(v, [-3, 2])

    def test_pure_social(self):
        v = grad_replace_velocity(particle([1, 1]), np.array([4.0, -1.0]), HybridSpec(delta=0, c=1), [3, -2])
        np.testing.assert_array_equal(v, [3, -2])

    def test_mixed(self):
        v = grad_replace_velocity(particle([0, 0]), np.array([0.0, 2.0]), HybridSpec(delta=0.5, c=2), [2, 0])
        np.testing.assert_array_equal(v, [-2, 2])

    def test_literal_sign_flag(self):
        v = grad_replace_velocity(
            particle([0, 0]), np.array([0.0, 2.0]), HybridSpec(delta=0.5, c=2, literal_sign=True), [2, 0]
        )
        np.testing.assert_array_equal(v, [2, -2])


class TestFourTerm:
    def test_gradient_only(self):
        params = PsoParams(omega=0, c1=0, c2=0)
        v = four_term_velocity(particle([1, 1], v=[5, 5]), np.zeros(2), params, 0.1, [2, -4], r1=1.0, r2=1.0)
        np.testing.assert_allclose(v, [-0.2, 0.4])

    def test_eta_zero_matches_pso(self):
        p = particle([1, -1], v=[0.2, 0.1], p=[0.5, 0.5])
        a = four_term_velocity(p, np.zeros(2), PsoParams(), 0.0, None, RngStream(5), np.ones(2))
        b = pso_velocity(p, np.zeros(2), PsoParams(), RngStream(5), np.ones(2))
        np.testing.assert_array_equal(a, b)

    def test_decay(self):
        c = decay_coefficient(2.0, 4)
        assert c == 1.0
        assert decay_coefficient(c, 4) == 0.5

    def test_engine_applies_decay(self):
        f = make_objective("f1_sphere", 3)
        res = run("four_term", f, n=5, evals=5 + 5 * 3, decay_enabled=True, decay_horizon=10)
        assert res.info["iterations"] == 3


class TestPsog:
    def test_scaled_unit_gradient(self):
        v = psog_velocity([3, 4], [1, 0], HybridSpec(c3=0, c4=1), r4=1.0)
        np.testing.assert_allclose(v, [-5, 0])

    def test_c4_zero(self):
        np.testing.assert_array_equal(psog_velocity([3, 4], [1, 0], HybridSpec(c3=0.5, c4=0)), [1.5, 2])

    def test_zero_gradient(self):
        v = psog_velocity([3, 4], [0, 0], HybridSpec(c3=2, c4=1), r4=1.0)
        np.testing.assert_array_equal(v, [6, 8])

    def test_metric_used(self):
        B = np.diag([1.0, 0.0])
        v = psog_velocity([0, 5], [1, 1], HybridSpec(c3=0, c4=1), B=B, r4=0.5)
        np.testing.assert_allclose(v, [-2.5, 0])

    def test_kind_from_order(self):
        assert HybridSpec.from_dict({"kind": "psog", "psog_order": 2}).kind == "psog2"
        assert HybridSpec(kind="psog1").psog_order == 1


class TestMaeda:
    @pytest.mark.parametrize("scheme,n,expected", [("all", 6, 6), ("best_only", 6, 1), ("half", 5, 3), ("half", 6, 3)])
    def test_selection_counts(self, scheme, n, expected):
        f = make_objective("f1_sphere", 3)
        st = init_swarm(f, n, RngStream(0))
        assert len(select_maeda_particles(st, scheme)) == expected

    def test_best_only_is_gbest_owner(self):
        f = make_objective("f1_sphere", 3)
        st = init_swarm(f, 6, RngStream(1))
        assert select_maeda_particles(st, "best_only") == [st.gbest_index]

    def test_half_takes_best_pbests(self):
        f = make_objective("f1_sphere", 3)
        st = init_swarm(f, 7, RngStream(2))
        chosen = select_maeda_particles(st, "half")
        worst_chosen = max(st.particles[i].p_value for i in chosen)
        best_other = min(st.particles[i].p_value for i in range(7) if i not in chosen)
        assert worst_chosen <= best_other

    @pytest.mark.parametrize("scheme", ["all", "best_only", "half"])
    def test_eval_accounting(self, scheme):
        f = make_objective("f1_sphere", 4)
        st = init_swarm(f, 6, RngStream(0))
        for _ in range(3):
            before = f.eval_count
            maeda_step(st, f, PsoParams(), HybridSpec(kind="maeda_spsa", scheme=scheme))
            k = len(st.notes["hybrid"])
            assert f.eval_count - before == 6 + 2 * k
            assert st.notes["spsa_evals"] == 2 * k

    def test_converges_on_sphere(self):
        res = run("maeda_spsa", make_objective("f1_sphere", 5), evals=6000)
        assert res.value < 1e-3


class TestReductions:
    """Coupled rules at their degenerate settings follow standard PSO exactly."""

    @pytest.mark.parametrize(
        "kw", [dict(kind="four_term", eta=0.0), dict(kind="psog1", c3=1.0, c4=0.0), dict(kind="dgpsogs", diversity_low=0.0)]
    )
    def test_bit_identical_history(self, kw):
        base = run("standard_pso", make_objective("f2_rosenbrock", 5), evals=3000, seed=4)
        spec = dict(kw)
        res = run(spec.pop("kind"), make_objective("f2_rosenbrock", 5), evals=3000, seed=4, **spec)
        assert res.history == base.history
        np.testing.assert_array_equal(res.x, base.x)


class TestSequential:
    def test_gpso_refinement_monotone(self):
        f = make_objective("f2_rosenbrock", 5)
        res = run_gpso(f, HybridSpec(kind="gpso", inner_pso_iters=10), 10, EvalBudget(4000), RngStream(0))
        assert res.info["refinements"]
        for before, after in res.info["refinements"]:
            assert after <= before

    def test_gpso_constant_objective(self):
        f = Objective("flat", lambda x: 1.5, [-1, -1], [1, 1], grad=lambda x: np.zeros(2))
        res = run_gpso(f, HybridSpec(kind="gpso"), 5, EvalBudget(500), RngStream(0))
        assert res.value == 1.5

    def test_gpso_sphere(self):
        f = make_objective("f1_sphere", 10)
        res = run_gpso(f, HybridSpec(kind="gpso"), 20, EvalBudget(20_000), RngStream(0))
        assert res.value < 1e-6
        assert f.eval_count <= 20_000

    def test_grpso_sphere_and_archive(self):
        f = make_objective("f1_sphere", 10)
        res = run_grpso(f, HybridSpec(kind="grpso"), 20, EvalBudget(20_000), RngStream(0))
        assert res.value < 1e-8
        sizes = res.info["archive_sizes"]
        assert sizes[0] == 1
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))

    def test_archive_merges_close_minima(self):
        arch = LocalMinimaArchive(0.5)
        assert not arch.insert([0, 0], 1.0)
        assert arch.insert([0.1, 0], 0.5)
        assert not arch.insert([2, 0], 0.7)
        assert len(arch) == 2 and arch.best()[1] == 0.5

    def test_repulsion_skips_self(self):
        f = make_objective("f1_sphere", 2)
        res = run_grpso(f, HybridSpec(kind="grpso", inner_pso_iters=3), 4, EvalBudget(1500), RngStream(2))
        assert np.isfinite(res.value)

    def test_two_phase_not_worse_than_phase1(self):
        f = make_objective("f2_rosenbrock", 5)
        res = run_two_phase(f, HybridSpec(kind="two_phase"), 20, EvalBudget(5000), RngStream(1))
        assert res.value <= res.info["phase1_value"]
        assert res.info["switch_evals"] <= 3500
        assert res.evals <= 5000

    def test_two_phase_budget_edge(self, caplog):
        f = make_objective("f1_sphere", 3)
        # the whole budget goes to PSO: 0.99 * 100 = 99 evals, one remains
        res = run_two_phase(f, HybridSpec(kind="two_phase", phase_split=0.99), 10, EvalBudget(100), RngStream(0))
        assert res.evals <= 100
        assert res.value <= res.info["phase1_value"]

    def test_wrapper_checks_kind(self):
        with pytest.raises(ConfigError):
            run_gpso(make_objective("f1_sphere", 2), HybridSpec(kind="grpso"), 4, EvalBudget(100), RngStream(0))


class TestIslands:
    def test_single_island_reduces_to_base(self):
        base = run("standard_pso", make_objective("f1_sphere", 4), n=10, evals=1500, seed=3)
        one = run_concurrent(
            make_objective("f1_sphere", 4),
            HybridSpec(kind="islands", islands=1, island_kinds=("standard_pso",)),
            10,
            EvalBudget(1500),
            RngStream(3),
        )
        assert one.history == base.history
        assert one.value == base.value

    def test_final_is_min_over_islands(self):
        f = make_objective("f2_rosenbrock", 4)
        res = run_concurrent(f, HybridSpec(kind="islands", islands=3), 10, EvalBudget(6000), RngStream(0))
        assert res.value == min(res.info["island_values"])
        assert f.eval_count <= 6000

    def test_shared_best_non_increasing(self):
        f = make_objective("f2_rosenbrock", 4)
        res = run_concurrent(
            f, HybridSpec(kind="islands", exchange_period=2), 10, EvalBudget(8000), RngStream(1)
        )
        h = res.info["shared_history"]
        assert len(h) > 1
        assert all(a >= b for a, b in zip(h, h[1:]))


class TestSpec:
    def test_identifiers(self):
        assert STRATEGIES == (
            "standard_pso", "maeda_spsa", "dgpsogs", "grad_replace", "four_term",
            "psog1", "psog2", "gpso", "grpso", "two_phase", "islands",
        )

    def test_aliases(self):
        assert HybridSpec(kind="gpso_sequential").kind == "gpso"
        assert HybridSpec(kind="concurrent_islands").kind == "islands"

    @pytest.mark.parametrize(
        "bad", [dict(kind="nope"), dict(delta=1.5), dict(c=0), dict(scheme="some"), dict(phase_split=1.0), dict(islands=0)]
    )
    def test_validation(self, bad):
        with pytest.raises(ConfigError):
            HybridSpec(**bad)

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            HybridSpec.from_dict({"kind": "gpso", "speed": 3})

    def test_roundtrip(self):
        spec = HybridSpec(kind="four_term", eta=0.02, label="ft")
        assert HybridSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("kind", STRATEGIES)
def test_every_strategy_respects_budget_and_monotone(kind):
    f = make_objective("f2_rosenbrock", 4)
    res = run(kind, f, n=8, evals=1200, seed=5)
    assert res.evals <= 1200 and f.eval_count <= 1200
    values = [h[2] for h in res.history]
    assert all(a >= b for a, b in zip(values, values[1:]))
    evals = [h[1] for h in res.history]
    assert all(a < b for a, b in zip(evals, evals[1:]))
    assert np.isfinite(res.value)
    assert res.value == pytest.approx(f.func(res.x), abs=1e-12)


@pytest.mark.parametrize("kind", STRATEGIES)
def test_every_strategy_handles_noise_and_plateaus(kind):
    for name in ("f3_step", "f4_quartic"):
        f = make_objective(name, 3, seed=1)
        res = run(kind, f, n=6, evals=600, seed=1)
        assert res.evals <= 600 and np.isfinite(res.value)


def test_minimize_wrapper():
    res = minimize(make_objective("f1_sphere", 3), "gpso", n_particles=10, max_evals=2000, seed=1)
    assert res.value < 1e-8
