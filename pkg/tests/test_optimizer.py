"""Encoding, phase updates, controller measures, and full TLBO/ATLBO runs."""

import math

import numpy as np
import pytest

from mdgcluster.mdg import brute_force_optimum, mq, parse_mdg
from mdgcluster.optimizer import (
    Budget,
    SearchConfig,
    choose_peer,
    decode,
    diversification_measure,
    greedy_accept,
    initialize_population,
    intensification_measure,
    learner_phase_update,
    make_rng,
    quality_measure,
    run,
    run_atlbo,
    run_tlbo,
    teacher_phase_update,
)
from oracles import random_graph


class StubRng:
    """Injects fixed draws: r per dimension and the teaching factor."""

    def __init__(self, r=0.0, teaching_factor=1):
        self.r = r
        self.teaching_factor = teaching_factor

    def random(self, shape):
        return np.full(shape, self.r)

    def integers(self, low, high):
        return self.teaching_factor


class ConstantFis:
    def __init__(self, value):
        self.value = value

    def infer(self, quality, intensification, diversification):
        return self.value


class TestDecode:
    def test_round_half_up(self):
        assert decode(np.array([1.2, 1.6, 3.0]), 3).tolist() == [1, 2, 3]

    def test_half_up_then_clamp(self):
        assert decode(np.array([1.5, 2.5]), 2).tolist() == [2, 2]

    def test_identity_on_integers(self):
        assert decode(np.array([1.0, 1.0, 1.0]), 3).tolist() == [1, 1, 1]

    def test_out_of_range_clamped(self):
        assert decode(np.array([0.2, -3.0, 7.9]), 3).tolist() == [1, 1, 3]


class TestTeacherPhase:
    def test_zero_r_keeps_position(self):
        position = np.array([2.0, 3.0])
        updated = teacher_phase_update(position, np.array([4.0, 1.0]), np.array([3.0, 2.0]), 4, StubRng(r=0.0))
        assert updated.tolist() == [2.0, 3.0]

    def test_direct_arithmetic(self):
        updated = teacher_phase_update(
            np.array([2.0, 3.0]), np.array([4.0, 1.0]), np.array([3.0, 2.0]), 4, StubRng(r=0.5, teaching_factor=1)
        )
        assert updated.tolist() == [2.5, 2.5]

    def test_teaching_factor_cancels_difference(self):
        updated = teacher_phase_update(
            np.array([2.0, 3.0]), np.array([4.0, 4.0]), np.array([2.0, 2.0]), 4, StubRng(r=0.7, teaching_factor=2)
        )
        assert updated.tolist() == [2.0, 3.0]

    def test_clamped_to_bounds(self):
        updated = teacher_phase_update(
            np.array([1.0, 4.0]), np.array([4.0, 4.0]), np.array([4.0, 0.0]), 4, StubRng(r=1.0, teaching_factor=2)
        )
        assert np.all(updated >= 1.0) and np.all(updated <= 4.0)


class TestLearnerPhase:
    def test_zero_r_keeps_position(self):
        updated = learner_phase_update(np.array([2.0]), 0.5, np.array([3.0]), 0.9, 3, StubRng(r=0.0))
        assert updated.tolist() == [2.0]

    def test_better_self_moves_away_and_clamps(self):
        updated = learner_phase_update(np.array([1.0, 1.0]), 1.0, np.array([3.0, 3.0]), 0.5, 3, StubRng(r=0.5))
        assert updated.tolist() == [1.0, 1.0]

    def test_worse_self_moves_toward_peer(self):
        updated = learner_phase_update(np.array([1.0, 1.0]), 0.2, np.array([3.0, 3.0]), 0.9, 3, StubRng(r=0.5))
        assert updated.tolist() == [2.0, 2.0]

    def test_tie_treated_as_peer_not_better(self):
        # equal fitness: move away from the peer, not toward it
        updated = learner_phase_update(np.array([2.0]), 0.7, np.array([3.0]), 0.7, 4, StubRng(r=1.0))
        assert updated.tolist() == [1.0]


class TestChoosePeer:
    def test_never_self_and_all_values_reachable(self):
        rng = make_rng(0)
        seen = {choose_peer(rng, 5, 2) for _ in range(300)}
        assert 2 not in seen
        assert seen == {0, 1, 3, 4}

    def test_small_population_rejected(self):
        with pytest.raises(ValueError):
            choose_peer(make_rng(0), 1, 0)


class TestMeasures:
    def test_quality_extremes_and_midpoint(self):
        fitnesses = [1.0, 2.0, 3.0]
        assert quality_measure(fitnesses, 2) == 100.0
        assert quality_measure(fitnesses, 0) == 0.0
        assert quality_measure(fitnesses, 1) == 50.0

    def test_quality_uniform_population(self):
        assert quality_measure([1.5, 1.5], 0) == 100.0

    def test_intensification_identical_and_quarter(self):
        assert intensification_measure([1, 1, 2, 2], [1, 1, 2, 2]) == 0.0
        assert intensification_measure([1, 1, 2, 2], [1, 1, 2, 1]) == 25.0

    def test_intensification_canonicalizes_first(self):
        # same partition under different label names is distance zero
        assert intensification_measure([1, 1, 2], [5, 5, 3]) == 0.0

    def test_intensification_maximum_is_bounded_by_shared_first_label(self):
        # canonical vectors always open with cluster 1, so D-1 is the ceiling
        assert intensification_measure([1, 1, 1], [1, 2, 3]) == pytest.approx(100.0 * 2 / 3)

    def test_diversification_uniform_and_mixed(self):
        assert diversification_measure([[1, 1], [1, 1], [1, 1]], 0) == 0.0
        assert diversification_measure([[1, 1], [1, 2], [1, 1]], 0) == 25.0

    def test_diversification_needs_two(self):
        with pytest.raises(ValueError):
            diversification_measure([[1, 1]], 0)


class TestSearchConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="pop_size"):
            SearchConfig(pop_size=1)
        with pytest.raises(ValueError, match="initial population"):
            SearchConfig(pop_size=10, max_evals=5)
        with pytest.raises(ValueError, match="algorithm"):
            SearchConfig(algorithm="hillclimb")
        with pytest.raises(ValueError, match="seed"):
            SearchConfig(seed=-1)


class TestInitialization:
    def test_consumes_exactly_pop_size_evaluations(self, two_module):
        config = SearchConfig(pop_size=7, max_evals=100, seed=3)
        budget = Budget(config.max_evals)
        population = initialize_population(two_module, config, make_rng(3), budget)
        assert budget.used == 7
        assert population.size == 7

    def test_same_seed_is_bit_identical(self, chain3):
        config = SearchConfig(pop_size=6, max_evals=50, seed=11)
        a = initialize_population(chain3, config, make_rng(11), Budget(50))
        b = initialize_population(chain3, config, make_rng(11), Budget(50))
        assert np.array_equal(a.positions, b.positions)
        assert a.fitness == b.fitness
        assert a.best_index == b.best_index

    def test_single_module_graph_degenerates(self):
        graph = parse_mdg("Lonely")
        config = SearchConfig(pop_size=4, max_evals=10, seed=0)
        population = initialize_population(graph, config, make_rng(0), Budget(10))
        assert np.all(population.positions == 1.0)
        assert population.fitness == [0.0] * 4

    def test_budget_smaller_than_population_rejected(self, two_module):
        config = SearchConfig(pop_size=4, max_evals=10, seed=0)
        with pytest.raises(ValueError, match="budget"):
            initialize_population(two_module, config, make_rng(0), Budget(3))


class TestGreedyAccept:
    def _population(self, chain3):
        config = SearchConfig(pop_size=4, max_evals=100, seed=5)
        budget = Budget(100)
        return initialize_population(chain3, config, make_rng(5), budget), budget

    def test_strict_improvement_accepted(self, chain3):
        population, budget = self._population(chain3)
        worst = min(range(population.size), key=lambda i: population.fitness[i])
        optimal = np.array([1.0, 1.0, 2.0])  # decodes to the chain's optimum partition
        used = budget.used
        accepted = greedy_accept(population, worst, optimal, budget)
        assert accepted
        assert budget.used == used + 1
        assert population.fitness[worst] == pytest.approx(2.0 / 3.0)

    def test_equal_fitness_rejected(self, two_module):
        config = SearchConfig(pop_size=4, max_evals=100, seed=1)
        budget = Budget(100)
        population = initialize_population(two_module, config, make_rng(1), budget)
        index = population.best_index
        same = population.positions[index].copy()
        assert not greedy_accept(population, index, same, budget)

    def test_exhausted_budget_refuses_to_evaluate(self, two_module):
        config = SearchConfig(pop_size=4, max_evals=4, seed=1)
        budget = Budget(4)
        population = initialize_population(two_module, config, make_rng(1), budget)
        with pytest.raises(RuntimeError, match="budget"):
            greedy_accept(population, 0, population.positions[0].copy(), budget)


class TestRunTlbo:
    def test_budget_equal_to_population_returns_initial_best(self, chain3):
        config = SearchConfig(pop_size=8, max_evals=8, seed=21, algorithm="tlbo")
        result = run_tlbo(chain3, config)
        assert result.evals_used == 8
        assert result.iterations == 0
        assert result.phase_trace == []
        reference = initialize_population(chain3, config, make_rng(21), Budget(8))
        assert result.best_mq == reference.fitness[reference.best_index]

    def test_two_module_reaches_optimum(self, two_module):
        config = SearchConfig(pop_size=10, max_evals=300, seed=2, algorithm="tlbo")
        result = run_tlbo(two_module, config)
        assert result.best_mq == 1.0
        assert result.best_labels == (1, 1)

    def test_trace_alternates_and_budget_is_exact(self, chain3):
        config = SearchConfig(pop_size=5, max_evals=100, seed=9, algorithm="tlbo")
        result = run_tlbo(chain3, config)
        assert result.evals_used == 100
        assert len(result.phase_trace) == 95
        assert result.phase_trace[::2] == ["teacher"] * 48
        assert result.phase_trace[1::2] == ["learner"] * 47
        # 95 post-init evaluations over sweeps of 2 * pop = 10: nine complete
        assert result.iterations == 9

    def test_determinism(self, chain3):
        config = SearchConfig(pop_size=6, max_evals=120, seed=33, algorithm="tlbo")
        first = run_tlbo(chain3, config)
        second = run_tlbo(chain3, config)
        assert first.best_labels == second.best_labels
        assert first.best_mq == second.best_mq
        assert first.evals_used == second.evals_used
        assert first.iterations == second.iterations
        assert first.phase_trace == second.phase_trace

    def test_reported_mq_is_recomputable(self, chain3):
        config = SearchConfig(pop_size=6, max_evals=90, seed=4, algorithm="tlbo")
        result = run_tlbo(chain3, config)
        assert math.isclose(result.best_mq, mq(chain3, result.best_labels), abs_tol=1e-12)

    def test_algorithm_mismatch_rejected(self, chain3):
        with pytest.raises(ValueError, match="expected 'tlbo'"):
            run_tlbo(chain3, SearchConfig(algorithm="atlbo"))


class TestRunAtlbo:
    def test_sweep_costs_pop_size_evaluations(self, chain3):
        config = SearchConfig(pop_size=10, max_evals=200, seed=6, algorithm="atlbo")
        result = run_atlbo(chain3, config)
        assert result.evals_used == 200
        assert len(result.phase_trace) == 190
        assert result.iterations == 19
        assert set(result.phase_trace) <= {"teacher", "learner"}

    def test_two_module_reaches_optimum(self, two_module):
        config = SearchConfig(pop_size=10, max_evals=300, seed=2, algorithm="atlbo")
        result = run_atlbo(two_module, config)
        assert result.best_mq == 1.0

    def test_constant_controller_isolation(self, chain3):
        config = SearchConfig(pop_size=5, max_evals=60, seed=12, algorithm="atlbo")
        all_local = run_atlbo(chain3, config, fis=ConstantFis(100.0))
        assert set(all_local.phase_trace) == {"learner"}
        all_global = run_atlbo(chain3, config, fis=ConstantFis(0.0))
        assert set(all_global.phase_trace) == {"teacher"}
        undefined = run_atlbo(chain3, config, fis=ConstantFis(None))
        assert set(undefined.phase_trace) == {"teacher"}

    def test_threshold_boundary_picks_learner(self, chain3):
        config = SearchConfig(pop_size=5, max_evals=30, seed=12, algorithm="atlbo")
        result = run_atlbo(chain3, config, fis=ConstantFis(50.0))
        assert set(result.phase_trace) == {"learner"}

    def test_determinism_including_measures(self, chain3):
        config = SearchConfig(pop_size=6, max_evals=120, seed=8, algorithm="atlbo", collect_measures=True)
        first = run_atlbo(chain3, config)
        second = run_atlbo(chain3, config)
        assert first.phase_trace == second.phase_trace
        assert first.measure_trace == second.measure_trace
        assert first.best_labels == second.best_labels

    def test_measures_stay_in_bounds(self, chain3):
        config = SearchConfig(pop_size=6, max_evals=120, seed=8, algorithm="atlbo", collect_measures=True)
        result = run_atlbo(chain3, config)
        assert result.measure_trace
        for sample in result.measure_trace:
            assert 0.0 <= sample.quality <= 100.0
            assert 0.0 <= sample.intensification <= 100.0
            assert 0.0 <= sample.diversification <= 100.0

    def test_algorithm_mismatch_rejected(self, chain3):
        with pytest.raises(ValueError, match="expected 'atlbo'"):
            run_atlbo(chain3, SearchConfig(algorithm="tlbo"))


class TestRunDispatch:
    def test_never_exceeds_oracle_on_small_graphs(self):
        rng = np.random.Generator(np.random.PCG64(77))
        for _ in range(4):
            graph = random_graph(rng, int(rng.integers(3, 8)))
            _, optimum = brute_force_optimum(graph)
            for algorithm in ("tlbo", "atlbo"):
                config = SearchConfig(pop_size=10, max_evals=400, seed=13, algorithm=algorithm)
                result = run(graph, config)
                assert result.best_mq <= optimum + 1e-12
                assert math.isclose(result.best_mq, mq(graph, result.best_labels), abs_tol=1e-12)
