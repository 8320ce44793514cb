import numpy as np
import pytest

from conftest import SUBMODEL_ROWS
from electre_tree import (DecisionMatrix, ElicitationSpec, GaConfig, ReferenceLabels,
                          TriBParameters, ValidationError, clip_chromosome, ga_optimize,
                          validate_parameters)
from electre_tree.evolve import (initial_population, mutation_step, rjgga_mutate, sbx_beta,
                                 sbx_crossover)


def wide_spec(m=1, k=4, lo=0.0, hi=30.0):
    X = np.array([[lo] * m, [hi] * m])
    return ElicitationSpec.from_matrix(X, k, q=("free", 0, hi), p=("free", 0, hi),
                                       v=("free", 0, hi))


class TestSbx:
    def test_identical_parents(self):
        p = np.array([1.0, 2.0, 3.0])
        c1, c2 = sbx_crossover(p, p, 2.0, np.random.default_rng(0))
        assert np.array_equal(c1, p) and np.array_equal(c2, p)

    def test_xi_half_swaps(self):
        p1, p2 = np.array([1.0, 5.0]), np.array([3.0, -2.0])
        assert sbx_beta(0.5, 2.0) == 1.0
        c1, c2 = sbx_crossover(p1, p2, 2.0, None, xi=np.array([0.5, 0.5]))
        assert np.array_equal(c1, p2) and np.array_equal(c2, p1)

    def test_mean_preserved(self):
        rng = np.random.default_rng(2)
        p1, p2 = rng.normal(size=50), rng.normal(size=50)
        c1, c2 = sbx_crossover(p1, p2, 2.0, rng)
        assert np.allclose(c1 + c2, p1 + p2, rtol=1e-12, atol=1e-12)

    def test_infinite_genes_pass(self):
        p = np.array([np.inf, 1.0])
        c1, c2 = sbx_crossover(p, np.array([np.inf, 2.0]), 2.0, np.random.default_rng(0))
        assert c1[0] == np.inf and c2[0] == np.inf

    def test_beta_branches(self):
        assert sbx_beta(0.25, 1.0) == pytest.approx(np.sqrt(0.5))
        assert sbx_beta(0.75, 1.0) == pytest.approx(np.sqrt(2.0))


class TestMutation:
    def test_rate_zero(self):
        g = np.arange(5.0)
        assert np.array_equal(rjgga_mutate(g, 0.0, 1.0, np.ones(5), np.random.default_rng(0)), g)

    def test_xi_half(self):
        assert mutation_step(0.5, 1.0) == 0.0

    def test_step_range(self):
        xi = np.linspace(1e-9, 1 - 1e-9, 1001)
        r = mutation_step(xi, 1.0)
        assert np.all((r > -1) & (r < 1))
        assert np.all(np.diff(r) >= 0)

    def test_fixed_genes_untouched(self):
        g = np.ones(4)
        out = rjgga_mutate(g, 1.0, 1.0, np.array([0, 1, 0, 1.0]), np.random.default_rng(1))
        assert out[0] == 1 and out[2] == 1 and out[1] != 1


class TestClip:
    def test_threshold_repair(self):
        spec = wide_spec(m=2, k=2)
        s = spec.slices
        g = clip_chromosome(spec.lower + spec.width / 2, spec)
        g[s["q"]] = [5, 0]
        g[s["p"]] = [4, 1]
        g[s["v"]] = [6, 2]
        out = clip_chromosome(g, spec)
        assert out[s["p"]].tolist() == [5, 1]
        assert out[s["q"]].tolist() == [5, 0]

    def test_profile_raise(self):
        spec = wide_spec(m=1, k=4)
        s = spec.slices
        g = clip_chromosome(spec.lower + spec.width / 2, spec)
        g[s["profiles"]] = [10, 8, 12]
        assert clip_chromosome(g, spec)[s["profiles"]].tolist() == [10, 10, 12]

    def test_feasible_identity(self):
        spec = wide_spec(m=2, k=3)
        g = TriBParameters([0.3, 0.6], [1, 2], [2, 3], [4, 5], [[5, 6], [7, 8]], 0.7).to_genes()
        assert np.array_equal(clip_chromosome(g, spec), g)

    def test_lambda_and_fixed(self):
        spec = ElicitationSpec.from_matrix(np.array([[0, 0], [10, 10.0]]), 2, q=0.5, v="none")
        s = spec.slices
        g = spec.lower.copy()
        g[s["lambda"]] = 3
        g[s["q"]] = 7
        g[s["v"]] = 1
        out = clip_chromosome(g, spec)
        assert out[s["lambda"]][0] == 1.0
        assert out[s["q"]].tolist() == [0.5, 0.5]
        assert np.isinf(out[s["v"]]).all()

    def test_population_shape(self):
        spec = wide_spec(m=2, k=3)
        pop = np.random.default_rng(0).normal(0, 50, (6, spec.lower.size))
        out = clip_chromosome(pop, spec)
        assert out.shape == pop.shape
        for row in out:
            assert validate_parameters(TriBParameters.from_genes(row, 2, 3), 2, 3).ok


class TestGa:
    def test_config_validation(self):
        with pytest.raises(ValidationError):
            GaConfig(population_size=1)
        with pytest.raises(ValidationError):
            GaConfig(elite_count=15)
        with pytest.raises(ValidationError):
            GaConfig(mutation_rate=1.5)

    def test_all_fixed(self, dataset1, merged_reference):
        m, lab = dataset1
        spec = ElicitationSpec.fixed_params(merged_reference)
        res = ga_optimize(m, lab, spec, GaConfig(seed=0))
        assert np.array_equal(res.params.to_genes(), merged_reference.to_genes())
        assert res.accuracy == 44 / 64
        assert res.generations_run == 0

    def test_sampled_toy_reaches_full_accuracy(self, dataset1):
        m, lab = dataset1
        sub, ref = m.take(SUBMODEL_ROWS), lab.take(SUBMODEL_ROWS)
        spec = ElicitationSpec.from_matrix(m, 4)
        accs = [ga_optimize(sub, ref, spec, GaConfig(seed=s)).accuracy for s in range(10)]
        assert max(accs) == 1.0

    def test_deterministic(self, dataset1):
        m, lab = dataset1
        spec = ElicitationSpec.from_matrix(m, 4)
        a = ga_optimize(m, lab, spec, GaConfig(seed=7, generations=5))
        b = ga_optimize(m, lab, spec, GaConfig(seed=7, generations=5))
        assert np.array_equal(a.params.to_genes(), b.params.to_genes())
        assert a.history == b.history

    def test_elitism_and_validity(self, dataset1):
        m, lab = dataset1
        spec = ElicitationSpec.from_matrix(m, 4)
        for s in range(5):
            res = ga_optimize(m, lab, spec, GaConfig(seed=s, generations=20))
            assert np.all(np.diff(res.history) >= 0)
            assert res.history[-1] == res.accuracy
            assert validate_parameters(res.params, 2, 4).ok

    def test_shape_mismatch(self, dataset1):
        m, lab = dataset1
        with pytest.raises(ValidationError):
            ga_optimize(m, lab, ElicitationSpec.from_matrix(m, 3), GaConfig(seed=0))

    def test_initial_population_within_bounds(self):
        spec = wide_spec(m=2, k=3)
        pop = initial_population(spec, 50, np.random.default_rng(0))
        lo, hi = spec.effective_bounds
        assert np.all(pop >= lo) and np.all(pop <= hi)

    def test_partial_labels(self):
        m = DecisionMatrix([[0, 0], [1, 1], [9, 9], [10, 10]])
        lab = ReferenceLabels([0, -1, -1, 1], 2, "assignment-examples")
        res = ga_optimize(m, lab, ElicitationSpec.from_matrix(m, 2), GaConfig(seed=0))
        assert res.accuracy == 1.0
