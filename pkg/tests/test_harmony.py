import numpy as np
import pytest

from regionharvest.harmony import (ContinuousHarmony, HSParams, improvise, init_memory,
                                   optimize, replace_worst, rosenbrock, sphere)

BOUNDS5 = [(-10.0, 10.0)] * 5


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        {"hmcr": 1.2}, {"hmcr": -0.1}, {"par": 2.0}, {"hms": 0},
        {"ni": 0}, {"bw": 0.0}, {"bw": -1.0}, {"seed": -3},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            HSParams(**kwargs)

    def test_defaults_valid(self):
        params = HSParams()
        assert params.hms == 16 and params.ni == 25


class TestInitMemory:
    def test_collapsed_bounds_pin_variables(self):
        rng = np.random.default_rng(0)
        params = HSParams(hms=5)
        memory = init_memory([(0.0, 1e-9)] * 3, params, sphere, rng)
        for h in memory:
            assert (np.abs(h.variables) <= 1e-9).all()

    def test_deterministic_per_seed(self):
        a = init_memory(BOUNDS5, HSParams(hms=8), sphere, np.random.default_rng(4))
        b = init_memory(BOUNDS5, HSParams(hms=8), sphere, np.random.default_rng(4))
        for x, y in zip(a, b):
            assert np.array_equal(x.variables, y.variables) and x.fitness == y.fitness

    def test_memory_size(self):
        memory = init_memory(BOUNDS5, HSParams(hms=30), sphere, np.random.default_rng(1))
        assert len(memory) == 30

    def test_invalid_bounds_rejected(self):
        with pytest.raises(ValueError, match="lower < upper"):
            init_memory([(1.0, 1.0)], HSParams(), sphere, np.random.default_rng(0))

    def test_within_bounds_and_evaluated(self):
        memory = init_memory(BOUNDS5, HSParams(hms=20), sphere, np.random.default_rng(2))
        for h in memory:
            assert ((-10 <= h.variables) & (h.variables <= 10)).all()
            assert h.fitness == sphere(h.variables)


class TestImprovise:
    def test_pure_memory_copy(self):
        h = ContinuousHarmony(variables=np.array([1.0, -2.0, 3.0]), fitness=14.0)
        memory = [ContinuousHarmony(h.variables.copy(), h.fitness) for _ in range(4)]
        params = HSParams(hms=4, hmcr=1.0, par=0.0)
        out = improvise(memory, [(-10.0, 10.0)] * 3, params, np.random.default_rng(0))
        assert np.array_equal(out, h.variables)

    def test_pure_randomization_respects_bounds(self):
        memory = [ContinuousHarmony(np.full(4, 99.0), 0.0)]  # values outside bounds on purpose
        params = HSParams(hms=1, hmcr=0.0, par=0.0)
        rng = np.random.default_rng(3)
        for _ in range(50):
            out = improvise(memory, [(-1.0, 1.0)] * 4, params, rng)
            assert ((-1 <= out) & (out <= 1)).all()
            assert not np.isin(out, 99.0).any()

    def test_bounded_perturbation(self):
        base = np.array([0.0, 1.0, -1.0, 5.0])
        memory = [ContinuousHarmony(base.copy(), 0.0) for _ in range(3)]
        params = HSParams(hms=3, hmcr=1.0, par=1.0, bw=0.1)
        rng = np.random.default_rng(7)
        for _ in range(100):
            out = improvise(memory, [(-10.0, 10.0)] * 4, params, rng)
            assert (np.abs(out - base) <= 0.1 + 1e-12).all()


class TestReplaceWorst:
    def _memory(self):
        return [ContinuousHarmony(np.array([float(i)]), float(i)) for i in range(4)]

    def test_worse_candidate_keeps_memory(self):
        memory = self._memory()
        before = [h.fitness for h in memory]
        assert replace_worst(memory, ContinuousHarmony(np.array([9.0]), 9.0)) is False
        assert [h.fitness for h in memory] == before

    def test_better_candidate_replaces_worst(self):
        memory = self._memory()
        assert replace_worst(memory, ContinuousHarmony(np.array([0.5]), 0.5)) is True
        fits = sorted(h.fitness for h in memory)
        assert fits == [0.0, 0.5, 1.0, 2.0]

    def test_tie_keeps_incumbent(self):
        memory = self._memory()
        candidate = ContinuousHarmony(np.array([-1.0]), 3.0)
        assert replace_worst(memory, candidate) is False
        assert all(h is not candidate for h in memory)


class TestOptimize:
    def test_single_improvisation_best_of_init_plus_one(self):
        params = HSParams(hms=6, ni=1, seed=3, hmcr=0.9, par=0.3, bw=0.5)
        best, trajectory = optimize(sphere, BOUNDS5, params)
        assert len(trajectory) == 1
        assert trajectory[0] == best.fitness

    def test_trajectory_non_increasing(self):
        params = HSParams(hms=10, ni=500, seed=0, hmcr=0.9, par=0.3, bw=0.5)
        _, trajectory = optimize(sphere, BOUNDS5, params)
        assert all(a >= b for a, b in zip(trajectory, trajectory[1:]))

    def test_deterministic_per_seed(self):
        params = HSParams(hms=10, ni=200, seed=12, hmcr=0.9, par=0.3, bw=0.5)
        a_best, a_traj = optimize(sphere, BOUNDS5, params)
        b_best, b_traj = optimize(sphere, BOUNDS5, params)
        assert np.array_equal(a_best.variables, b_best.variables)
        assert a_traj == b_traj

    def test_short_sphere_run_improves(self):
        params = HSParams(hms=30, ni=5000, seed=0, hmcr=0.9, par=0.3, bw=0.5)
        best, trajectory = optimize(sphere, BOUNDS5, params)
        assert best.fitness < trajectory[0]
        assert best.fitness < 1.0

    def test_rosenbrock_runs(self):
        params = HSParams(hms=20, ni=2000, seed=1, hmcr=0.9, par=0.3, bw=0.5)
        best, _ = optimize(rosenbrock, [(-5.0, 5.0)] * 3, params)
        assert np.isfinite(best.fitness)
