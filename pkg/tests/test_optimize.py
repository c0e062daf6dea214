import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import minimize, rosen

from distcorr.optimize import (
    OptimizerConfig,
    maximize_over_measurements,
    nelder_mead_batch,
    qubit_grid,
    start_points,
)


def rosen_batch(x):
    return np.array([rosen(row) for row in x])


class TestNelderMead:
    def test_matches_scipy_path(self):
        x0 = np.array([-1.2, 1.0])
        ours = nelder_mead_batch(rosen_batch, x0[None], step=0.05, xatol=1e-10, fatol=1e-12)
        # scipy with the same initial simplex
        sim = np.array([x0, x0 + [0.05, 0], x0 + [0, 0.05]])
        ref = minimize(rosen, x0, method="Nelder-Mead",
                       options={"initial_simplex": sim, "xatol": 1e-10, "fatol": 1e-12,
                                "maxfev": 10000})
        assert_allclose(ours.x[0], ref.x, atol=1e-9)
        assert ours.evals[0] == ref.nfev

    def test_batch_does_not_change_paths(self, rng):
        starts = rng.uniform(-2, 2, (5, 2))
        together = nelder_mead_batch(rosen_batch, starts)
        for i, s in enumerate(starts):
            alone = nelder_mead_batch(rosen_batch, s[None])
            assert_allclose(alone.x[0], together.x[i], rtol=0, atol=0)
            assert alone.evals[0] == together.evals[i]

    def test_quadratic_minimum(self):
        res = nelder_mead_batch(lambda x: ((x - [1.0, -2.0, 0.5]) ** 2).sum(axis=1), np.zeros((1, 3)))
        assert res.converged[0]
        assert_allclose(res.x[0], [1.0, -2.0, 0.5], atol=1e-7)

    def test_eval_budget(self):
        res = nelder_mead_batch(rosen_batch, np.array([[-1.2, 1.0]]), max_evals=30)
        assert not res.converged[0]
        assert res.evals[0] <= 30 + 2


class TestStarts:
    def test_grid_covers_hemisphere(self):
        g = qubit_grid(3.0)
        assert g.shape == (31 * 120, 2)
        assert g[:, 0].max() == pytest.approx(np.pi / 2)

    def test_fixed_starts_first(self):
        pts = start_points(2, OptimizerConfig(restarts=3))
        assert len(pts) == 5
        assert_allclose(pts[0], 0)

    def test_prefix_stable(self):
        short = start_points(3, OptimizerConfig(restarts=3))
        long = start_points(3, OptimizerConfig(restarts=8))
        for a, b in zip(short, long):
            assert_allclose(a, b, rtol=0, atol=0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(restarts=0)


def _cos_objective(x):
    # maximum 2 at theta = pi/3 (mod 2 pi), any phi
    return 1 + np.cos(x[:, 0] - np.pi / 3)


class TestMaximize:
    def test_finds_maximum(self):
        value, params, diag = maximize_over_measurements(_cos_objective, 2, OptimizerConfig())
        assert_allclose(value, 2.0, atol=1e-12)
        assert diag.converged
        assert diag.restarts_used == 23

    def test_deterministic(self):
        a = maximize_over_measurements(_cos_objective, 3, OptimizerConfig(seed=4))
        b = maximize_over_measurements(_cos_objective, 3, OptimizerConfig(seed=4))
        assert a[0] == b[0]
        assert_allclose(a[1], b[1], rtol=0, atol=0)

    def test_history_monotone(self):
        _, _, diag = maximize_over_measurements(_cos_objective, 3, OptimizerConfig(restarts=6))
        h = np.array(diag.best_value_history)
        assert np.all(np.diff(h) >= 0)

    def test_more_restarts_never_worse(self):
        f = lambda x: np.sin(3 * x).sum(axis=1) + 0.1 * np.cos(x).sum(axis=1)  # noqa: E731
        values = [maximize_over_measurements(f, 3, OptimizerConfig(restarts=r, seed=2))[0]
                  for r in (1, 4, 12)]
        assert values[0] <= values[1] <= values[2]

    def test_dim_one(self):
        value, params, diag = maximize_over_measurements(lambda x: np.full(len(x), 0.25), 1,
                                                         OptimizerConfig())
        assert value == 0.25 and params.size == 0
