"""Multi-start Nelder-Mead over measurement parameters.

The local searches run in lockstep so that every iteration evaluates the
objective once on a stack of points. Each start still follows exactly the
path it would follow on its own, so results do not depend on how many other
starts share the batch.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measurements import fourier_basis, n_params, params_from_unitary
from .state_space import child_rngs, random_unitary


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    include_fixed_starts: bool = True
    simplex_tolerance: float = 1e-8
    value_tolerance: float = 1e-10
    max_evals_per_start: int = 2000
    seed: int = 0
    initial_step: float = 0.1
    grid_step_deg: float = 3.0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")


@dataclass
class OptimizerDiagnostics:
    restarts_used: int
    evaluations: int
    converged: bool
    best_value_history: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "restarts_used": self.restarts_used,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "best_value_history": [float(v) for v in self.best_value_history],
        }


@dataclass
class BatchResult:
    x: np.ndarray
    fun: np.ndarray
    evals: np.ndarray
    converged: np.ndarray


def nelder_mead_batch(f, x0, step=0.1, xatol=1e-8, fatol=1e-10, max_evals=2000) -> BatchResult:
    """Minimize ``f`` independently from every row of ``x0``.

    ``f`` maps an ``(N, n)`` array of points to ``N`` values. Standard
    coefficients (reflect 1, expand 2, contract 1/2, shrink 1/2) and the
    usual stopping rule: simplex diameter <= ``xatol`` and value spread
    <= ``fatol``.

    Every candidate point of an iteration (reflection, expansion, both
    contractions, shrunken vertices) is evaluated in one call to ``f``;
    only the points the classical algorithm would have evaluated are
    counted in ``evals``. Per-start paths are those of the serial method.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    s_count, n = x0.shape
    sim = x0[:, None, :] + np.vstack([np.zeros(n), step * np.eye(n)])[None]
    fs = f(sim.reshape(-1, n)).reshape(s_count, n + 1)
    evals = np.full(s_count, n + 1)
    converged = np.zeros(s_count, dtype=bool)
    rows = np.arange(s_count)[:, None]
    # candidate coefficients c in x = (1 + c) xbar - c worst
    coef = np.array([1.0, 2.0, 0.5, -0.5])

    while True:
        order = np.argsort(fs, axis=1, kind="stable")
        sim, fs = sim[rows, order], fs[rows, order]
        xspread = np.abs(sim[:, 1:] - sim[:, :1]).max(axis=(1, 2))
        fspread = np.abs(fs[:, 1:] - fs[:, :1]).max(axis=1)
        converged |= (xspread <= xatol) & (fspread <= fatol)
        active = np.flatnonzero(~converged & (evals < max_evals))
        if active.size == 0:
            break

        s, fv = sim[active], fs[active]
        k = active.size
        worst = s[:, -1]
        xbar = s[:, :-1].mean(axis=1)
        cand = (1 + coef)[None, :, None] * xbar[:, None] - coef[None, :, None] * worst[:, None]
        shrunk = s[:, :1] + 0.5 * (s[:, 1:] - s[:, :1])
        pts = np.concatenate([cand, shrunk], axis=1)
        vals = f(pts.reshape(-1, n)).reshape(k, -1)
        fr, fe, fo, fi = vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3]

        expand = fr < fv[:, 0]
        accept_r = ~expand & (fr < fv[:, -2])
        outside = ~expand & ~accept_r & (fr < fv[:, -1])
        inside = ~expand & ~accept_r & ~outside
        evals[active] += np.where(accept_r, 1, 2)

        # index into cand of the replacement vertex
        pick = np.where(accept_r | (expand & ~(fe < fr)), 0,
                        np.where(expand, 1, np.where(outside, 2, 3)))
        shrink = (outside & ~(fo <= fr)) | (inside & ~(fi < fv[:, -1]))
        idx = np.arange(k)
        s[:, -1] = cand[idx, pick]
        fv[:, -1] = vals[idx, pick]
        if shrink.any():
            s[shrink, 1:] = shrunk[shrink]
            fv[shrink, 1:] = vals[shrink, 4:]
            evals[active[shrink]] += n
        sim[active], fs[active] = s, fv

    best = np.argmin(fs, axis=1)
    r = np.arange(s_count)
    return BatchResult(sim[r, best], fs[r, best], evals, converged)


def qubit_grid(step_deg: float = 3.0) -> np.ndarray:
    """``(theta, phi)`` grid over the upper Bloch hemisphere.

    Antipodal Bloch vectors give the same measurement, so the upper
    hemisphere covers every qubit basis.
    """
    theta = np.deg2rad(np.arange(0.0, 90.0 + 1e-9, step_deg))
    phi = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    t, p = np.meshgrid(theta, phi, indexing="ij")
    return np.column_stack([t.ravel(), p.ravel()])


def start_points(dim_a: int, cfg: OptimizerConfig) -> list[np.ndarray]:
    """Fixed starts (computational, Fourier) followed by Haar-random ones."""
    starts = []
    if cfg.include_fixed_starts:
        starts.append(np.zeros(n_params(dim_a)))
        starts.append(params_from_unitary(fourier_basis(dim_a)))
    for rng in child_rngs(cfg.seed, cfg.restarts):
        starts.append(params_from_unitary(random_unitary(dim_a, rng)))
    return starts


def _lex_key(x: np.ndarray) -> tuple:
    return tuple(float(v) for v in x)


def maximize_over_measurements(objective, dim_a: int, cfg: OptimizerConfig):
    """Multi-start maximization of a batched objective ``params -> values``.

    Returns ``(best_value, best_params, diagnostics)``. The best start wins
    by value; exact ties go to the lexicographically smallest parameters.
    """
    n = n_params(dim_a)
    if n == 0:
        v = float(objective(np.zeros((1, 0)))[0])
        return v, np.zeros(0), OptimizerDiagnostics(0, 1, True, [v])

    starts = start_points(dim_a, cfg)
    evaluations = 0
    if dim_a == 2:
        grid = qubit_grid(cfg.grid_step_deg)
        gv = objective(grid)
        evaluations += len(grid)
        starts.insert(2 if cfg.include_fixed_starts else 0, grid[int(np.argmax(gv))])

    res = nelder_mead_batch(
        lambda x: -objective(x),
        np.array(starts),
        step=cfg.initial_step,
        xatol=cfg.simplex_tolerance,
        fatol=cfg.value_tolerance,
        max_evals=cfg.max_evals_per_start,
    )
    values = -res.fun
    evaluations += int(res.evals.sum())

    best = 0
    history = []
    for i in range(len(values)):
        if values[i] > values[best] or (
            values[i] == values[best] and _lex_key(res.x[i]) < _lex_key(res.x[best])
        ):
            best = i
        history.append(float(values[best]))
    diag = OptimizerDiagnostics(len(starts), evaluations, bool(res.converged[best]), history)
    return float(values[best]), res.x[best].copy(), diag
