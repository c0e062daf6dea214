"""Distance-induced total, classical-quantum and quantum correlations.

For a distance ``d`` and a state ``rho`` on ``A (x) B``::

    T_d(rho)   = d(rho || rho_A (x) rho_B)
    J^M_d(rho) = sum_j p'_j d(rho_{B|j} || rho_B)      (measurement M on A)
    J_d(rho)   = max over rank-one von Neumann measurements of J^M_d
    Q_d(rho)   = T_d(rho) - J_d(rho)

With the relative entropy these are the mutual information, the
Henderson-Vedral classical correlation and the quantum discord.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._linalg import eigvalsh
from .distances import DistanceMeasure, get_distance
from .measurements import (
    ZERO_PROB,
    VonNeumannMeasurement,
    givens_unitary,
    projectors_from_unitary,
    qubit_conditionals,
    unnormalized_conditionals,
)
from .optimize import OptimizerConfig, OptimizerDiagnostics, maximize_over_measurements
from .state_space import (
    DensityMatrix,
    entropy_of_eigenvalues,
    partial_trace_array,
    von_neumann_entropy,
)

QUANTUM_SLACK = 1e-6


class NumericalFault(ArithmeticError):
    """A weighted term became infinite where it cannot for valid input."""


def marginals(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    return (partial_trace_array(rho.matrix, rho.dims, [0]),
            partial_trace_array(rho.matrix, rho.dims, [1]))


def mutual_information(rho: DensityMatrix) -> float:
    """``S(rho_A) + S(rho_B) - S(rho)`` in bits."""
    rho_a, rho_b = marginals(rho)
    value = von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(rho)
    return max(value, 0.0)


def total_correlations(d, rho: DensityMatrix) -> float:
    d = get_distance(d)
    rho_a, rho_b = marginals(rho)
    return d(rho.matrix, np.kron(rho_a, rho_b))


def _conditionals(rho: DensityMatrix, projectors: np.ndarray, rho_b: np.ndarray):
    """Probabilities, normalized conditionals and zero-outcome mask.

    Zero-probability outcomes get ``rho_b`` as a placeholder state so every
    distance stays finite; their weight is 0 anyway.
    """
    return _normalize(unnormalized_conditionals(rho.matrix, rho.dims, projectors), rho_b)


def _normalize(x: np.ndarray, rho_b: np.ndarray):
    p = np.trace(x, axis1=-2, axis2=-1).real
    null = p <= ZERO_PROB
    if null.any():
        states = np.where(null[..., None, None], rho_b,
                          x / np.where(null, 1.0, p)[..., None, None])
        return np.where(null, 0.0, p), states, null
    return p, x / p[..., None, None], null


def _weighted(p: np.ndarray, values: np.ndarray) -> np.ndarray:
    bad = np.isinf(values)
    if bad.any():
        if np.any(bad & (p > 0)):
            raise NumericalFault("infinite distance for an outcome with nonzero probability")
        values = np.where(bad, 0.0, values)
    return (p * values).sum(axis=-1)


def _chart_conditionals(rho: DensityMatrix, rho_b: np.ndarray):
    """``params -> (p, states, null)`` over the Givens chart, batched."""
    if rho.dim_a == 2:
        cond = qubit_conditionals(rho.matrix, rho.dims)
        return lambda params: _normalize(cond(params), rho_b)

    def f(params):
        proj = projectors_from_unitary(givens_unitary(rho.dim_a, params))
        return _conditionals(rho, proj, rho_b)

    return f


def cq_objective(d, rho: DensityMatrix):
    """Batched ``params -> J^M_d(rho)`` for the Givens measurement chart."""
    d = get_distance(d)
    _, rho_b = marginals(rho)
    ref = d.against(rho_b)
    conditionals = _chart_conditionals(rho, rho_b)

    def f(params):
        p, states, _ = conditionals(params)
        return _weighted(p, ref(states))

    return f


def cq_correlations_fixed(d, rho: DensityMatrix, m: VonNeumannMeasurement) -> float:
    """``J^M_d``: conditional states enter as the first distance argument."""
    if m.dim_a != rho.dim_a:
        raise ValueError(f"measurement acts on dimension {m.dim_a}, state has dim_a={rho.dim_a}")
    d = get_distance(d)
    _, rho_b = marginals(rho)
    p, states, _ = _conditionals(rho, m.projectors, rho_b)
    return float(_weighted(p, d.against(rho_b)(states)))


@dataclass
class CQResult:
    value: float
    best_params: np.ndarray
    diagnostics: OptimizerDiagnostics

    def __iter__(self):
        return iter((self.value, self.best_params, self.diagnostics))


def cq_correlations(d, rho: DensityMatrix, cfg: OptimizerConfig | None = None) -> CQResult:
    """``J_d``: maximum of ``J^M_d`` over rank-one measurements on A."""
    cfg = cfg or OptimizerConfig()
    value, params, diag = maximize_over_measurements(cq_objective(d, rho), rho.dim_a, cfg)
    return CQResult(max(value, 0.0), params, diag)


@dataclass
class CorrelationReport:
    state_id: str
    distance: str
    units: str
    total: float
    classical: float
    quantum: float
    best_params: np.ndarray
    optimizer: OptimizerDiagnostics
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "state_id": self.state_id,
            "distance": self.distance,
            "units": self.units,
            "total": self.total,
            "classical": self.classical,
            "quantum": self.quantum,
            "best_params": [float(t) for t in self.best_params],
            "optimizer": self.optimizer.as_dict(),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def quantum_correlations(d, rho: DensityMatrix, cfg: OptimizerConfig | None = None,
                         state_id: str = "") -> CorrelationReport:
    """Full report; ``quantum`` is ``total - classical`` with no clamping."""
    d = get_distance(d)
    total = total_correlations(d, rho)
    cq = cq_correlations(d, rho, cfg)
    quantum = total - cq.value
    warnings = []
    if quantum < -QUANTUM_SLACK:
        warnings.append(f"quantum component {quantum:.3e} is below -{QUANTUM_SLACK:g}")
    return CorrelationReport(state_id, d.name, d.units, total, cq.value, quantum,
                             cq.best_params, cq.diagnostics, warnings)


def _entropic_objective(rho: DensityMatrix):
    _, rho_b = marginals(rho)
    s_b = von_neumann_entropy(rho_b)
    conditionals = _chart_conditionals(rho, rho_b)

    def f(params):
        p, states, _ = conditionals(params)
        cond = entropy_of_eigenvalues(eigvalsh(states))
        return s_b - (p * cond).sum(axis=-1)

    return f


def classical_correlations_entropic(rho: DensityMatrix, cfg: OptimizerConfig | None = None) -> float:
    """``S(rho_B) - min_M sum_j p'_j S(rho_{B|j})`` in bits."""
    cfg = cfg or OptimizerConfig()
    value, _, _ = maximize_over_measurements(_entropic_objective(rho), rho.dim_a, cfg)
    return max(value, 0.0)


def discord(rho: DensityMatrix, cfg: OptimizerConfig | None = None) -> float:
    """Quantum discord with the measurement on A, in bits."""
    return mutual_information(rho) - classical_correlations_entropic(rho, cfg)


__all__ = [
    "CQResult", "CorrelationReport", "DistanceMeasure", "NumericalFault", "OptimizerConfig",
    "classical_correlations_entropic", "cq_correlations", "cq_correlations_fixed",
    "cq_objective", "discord", "marginals", "mutual_information", "quantum_correlations",
    "total_correlations",
]
