"""Numerical audits of distance properties and correlation-measure conditions.

Each check draws seeded random fixtures, evaluates an inequality or
identity, and records how many samples violate it and by how much. A check
is *asserted* when the property is expected to hold for the distance; other
checks are run and reported without affecting the suite verdict.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .correlations import (
    cq_correlations,
    cq_correlations_fixed,
    marginals,
    quantum_correlations,
    total_correlations,
)
from .distances import DISTANCES, DistanceMeasure, Prop, get_distance
from .measurements import apply_channel, random_channel, random_measurement
from .optimize import OptimizerConfig
from .state_space import (
    DensityMatrix,
    partial_trace_array,
    projector,
    random_classical_quantum,
    random_density,
    random_density_array,
    random_product,
    random_separable,
    random_unitary,
)

EXACT_TOL = 1e-9
OPTIMIZER_TOL = 2e-6
PRODUCT_OPT_TOL = 1e-6
QUANTUM_SLACK = 1e-6
PROP6_MONOTONE_TOL = 5e-6


@dataclass
class CheckResult:
    name: str
    samples: int
    violations: int
    worst_residual: float
    tolerance: float
    asserted: bool = True
    fixture: str = ""
    residuals: list = field(default_factory=list, repr=False)

    @property
    def verdict(self) -> str:
        if self.violations == 0:
            return "pass"
        return "fail" if self.asserted else "reported"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "violations": self.violations,
            "worst_residual": self.worst_residual,
            "tolerance": self.tolerance,
            "asserted": self.asserted,
            "verdict": self.verdict,
            "fixture": self.fixture,
            "residuals": [float(r) for r in self.residuals],
        }


@dataclass
class VerificationSuiteResult:
    suite: str
    distance: str
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.verdict != "fail" for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "distance": self.distance,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def _rngs(seed: int, name: str, n: int) -> list[np.random.Generator]:
    """Per-check, per-sample generators; stable across check order."""
    ss = np.random.SeedSequence([seed, zlib.crc32(name.encode())])
    return [np.random.default_rng(s) for s in ss.spawn(n)]


def _run(name: str, samples: int, seed: int, tolerance: float,
         residual: Callable[[np.random.Generator], float | Iterable[float]],
         asserted: bool = True, fixture: str = "") -> CheckResult:
    """Evaluate ``residual`` on every sample; positive residual above tol is a violation."""
    values = []
    for rng in _rngs(seed, name, samples):
        r = residual(rng)
        values.extend(np.atleast_1d(np.asarray(r, dtype=float)).tolist())
    arr = np.asarray(values)
    violations = int(np.sum(arr > tolerance))
    worst = float(arr.max()) if arr.size else 0.0
    return CheckResult(name, len(values), violations, worst, tolerance, asserted, fixture, values)


def _rotate(m: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ m @ u.conj().T


# --- distance axioms ---------------------------------------------------------

def verify_distance_axioms(d, samples: int = 100, seed: int = 0,
                           dims: tuple[int, int] = (2, 2)) -> VerificationSuiteResult:
    """Check every property the distance claims on random fixtures."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = get_distance(d)
    d_a, d_b = dims
    n = d_a * d_b
    rand = lambda rng: random_density_array(n, seed=rng)  # noqa: E731
    out = VerificationSuiteResult("distances", d.name, seed)
    claims = d.claims

    if Prop.NON_NEGATIVE in claims:
        out.checks.append(_run(
            "a_non_negativity", samples, seed, 0.0,
            lambda rng: -d(rand(rng), rand(rng)), fixture="Ginibre pairs"))
    if Prop.INDISCERNIBLES in claims:
        def indisc(rng):
            rho, sigma = rand(rng), rand(rng)
            same = d(rho, rho)
            # distinct states must be separated: residual > 0 if d collapses
            apart = 1e-10 - d(rho, sigma) if np.max(np.abs(rho - sigma)) > 1e-6 else -1.0
            return [same, apart + EXACT_TOL]
        out.checks.append(_run("b_identity_of_indiscernibles", samples, seed, EXACT_TOL, indisc,
                               fixture="Ginibre pairs; d(rho,rho) and d(rho,sigma)"))
    if Prop.SYMMETRY in claims:
        def sym(rng):
            rho, sigma = rand(rng), rand(rng)
            return abs(d(rho, sigma) - d(sigma, rho))
        out.checks.append(_run("c_symmetry", samples, seed, EXACT_TOL, sym, fixture="Ginibre pairs"))
    if Prop.TRIANGLE in claims:
        def tri(rng):
            x, y, z = rand(rng), rand(rng), rand(rng)
            return d(x, y) - d(x, z) - d(z, y)
        out.checks.append(_run("d_triangle", samples, seed, EXACT_TOL, tri, fixture="Ginibre triples"))
    if Prop.UNITARY_INVARIANCE in claims:
        def unit(rng):
            rho, sigma = rand(rng), rand(rng)
            u = random_unitary(n, rng)
            return abs(d(_rotate(rho, u), _rotate(sigma, u)) - d(rho, sigma))
        out.checks.append(_run("e_unitary_invariance", samples, seed, EXACT_TOL, unit,
                               fixture="Ginibre pairs, Haar unitary"))
    if Prop.CPTP_MONOTONE in claims:
        def mono(rng):
            rho, sigma = rand(rng), rand(rng)
            ch = random_channel(n, int(rng.integers(1, 5)), rng)
            r, s = (apply_channel(DensityMatrix(m, n, 1), ch).matrix for m in (rho, sigma))
            return d(r, s) - d(rho, sigma)
        out.checks.append(_run("f_cptp_monotonicity", samples, seed, EXACT_TOL, mono,
                               fixture="Ginibre pairs, random Stinespring channel"))
    if Prop.CONVEX_FIRST in claims:
        def convex(rng):
            rhos = [rand(rng) for _ in range(3)]
            sigma = rand(rng)
            p = rng.dirichlet(np.ones(3))
            vals = np.array([d(r, sigma) for r in rhos])
            if np.any(np.isinf(vals)):
                return -1.0
            mix = sum(pi * r for pi, r in zip(p, rhos))
            return d(mix, sigma) - float(p @ vals)
        out.checks.append(_run("g_convexity_first_argument", samples, seed, EXACT_TOL, convex,
                               fixture="three Ginibre states, Dirichlet weights"))
    if Prop.CQ_DECOMPOSITION in claims:
        def cq(rng):
            rho1, rho2, p, states, bar = block_diagonal_pair(dims, rng)
            lhs = d(rho1, rho2)
            rhs = sum(pi * d(s, bar) for pi, s in zip(p, states))
            return abs(lhs - rhs)
        out.checks.append(_run("h_cq_decomposition", samples, seed, EXACT_TOL, cq,
                               fixture="block-diagonal pairs in a Haar register basis"))
    if Prop.RESTRICTED_ADDITIVITY in claims:
        def additive(rng):
            r1, r2 = random_density_array(d_a, seed=rng), random_density_array(d_a, seed=rng)
            s = random_density_array(d_b, seed=rng)
            return abs(d(np.kron(r1, s), np.kron(r2, s)) - d(r1, r2))
        out.checks.append(_run("restricted_additivity", samples, seed, EXACT_TOL, additive,
                               fixture="Ginibre rho1, rho2 on A; sigma on B"))
    return out


def block_diagonal_pair(dims: tuple[int, int], rng):
    """``rho1 = sum p_i |i><i| x rho_i`` and ``rho2 = sum p_i |i><i| x rho_bar``.

    Returns ``(rho1, rho2, p, states, rho_bar)`` as arrays.
    """
    d_a, d_b = dims
    p = rng.dirichlet(np.ones(d_a))
    basis = random_unitary(d_a, rng)
    states = [random_density_array(d_b, seed=rng) for _ in range(d_a)]
    bar = sum(pi * s for pi, s in zip(p, states))
    regs = [projector(basis[:, i]) for i in range(d_a)]
    rho1 = sum(pi * np.kron(e, s) for pi, e, s in zip(p, regs, states))
    rho2 = sum(pi * np.kron(e, bar) for pi, e in zip(p, regs))
    return rho1, rho2, p, states, bar


# --- measure conditions -------------------------------------------------------

def verify_measure_conditions(d, samples: int = 50, seed: int = 0,
                              dims: tuple[int, int] = (2, 2),
                              cfg: OptimizerConfig | None = None) -> VerificationSuiteResult:
    """Conditions 1-5 for ``T_d``, ``J_d`` and ``Q_d`` plus the sandwich bound."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = get_distance(d)
    cfg = cfg or OptimizerConfig(seed=seed)
    out = VerificationSuiteResult("measures", d.name, seed)

    # condition 1: product states
    prod = [quantum_correlations(d, random_product(dims, rng), cfg)
            for rng in _rngs(seed, "product", samples)]
    fx = "random product states"
    out.checks.append(_from_values("1_product_total", [r.total for r in prod], EXACT_TOL, fx))
    out.checks.append(_from_values("1_product_classical", [r.classical for r in prod],
                                   PRODUCT_OPT_TOL, fx))
    out.checks.append(_from_values("1_product_quantum", [abs(r.quantum) for r in prod],
                                   PRODUCT_OPT_TOL, fx))

    # condition 2: local unitaries on generic states
    generic, rotated = [], []
    for rng in _rngs(seed, "generic", samples):
        rho = random_density(dims, seed=rng)
        u = np.kron(random_unitary(dims[0], rng), random_unitary(dims[1], rng))
        generic.append(quantum_correlations(d, rho, cfg))
        rotated.append(quantum_correlations(d, DensityMatrix(_rotate(rho.matrix, u), *dims), cfg))
    fx = "Ginibre states, Haar U_A x U_B"
    for comp, tol in (("total", EXACT_TOL), ("classical", OPTIMIZER_TOL), ("quantum", OPTIMIZER_TOL)):
        diffs = [abs(getattr(a, comp) - getattr(b, comp)) for a, b in zip(generic, rotated)]
        out.checks.append(_from_values(f"2_local_unitary_{comp}", diffs, tol, fx))

    # condition 3: non-negativity on generic and separable states
    sep = [quantum_correlations(d, random_separable(dims, 3, rng), cfg)
           for rng in _rngs(seed, "separable", samples)]
    reports = generic + rotated + sep
    fx = "Ginibre and separable states"
    out.checks.append(_from_values("3_nonneg_total", [-r.total for r in reports], 0.0, fx))
    out.checks.append(_from_values("3_nonneg_classical", [-r.classical for r in reports], 0.0, fx))
    out.checks.append(_from_values("3_nonneg_quantum", [-r.quantum for r in reports],
                                   QUANTUM_SLACK, fx))

    # condition 4: total correlations under local channels
    def local_channel(rng):
        rho = random_density(dims, seed=rng)
        t0 = total_correlations(d, rho)
        res = []
        for side, dim in (("A", dims[0]), ("B", dims[1])):
            ch = random_channel(dim, int(rng.integers(1, 4)), rng, target=side)
            res.append(total_correlations(d, apply_channel(rho, ch)) - t0)
        return res
    out.checks.append(_run("4_total_local_channel", samples, seed, EXACT_TOL, local_channel,
                           fixture="Ginibre states, random channel on A and on B"))

    # condition 5: classical-quantum states
    q_vals, eq_vals = [], []
    for rng in _rngs(seed, "classical_quantum", samples):
        rho, p, _, states = random_classical_quantum(dims, rng)
        rep = quantum_correlations(d, rho, cfg)
        _, rho_b = marginals(rho)
        expected = sum(pi * d(s, rho_b) for pi, s in zip(p, states))
        q_vals.append(rep.quantum)
        eq_vals.append(abs(rep.classical - expected))
    fx = "random classical-quantum states, Haar register"
    out.checks.append(_from_values("5_cq_quantum", q_vals, QUANTUM_SLACK, fx))
    out.checks.append(_from_values("5_cq_classical_equality", eq_vals, QUANTUM_SLACK, fx))

    # T_d >= J^M_d for arbitrary measurements
    def sandwich(rng):
        rho = random_density(dims, seed=rng)
        m = random_measurement(dims[0], rng)
        return cq_correlations_fixed(d, rho, m) - total_correlations(d, rho)
    out.checks.append(_run("5_sandwich_total_vs_fixed_measurement", samples, seed, EXACT_TOL,
                           sandwich, fixture="Ginibre states, Haar measurement bases"))
    return out


def _from_values(name: str, values, tol: float, fixture: str, asserted: bool = True) -> CheckResult:
    arr = np.asarray(values, dtype=float)
    return CheckResult(name, arr.size, int(np.sum(arr > tol)), float(arr.max()), tol,
                       asserted, fixture, arr.tolist())


# --- tripartite preconditions for B-side monotonicity ----------------------

def swap_last_two(m: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    """Exchange the second and third tensor factors of an ``A B E`` operator."""
    a, b, e = dims
    t = m.reshape(a, b, e, a, b, e).transpose(0, 2, 1, 3, 5, 4)
    return t.reshape(a * e * b, a * e * b)


def exchange_quantity(d: DistanceMeasure, sigma: np.ndarray, dims: tuple[int, int, int]) -> float:
    """``d(s_ABE || s_AE x s_B) - d(s_AB || s_A x s_B)``."""
    a, b, e = dims
    s_ae = partial_trace_array(sigma, dims, [0, 2])
    s_ab = partial_trace_array(sigma, dims, [0, 1])
    s_a = partial_trace_array(sigma, dims, [0])
    s_b = partial_trace_array(sigma, dims, [1])
    # s_AE x s_B is ordered A E B; bring it to A B E
    ae_b = swap_last_two(np.kron(s_ae, s_b), (a, e, b))
    return d(sigma, ae_b) - d(s_ab, np.kron(s_a, s_b))


def verify_prop_vi_preconditions(d, samples: int = 25, seed: int = 0,
                                 dims: tuple[int, int, int] = (2, 2, 2),
                                 cfg: OptimizerConfig | None = None) -> VerificationSuiteResult:
    """Restricted additivity, B/E exchange invariance and B-side monotonicity of ``Q_d``.

    Exchange invariance and monotonicity are asserted for the relative
    entropy only; for the other distances the residuals are recorded.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = get_distance(d)
    cfg = cfg or OptimizerConfig(seed=seed)
    d_a, d_b, d_e = dims
    entropic = d.name == "relative_entropy"
    out = VerificationSuiteResult("prop6", d.name, seed)

    def additive(rng):
        r1 = random_density_array(d_a * d_b, seed=rng)
        r2 = random_density_array(d_a * d_b, seed=rng)
        s = random_density_array(d_e, seed=rng)
        return abs(d(np.kron(r1, s), np.kron(r2, s)) - d(r1, r2))
    out.checks.append(_run("i_restricted_additivity", samples, seed, EXACT_TOL, additive,
                           fixture="Ginibre rho1, rho2 on AB; sigma on E"))

    def exchange(rng):
        sigma = random_density_array(d_a * d_b * d_e, seed=rng)
        swapped = swap_last_two(sigma, dims)
        return abs(exchange_quantity(d, sigma, dims)
                   - exchange_quantity(d, swapped, (d_a, d_e, d_b)))
    out.checks.append(_run("ii_exchange_invariance", samples, seed, EXACT_TOL, exchange,
                           asserted=entropic, fixture="Ginibre states on ABE"))

    def monotone(rng):
        rho = random_density((d_a, d_b), seed=rng)
        ch = random_channel(d_b, int(rng.integers(1, 4)), rng, target="B")
        q0 = quantum_correlations(d, rho, cfg).quantum
        q1 = quantum_correlations(d, apply_channel(rho, ch), cfg).quantum
        return q1 - q0
    out.checks.append(_run("iii_quantum_monotone_under_B_channels", samples, seed,
                           PROP6_MONOTONE_TOL, monotone, asserted=entropic,
                           fixture="Ginibre states on AB, random channel on B"))
    return out


SUITES = {
    "distances": verify_distance_axioms,
    "measures": verify_measure_conditions,
    "prop6": verify_prop_vi_preconditions,
}

DEFAULT_SAMPLES = {"distances": 100, "measures": 50, "prop6": 25}


def run_suite(suite: str, samples: int | None = None, seed: int = 0,
              distances: Iterable[str] | None = None, dims=None,
              restarts: int | None = None) -> list[VerificationSuiteResult]:
    """Run one suite for each requested distance (all five by default)."""
    fn = SUITES[suite]
    samples = DEFAULT_SAMPLES[suite] if samples is None else samples
    names = list(distances) if distances else list(DISTANCES)
    kwargs = {}
    if dims is not None:
        kwargs["dims"] = tuple(dims)
    if suite != "distances":
        kwargs["cfg"] = OptimizerConfig(seed=seed, **({"restarts": restarts} if restarts else {}))
    return [fn(get_distance(n), samples, seed, **kwargs) for n in names]
